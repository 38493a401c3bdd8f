#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "exhird/errors.hpp"
#include "exhird/text/porter_stemmer.hpp"
#include "exhird/text/tokenizer.hpp"
#include "exhird/text/vocabulary.hpp"

namespace exhird::text {

struct RawSample {
  std::string title;
  std::string abstract;
  std::vector<std::string> keyphrases;
};

/// A preprocessed source document together with its copy vocabulary.
///
/// Ids live in a merged space: [0, vocab_size) are vocabulary ids, and
/// vocab_size + i is the i-th out-of-vocabulary word of this document.
/// In-vocabulary document words keep their vocabulary id.
struct Document {
  std::vector<std::string> tokens;
  std::vector<TokenId> token_ids;         // vocabulary ids, <unk> for OOV
  std::vector<std::size_t> copy_ids;      // index of each token in copy_words
  std::unordered_map<std::string, std::size_t> copy_vocab;  // the distinct words X
  std::vector<std::string> copy_words;    // X in first-occurrence order
  std::vector<std::string> oov_words;     // X \ V in first-occurrence order
  std::vector<TokenId> merged_ids;        // per position, id in the merged space
  std::vector<std::string> stemmed_tokens;
  std::size_t vocab_size = 0;

  std::size_t length() const noexcept { return tokens.size(); }
  std::size_t merged_size() const noexcept { return vocab_size + oov_words.size(); }

  /// Merged id of a word: its vocabulary id, else its extended id when the
  /// document contains it, else <unk>.
  TokenId merged_id(std::string_view w, const Vocabulary& vocab) const {
    if (vocab.contains(w)) return vocab.id(w);
    auto it = std::find(oov_words.begin(), oov_words.end(), w);
    if (it != oov_words.end()) return vocab_size + static_cast<std::size_t>(it - oov_words.begin());
    return kUnkId;
  }

  std::string merged_word(TokenId id, const Vocabulary& vocab) const {
    if (id < vocab_size) return vocab.word(id);
    return oov_words.at(id - vocab_size);
  }

  /// Vocabulary id to feed back as decoder input (extended ids become <unk>).
  static TokenId input_id(TokenId merged, std::size_t vocab_size) { return merged < vocab_size ? merged : kUnkId; }
};

/// title + " " + abstract, tokenized and mapped through `vocab`.
inline Document preprocess(const RawSample& raw, const Vocabulary& vocab) {
  Document doc;
  doc.vocab_size = vocab.size();
  doc.tokens = tokenize(raw.title + " " + raw.abstract);
  if (doc.tokens.empty()) throw EmptyDocumentError("document is empty after tokenization");
  const PorterStemmer stemmer;
  for (const auto& w : doc.tokens) {
    doc.token_ids.push_back(vocab.id(w));
    auto [it, inserted] = doc.copy_vocab.emplace(w, doc.copy_words.size());
    if (inserted) {
      doc.copy_words.push_back(w);
      if (!vocab.contains(w)) doc.oov_words.push_back(w);
    }
    doc.copy_ids.push_back(it->second);
    doc.stemmed_tokens.push_back(stemmer.stem(w));
  }
  for (const auto& w : doc.tokens) doc.merged_ids.push_back(doc.merged_id(w, vocab));
  return doc;
}

/// Keyphrase words, preprocessed like document text.
inline std::vector<std::string> preprocess_phrase(std::string_view phrase) { return tokenize(phrase); }

/// First position at which `needle` occurs contiguously in `haystack`.
inline std::optional<std::size_t> find_subsequence(const std::vector<std::string>& haystack,
                                                   const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > haystack.size()) return std::nullopt;
  auto it = std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end());
  if (it == haystack.end()) return std::nullopt;
  return static_cast<std::size_t>(it - haystack.begin());
}

/// Counts words over documents and keyphrases and keeps the most frequent.
inline Vocabulary build_vocabulary(const std::vector<RawSample>& corpus, std::size_t size) {
  if (corpus.empty()) throw ConfigError("cannot build a vocabulary from an empty corpus");
  if (size < kSpecialTokens.size())
    throw ConfigError("vocabulary size " + std::to_string(size) + " is smaller than the special token count");
  std::map<std::string, std::size_t> counts;
  for (const auto& s : corpus) {
    for (auto& w : tokenize(s.title + " " + s.abstract)) ++counts[w];
    for (const auto& kp : s.keyphrases)
      for (auto& w : tokenize(kp)) ++counts[w];
  }
  return vocabulary_from_counts(counts, size);
}

enum class PhraseKind { present, absent };

inline const char* to_string(PhraseKind k) { return k == PhraseKind::present ? "present" : "absent"; }

struct PhraseTarget {
  PhraseKind kind = PhraseKind::present;
  std::vector<std::string> words;
  std::vector<TokenId> word_ids;       // vocabulary ids (<unk> for OOV)
  std::vector<TokenId> copy_word_ids;  // merged ids
  TokenId control_token = kPresentStartId;

  /// [control, w_1 .. w_l, ";"] in the merged space.
  std::vector<TokenId> sequence() const {
    std::vector<TokenId> seq{control_token};
    seq.insert(seq.end(), copy_word_ids.begin(), copy_word_ids.end());
    seq.push_back(kEndOfPhraseId);
    return seq;
  }
};

/// Ordered phrase targets; the program always ends with "</s>".
struct TargetProgram {
  std::vector<PhraseTarget> phrases;
  std::size_t dropped_empty = 0;

  /// The whole program, flattened: every phrase sequence then "</s>".
  std::vector<TokenId> flatten() const {
    std::vector<TokenId> out;
    for (const auto& p : phrases) {
      auto s = p.sequence();
      out.insert(out.end(), s.begin(), s.end());
    }
    out.push_back(kEndOfProgramId);
    return out;
  }

  std::size_t token_count() const {
    std::size_t n = 1;
    for (const auto& p : phrases) n += p.copy_word_ids.size() + 2;
    return n;
  }
};

/// Present phrases (stemmed contiguous match in the document) first, sorted
/// by first occurrence; absent phrases after them in input order.
inline TargetProgram build_target_program(const Document& doc, const std::vector<std::string>& keyphrases,
                                          const Vocabulary& vocab) {
  struct Candidate {
    PhraseTarget target;
    std::size_t position;
  };
  std::vector<Candidate> present, absent;
  TargetProgram program;
  for (const auto& kp : keyphrases) {
    auto words = preprocess_phrase(kp);
    if (words.empty()) {
      ++program.dropped_empty;
      continue;
    }
    PhraseTarget t;
    for (const auto& w : words) {
      t.word_ids.push_back(vocab.id(w));
      t.copy_word_ids.push_back(doc.merged_id(w, vocab));
    }
    t.words = std::move(words);
    auto pos = find_subsequence(doc.stemmed_tokens, stem_phrase(t.words));
    if (pos) {
      t.kind = PhraseKind::present;
      t.control_token = kPresentStartId;
      present.push_back({std::move(t), *pos});
    } else {
      t.kind = PhraseKind::absent;
      t.control_token = kAbsentStartId;
      absent.push_back({std::move(t), 0});
    }
  }
  std::stable_sort(present.begin(), present.end(),
                   [](const Candidate& a, const Candidate& b) { return a.position < b.position; });
  for (auto& c : present) program.phrases.push_back(std::move(c.target));
  for (auto& c : absent) program.phrases.push_back(std::move(c.target));
  return program;
}

/// A document paired with its training program.
struct Example {
  Document doc;
  TargetProgram program;
  std::vector<std::vector<std::string>> gold;  // preprocessed gold phrases, input order
};

inline Example make_example(const RawSample& raw, const Vocabulary& vocab) {
  Example ex;
  ex.doc = preprocess(raw, vocab);
  ex.program = build_target_program(ex.doc, raw.keyphrases, vocab);
  for (const auto& kp : raw.keyphrases) {
    auto words = preprocess_phrase(kp);
    if (!words.empty()) ex.gold.push_back(std::move(words));
  }
  return ex;
}

}  // namespace exhird::text
