#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "exhird/text/document.hpp"
#include "exhird/text/porter_stemmer.hpp"

namespace exhird::eval {

using Phrase = std::vector<std::string>;

/// Equality of stemmed token sequences.
inline bool match(const Phrase& pred, const Phrase& gold) {
  return pred.size() == gold.size() && text::stem_phrase(pred) == text::stem_phrase(gold);
}

/// Stems every phrase and drops repeats, keeping first occurrences in order.
inline std::vector<Phrase> unique_stemmed(const std::vector<Phrase>& phrases) {
  std::vector<Phrase> out;
  std::set<Phrase> seen;
  for (const auto& p : phrases) {
    auto s = text::stem_phrase(p);
    if (seen.insert(s).second) out.push_back(std::move(s));
  }
  return out;
}

/// (#predictions - #unique after stemming) / #predictions; 0 when empty.
inline double dup_ratio(const std::vector<Phrase>& raw_ordered) {
  if (raw_ordered.empty()) return 0.0;
  const auto unique = unique_stemmed(raw_ordered).size();
  return static_cast<double>(raw_ordered.size() - unique) / static_cast<double>(raw_ordered.size());
}

struct Score {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

inline Score f1_from_counts(std::size_t matches, std::size_t predicted, std::size_t gold) {
  Score s;
  s.precision = predicted ? static_cast<double>(matches) / static_cast<double>(predicted) : 0.0;
  s.recall = gold ? static_cast<double>(matches) / static_cast<double>(gold) : 0.0;
  s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

inline std::size_t count_matches(const std::vector<Phrase>& preds, const std::vector<Phrase>& gold) {
  const std::set<Phrase> g(gold.begin(), gold.end());
  std::size_t n = 0;
  for (const auto& p : preds) n += g.count(p);
  return n;
}

/// F1 over all predictions. Both lists are stemmed and duplicate-free.
inline Score f1_at_m(const std::vector<Phrase>& unique_preds, const std::vector<Phrase>& gold) {
  return f1_from_counts(count_matches(unique_preds, gold), unique_preds.size(), gold.size());
}

/// Reserved filler phrase; never produced by the tokenizer and left alone by
/// the stemmer, so it cannot match a gold phrase.
inline Phrase placeholder_phrase(std::size_t n) { return {"<fake-kp-" + std::to_string(n) + ">"}; }

/// F1 at cutoff k: the first k predictions in generation order, padded with
/// non-matching placeholders when fewer than k exist.
inline Score f1_at_k(const std::vector<Phrase>& unique_preds, const std::vector<Phrase>& gold, std::size_t k) {
  std::vector<Phrase> top(unique_preds.begin(), unique_preds.begin() + std::min(k, unique_preds.size()));
  for (std::size_t n = 0; top.size() < k; ++n) top.push_back(placeholder_phrase(n));
  return f1_from_counts(count_matches(top, gold), top.size(), gold.size());
}

inline Score f1_at_5(const std::vector<Phrase>& unique_preds, const std::vector<Phrase>& gold) {
  return f1_at_k(unique_preds, gold, 5);
}

/// Predictions of one document, deduplicated after stemming and split by
/// whether each phrase occurs (stemmed, contiguously) in the source text.
struct PredictionSet {
  std::vector<Phrase> raw_ordered;
  std::vector<Phrase> unique_stemmed;
  std::vector<Phrase> present;
  std::vector<Phrase> absent;
};

inline bool occurs_in(const std::vector<std::string>& stemmed_doc, const Phrase& stemmed_phrase) {
  return text::find_subsequence(stemmed_doc, stemmed_phrase).has_value();
}

inline PredictionSet make_prediction_set(std::vector<Phrase> raw, const std::vector<std::string>& stemmed_doc) {
  PredictionSet s;
  s.raw_ordered = std::move(raw);
  s.unique_stemmed = eval::unique_stemmed(s.raw_ordered);
  for (const auto& p : s.unique_stemmed) (occurs_in(stemmed_doc, p) ? s.present : s.absent).push_back(p);
  return s;
}

}  // namespace exhird::eval
