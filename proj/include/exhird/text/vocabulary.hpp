#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "exhird/errors.hpp"

namespace exhird::text {

using TokenId = std::size_t;

inline constexpr std::string_view kPad = "<pad>";
inline constexpr std::string_view kUnk = "<unk>";
inline constexpr std::string_view kPresentStart = "<p_start>";
inline constexpr std::string_view kAbsentStart = "<a_start>";
inline constexpr std::string_view kEndOfPhrase = ";";
inline constexpr std::string_view kEndOfProgram = "</s>";

/// Reserved tokens, in the order they occupy ids 0..5.
inline constexpr std::array<std::string_view, 6> kSpecialTokens = {kPad, kUnk, kPresentStart,
                                                                   kAbsentStart, kEndOfPhrase, kEndOfProgram};

inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kUnkId = 1;
inline constexpr TokenId kPresentStartId = 2;
inline constexpr TokenId kAbsentStartId = 3;
inline constexpr TokenId kEndOfPhraseId = 4;
inline constexpr TokenId kEndOfProgramId = 5;

inline bool is_special(std::string_view w) {
  return std::find(kSpecialTokens.begin(), kSpecialTokens.end(), w) != kSpecialTokens.end();
}

class Vocabulary {
 public:
  /// Only the special tokens.
  Vocabulary() {
    for (auto s : kSpecialTokens) append(std::string(s));
  }

  /// `words` are appended after the special tokens, skipping duplicates and
  /// specials.
  explicit Vocabulary(const std::vector<std::string>& words) : Vocabulary() {
    for (const auto& w : words)
      if (!word_to_id_.count(w)) append(w);
  }

  std::size_t size() const noexcept { return id_to_word_.size(); }
  bool contains(std::string_view w) const { return word_to_id_.count(std::string(w)) != 0; }

  TokenId id(std::string_view w) const {
    auto it = word_to_id_.find(std::string(w));
    return it == word_to_id_.end() ? kUnkId : it->second;
  }
  const std::string& word(TokenId id) const { return id_to_word_.at(id); }
  const std::vector<std::string>& words() const noexcept { return id_to_word_; }

  /// FNV-1a over the token list; identifies the vocabulary in checkpoints.
  std::uint64_t fingerprint() const {
    std::uint64_t h = 1469598103934665603ull;
    for (const auto& w : id_to_word_) {
      for (unsigned char c : w) {
        h ^= c;
        h *= 1099511628211ull;
      }
      h ^= 0xff;
      h *= 1099511628211ull;
    }
    return h;
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write vocabulary file " + path);
    for (const auto& w : id_to_word_) out << w << '\n';
  }

  static Vocabulary load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read vocabulary file " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    if (lines.size() < kSpecialTokens.size())
      throw DataError("vocabulary file " + path + " is missing special tokens");
    for (std::size_t i = 0; i < kSpecialTokens.size(); ++i)
      if (lines[i] != kSpecialTokens[i])
        throw DataError("vocabulary file " + path + ": line " + std::to_string(i + 1) + " must be " +
                        std::string(kSpecialTokens[i]));
    Vocabulary v;
    for (std::size_t i = kSpecialTokens.size(); i < lines.size(); ++i) {
      if (v.word_to_id_.count(lines[i])) throw DataError("vocabulary file " + path + ": duplicate token " + lines[i]);
      v.append(lines[i]);
    }
    return v;
  }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.id_to_word_ == b.id_to_word_; }

 private:
  void append(std::string w) {
    word_to_id_.emplace(w, id_to_word_.size());
    id_to_word_.push_back(std::move(w));
  }

  std::unordered_map<std::string, TokenId> word_to_id_;
  std::vector<std::string> id_to_word_;
};

/// Keeps the `size - 6` most frequent non-special words; ties go to the
/// lexicographically smaller word.
inline Vocabulary vocabulary_from_counts(const std::map<std::string, std::size_t>& counts, std::size_t size) {
  if (size < kSpecialTokens.size())
    throw ConfigError("vocabulary size " + std::to_string(size) + " is smaller than the " +
                      std::to_string(kSpecialTokens.size()) + " special tokens");
  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (const auto& [w, c] : counts)
    if (!is_special(w)) ranked.emplace_back(w, c);
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  const std::size_t slots = size - kSpecialTokens.size();
  if (ranked.size() > slots) ranked.resize(slots);
  std::vector<std::string> words;
  for (auto& [w, c] : ranked) words.push_back(w);
  return Vocabulary(words);
}

}  // namespace exhird::text
