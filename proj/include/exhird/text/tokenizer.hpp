#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace exhird::text {

inline constexpr std::string_view kDigitToken = "<digit>";

/// Lowercasing word tokenizer.
///
/// - ASCII letters and any non-ASCII bytes form word runs (UTF-8 sequences
///   stay intact); ASCII letters are lowercased.
/// - A maximal run of ASCII digits becomes the single token "<digit>".
/// - Every other printable ASCII character is its own token.
/// - Whitespace and control characters separate tokens.
///
/// So "Graph SLAM 2019" gives {"graph", "slam", "<digit>"} and "mp3-based"
/// gives {"mp", "<digit>", "-", "based"}.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) tokens.push_back(std::move(word));
    word.clear();
  };
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (c >= '0' && c <= '9') {
      flush();
      while (i < text.size() && text[i] >= '0' && text[i] <= '9') ++i;
      tokens.emplace_back(kDigitToken);
      continue;
    }
    if ((c >= 'a' && c <= 'z') || c >= 0x80) {
      word.push_back(static_cast<char>(c));
    } else if (c >= 'A' && c <= 'Z') {
      word.push_back(static_cast<char>(c - 'A' + 'a'));
    } else if (c <= ' ' || c == 0x7f) {
      flush();
    } else {
      flush();
      tokens.emplace_back(1, static_cast<char>(c));
    }
    ++i;
  }
  flush();
  return tokens;
}

/// Splits on ';' and trims surrounding whitespace; empty pieces are kept so
/// callers can count them.
inline std::vector<std::string> split_keyphrases(std::string_view joined) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= joined.size()) {
    std::size_t end = joined.find(';', start);
    if (end == std::string_view::npos) end = joined.size();
    auto piece = joined.substr(start, end - start);
    const auto b = piece.find_first_not_of(" \t\r\n");
    const auto e = piece.find_last_not_of(" \t\r\n");
    out.emplace_back(b == std::string_view::npos ? std::string_view{} : piece.substr(b, e - b + 1));
    start = end + 1;
  }
  return out;
}

inline std::string join(const std::vector<std::string>& words, std::string_view sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += sep;
    out += words[i];
  }
  return out;
}

}  // namespace exhird::text
