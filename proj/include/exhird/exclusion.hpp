#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "exhird/errors.hpp"
#include "exhird/nn/ops.hpp"
#include "exhird/text/vocabulary.hpp"

namespace exhird::exclusion {

using text::TokenId;

/// Window capacity meaning "every previous phrase".
inline constexpr std::size_t kAll = std::numeric_limits<std::size_t>::max();

enum class Mode { none, soft, hard };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::none: return "none";
    case Mode::soft: return "soft";
    case Mode::hard: return "hard";
  }
  return "none";
}

inline Mode parse_mode(const std::string& s) {
  if (s == "none") return Mode::none;
  if (s == "soft") return Mode::soft;
  if (s == "hard") return Mode::hard;
  throw ConfigError("unknown exclusion mode '" + s + "' (expected none, soft or hard)");
}

/// "all" or a non-negative integer.
inline std::size_t parse_window(const std::string& s) {
  if (s == "all") return kAll;
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception&) {
    throw ConfigError("invalid exclusion window '" + s + "'");
  }
  if (pos != s.size() || v < 0) throw ConfigError("invalid exclusion window '" + s + "'");
  return static_cast<std::size_t>(v);
}

inline std::string window_to_string(std::size_t k) { return k == kAll ? "all" : std::to_string(k); }

/// First words of the most recent completed phrases, oldest first. Holding
/// at most K entries makes the effective window min(K, i - 1) at PD step i.
class ExclusionWindow {
 public:
  explicit ExclusionWindow(std::size_t capacity = 0) : capacity_(capacity) {}

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return first_words_.size(); }
  bool empty() const noexcept { return first_words_.empty(); }
  const std::deque<TokenId>& first_words() const noexcept { return first_words_; }

  void push(TokenId first_word) {
    if (capacity_ == 0) return;
    first_words_.push_back(first_word);
    if (first_words_.size() > capacity_) first_words_.pop_front();
  }

  bool contains(TokenId id) const {
    return std::find(first_words_.begin(), first_words_.end(), id) != first_words_.end();
  }

 private:
  std::size_t capacity_;
  std::deque<TokenId> first_words_;
};

/// Pure variant of ExclusionWindow::push.
inline ExclusionWindow window_push(ExclusionWindow window, TokenId first_word) {
  window.push(first_word);
  return window;
}

template <class T>
inline constexpr T kComplementClamp = static_cast<T>(1.0 - 1e-7);

/// Soft exclusion term for one WD step: at j = 1, the sum of
/// -log(1 - p(w) + eps) over window entries w that differ from the current
/// gold first word (one term per entry, repeats included). Zero otherwise.
template <class T>
nn::Var<T> exclusive_loss(nn::Var<T> p, TokenId target_first_word, const ExclusionWindow& window, std::size_t j) {
  std::vector<std::size_t> ids;
  if (j == 1)
    for (auto w : window.first_words())
      if (w != target_first_word) ids.push_back(w);
  if (ids.empty()) return p.graph->constant(nn::Tensor<T>(nn::Shape{1}));
  return nn::neg_log_complement(p, std::move(ids), nn::kLogEpsilon<T>, kComplementClamp<T>);
}

/// Hard exclusion: at j = 1 the probability of every windowed first word is
/// set to zero (no renormalisation). Other steps return p unchanged.
template <class T>
std::vector<T> exclusive_search_mask(std::span<const T> p, const ExclusionWindow& window, std::size_t j) {
  std::vector<T> out(p.begin(), p.end());
  if (j != 1) return out;
  for (auto w : window.first_words())
    if (w < out.size()) out[w] = T{0};
  return out;
}

}  // namespace exhird::exclusion
