#pragma once

#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

namespace exhird::text {

/// Porter's suffix-stripping stemmer, following the behaviour of Martin
/// Porter's reference C implementation (including its "bli" -> "ble" and
/// "logi" -> "log" rules and leaving words of length <= 2 alone).
///
/// Only tokens made entirely of the letters a-z are stemmed. Anything else
/// ("<digit>", punctuation, reserved placeholders) is returned unchanged.
class PorterStemmer {
 public:
  std::string stem(std::string_view word) const {
    if (word.size() <= 2 || !std::all_of(word.begin(), word.end(), [](char c) { return c >= 'a' && c <= 'z'; }))
      return std::string(word);
    State s{std::string(word), static_cast<int>(word.size()) - 1, 0};
    step1ab(s);
    if (s.k > 0) {
      step1c(s);
      step2(s);
      step3(s);
      step4(s);
      step5(s);
    }
    return s.b.substr(0, static_cast<std::size_t>(s.k + 1));
  }

 private:
  struct State {
    std::string b;
    int k;  // last index of the current stem
    int j;  // general offset, set by ends()
  };

  static bool cons(const State& s, int i) {
    switch (s.b[i]) {
      case 'a': case 'e': case 'i': case 'o': case 'u': return false;
      case 'y': return i == 0 ? true : !cons(s, i - 1);
      default: return true;
    }
  }

  // number of consonant-vowel sequences in b[0..j]
  static int measure(const State& s) {
    int n = 0, i = 0;
    while (true) {
      if (i > s.j) return n;
      if (!cons(s, i)) break;
      ++i;
    }
    ++i;
    while (true) {
      while (true) {
        if (i > s.j) return n;
        if (cons(s, i)) break;
        ++i;
      }
      ++i;
      ++n;
      while (true) {
        if (i > s.j) return n;
        if (!cons(s, i)) break;
        ++i;
      }
      ++i;
    }
  }

  static bool vowel_in_stem(const State& s) {
    for (int i = 0; i <= s.j; ++i)
      if (!cons(s, i)) return true;
    return false;
  }

  static bool double_consonant(const State& s, int j) {
    if (j < 1) return false;
    if (s.b[j] != s.b[j - 1]) return false;
    return cons(s, j);
  }

  static bool cvc(const State& s, int i) {
    if (i < 2 || !cons(s, i) || cons(s, i - 1) || !cons(s, i - 2)) return false;
    const char ch = s.b[i];
    return !(ch == 'w' || ch == 'x' || ch == 'y');
  }

  static bool ends(State& s, std::string_view suffix) {
    const int len = static_cast<int>(suffix.size());
    if (len > s.k + 1) return false;
    if (s.b.compare(static_cast<std::size_t>(s.k - len + 1), suffix.size(), suffix) != 0) return false;
    s.j = s.k - len;
    return true;
  }

  static void set_to(State& s, std::string_view replacement) {
    const int len = static_cast<int>(replacement.size());
    s.b.replace(static_cast<std::size_t>(s.j + 1), std::string::npos, replacement);
    s.k = s.j + len;
  }

  static void replace_if_measured(State& s, std::string_view replacement) {
    if (measure(s) > 0) set_to(s, replacement);
  }

  static void step1ab(State& s) {
    if (s.b[s.k] == 's') {
      if (ends(s, "sses")) s.k -= 2;
      else if (ends(s, "ies")) set_to(s, "i");
      else if (s.b[s.k - 1] != 's') s.k--;
    }
    if (ends(s, "eed")) {
      if (measure(s) > 0) s.k--;
    } else if ((ends(s, "ed") || ends(s, "ing")) && vowel_in_stem(s)) {
      s.k = s.j;
      if (ends(s, "at")) set_to(s, "ate");
      else if (ends(s, "bl")) set_to(s, "ble");
      else if (ends(s, "iz")) set_to(s, "ize");
      else if (double_consonant(s, s.k)) {
        s.k--;
        const char ch = s.b[s.k];
        if (ch == 'l' || ch == 's' || ch == 'z') s.k++;
      } else if (s.j = s.k, measure(s) == 1 && cvc(s, s.k)) {
        set_to(s, "e");
      }
    }
  }

  static void step1c(State& s) {
    if (ends(s, "y") && vowel_in_stem(s)) s.b[s.k] = 'i';
  }

  // Tries each (suffix, replacement) pair in order; the first matching suffix
  // ends the step whether or not its measure condition holds.
  template <std::size_t N>
  static void first_rule(State& s, const std::pair<std::string_view, std::string_view> (&rules)[N]) {
    for (const auto& [suffix, repl] : rules) {
      if (ends(s, suffix)) {
        replace_if_measured(s, repl);
        return;
      }
    }
  }

  static void step2(State& s) {
    if (s.k < 1) return;
    switch (s.b[s.k - 1]) {
      case 'a': {
        static constexpr std::pair<std::string_view, std::string_view> r[] = {{"ational", "ate"}, {"tional", "tion"}};
        first_rule(s, r);
        break;
      }
      case 'c': {
        static constexpr std::pair<std::string_view, std::string_view> r[] = {{"enci", "ence"}, {"anci", "ance"}};
        first_rule(s, r);
        break;
      }
      case 'e': {
        static constexpr std::pair<std::string_view, std::string_view> r[] = {{"izer", "ize"}};
        first_rule(s, r);
        break;
      }
      case 'l': {
        static constexpr std::pair<std::string_view, std::string_view> r[] = {
            {"bli", "ble"}, {"alli", "al"}, {"entli", "ent"}, {"eli", "e"}, {"ousli", "ous"}};
        first_rule(s, r);
        break;
      }
      case 'o': {
        static constexpr std::pair<std::string_view, std::string_view> r[] = {
            {"ization", "ize"}, {"ation", "ate"}, {"ator", "ate"}};
        first_rule(s, r);
        break;
      }
      case 's': {
        static constexpr std::pair<std::string_view, std::string_view> r[] = {
            {"alism", "al"}, {"iveness", "ive"}, {"fulness", "ful"}, {"ousness", "ous"}};
        first_rule(s, r);
        break;
      }
      case 't': {
        static constexpr std::pair<std::string_view, std::string_view> r[] = {
            {"aliti", "al"}, {"iviti", "ive"}, {"biliti", "ble"}};
        first_rule(s, r);
        break;
      }
      case 'g': {
        static constexpr std::pair<std::string_view, std::string_view> r[] = {{"logi", "log"}};
        first_rule(s, r);
        break;
      }
      default: break;
    }
  }

  static void step3(State& s) {
    switch (s.b[s.k]) {
      case 'e': {
        static constexpr std::pair<std::string_view, std::string_view> r[] = {
            {"icate", "ic"}, {"ative", ""}, {"alize", "al"}};
        first_rule(s, r);
        break;
      }
      case 'i': {
        static constexpr std::pair<std::string_view, std::string_view> r[] = {{"iciti", "ic"}};
        first_rule(s, r);
        break;
      }
      case 'l': {
        static constexpr std::pair<std::string_view, std::string_view> r[] = {{"ical", "ic"}, {"ful", ""}};
        first_rule(s, r);
        break;
      }
      case 's': {
        static constexpr std::pair<std::string_view, std::string_view> r[] = {{"ness", ""}};
        first_rule(s, r);
        break;
      }
      default: break;
    }
  }

  static bool any_end(State& s, std::initializer_list<std::string_view> suffixes) {
    for (auto suf : suffixes)
      if (ends(s, suf)) return true;
    return false;
  }

  static void step4(State& s) {
    if (s.k < 1) return;
    bool matched = false;
    switch (s.b[s.k - 1]) {
      case 'a': matched = ends(s, "al"); break;
      case 'c': matched = any_end(s, {"ance", "ence"}); break;
      case 'e': matched = ends(s, "er"); break;
      case 'i': matched = ends(s, "ic"); break;
      case 'l': matched = any_end(s, {"able", "ible"}); break;
      case 'n': matched = any_end(s, {"ant", "ement", "ment", "ent"}); break;
      case 'o':
        if (ends(s, "ion") && s.j >= 0 && (s.b[s.j] == 's' || s.b[s.j] == 't')) matched = true;
        else matched = ends(s, "ou");
        break;
      case 's': matched = ends(s, "ism"); break;
      case 't': matched = any_end(s, {"ate", "iti"}); break;
      case 'u': matched = ends(s, "ous"); break;
      case 'v': matched = ends(s, "ive"); break;
      case 'z': matched = ends(s, "ize"); break;
      default: break;
    }
    if (matched && measure(s) > 1) s.k = s.j;
  }

  static void step5(State& s) {
    s.j = s.k;
    if (s.b[s.k] == 'e') {
      const int a = measure(s);
      if (a > 1 || (a == 1 && !cvc(s, s.k - 1))) s.k--;
    }
    // measure still covers the word as it was on entry
    if (s.b[s.k] == 'l' && double_consonant(s, s.k) && measure(s) > 1) s.k--;
  }
};

inline std::string stem_word(std::string_view word) { return PorterStemmer{}.stem(word); }

/// Stems each word of a phrase, preserving order.
inline std::vector<std::string> stem_phrase(const std::vector<std::string>& words) {
  const PorterStemmer stemmer;
  std::vector<std::string> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(stemmer.stem(w));
  return out;
}

}  // namespace exhird::text
