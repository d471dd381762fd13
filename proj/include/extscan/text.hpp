#pragma once

#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "extscan/data_tables.hpp"

namespace extscan {

/// Uppercase normalized keyword set for one free-text field.
using WordSet = std::set<std::string>;

namespace textdetail {

inline const std::unordered_set<std::string_view>& stop_words() {
  static const std::unordered_set<std::string_view> s(tables::kStopWords.begin(),
                                                      tables::kStopWords.end());
  return s;
}

inline const std::unordered_map<std::string_view, std::string_view>& lemma_table() {
  static const std::unordered_map<std::string_view, std::string_view> m(
      tables::kLemmaTable.begin(), tables::kLemmaTable.end());
  return m;
}

inline bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
         c >= 0x80;  // non-ASCII treated as word content
}

inline bool ends_with(std::string_view w, std::string_view suffix) {
  return w.size() >= suffix.size() &&
         w.substr(w.size() - suffix.size()) == suffix;
}

inline bool is_consonant(char c) {
  return c != 'a' && c != 'e' && c != 'i' && c != 'o' && c != 'u';
}

/// Deterministic suffix stripping, applied when the irregular table does
/// not know the word. Rules (in order), operating on lowercase input:
///   1. -sses -> -ss          (classes -> class)
///   2. -ies  -> -y   (len>4) (stories -> story; dies falls to rule 5)
///   3. -shes/-ches/-xes/-zes/-oes -> drop es
///   4. keep -ss / -us / -is  (address, bus, basis)
///   5. -s    -> drop         (runs -> run)
///   6. -ied  -> -y   (len>4) (tried -> try)
///   7. -eed  -> -ee  (len>4) (agreed -> agree)
///   8. -ed   -> drop (len>4, stripped>=3), undouble a final doubled
///      consonant other than l/s/z (stopped -> stop)
///   9. -ing  -> drop (len>5, stripped>=4), undouble likewise
///      (running -> run)
inline std::string strip_suffix(std::string w) {
  auto undouble = [](std::string& s) {
    if (s.size() >= 2 && s[s.size() - 1] == s[s.size() - 2] &&
        is_consonant(s.back()) && s.back() != 'l' && s.back() != 's' &&
        s.back() != 'z') {
      s.pop_back();
    }
  };
  if (ends_with(w, "sses")) {
    w.erase(w.size() - 2);
    return w;
  }
  if (ends_with(w, "ies") && w.size() > 4) {
    w.erase(w.size() - 3);
    w.push_back('y');
    return w;
  }
  if ((ends_with(w, "shes") || ends_with(w, "ches") || ends_with(w, "xes") ||
       ends_with(w, "zes") || ends_with(w, "oes")) &&
      w.size() > 3) {
    w.erase(w.size() - 2);
    return w;
  }
  if (ends_with(w, "ss") || ends_with(w, "us") || ends_with(w, "is")) {
    // keep
  } else if (ends_with(w, "s") && w.size() > 1) {
    w.pop_back();
    return w;
  }
  if (ends_with(w, "ied") && w.size() > 4) {
    w.erase(w.size() - 3);
    w.push_back('y');
    return w;
  }
  if (ends_with(w, "eed")) {
    if (w.size() > 4) w.pop_back();
    return w;
  }
  if (ends_with(w, "ed") && w.size() > 4) {
    std::string stripped = w.substr(0, w.size() - 2);
    if (stripped.size() >= 3) {
      undouble(stripped);
      return stripped;
    }
    return w;
  }
  if (ends_with(w, "ing") && w.size() > 5) {
    std::string stripped = w.substr(0, w.size() - 3);
    if (stripped.size() >= 4) {
      undouble(stripped);
      return stripped;
    }
    return w;
  }
  return w;
}

inline std::string lemmatize(const std::string& lower_word) {
  const auto& table = lemma_table();
  auto it = table.find(lower_word);
  if (it != table.end()) return std::string(it->second);
  return strip_suffix(lower_word);
}

}  // namespace textdetail

/// Free text -> keyword set: ASCII case-fold, split on anything that is
/// not a word byte, drop stop words, lemmatize (irregular table first,
/// then suffix rules), uppercase, deduplicate. Stop words are filtered
/// again after lemmatization so the map is idempotent.
inline WordSet prep_text(std::string_view text) {
  WordSet out;
  std::string token;
  auto flush = [&]() {
    if (token.empty()) return;
    std::string lower = token;
    token.clear();
    for (char& c : lower) {
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    const auto& stops = textdetail::stop_words();
    if (stops.count(lower)) return;
    std::string lemma = textdetail::lemmatize(lower);
    if (lemma.empty() || stops.count(lemma)) return;
    for (char& c : lemma) {
      if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    }
    out.insert(std::move(lemma));
  };
  for (unsigned char c : text) {
    if (textdetail::is_word_byte(c)) {
      token.push_back(static_cast<char>(c));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

inline std::string join_words(const WordSet& words) {
  std::string s;
  for (const auto& w : words) {
    if (!s.empty()) s.push_back(' ');
    s += w;
  }
  return s;
}

}  // namespace extscan
