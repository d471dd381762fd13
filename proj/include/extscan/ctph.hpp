#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "extscan/common.hpp"

namespace extscan {

/// Context-triggered piecewise hashing, spamsum construction: a rolling
/// hash over a 7-byte window cuts the input into blocks wherever its value
/// is -1 mod the block size; each block contributes one base64 symbol of
/// an FNV-style block hash. The block size starts at the minimum scaled to
/// the input length and is halved while the signature stays under half
/// strength. The second signature is computed identically at twice the
/// block size.
namespace ctphdetail {

constexpr std::size_t kRollingWindow = 7;
constexpr std::uint64_t kMinBlockSize = 3;
constexpr std::uint32_t kHashPrime = 0x01000193;
constexpr std::uint32_t kHashInit = 0x28021967;
constexpr std::size_t kSpamsumLength = 64;
inline constexpr char kB64[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

struct RollState {
  std::array<std::uint8_t, kRollingWindow> window{};
  std::uint32_t h1 = 0, h2 = 0, h3 = 0;
  std::size_t n = 0;

  std::uint32_t step(std::uint8_t c) {
    h2 -= h1;
    h2 += static_cast<std::uint32_t>(kRollingWindow) * c;
    h1 += c;
    h1 -= window[n % kRollingWindow];
    window[n % kRollingWindow] = c;
    ++n;
    h3 = (h3 << 5) ^ c;
    return h1 + h2 + h3;
  }
};

inline std::uint32_t sum_hash(std::uint8_t c, std::uint32_t h) {
  return (h * kHashPrime) ^ c;
}

struct DigestPass {
  std::string sig1;
  std::string sig2;
  std::size_t committed1 = 0;  // trigger-committed symbols, drives the retry
};

inline DigestPass digest_at(BytesView data, std::uint64_t block_size) {
  DigestPass out;
  RollState roll;
  std::uint32_t sum1 = kHashInit, sum2 = kHashInit;
  std::uint32_t h = 0;
  std::size_t j = 0, k = 0;
  auto place = [](std::string& sig, std::size_t slot, char sym) {
    if (slot < sig.size()) {
      sig[slot] = sym;  // full: churn the last slot without committing
    } else {
      sig.push_back(sym);
    }
  };
  for (std::uint8_t c : data) {
    h = roll.step(c);
    sum1 = sum_hash(c, sum1);
    sum2 = sum_hash(c, sum2);
    if (h % block_size == block_size - 1) {
      place(out.sig1, j, kB64[sum1 % 64]);
      if (j < kSpamsumLength - 1) {
        sum1 = kHashInit;
        ++j;
      }
    }
    if (h % (block_size * 2) == block_size * 2 - 1) {
      place(out.sig2, k, kB64[sum2 % 64]);
      if (k < kSpamsumLength / 2 - 1) {
        sum2 = kHashInit;
        ++k;
      }
    }
  }
  if (h != 0) {
    place(out.sig1, j, kB64[sum1 % 64]);
    place(out.sig2, k, kB64[sum2 % 64]);
  }
  out.committed1 = j;
  return out;
}

/// Collapses runs longer than three identical characters before scoring.
inline std::string eliminate_runs(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    std::size_t n = out.size();
    if (n >= 3 && out[n - 1] == c && out[n - 2] == c && out[n - 3] == c) continue;
    out.push_back(c);
  }
  return out;
}

inline bool has_common_substring(const std::string& a, const std::string& b) {
  if (a.size() < kRollingWindow || b.size() < kRollingWindow) return false;
  for (std::size_t i = 0; i + kRollingWindow <= a.size(); ++i) {
    for (std::size_t j = 0; j + kRollingWindow <= b.size(); ++j) {
      if (a.compare(i, kRollingWindow, b, j, kRollingWindow) == 0) return true;
    }
  }
  return false;
}

/// Weighted Levenshtein: insert 1, delete 1, substitute 2.
inline std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 2);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline int score_strings(const std::string& a, const std::string& b,
                         std::uint64_t block_size) {
  if (a.size() > kSpamsumLength || b.size() > kSpamsumLength) return 0;
  if (!has_common_substring(a, b)) return 0;
  std::uint64_t score = edit_distance(a, b);
  score = score * kSpamsumLength / (a.size() + b.size());
  score = 100 * score / kSpamsumLength;
  if (score >= 100) return 0;
  score = 100 - score;
  std::uint64_t cap = block_size / kMinBlockSize *
                      static_cast<std::uint64_t>(std::min(a.size(), b.size()));
  return static_cast<int>(std::min<std::uint64_t>(score, cap));
}

}  // namespace ctphdetail

struct FuzzyHash {
  std::uint64_t block_size = 0;
  std::string sig1;  // <= 64 symbols
  std::string sig2;  // <= 32 symbols, at 2x block size

  std::string to_string() const {
    return std::to_string(block_size) + ":" + sig1 + ":" + sig2;
  }

  static FuzzyHash parse(const std::string& text) {
    std::size_t c1 = text.find(':');
    std::size_t c2 = c1 == std::string::npos ? std::string::npos
                                             : text.find(':', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos || c1 == 0) {
      throw InputError("BadFuzzyHash", text);
    }
    FuzzyHash h;
    h.block_size = std::stoull(text.substr(0, c1));
    h.sig1 = text.substr(c1 + 1, c2 - c1 - 1);
    h.sig2 = text.substr(c2 + 1);
    return h;
  }
};

inline FuzzyHash ctph(BytesView data) {
  using namespace ctphdetail;
  if (data.empty()) throw InputError("EmptyInput", "cannot hash zero bytes");
  std::uint64_t block_size = kMinBlockSize;
  while (block_size * kSpamsumLength < data.size()) block_size *= 2;
  while (true) {
    DigestPass pass = digest_at(data, block_size);
    if (block_size > kMinBlockSize && pass.committed1 < kSpamsumLength / 2) {
      block_size /= 2;
      continue;
    }
    FuzzyHash h;
    h.block_size = block_size;
    h.sig1 = std::move(pass.sig1);
    h.sig2 = std::move(pass.sig2);
    return h;
  }
}

inline FuzzyHash ctph(const Bytes& data) { return ctph(BytesView(data.data(), data.size())); }

inline FuzzyHash ctph(std::string_view text) {
  return ctph(BytesView(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

/// 0..100 similarity between two fuzzy hashes: comparable when the block
/// sizes are equal or off by one doubling; the matching signature pair is
/// scored by scaled edit distance. Symmetric; identical signatures at the
/// same block size score 100.
inline int similarity(const FuzzyHash& h1, const FuzzyHash& h2) {
  using namespace ctphdetail;
  std::uint64_t b1 = h1.block_size, b2 = h2.block_size;
  if (b1 != b2 && b1 != b2 * 2 && b2 != b1 * 2) return 0;
  std::string s11 = eliminate_runs(h1.sig1), s12 = eliminate_runs(h1.sig2);
  std::string s21 = eliminate_runs(h2.sig1), s22 = eliminate_runs(h2.sig2);
  if (b1 == b2 && s11 == s21 && s12 == s22) return 100;
  if (b1 == b2) {
    return std::max(score_strings(s11, s21, b1), score_strings(s12, s22, b1 * 2));
  }
  if (b1 == b2 * 2) return score_strings(s11, s22, b1);
  return score_strings(s12, s21, b2);
}

}  // namespace extscan
