#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "extscan/js_parser.hpp"
#include "extscan/package.hpp"

namespace extscan {

struct UnitSequence {
  std::vector<JsNodeType> units;  // pre-order node-type names
  bool parse_ok = false;

  std::vector<std::string> unit_names() const {
    std::vector<std::string> out;
    out.reserve(units.size());
    for (JsNodeType u : units) out.emplace_back(js_node_type_name(u));
    return out;
  }
};

/// Parse failure is data, not an error: the extension stays classifiable
/// by metadata alone.
inline UnitSequence parse_units(std::string_view source) {
  UnitSequence seq;
  JsAst ast = parse_js(source);
  if (!ast.ok()) return seq;
  seq.parse_ok = true;
  ast.preorder_units(seq.units);
  return seq;
}

using UnitGram = std::array<JsNodeType, 4>;

struct NGramVocabulary {
  static constexpr std::size_t kDefaultCap = 2457;
  std::vector<UnitGram> grams;  // descending frequency, ties lexicographic

  std::size_t size() const { return grams.size(); }

  std::map<UnitGram, std::size_t> index() const {
    std::map<UnitGram, std::size_t> idx;
    for (std::size_t i = 0; i < grams.size(); ++i) idx.emplace(grams[i], i);
    return idx;
  }
};

struct SourceVector {
  std::vector<double> values;
  std::string schema_digest;
};

/// Relative 4-gram frequencies. The denominator counts every window,
/// in-vocabulary or not, so the values keep their meaning against the full
/// window population; out-of-vocabulary mass is simply dropped.
inline SourceVector ngram_frequencies(const UnitSequence& seq,
                                      const NGramVocabulary& vocab,
                                      const std::map<UnitGram, std::size_t>& index) {
  SourceVector out;
  out.values.assign(vocab.size(), 0.0);
  std::size_t n = seq.units.size();
  std::size_t windows = n >= 4 ? n - 3 : 0;
  if (windows == 0) return out;
  for (std::size_t i = 0; i + 4 <= n; ++i) {
    UnitGram g{seq.units[i], seq.units[i + 1], seq.units[i + 2], seq.units[i + 3]};
    auto it = index.find(g);
    if (it != index.end()) out.values[it->second] += 1.0;
  }
  double denom = static_cast<double>(windows);
  for (double& v : out.values) v /= denom;
  return out;
}

inline SourceVector ngram_frequencies(const UnitSequence& seq,
                                      const NGramVocabulary& vocab) {
  return ngram_frequencies(seq, vocab, vocab.index());
}

/// Absent when the package has no bundle or the bundle does not parse
/// (the extension is then metadata-only, which evaluation accounts for).
inline std::optional<UnitSequence> bundle_units(const ExtensionPackage& pkg) {
  if (!pkg.script_bundle) return std::nullopt;
  UnitSequence seq = parse_units(pkg.script_bundle->concatenated_source);
  if (!seq.parse_ok) return std::nullopt;
  return seq;
}

inline std::optional<SourceVector> extract_source(
    const ExtensionPackage& pkg, const NGramVocabulary& vocab,
    const std::map<UnitGram, std::size_t>& index, const std::string& digest) {
  std::optional<UnitSequence> seq = bundle_units(pkg);
  if (!seq) return std::nullopt;
  SourceVector v = ngram_frequencies(*seq, vocab, index);
  v.schema_digest = digest;
  return v;
}

}  // namespace extscan
