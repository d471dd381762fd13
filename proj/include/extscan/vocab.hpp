#pragma once

#include <json.hpp>

#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "extscan/corpus.hpp"
#include "extscan/data_tables.hpp"
#include "extscan/feat_src.hpp"
#include "extscan/sha256.hpp"
#include "extscan/text.hpp"

namespace extscan {

/// Wrapper marking a corpus as the training side of a split. Vocabulary
/// builders only accept this view, which keeps test records out of
/// vocabulary construction by construction.
struct TrainCorpusView {
  const Corpus* corpus;
  const Corpus& get() const { return *corpus; }
};

inline TrainCorpusView as_training(const Corpus& train) { return {&train}; }

struct PermissionCatalog {
  std::vector<std::string> names;  // exactly 70, sorted, unique

  static PermissionCatalog builtin() {
    PermissionCatalog c;
    c.names.assign(tables::kPermissionCatalog.begin(), tables::kPermissionCatalog.end());
    return c;
  }

  static PermissionCatalog from_lines(const std::string& text) {
    PermissionCatalog c;
    std::string line;
    for (char ch : text) {
      if (ch == '\n') {
        if (!line.empty()) c.names.push_back(line);
        line.clear();
      } else if (ch != '\r') {
        line.push_back(ch);
      }
    }
    if (!line.empty()) c.names.push_back(line);
    c.validate();
    return c;
  }

  void validate() const {
    if (names.size() != 70) {
      throw InputError("BadCatalog", "expected 70 permissions, got " +
                                         std::to_string(names.size()));
    }
    if (!std::is_sorted(names.begin(), names.end()) ||
        std::adjacent_find(names.begin(), names.end()) != names.end()) {
      throw InputError("BadCatalog", "names must be sorted and unique");
    }
  }

  std::size_t size() const { return names.size(); }

  int index_of(const std::string& name) const {
    auto it = std::lower_bound(names.begin(), names.end(), name);
    if (it != names.end() && *it == name) {
      return static_cast<int>(it - names.begin());
    }
    return -1;
  }
};

enum class TopKField {
  host_permission,
  cs_match,
  description_kw,
  summary_kw,
  review_kw,
};

inline const char* to_string(TopKField f) {
  switch (f) {
    case TopKField::host_permission: return "host_permission";
    case TopKField::cs_match: return "cs_match";
    case TopKField::description_kw: return "description_kw";
    case TopKField::summary_kw: return "summary_kw";
    case TopKField::review_kw: return "review_kw";
  }
  return "?";
}

struct TopKVocabulary {
  static constexpr std::size_t kDefaultK = 400;
  TopKField field_kind = TopKField::host_permission;
  std::size_t k = kDefaultK;       // slot count in the vector layout
  std::vector<std::string> entries;  // <= k, by descending document frequency

  std::map<std::string, std::size_t> index() const {
    std::map<std::string, std::size_t> idx;
    for (std::size_t i = 0; i < entries.size(); ++i) idx.emplace(entries[i], i);
    return idx;
  }
};

/// Per-record value set for one top-K field: document frequency counts an
/// extension once however often it repeats a value.
inline std::set<std::string> topk_values_of(const ExtensionRecord& rec, TopKField field) {
  switch (field) {
    case TopKField::host_permission:
      return rec.pkg.manifest.host_permissions;
    case TopKField::cs_match: {
      std::set<std::string> out;
      for (const auto& cs : rec.pkg.manifest.content_scripts) {
        out.insert(cs.matches.begin(), cs.matches.end());
      }
      return out;
    }
    case TopKField::description_kw: {
      WordSet w = prep_text(rec.description);
      return {w.begin(), w.end()};
    }
    case TopKField::summary_kw: {
      WordSet w = prep_text(rec.summary);
      return {w.begin(), w.end()};
    }
    case TopKField::review_kw: {
      std::set<std::string> out;
      for (const auto& review : rec.reviews) {
        WordSet w = prep_text(review);
        out.insert(w.begin(), w.end());
      }
      return out;
    }
  }
  return {};
}

/// Top K values by document frequency; ties broken lexicographically.
inline TopKVocabulary build_topk(TrainCorpusView train, TopKField field,
                                 std::size_t k = TopKVocabulary::kDefaultK) {
  std::map<std::string, std::size_t> freq;
  for (const auto& rec : train.get().records) {
    for (const auto& value : topk_values_of(rec, field)) ++freq[value];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  TopKVocabulary vocab;
  vocab.field_kind = field;
  vocab.k = k;
  for (std::size_t i = 0; i < ranked.size() && i < k; ++i) {
    vocab.entries.push_back(ranked[i].first);
  }
  return vocab;
}

/// 4-gram vocabulary from training-side unit sequences, capped to the most
/// frequent grams; ties broken by lexicographic tuple order.
inline NGramVocabulary build_ngram_vocab(const std::vector<UnitSequence>& train_sequences,
                                         std::size_t cap = NGramVocabulary::kDefaultCap) {
  std::map<UnitGram, std::uint64_t> freq;
  for (const auto& seq : train_sequences) {
    if (!seq.parse_ok) continue;
    const auto& u = seq.units;
    for (std::size_t i = 0; i + 4 <= u.size(); ++i) {
      ++freq[UnitGram{u[i], u[i + 1], u[i + 2], u[i + 3]}];
    }
  }
  std::vector<std::pair<UnitGram, std::uint64_t>> ranked(freq.begin(), freq.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  NGramVocabulary vocab;
  for (std::size_t i = 0; i < ranked.size() && i < cap; ++i) {
    vocab.grams.push_back(ranked[i].first);
  }
  return vocab;
}

// ---- schema ----

struct FeatureFamily {
  std::string name;
  std::size_t dim = 0;
  std::size_t offset = 0;
};

struct FeatureSchema {
  PermissionCatalog catalog;
  TopKVocabulary host_permissions;
  TopKVocabulary cs_matches;
  TopKVocabulary description_kw;
  TopKVocabulary summary_kw;
  TopKVocabulary review_kw;
  NGramVocabulary ngrams;
  std::vector<FeatureFamily> layout;  // metadata families then source grams
  std::string digest;

  std::size_t metadata_dim() const {
    std::size_t n = 0;
    for (const auto& f : layout) {
      if (f.name != "source_ngrams") n += f.dim;
    }
    return n;
  }

  std::size_t source_dim() const { return ngrams.size(); }
  std::size_t combined_dim() const { return metadata_dim() + source_dim(); }

  const FeatureFamily& family(const std::string& name) const {
    for (const auto& f : layout) {
      if (f.name == name) return f;
    }
    throw UsageError("UnknownFamily", name);
  }

  /// Family name owning a combined-vector index.
  const FeatureFamily& family_of_index(std::size_t index) const {
    for (const auto& f : layout) {
      if (index >= f.offset && index < f.offset + f.dim) return f;
    }
    throw UsageError("IndexOutOfRange", std::to_string(index));
  }
};

namespace schemadetail {

inline void hash_vocab(Sha256& h, const TopKVocabulary& v) {
  h.update(to_string(v.field_kind));
  h.update("\x1f");
  h.update(std::to_string(v.k));
  for (const auto& e : v.entries) {
    h.update("\x1e");
    h.update(e);
  }
  h.update("\x1d");
}

}  // namespace schemadetail

/// Fixes the vector layout (metadata family order, then source 4-grams)
/// and computes a content digest over every vocabulary entry.
inline FeatureSchema freeze_schema(PermissionCatalog catalog, TopKVocabulary host,
                                   TopKVocabulary cs, TopKVocabulary desc,
                                   TopKVocabulary summary, TopKVocabulary review,
                                   NGramVocabulary ngrams) {
  catalog.validate();
  FeatureSchema s;
  s.catalog = std::move(catalog);
  s.host_permissions = std::move(host);
  s.cs_matches = std::move(cs);
  s.description_kw = std::move(desc);
  s.summary_kw = std::move(summary);
  s.review_kw = std::move(review);
  s.ngrams = std::move(ngrams);

  std::size_t off = 0;
  auto push = [&](std::string name, std::size_t dim) {
    s.layout.push_back({std::move(name), dim, off});
    off += dim;
  };
  push("permissions", s.catalog.size());
  push("host_permissions", s.host_permissions.k);
  push("cs_matches", s.cs_matches.k);
  push("num_content_scripts", 1);
  push("num_service_workers", 1);
  push("users", 1);
  push("rating_avg", 1);
  push("rating_count", 1);
  push("description_kw", s.description_kw.k);
  push("summary_kw", s.summary_kw.k);
  push("review_kw", s.review_kw.k);
  push("same_developer_count", 1);
  push("crx_size", 1);
  push("file_count", 1);
  push("js_file_count", 1);
  push("js_size", 1);
  push("related_permissions", s.catalog.size());
  push("source_ngrams", s.ngrams.size());

  Sha256 h;
  h.update("extscan-schema-v1");
  for (const auto& n : s.catalog.names) {
    h.update("\x1e");
    h.update(n);
  }
  h.update("\x1d");
  schemadetail::hash_vocab(h, s.host_permissions);
  schemadetail::hash_vocab(h, s.cs_matches);
  schemadetail::hash_vocab(h, s.description_kw);
  schemadetail::hash_vocab(h, s.summary_kw);
  schemadetail::hash_vocab(h, s.review_kw);
  for (const auto& g : s.ngrams.grams) {
    h.update("\x1e");
    for (JsNodeType u : g) {
      h.update(js_node_type_name(u));
      h.update("\x1f");
    }
  }
  for (const auto& f : s.layout) {
    h.update("\x1c");
    h.update(f.name);
    h.update(std::to_string(f.dim));
  }
  s.digest = h.finish_hex();
  return s;
}

/// Builds every vocabulary from the training side and freezes the layout.
inline FeatureSchema build_schema(TrainCorpusView train,
                                  PermissionCatalog catalog = PermissionCatalog::builtin(),
                                  std::size_t top_k = TopKVocabulary::kDefaultK,
                                  std::size_t ngram_cap = NGramVocabulary::kDefaultCap) {
  std::vector<UnitSequence> sequences;
  for (const auto& rec : train.get().records) {
    if (auto seq = bundle_units(rec.pkg)) sequences.push_back(std::move(*seq));
  }
  return freeze_schema(std::move(catalog),
                       build_topk(train, TopKField::host_permission, top_k),
                       build_topk(train, TopKField::cs_match, top_k),
                       build_topk(train, TopKField::description_kw, top_k),
                       build_topk(train, TopKField::summary_kw, top_k),
                       build_topk(train, TopKField::review_kw, top_k),
                       build_ngram_vocab(sequences, ngram_cap));
}

// ---- JSON serialization ----

inline nlohmann::json schema_to_json(const FeatureSchema& s) {
  nlohmann::json j;
  j["format"] = "extscan-schema";
  j["version"] = 1;
  j["catalog"] = s.catalog.names;
  auto vocab_json = [](const TopKVocabulary& v) {
    return nlohmann::json{{"kind", to_string(v.field_kind)}, {"k", v.k},
                          {"entries", v.entries}};
  };
  j["host_permissions"] = vocab_json(s.host_permissions);
  j["cs_matches"] = vocab_json(s.cs_matches);
  j["description_kw"] = vocab_json(s.description_kw);
  j["summary_kw"] = vocab_json(s.summary_kw);
  j["review_kw"] = vocab_json(s.review_kw);
  nlohmann::json grams = nlohmann::json::array();
  for (const auto& g : s.ngrams.grams) {
    nlohmann::json tuple = nlohmann::json::array();
    for (JsNodeType u : g) tuple.push_back(std::string(js_node_type_name(u)));
    grams.push_back(tuple);
  }
  j["ngrams"] = grams;
  nlohmann::json layout = nlohmann::json::array();
  for (const auto& f : s.layout) layout.push_back({f.name, f.dim});
  j["layout"] = layout;
  j["digest"] = s.digest;
  return j;
}

inline FeatureSchema schema_from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("format", "") != "extscan-schema") {
    throw InputError("BadSchemaFile", "not an extscan schema document");
  }
  PermissionCatalog catalog;
  catalog.names = j.at("catalog").get<std::vector<std::string>>();
  auto vocab_from = [&](const char* key, TopKField kind) {
    const auto& v = j.at(key);
    TopKVocabulary out;
    out.field_kind = kind;
    out.k = v.at("k").get<std::size_t>();
    out.entries = v.at("entries").get<std::vector<std::string>>();
    return out;
  };
  std::map<std::string, JsNodeType> unit_by_name;
  for (std::size_t i = 0; i < kJsNodeTypeCount; ++i) {
    unit_by_name.emplace(js_node_type_name(static_cast<JsNodeType>(i)),
                         static_cast<JsNodeType>(i));
  }
  NGramVocabulary ngrams;
  for (const auto& tuple : j.at("ngrams")) {
    UnitGram g{};
    for (std::size_t i = 0; i < 4; ++i) {
      auto it = unit_by_name.find(tuple.at(i).get<std::string>());
      if (it == unit_by_name.end()) {
        throw InputError("BadSchemaFile", "unknown syntactic unit in ngrams");
      }
      g[i] = it->second;
    }
    ngrams.grams.push_back(g);
  }
  FeatureSchema s = freeze_schema(std::move(catalog),
                                  vocab_from("host_permissions", TopKField::host_permission),
                                  vocab_from("cs_matches", TopKField::cs_match),
                                  vocab_from("description_kw", TopKField::description_kw),
                                  vocab_from("summary_kw", TopKField::summary_kw),
                                  vocab_from("review_kw", TopKField::review_kw),
                                  std::move(ngrams));
  std::string recorded = j.value("digest", "");
  if (!recorded.empty() && recorded != s.digest) {
    throw InputError("DigestMismatch", "schema digest does not match content");
  }
  return s;
}

}  // namespace extscan
