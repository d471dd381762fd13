#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "extscan/common.hpp"
#include "extscan/corpus.hpp"
#include "extscan/feat_meta.hpp"
#include "extscan/feat_src.hpp"
#include "extscan/vocab.hpp"

namespace extscan {

enum class Flavor { metadata, source, combined };

inline const char* to_string(Flavor f) {
  switch (f) {
    case Flavor::metadata: return "metadata";
    case Flavor::source: return "source";
    case Flavor::combined: return "combined";
  }
  return "?";
}

inline Flavor flavor_from_string(const std::string& s) {
  if (s == "metadata") return Flavor::metadata;
  if (s == "source") return Flavor::source;
  if (s == "combined") return Flavor::combined;
  throw InputError("BadFlavor", s);
}

/// Feature rows for one corpus and flavor, column-major for training.
/// Row attributes carry everything evaluation slices on, so a matrix file
/// is self-sufficient downstream.
struct FeatureMatrix {
  Flavor flavor = Flavor::metadata;
  std::string schema_digest;
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<std::string> ids;
  std::vector<Label> labels;
  std::vector<Date> dates;
  std::vector<std::string> categories;
  std::vector<std::uint8_t> manifest_versions;
  std::vector<std::uint8_t> source_present;
  std::vector<double> values;  // col * n_rows + row

  double at(std::size_t row, std::size_t col) const {
    return values[col * n_rows + row];
  }
  void set(std::size_t row, std::size_t col, double v) {
    values[col * n_rows + row] = v;
  }

  const double* column(std::size_t col) const { return values.data() + col * n_rows; }

  std::vector<double> row(std::size_t r) const {
    std::vector<double> out(n_cols);
    for (std::size_t c = 0; c < n_cols; ++c) out[c] = at(r, c);
    return out;
  }

  /// Rows usable for this flavor (source/combined need source features).
  bool row_usable(std::size_t r) const {
    return flavor == Flavor::metadata || source_present[r] != 0;
  }
};

inline std::size_t flavor_dim(const FeatureSchema& schema, Flavor flavor) {
  switch (flavor) {
    case Flavor::metadata: return schema.metadata_dim();
    case Flavor::source: return schema.source_dim();
    case Flavor::combined: return schema.combined_dim();
  }
  return 0;
}

/// Extracts the flavor's feature slice for every record. Records without a
/// parsable bundle get zero source slots and source_present = 0; metadata
/// rows are always populated (parse failures never drop a record from
/// metadata-only classification).
inline FeatureMatrix extract_features(const Corpus& corpus, const FeatureSchema& schema,
                                      Flavor flavor) {
  FeatureMatrix m;
  m.flavor = flavor;
  m.schema_digest = schema.digest;
  m.n_rows = corpus.records.size();
  m.n_cols = flavor_dim(schema, flavor);
  m.values.assign(m.n_rows * m.n_cols, 0.0);
  m.ids.reserve(m.n_rows);

  MetadataExtractor meta(schema);
  auto gram_index = schema.ngrams.index();
  std::size_t meta_dim = schema.metadata_dim();

  for (std::size_t r = 0; r < corpus.records.size(); ++r) {
    const ExtensionRecord& rec = corpus.records[r];
    m.ids.push_back(rec.id());
    m.labels.push_back(rec.label);
    m.dates.push_back(rec.last_update);
    m.categories.push_back(rec.category);
    m.manifest_versions.push_back(
        static_cast<std::uint8_t>(rec.pkg.manifest.manifest_version));

    std::size_t src_off = 0;
    if (flavor != Flavor::source) {
      MetadataVector mv = meta.extract(rec);
      for (std::size_t c = 0; c < mv.values.size(); ++c) m.set(r, c, mv.values[c]);
      src_off = meta_dim;
    }
    if (flavor == Flavor::metadata) {
      m.source_present.push_back(1);
      continue;
    }
    auto sv = extract_source(rec.pkg, schema.ngrams, gram_index, schema.digest);
    m.source_present.push_back(sv ? 1 : 0);
    if (sv) {
      for (std::size_t c = 0; c < sv->values.size(); ++c) {
        m.set(r, src_off + c, sv->values[c]);
      }
    }
  }
  return m;
}

// ---- binary format (documented in docs/formats.md) ----

namespace matrixio {
constexpr char kMagic[4] = {'X', 'F', 'M', 'X'};
constexpr std::uint32_t kVersion = 1;
}  // namespace matrixio

inline Bytes matrix_to_bytes(const FeatureMatrix& m) {
  Bytes out;
  out.insert(out.end(), matrixio::kMagic, matrixio::kMagic + 4);
  append_u32le(out, matrixio::kVersion);
  out.push_back(static_cast<std::uint8_t>(m.flavor));
  append_u32le(out, static_cast<std::uint32_t>(m.schema_digest.size()));
  out.insert(out.end(), m.schema_digest.begin(), m.schema_digest.end());
  append_u64le(out, m.n_rows);
  append_u64le(out, m.n_cols);
  auto put_string = [&out](const std::string& s) {
    append_u32le(out, static_cast<std::uint32_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
  };
  for (std::size_t r = 0; r < m.n_rows; ++r) {
    put_string(m.ids[r]);
    out.push_back(static_cast<std::uint8_t>(m.labels[r]));
    append_u32le(out, static_cast<std::uint32_t>(m.dates[r].to_days() + (1 << 30)));
    put_string(m.categories[r]);
    out.push_back(m.manifest_versions[r]);
    out.push_back(m.source_present[r]);
  }
  std::size_t value_bytes = m.values.size() * sizeof(double);
  const auto* p = reinterpret_cast<const std::uint8_t*>(m.values.data());
  out.insert(out.end(), p, p + value_bytes);
  return out;
}

inline FeatureMatrix matrix_from_bytes(BytesView data) {
  std::size_t pos = 0;
  auto need = [&](std::size_t n) {
    if (pos + n > data.size()) throw InputError("BadMatrixFile", "truncated");
  };
  need(9);
  if (!std::equal(matrixio::kMagic, matrixio::kMagic + 4, data.begin())) {
    throw InputError("BadMatrixFile", "bad magic");
  }
  pos = 4;
  std::uint32_t version = read_u32le(data.data() + pos);
  pos += 4;
  if (version != matrixio::kVersion) {
    throw InputError("VersionMismatch", "matrix format v" + std::to_string(version));
  }
  FeatureMatrix m;
  m.flavor = static_cast<Flavor>(data[pos++]);
  auto get_string = [&]() {
    need(4);
    std::uint32_t len = read_u32le(data.data() + pos);
    pos += 4;
    need(len);
    std::string s(data.begin() + pos, data.begin() + pos + len);
    pos += len;
    return s;
  };
  m.schema_digest = get_string();
  need(16);
  m.n_rows = static_cast<std::size_t>(read_u32le(data.data() + pos)) |
             (static_cast<std::size_t>(read_u32le(data.data() + pos + 4)) << 32);
  pos += 8;
  m.n_cols = static_cast<std::size_t>(read_u32le(data.data() + pos)) |
             (static_cast<std::size_t>(read_u32le(data.data() + pos + 4)) << 32);
  pos += 8;
  for (std::size_t r = 0; r < m.n_rows; ++r) {
    m.ids.push_back(get_string());
    need(1);
    m.labels.push_back(static_cast<Label>(data[pos++]));
    need(4);
    long days = static_cast<long>(read_u32le(data.data() + pos)) - (1 << 30);
    pos += 4;
    m.dates.push_back(Date::from_days(days));
    m.categories.push_back(get_string());
    need(2);
    m.manifest_versions.push_back(data[pos++]);
    m.source_present.push_back(data[pos++]);
  }
  std::size_t value_bytes = m.n_rows * m.n_cols * sizeof(double);
  need(value_bytes);
  m.values.resize(m.n_rows * m.n_cols);
  std::memcpy(m.values.data(), data.data() + pos, value_bytes);
  pos += value_bytes;
  return m;
}

/// Readable name for a combined-layout feature index.
inline std::string feature_display_name(const FeatureSchema& schema, std::size_t index) {
  const FeatureFamily& fam = schema.family_of_index(index);
  std::size_t local = index - fam.offset;
  auto entry_or_slot = [&](const TopKVocabulary& v) {
    return local < v.entries.size() ? v.entries[local]
                                    : "slot" + std::to_string(local);
  };
  if (fam.name == "permissions") return "Permissions " + schema.catalog.names[local];
  if (fam.name == "related_permissions") {
    return "RelatedPermissions " + schema.catalog.names[local];
  }
  if (fam.name == "host_permissions") {
    return "HostPermission " + entry_or_slot(schema.host_permissions);
  }
  if (fam.name == "cs_matches") return "CSMatch " + entry_or_slot(schema.cs_matches);
  if (fam.name == "description_kw") {
    return "Description " + entry_or_slot(schema.description_kw);
  }
  if (fam.name == "summary_kw") return "Summary " + entry_or_slot(schema.summary_kw);
  if (fam.name == "review_kw") return "Review " + entry_or_slot(schema.review_kw);
  if (fam.name == "source_ngrams") {
    const UnitGram& g = schema.ngrams.grams[local];
    std::string s = "Ngram ";
    for (std::size_t i = 0; i < 4; ++i) {
      if (i) s += "-";
      s += js_node_type_name(g[i]);
    }
    return s;
  }
  return fam.name;
}

inline std::string matrix_to_csv(const FeatureMatrix& m) {
  std::string out = "id,label";
  for (std::size_t c = 0; c < m.n_cols; ++c) out += ",f" + std::to_string(c);
  out += "\n";
  char buf[32];
  for (std::size_t r = 0; r < m.n_rows; ++r) {
    out += m.ids[r];
    out += ",";
    out += to_string(m.labels[r]);
    for (std::size_t c = 0; c < m.n_cols; ++c) {
      std::snprintf(buf, sizeof(buf), ",%.12g", m.at(r, c));
      out += buf;
    }
    out += "\n";
  }
  return out;
}

}  // namespace extscan
