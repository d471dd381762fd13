#pragma once

#include <map>
#include <string>
#include <vector>

#include "extscan/corpus.hpp"
#include "extscan/text.hpp"
#include "extscan/vocab.hpp"

namespace extscan {

struct MetadataVector {
  std::vector<double> values;  // metadata_dim() slots, layout order
  std::string schema_digest;
};

/// Per-permission deltas against the recommended-neighbor sets: slot(p) is
/// -n when the extension declares p and n of the available related sets
/// (at most four) do not contain it; 0 for undeclared permissions.
inline std::vector<int> related_permissions(const ExtensionRecord& rec,
                                            const PermissionCatalog& catalog) {
  std::vector<int> out(catalog.size(), 0);
  if (rec.related_permission_sets.empty()) return out;
  for (const auto& declared : rec.pkg.manifest.api_permissions) {
    int slot = catalog.index_of(declared);
    if (slot < 0) continue;
    int missing = 0;
    for (const auto& related : rec.related_permission_sets) {
      if (related.count(declared) == 0) ++missing;
    }
    out[static_cast<std::size_t>(slot)] = -missing;
  }
  return out;
}

/// Cache of the schema's lookup indices; building them once per corpus
/// keeps extraction linear.
struct MetadataExtractor {
  explicit MetadataExtractor(const FeatureSchema& schema)
      : schema_(&schema),
        host_idx_(schema.host_permissions.index()),
        cs_idx_(schema.cs_matches.index()),
        desc_idx_(schema.description_kw.index()),
        summary_idx_(schema.summary_kw.index()),
        review_idx_(schema.review_kw.index()) {}

  MetadataVector extract(const ExtensionRecord& rec) const {
    const FeatureSchema& s = *schema_;
    MetadataVector out;
    out.schema_digest = s.digest;
    out.values.assign(s.metadata_dim(), 0.0);

    auto put = [&](const FeatureFamily& fam, std::size_t i, double v) {
      out.values[fam.offset + i] = v;
    };

    const FeatureFamily& perms = s.family("permissions");
    for (const auto& p : rec.pkg.manifest.api_permissions) {
      int slot = s.catalog.index_of(p);
      if (slot >= 0) put(perms, static_cast<std::size_t>(slot), 1.0);
    }

    fill_membership(out, s.family("host_permissions"), host_idx_,
                    topk_values_of(rec, TopKField::host_permission));
    fill_membership(out, s.family("cs_matches"), cs_idx_,
                    topk_values_of(rec, TopKField::cs_match));

    std::size_t cs_files = 0;
    for (const auto& cs : rec.pkg.manifest.content_scripts) cs_files += cs.js.size();
    put(s.family("num_content_scripts"), 0, static_cast<double>(cs_files));
    std::size_t workers = rec.pkg.manifest.background_scripts.size() +
                          (rec.pkg.manifest.has_service_worker() ? 1 : 0);
    put(s.family("num_service_workers"), 0, static_cast<double>(workers));

    put(s.family("users"), 0, static_cast<double>(rec.users));
    put(s.family("rating_avg"), 0, rec.rating_count == 0 ? 0.0 : rec.rating_avg);
    put(s.family("rating_count"), 0, static_cast<double>(rec.rating_count));

    fill_membership(out, s.family("description_kw"), desc_idx_,
                    topk_values_of(rec, TopKField::description_kw));
    fill_membership(out, s.family("summary_kw"), summary_idx_,
                    topk_values_of(rec, TopKField::summary_kw));
    fill_membership(out, s.family("review_kw"), review_idx_,
                    topk_values_of(rec, TopKField::review_kw));

    put(s.family("same_developer_count"), 0,
        static_cast<double>(rec.same_developer_count));
    put(s.family("crx_size"), 0, static_cast<double>(rec.pkg.package_byte_size));
    put(s.family("file_count"), 0, static_cast<double>(rec.pkg.files.size()));
    put(s.family("js_file_count"), 0, static_cast<double>(rec.pkg.js_file_count()));
    put(s.family("js_size"), 0, static_cast<double>(rec.pkg.js_byte_size()));

    const FeatureFamily& related = s.family("related_permissions");
    std::vector<int> deltas = related_permissions(rec, s.catalog);
    for (std::size_t i = 0; i < deltas.size(); ++i) {
      put(related, i, static_cast<double>(deltas[i]));
    }
    return out;
  }

 private:
  static void fill_membership(MetadataVector& out, const FeatureFamily& fam,
                              const std::map<std::string, std::size_t>& index,
                              const std::set<std::string>& values) {
    for (const auto& v : values) {
      auto it = index.find(v);
      if (it != index.end()) out.values[fam.offset + it->second] = 1.0;
    }
  }

  const FeatureSchema* schema_;
  std::map<std::string, std::size_t> host_idx_;
  std::map<std::string, std::size_t> cs_idx_;
  std::map<std::string, std::size_t> desc_idx_;
  std::map<std::string, std::size_t> summary_idx_;
  std::map<std::string, std::size_t> review_idx_;
};

inline MetadataVector extract_metadata(const ExtensionRecord& rec,
                                       const FeatureSchema& schema) {
  return MetadataExtractor(schema).extract(rec);
}

}  // namespace extscan
