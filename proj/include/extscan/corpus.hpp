#pragma once

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "extscan/common.hpp"
#include "extscan/date.hpp"
#include "extscan/package.hpp"
#include "extscan/rng.hpp"

namespace extscan {

enum class Label { benign, malicious, unknown };

inline const char* to_string(Label l) {
  switch (l) {
    case Label::benign: return "benign";
    case Label::malicious: return "malicious";
    case Label::unknown: return "unknown";
  }
  return "?";
}

/// Sidecar label strings, including the takedown-reason alias.
inline std::optional<Label> parse_label(std::string_view s) {
  if (s == "benign" || s == "clean") return Label::benign;
  if (s == "malicious" || s == "malware") return Label::malicious;
  if (s == "unknown" || s.empty()) return Label::unknown;
  return std::nullopt;
}

struct ExtensionRecord {
  ExtensionPackage pkg;
  Label label = Label::unknown;
  Date last_update;
  std::uint64_t users = 0;
  std::uint64_t rating_count = 0;
  double rating_avg = 0.0;  // 0 when rating_count == 0
  std::string description;
  std::string summary;
  std::vector<std::string> reviews;
  std::uint64_t same_developer_count = 0;
  std::vector<std::set<std::string>> related_permission_sets;  // at most 4
  std::string category;

  const std::string& id() const { return pkg.id; }
};

struct Corpus {
  enum class Provenance { ingested, synthetic };
  std::vector<ExtensionRecord> records;
  Provenance provenance = Provenance::ingested;
  std::optional<std::uint64_t> seed;

  std::size_t size() const { return records.size(); }

  std::size_t count_label(Label l) const {
    std::size_t n = 0;
    for (const auto& r : records) n += r.label == l ? 1 : 0;
    return n;
  }
};

// ---- sidecar (meta.json) ----

inline void apply_sidecar_json(const nlohmann::json& doc, ExtensionRecord& rec) {
  auto str = [&](const char* key) -> std::string {
    auto it = doc.find(key);
    return it != doc.end() && it->is_string() ? it->get<std::string>() : std::string();
  };
  auto num = [&](const char* key, double fallback) -> double {
    auto it = doc.find(key);
    return it != doc.end() && it->is_number() ? it->get<double>() : fallback;
  };
  if (auto l = parse_label(str("label"))) {
    rec.label = *l;
  } else if (doc.contains("label")) {
    throw InputError("BadSidecar", "unrecognized label: " + str("label"));
  }
  if (doc.contains("last_update")) {
    auto d = Date::parse(str("last_update"));
    if (!d) throw InputError("BadSidecar", "bad last_update: " + str("last_update"));
    rec.last_update = *d;
  }
  rec.users = static_cast<std::uint64_t>(std::max(0.0, num("users", 0)));
  rec.rating_count = static_cast<std::uint64_t>(std::max(0.0, num("rating_count", 0)));
  rec.rating_avg = std::clamp(num("rating_avg", 0.0), 0.0, 5.0);
  if (rec.rating_count == 0) rec.rating_avg = 0.0;
  rec.description = str("description");
  rec.summary = str("summary");
  if (auto it = doc.find("reviews"); it != doc.end() && it->is_array()) {
    for (const auto& r : *it) {
      if (r.is_string()) rec.reviews.push_back(r.get<std::string>());
    }
  }
  rec.same_developer_count =
      static_cast<std::uint64_t>(std::max(0.0, num("same_developer_count", 0)));
  if (auto it = doc.find("related_permissions"); it != doc.end() && it->is_array()) {
    for (const auto& set_json : *it) {
      if (!set_json.is_array()) continue;
      std::set<std::string> s;
      for (const auto& p : set_json) {
        if (p.is_string()) s.insert(p.get<std::string>());
      }
      rec.related_permission_sets.push_back(std::move(s));
      if (rec.related_permission_sets.size() == 4) break;  // schema cap
    }
  }
  rec.category = str("category");
}

inline nlohmann::json sidecar_to_json(const ExtensionRecord& rec) {
  nlohmann::json j;
  j["id"] = rec.id();
  j["label"] = to_string(rec.label);
  j["last_update"] = rec.last_update.to_string();
  j["users"] = rec.users;
  j["rating_count"] = rec.rating_count;
  j["rating_avg"] = rec.rating_avg;
  j["description"] = rec.description;
  j["summary"] = rec.summary;
  j["reviews"] = rec.reviews;
  j["same_developer_count"] = rec.same_developer_count;
  nlohmann::json related = nlohmann::json::array();
  for (const auto& s : rec.related_permission_sets) {
    related.push_back(std::vector<std::string>(s.begin(), s.end()));
  }
  j["related_permissions"] = related;
  j["category"] = rec.category;
  return j;
}

// ---- ingestion ----

/// Corpus directory layout: one subdirectory per extension holding
/// meta.json plus package.crx, package.zip, or an unpacked package/ tree.
/// Per-extension problems become warnings; only an entirely unusable
/// directory is an error.
inline Corpus ingest(const std::filesystem::path& root, WarningLog* warnings) {
  namespace fs = std::filesystem;
  if (!fs::exists(root) || !fs::is_directory(root)) {
    throw InputError("MissingDirectory", root.string());
  }
  Corpus corpus;
  corpus.provenance = Corpus::Provenance::ingested;
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  std::set<std::string> seen_ids;
  for (const auto& dir : dirs) {
    std::string fallback_id = dir.filename().string();
    fs::path sidecar = dir / "meta.json";
    if (!fs::exists(sidecar)) {
      if (warnings) warnings->push_back({fallback_id, "MissingSidecar", sidecar.string()});
      continue;
    }
    ExtensionRecord rec;
    std::string id = fallback_id;
    try {
      nlohmann::json doc = nlohmann::json::parse(read_text_file(sidecar), nullptr, false);
      if (doc.is_discarded() || !doc.is_object()) {
        throw InputError("BadSidecar", "meta.json is not a JSON object");
      }
      if (auto it = doc.find("id"); it != doc.end() && it->is_string()) {
        id = it->get<std::string>();
      }
      apply_sidecar_json(doc, rec);
    } catch (const InputError& e) {
      if (warnings) warnings->push_back({fallback_id, "BadSidecar", e.what()});
      continue;
    }
    try {
      if (fs::exists(dir / "package.crx")) {
        rec.pkg = load_package(id, read_file(dir / "package.crx"), warnings);
      } else if (fs::exists(dir / "package.zip")) {
        rec.pkg = load_package(id, read_file(dir / "package.zip"), warnings);
      } else if (fs::exists(dir / "package") && fs::is_directory(dir / "package")) {
        rec.pkg = load_package_dir(id, dir / "package", warnings);
      } else {
        throw InputError("MissingPackage", "no package.crx/.zip or package/ tree");
      }
    } catch (const InputError& e) {
      if (warnings) warnings->push_back({id, "UnreadablePackage", e.what()});
      continue;
    }
    if (!is_eligible(rec.pkg)) {
      if (warnings) warnings->push_back({rec.id(), "Ineligible", "filtered out"});
      continue;
    }
    if (!seen_ids.insert(rec.id()).second) {
      if (warnings) warnings->push_back({rec.id(), "DuplicateId", dir.string()});
      continue;
    }
    corpus.records.push_back(std::move(rec));
  }
  if (corpus.records.empty()) {
    throw InputError("EmptyCorpus", root.string());
  }
  return corpus;
}

// ---- splits ----

/// Stratified sampling without replacement; per-class counts are
/// round(ratio * n_class). Deterministic under the seed.
inline std::pair<Corpus, Corpus> split_random(const Corpus& corpus, double ratio,
                                              std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw UsageError("InvalidRatio", "ratio must be in (0,1)");
  }
  std::map<Label, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    by_label[corpus.records[i].label].push_back(i);
  }
  std::vector<bool> in_train(corpus.records.size(), false);
  for (auto& [label, indices] : by_label) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(label)));
    rng.shuffle(indices);
    std::size_t take = static_cast<std::size_t>(
        static_cast<double>(indices.size()) * ratio + 0.5);
    take = std::min(take, indices.size());
    for (std::size_t k = 0; k < take; ++k) in_train[indices[k]] = true;
  }
  Corpus train, test;
  train.provenance = test.provenance = corpus.provenance;
  train.seed = test.seed = corpus.seed;
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    (in_train[i] ? train : test).records.push_back(corpus.records[i]);
  }
  return {std::move(train), std::move(test)};
}

/// Train side: strictly before Jan 1 of `year`. Test side: within `year`.
/// Records after the year are left out entirely.
inline std::pair<Corpus, Corpus> split_temporal(const Corpus& corpus, int year) {
  Date cutoff{year, 1, 1};
  Corpus train, test;
  train.provenance = test.provenance = corpus.provenance;
  train.seed = test.seed = corpus.seed;
  for (const auto& rec : corpus.records) {
    if (rec.last_update < cutoff) {
      train.records.push_back(rec);
    } else if (rec.last_update.year == year) {
      test.records.push_back(rec);
    }
  }
  if (train.records.empty() || test.records.empty()) {
    throw InputError("EmptySide", "temporal split at year " + std::to_string(year));
  }
  return {std::move(train), std::move(test)};
}

/// Twelve buckets for one calendar year; empty months allowed.
inline std::vector<Corpus> split_monthly(const Corpus& corpus, int year) {
  std::vector<Corpus> months(12);
  for (auto& m : months) {
    m.provenance = corpus.provenance;
    m.seed = corpus.seed;
  }
  for (const auto& rec : corpus.records) {
    if (rec.last_update.year == year) {
      months[static_cast<std::size_t>(rec.last_update.month - 1)].records.push_back(rec);
    }
  }
  return months;
}

}  // namespace extscan
