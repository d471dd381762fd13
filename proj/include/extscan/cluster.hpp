#pragma once

#include <json.hpp>

#include <algorithm>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "extscan/corpus.hpp"
#include "extscan/ctph.hpp"

namespace extscan {

struct ClusterSet {
  std::vector<std::vector<std::string>> clusters;  // each >= 2 members
  std::vector<std::string> unclustered;
};

namespace clusterdetail {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void merge(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace clusterdetail

/// Single-linkage grouping of pre-hashed items: any pair scoring strictly
/// above min_similarity joins the same cluster (transitively). Clusters of
/// one are reported as unclustered.
inline ClusterSet cluster_hashes(const std::vector<std::pair<std::string, FuzzyHash>>& items,
                                 int min_similarity = 90) {
  clusterdetail::UnionFind uf(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    for (std::size_t j = i + 1; j < items.size(); ++j) {
      if (similarity(items[i].second, items[j].second) > min_similarity) {
        uf.merge(i, j);
      }
    }
  }
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < items.size(); ++i) groups[uf.find(i)].push_back(i);
  ClusterSet out;
  for (auto& [root, members] : groups) {
    if (members.size() < 2) {
      out.unclustered.push_back(items[members[0]].first);
      continue;
    }
    std::vector<std::string> ids;
    ids.reserve(members.size());
    for (std::size_t m : members) ids.push_back(items[m].first);
    std::sort(ids.begin(), ids.end());
    out.clusters.push_back(std::move(ids));
  }
  std::sort(out.clusters.begin(), out.clusters.end(),
            [](const auto& a, const auto& b) {
              if (a.size() != b.size()) return a.size() > b.size();
              return a.front() < b.front();
            });
  std::sort(out.unclustered.begin(), out.unclustered.end());
  return out;
}

/// Hashes each record's concatenated script bundle and clusters the
/// flagged set. Records without a bundle are reported unclustered.
inline ClusterSet cluster_flagged(const Corpus& corpus,
                                  const std::vector<std::string>& flagged_ids,
                                  int min_similarity = 90) {
  std::map<std::string, const ExtensionRecord*> by_id;
  for (const auto& rec : corpus.records) by_id.emplace(rec.id(), &rec);
  std::vector<std::pair<std::string, FuzzyHash>> items;
  ClusterSet pre;
  for (const auto& id : flagged_ids) {
    auto it = by_id.find(id);
    if (it == by_id.end() || !it->second->pkg.script_bundle ||
        it->second->pkg.script_bundle->concatenated_source.empty()) {
      pre.unclustered.push_back(id);
      continue;
    }
    items.emplace_back(id, ctph(it->second->pkg.script_bundle->concatenated_source));
  }
  ClusterSet out = cluster_hashes(items, min_similarity);
  out.unclustered.insert(out.unclustered.end(), pre.unclustered.begin(),
                         pre.unclustered.end());
  std::sort(out.unclustered.begin(), out.unclustered.end());
  return out;
}

inline nlohmann::json cluster_report_json(
    const ClusterSet& set,
    const std::vector<std::pair<std::string, FuzzyHash>>& hashes = {}) {
  std::map<std::string, std::string> hash_by_id;
  for (const auto& [id, h] : hashes) hash_by_id.emplace(id, h.to_string());
  nlohmann::json clusters = nlohmann::json::array();
  for (const auto& members : set.clusters) {
    nlohmann::json c;
    c["members"] = members;
    c["size"] = members.size();
    auto it = hash_by_id.find(members.front());
    if (it != hash_by_id.end()) c["representative_hash"] = it->second;
    clusters.push_back(std::move(c));
  }
  nlohmann::json j;
  j["clusters"] = clusters;
  j["unclustered"] = set.unclustered;
  return j;
}

}  // namespace extscan
