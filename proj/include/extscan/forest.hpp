#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "extscan/common.hpp"
#include "extscan/matrix.hpp"
#include "extscan/rng.hpp"
#include "extscan/sha256.hpp"

namespace extscan {

struct TrainConfig {
  std::size_t n_trees = 300;
  bool bootstrap = true;
  bool balanced_class_weight = true;
  std::size_t min_samples_leaf = 1;
  std::size_t max_depth = 0;  // 0 = unbounded
  std::uint64_t seed = 0;

  static std::size_t mtry(std::size_t dim) {
    return std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(dim)))));
  }

  std::string canonical() const {
    return "trees=" + std::to_string(n_trees) +
           ";bootstrap=" + std::to_string(bootstrap ? 1 : 0) +
           ";balanced=" + std::to_string(balanced_class_weight ? 1 : 0) +
           ";min_leaf=" + std::to_string(min_samples_leaf) +
           ";max_depth=" + std::to_string(max_depth) +
           ";seed=" + std::to_string(seed);
  }
};

/// Axis-aligned binary decision tree, flattened. Leaves hold the weighted
/// majority vote (1 = malicious).
struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // go left when x[feature] <= threshold
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::uint8_t vote = 0;
};

struct Tree {
  std::vector<TreeNode> nodes;

  bool predict(const double* row) const {
    std::int32_t at = 0;
    while (nodes[static_cast<std::size_t>(at)].feature >= 0) {
      const TreeNode& n = nodes[static_cast<std::size_t>(at)];
      at = row[n.feature] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(at)].vote != 0;
  }
};

struct Forest {
  std::vector<Tree> trees;
  std::size_t feature_dim = 0;
  std::string schema_digest;
  std::string train_fingerprint;
  std::vector<double> importance_raw;  // summed weighted Gini decrease per feature

  /// Fraction of trees voting malicious: values on the grid {k/n_trees}.
  double predict_proba(const double* row) const {
    std::size_t votes = 0;
    for (const Tree& t : trees) votes += t.predict(row) ? 1 : 0;
    return static_cast<double>(votes) / static_cast<double>(trees.size());
  }

  double predict_proba(const std::vector<double>& row) const {
    if (row.size() != feature_dim) {
      throw UsageError("DimMismatch", "row has " + std::to_string(row.size()) +
                                          " features, forest expects " +
                                          std::to_string(feature_dim));
    }
    return predict_proba(row.data());
  }
};

namespace forestdetail {

struct TrainView {
  const FeatureMatrix* matrix;
  std::vector<std::size_t> rows;  // usable rows
  std::vector<double> weights;    // per usable row
};

struct Split {
  std::int32_t feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const TrainView& view, const TrainConfig& config, std::size_t mtry,
              Rng rng)
      : view_(view), config_(config), mtry_(mtry), rng_(rng) {}

  Tree build(std::vector<double>* importance) {
    importance_ = importance;
    std::vector<std::size_t> samples;
    const auto& rows = view_.rows;
    samples.reserve(rows.size());
    if (config_.bootstrap) {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        samples.push_back(rng_.index(rows.size()));
      }
    } else {
      for (std::size_t i = 0; i < rows.size(); ++i) samples.push_back(i);
    }
    Tree tree;
    grow(tree, samples, 1);
    return tree;
  }

 private:
  // samples hold indices into view_.rows / view_.weights.
  std::int32_t grow(Tree& tree, std::vector<std::size_t>& samples, std::size_t depth) {
    double w_pos = 0.0, w_total = 0.0;
    for (std::size_t s : samples) {
      double w = view_.weights[s];
      w_total += w;
      if (label_of(s)) w_pos += w;
    }
    std::int32_t node_id = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.push_back({});
    bool pure = w_pos <= 0.0 || w_pos >= w_total;
    bool depth_capped = config_.max_depth != 0 && depth > config_.max_depth;
    if (pure || depth_capped || samples.size() < 2 * config_.min_samples_leaf) {
      make_leaf(tree, node_id, w_pos, w_total);
      return node_id;
    }
    Split split = best_split(samples, w_pos, w_total);
    if (split.feature < 0) {
      make_leaf(tree, node_id, w_pos, w_total);
      return node_id;
    }
    std::vector<std::size_t> left, right;
    left.reserve(samples.size());
    right.reserve(samples.size());
    const double* col = view_.matrix->column(static_cast<std::size_t>(split.feature));
    for (std::size_t s : samples) {
      if (col[view_.rows[s]] <= split.threshold) {
        left.push_back(s);
      } else {
        right.push_back(s);
      }
    }
    if (left.empty() || right.empty() || left.size() < config_.min_samples_leaf ||
        right.size() < config_.min_samples_leaf) {
      make_leaf(tree, node_id, w_pos, w_total);
      return node_id;
    }
    if (importance_ != nullptr) {
      (*importance_)[static_cast<std::size_t>(split.feature)] += split.gain;
    }
    samples.clear();
    samples.shrink_to_fit();
    tree.nodes[static_cast<std::size_t>(node_id)].feature = split.feature;
    tree.nodes[static_cast<std::size_t>(node_id)].threshold = split.threshold;
    std::int32_t l = grow(tree, left, depth + 1);
    tree.nodes[static_cast<std::size_t>(node_id)].left = l;
    std::int32_t r = grow(tree, right, depth + 1);
    tree.nodes[static_cast<std::size_t>(node_id)].right = r;
    return node_id;
  }

  void make_leaf(Tree& tree, std::int32_t node_id, double w_pos, double w_total) {
    TreeNode& n = tree.nodes[static_cast<std::size_t>(node_id)];
    n.feature = -1;
    n.vote = w_pos * 2.0 > w_total ? 1 : 0;
  }

  bool label_of(std::size_t sample) const {
    return view_.matrix->labels[view_.rows[sample]] == Label::malicious;
  }

  static double gini_term(double w_pos, double w_total) {
    if (w_total <= 0.0) return 0.0;
    double p = w_pos / w_total;
    return w_total * 2.0 * p * (1.0 - p);
  }

  Split best_split(const std::vector<std::size_t>& samples, double w_pos,
                   double w_total) {
    Split best;
    // Feature subset: floor(sqrt(d)) draws without replacement. When every
    // drawn feature is constant over the node, keep drawing so separable
    // nodes always split.
    std::size_t dim = view_.matrix->n_cols;
    feature_pick_.resize(dim);
    std::iota(feature_pick_.begin(), feature_pick_.end(), 0);
    std::size_t budget = std::min(mtry_, dim);
    double parent_gini = gini_term(w_pos, w_total);
    for (std::size_t k = 0; k < dim; ++k) {
      if (k >= budget && best.feature >= 0) break;
      std::size_t j = k + rng_.index(dim - k);
      std::swap(feature_pick_[k], feature_pick_[j]);
      std::size_t feature = feature_pick_[k];
      evaluate_feature(feature, samples, w_pos, w_total, parent_gini, best);
    }
    return best;
  }

  void evaluate_feature(std::size_t feature, const std::vector<std::size_t>& samples,
                        double w_pos, double w_total, double parent_gini, Split& best) {
    const double* col = view_.matrix->column(feature);
    scratch_.clear();
    scratch_.reserve(samples.size());
    for (std::size_t s : samples) {
      scratch_.push_back({col[view_.rows[s]], view_.weights[s], label_of(s)});
    }
    std::sort(scratch_.begin(), scratch_.end(),
              [](const Obs& a, const Obs& b) { return a.value < b.value; });
    if (scratch_.front().value == scratch_.back().value) return;
    double left_pos = 0.0, left_total = 0.0;
    for (std::size_t i = 0; i + 1 < scratch_.size(); ++i) {
      left_total += scratch_[i].weight;
      if (scratch_[i].positive) left_pos += scratch_[i].weight;
      if (scratch_[i].value == scratch_[i + 1].value) continue;
      double gain = parent_gini - gini_term(left_pos, left_total) -
                    gini_term(w_pos - left_pos, w_total - left_total);
      if (gain > best.gain + 1e-15) {
        best.gain = gain;
        best.feature = static_cast<std::int32_t>(feature);
        best.threshold =
            scratch_[i].value + (scratch_[i + 1].value - scratch_[i].value) / 2.0;
        // Guard midpoints that round back onto the left value.
        if (best.threshold <= scratch_[i].value) best.threshold = scratch_[i].value;
      }
    }
  }

  struct Obs {
    double value;
    double weight;
    bool positive;
  };

  const TrainView& view_;
  const TrainConfig& config_;
  std::size_t mtry_;
  Rng rng_;
  std::vector<std::size_t> feature_pick_;
  std::vector<Obs> scratch_;
  std::vector<double>* importance_ = nullptr;
};

inline TrainView make_view(const FeatureMatrix& matrix) {
  TrainView view;
  view.matrix = &matrix;
  for (std::size_t r = 0; r < matrix.n_rows; ++r) {
    if (matrix.row_usable(r)) view.rows.push_back(r);
  }
  return view;
}

inline void apply_class_weights(TrainView& view, bool balanced) {
  std::size_t n_pos = 0;
  for (std::size_t r : view.rows) {
    n_pos += view.matrix->labels[r] == Label::malicious ? 1 : 0;
  }
  std::size_t n = view.rows.size();
  std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw InputError("DegenerateData", "training data has a single class");
  }
  view.weights.resize(n);
  double w_pos = balanced ? static_cast<double>(n) / (2.0 * static_cast<double>(n_pos)) : 1.0;
  double w_neg = balanced ? static_cast<double>(n) / (2.0 * static_cast<double>(n_neg)) : 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    view.weights[i] =
        view.matrix->labels[view.rows[i]] == Label::malicious ? w_pos : w_neg;
  }
}

inline unsigned worker_count() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

/// Runs fn(i) for i in [0, n) across a small thread pool. Results must be
/// written to disjoint slots; seeds are derived per index so the schedule
/// cannot change the output.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  unsigned workers = std::min<std::size_t>(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::size_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    std::size_t begin = w * chunk;
    std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([begin, end, &fn] {
      for (std::size_t i = begin; i < end; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace forestdetail

/// Random forest: bootstrap resamples, sqrt(d) feature subsets per split,
/// weighted Gini criterion, growth to purity. Per-tree seeds derive from
/// (config.seed, tree index) so training parallelism never changes the
/// model.
inline Forest train_forest(const FeatureMatrix& matrix, const TrainConfig& config) {
  if (config.n_trees == 0) throw UsageError("BadConfig", "n_trees must be >= 1");
  
  forestdetail::TrainView view = forestdetail::make_view(matrix);
  forestdetail::apply_class_weights(view, config.balanced_class_weight);

  Forest forest;
  forest.feature_dim = matrix.n_cols;
  forest.schema_digest = matrix.schema_digest;
  forest.trees.resize(config.n_trees);
  std::size_t mtry = TrainConfig::mtry(matrix.n_cols);

  std::vector<std::vector<double>> importances(config.n_trees);
  forestdetail::parallel_for(config.n_trees, [&](std::size_t t) {
    importances[t].assign(matrix.n_cols, 0.0);
    forestdetail::TreeBuilder builder(view, config, mtry,
                                       Rng(mix_seed(config.seed, t)));
    forest.trees[t] = builder.build(&importances[t]);
  });
  forest.importance_raw.assign(matrix.n_cols, 0.0);
  for (const auto& imp : importances) {
    for (std::size_t c = 0; c < imp.size(); ++c) forest.importance_raw[c] += imp[c];
  }

  Sha256 h;
  h.update("extscan-forest-v1");
  h.update(config.canonical());
  h.update(matrix.schema_digest);
  h.update(std::to_string(view.rows.size()));
  for (std::size_t r : view.rows) {
    h.update(matrix.ids[r]);
    h.update("\x1f");
  }
  forest.train_fingerprint = h.finish_hex();
  return forest;
}

/// Mean-decrease-in-impurity ranking, importances normalized to sum 1.
inline std::vector<std::pair<std::size_t, double>> feature_importance(
    const Forest& forest) {
  double total = 0.0;
  for (double v : forest.importance_raw) total += v;
  std::vector<std::pair<std::size_t, double>> ranked;
  ranked.reserve(forest.importance_raw.size());
  for (std::size_t i = 0; i < forest.importance_raw.size(); ++i) {
    ranked.emplace_back(i, total > 0.0 ? forest.importance_raw[i] / total : 0.0);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return ranked;
}

}  // namespace extscan
