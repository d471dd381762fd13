#pragma once

#include <algorithm>
#include <cstring>
#include <string>
#include <vector>

#include "extscan/forest.hpp"
#include "extscan/matrix.hpp"

namespace extscan {

struct FoldCalibration {
  double threshold = 0.0;  // per-fold argmax of Youden's J
  double j_value = 0.0;
};

struct CalibratedModel {
  Forest forest;
  Flavor flavor = Flavor::combined;
  double threshold = 0.0;
  std::vector<FoldCalibration> calibration_record;

  bool classify(const double* row) const {
    return forest.predict_proba(row) >= threshold;
  }
  bool classify(const std::vector<double>& row) const {
    return forest.predict_proba(row) >= threshold;
  }
};

namespace calibdetail {

/// Stratified fold assignment: per class, seeded shuffle then round-robin.
inline std::vector<std::size_t> fold_assignment(const FeatureMatrix& matrix,
                                                const std::vector<std::size_t>& rows,
                                                std::size_t folds, std::uint64_t seed) {
  std::vector<std::size_t> assignment(matrix.n_rows, 0);
  for (int cls = 0; cls < 2; ++cls) {
    std::vector<std::size_t> members;
    for (std::size_t r : rows) {
      bool pos = matrix.labels[r] == Label::malicious;
      if (pos == (cls == 1)) members.push_back(r);
    }
    if (members.size() < folds) {
      throw InputError("DegenerateFold",
                       std::string(cls == 1 ? "malicious" : "benign") +
                           " class has fewer samples than folds");
    }
    Rng rng(mix_seed(seed, 0xF01D + static_cast<std::uint64_t>(cls)));
    rng.shuffle(members);
    for (std::size_t i = 0; i < members.size(); ++i) {
      assignment[members[i]] = i % folds;
    }
  }
  return assignment;
}

/// Youden's J = TPR - FPR over the achievable vote-fraction grid
/// {k/n_trees}; ties prefer the smaller threshold.
inline FoldCalibration best_threshold_on_grid(const std::vector<double>& probas,
                                              const std::vector<bool>& positives,
                                              std::size_t n_trees) {
  std::size_t n_pos = 0, n_neg = 0;
  // votes_at[k] = how many samples have proba exactly k/n_trees.
  std::vector<std::size_t> pos_at(n_trees + 1, 0), neg_at(n_trees + 1, 0);
  for (std::size_t i = 0; i < probas.size(); ++i) {
    auto k = static_cast<std::size_t>(
        std::llround(probas[i] * static_cast<double>(n_trees)));
    if (positives[i]) {
      ++pos_at[k];
      ++n_pos;
    } else {
      ++neg_at[k];
      ++n_neg;
    }
  }
  FoldCalibration best;
  best.threshold = 0.0;
  best.j_value = -2.0;
  std::size_t pos_ge = n_pos, neg_ge = n_neg;  // counts with proba >= t
  for (std::size_t k = 0; k <= n_trees; ++k) {
    double t = static_cast<double>(k) / static_cast<double>(n_trees);
    double tpr = n_pos ? static_cast<double>(pos_ge) / static_cast<double>(n_pos) : 0.0;
    double fpr = n_neg ? static_cast<double>(neg_ge) / static_cast<double>(n_neg) : 0.0;
    double j = tpr - fpr;
    if (j > best.j_value) {  // strict: ties keep the smaller threshold
      best.j_value = j;
      best.threshold = t;
    }
    pos_ge -= pos_at[k];
    neg_ge -= neg_at[k];
  }
  return best;
}

}  // namespace calibdetail

/// Held-out probabilities of one calibration fold; exposed so tests can
/// replay the threshold sweep independently.
struct FoldData {
  std::vector<double> probas;
  std::vector<bool> positives;
};

/// K-fold cross-validated threshold: per fold, train on the remainder,
/// sweep Youden's J over the vote grid on the held-out fold, then average
/// the per-fold optima in fold order.
inline std::vector<FoldCalibration> calibrate_folds(const FeatureMatrix& matrix,
                                                    const TrainConfig& config,
                                                    std::size_t folds,
                                                    std::uint64_t seed,
                                                    std::vector<FoldData>* fold_data = nullptr) {
  forestdetail::TrainView all = forestdetail::make_view(matrix);
  std::vector<std::size_t> assignment =
      calibdetail::fold_assignment(matrix, all.rows, folds, seed);

  std::vector<FoldCalibration> record(folds);
  for (std::size_t f = 0; f < folds; ++f) {
    FeatureMatrix train_fold;
    train_fold.flavor = matrix.flavor;
    train_fold.schema_digest = matrix.schema_digest;
    train_fold.n_cols = matrix.n_cols;
    std::vector<std::size_t> val_rows;
    for (std::size_t r : all.rows) {
      if (assignment[r] == f) {
        val_rows.push_back(r);
      } else {
        train_fold.ids.push_back(matrix.ids[r]);
        train_fold.labels.push_back(matrix.labels[r]);
        train_fold.dates.push_back(matrix.dates[r]);
        train_fold.categories.push_back(matrix.categories[r]);
        train_fold.manifest_versions.push_back(matrix.manifest_versions[r]);
        train_fold.source_present.push_back(matrix.source_present[r]);
      }
    }
    train_fold.n_rows = train_fold.ids.size();
    train_fold.values.assign(train_fold.n_rows * train_fold.n_cols, 0.0);
    std::size_t tr = 0;
    for (std::size_t r : all.rows) {
      if (assignment[r] == f) continue;
      for (std::size_t c = 0; c < matrix.n_cols; ++c) {
        train_fold.set(tr, c, matrix.at(r, c));
      }
      ++tr;
    }
    TrainConfig fold_config = config;
    fold_config.seed = mix_seed(seed, 0xCA11B + f);
    Forest forest = train_forest(train_fold, fold_config);

    std::vector<double> probas;
    std::vector<bool> positives;
    std::vector<double> row(matrix.n_cols);
    for (std::size_t r : val_rows) {
      for (std::size_t c = 0; c < matrix.n_cols; ++c) row[c] = matrix.at(r, c);
      probas.push_back(forest.predict_proba(row.data()));
      positives.push_back(matrix.labels[r] == Label::malicious);
    }
    if (probas.empty()) throw InputError("DegenerateFold", "empty validation fold");
    record[f] = calibdetail::best_threshold_on_grid(probas, positives, config.n_trees);
    if (fold_data != nullptr) fold_data->push_back({probas, positives});
  }
  return record;
}

inline double calibrate_threshold(const FeatureMatrix& matrix, const TrainConfig& config,
                                  std::size_t folds, std::uint64_t seed) {
  std::vector<FoldCalibration> record = calibrate_folds(matrix, config, folds, seed);
  double sum = 0.0;
  for (const FoldCalibration& f : record) sum += f.threshold;
  return sum / static_cast<double>(record.size());
}

/// Full training path: calibrate on the training matrix, then train the
/// final forest on all of it.
inline CalibratedModel train_calibrated(const FeatureMatrix& matrix,
                                        const TrainConfig& config, std::size_t folds,
                                        std::uint64_t seed) {
  CalibratedModel model;
  model.flavor = matrix.flavor;
  model.calibration_record = calibrate_folds(matrix, config, folds, seed);
  double sum = 0.0;
  for (const FoldCalibration& f : model.calibration_record) sum += f.threshold;
  model.threshold = sum / static_cast<double>(model.calibration_record.size());
  model.forest = train_forest(matrix, config);
  return model;
}

// ---- model file (layout in docs/formats.md) ----

namespace modelio {
constexpr char kMagic[4] = {'X', 'M', 'D', 'L'};
constexpr std::uint32_t kVersion = 1;
}  // namespace modelio

inline Bytes model_to_bytes(const CalibratedModel& model) {
  Bytes out;
  out.insert(out.end(), modelio::kMagic, modelio::kMagic + 4);
  append_u32le(out, modelio::kVersion);
  out.push_back(static_cast<std::uint8_t>(model.flavor));
  auto put_string = [&out](const std::string& s) {
    append_u32le(out, static_cast<std::uint32_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
  };
  auto put_f64 = [&out](double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    append_u64le(out, bits);
  };
  put_string(model.forest.schema_digest);
  put_string(model.forest.train_fingerprint);
  append_u64le(out, model.forest.feature_dim);
  put_f64(model.threshold);
  append_u32le(out, static_cast<std::uint32_t>(model.calibration_record.size()));
  for (const FoldCalibration& f : model.calibration_record) {
    put_f64(f.threshold);
    put_f64(f.j_value);
  }
  append_u32le(out, static_cast<std::uint32_t>(model.forest.importance_raw.size()));
  for (double v : model.forest.importance_raw) put_f64(v);
  append_u32le(out, static_cast<std::uint32_t>(model.forest.trees.size()));
  for (const Tree& tree : model.forest.trees) {
    append_u32le(out, static_cast<std::uint32_t>(tree.nodes.size()));
    for (const TreeNode& n : tree.nodes) {
      append_u32le(out, static_cast<std::uint32_t>(n.feature));
      put_f64(n.threshold);
      append_u32le(out, static_cast<std::uint32_t>(n.left));
      append_u32le(out, static_cast<std::uint32_t>(n.right));
      out.push_back(n.vote);
    }
  }
  // Trailing content digest guards the whole payload.
  std::string digest = sha256_hex(BytesView(out.data(), out.size()));
  out.insert(out.end(), digest.begin(), digest.end());
  return out;
}

inline CalibratedModel model_from_bytes(BytesView data) {
  if (data.size() < 64 + 9) throw InputError("BadModelFile", "too small");
  std::size_t payload_len = data.size() - 64;
  std::string recorded(data.begin() + payload_len, data.end());
  std::string actual = sha256_hex(BytesView(data.data(), payload_len));
  if (recorded != actual) {
    throw InputError("DigestMismatch", "model file content digest mismatch");
  }
  std::size_t pos = 0;
  auto need = [&](std::size_t n) {
    if (pos + n > payload_len) throw InputError("BadModelFile", "truncated");
  };
  need(9);
  if (!std::equal(modelio::kMagic, modelio::kMagic + 4, data.begin())) {
    throw InputError("BadModelFile", "bad magic");
  }
  pos = 4;
  std::uint32_t version = read_u32le(data.data() + pos);
  pos += 4;
  if (version != modelio::kVersion) {
    throw InputError("VersionMismatch", "model format v" + std::to_string(version));
  }
  CalibratedModel model;
  model.flavor = static_cast<Flavor>(data[pos++]);
  auto get_string = [&]() {
    need(4);
    std::uint32_t len = read_u32le(data.data() + pos);
    pos += 4;
    need(len);
    std::string s(data.begin() + pos, data.begin() + pos + len);
    pos += len;
    return s;
  };
  auto get_u32 = [&]() {
    need(4);
    std::uint32_t v = read_u32le(data.data() + pos);
    pos += 4;
    return v;
  };
  auto get_f64 = [&]() {
    need(8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) {
      bits |= static_cast<std::uint64_t>(data[pos + static_cast<std::size_t>(i)])
              << (8 * i);
    }
    pos += 8;
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  };
  model.forest.schema_digest = get_string();
  model.forest.train_fingerprint = get_string();
  need(8);
  model.forest.feature_dim = static_cast<std::size_t>(get_u32()) |
                             (static_cast<std::size_t>(get_u32()) << 32);
  model.threshold = get_f64();
  std::uint32_t n_folds = get_u32();
  for (std::uint32_t i = 0; i < n_folds; ++i) {
    FoldCalibration f;
    f.threshold = get_f64();
    f.j_value = get_f64();
    model.calibration_record.push_back(f);
  }
  std::uint32_t n_imp = get_u32();
  for (std::uint32_t i = 0; i < n_imp; ++i) {
    model.forest.importance_raw.push_back(get_f64());
  }
  std::uint32_t n_trees = get_u32();
  for (std::uint32_t t = 0; t < n_trees; ++t) {
    Tree tree;
    std::uint32_t n_nodes = get_u32();
    for (std::uint32_t i = 0; i < n_nodes; ++i) {
      TreeNode n;
      n.feature = static_cast<std::int32_t>(get_u32());
      n.threshold = get_f64();
      n.left = static_cast<std::int32_t>(get_u32());
      n.right = static_cast<std::int32_t>(get_u32());
      need(1);
      n.vote = data[pos++];
      tree.nodes.push_back(n);
    }
    model.forest.trees.push_back(std::move(tree));
  }
  return model;
}

/// Refuses models whose schema binding does not match the data at hand.
inline void require_schema_match(const CalibratedModel& model,
                                 const std::string& digest) {
  if (model.forest.schema_digest != digest) {
    throw InputError("DigestMismatch",
                     "model was trained against a different schema");
  }
}

}  // namespace extscan
