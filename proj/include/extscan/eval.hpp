#pragma once

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "extscan/corpus.hpp"
#include "extscan/matrix.hpp"
#include "extscan/model.hpp"
#include "extscan/vocab.hpp"

namespace extscan {

struct Confusion {
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::uint64_t total() const { return tp + fp + tn + fn; }
  double accuracy() const {
    return total() ? static_cast<double>(tp + tn) / static_cast<double>(total()) : 0.0;
  }
  double tpr() const {
    return tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  }
  double tnr() const {
    return tn + fp ? static_cast<double>(tn) / static_cast<double>(tn + fp) : 0.0;
  }
  double fpr() const {
    return tn + fp ? static_cast<double>(fp) / static_cast<double>(tn + fp) : 0.0;
  }
  double fnr() const {
    return tp + fn ? static_cast<double>(fn) / static_cast<double>(tp + fn) : 0.0;
  }
  /// 0 when nothing is predicted positive.
  double fdr() const {
    return tp + fp ? static_cast<double>(fp) / static_cast<double>(tp + fp) : 0.0;
  }
  double precision() const { return 1.0 - fdr(); }

  void add(bool actual_positive, bool predicted_positive) {
    if (actual_positive) {
      predicted_positive ? ++tp : ++fn;
    } else {
      predicted_positive ? ++fp : ++tn;
    }
  }

  Confusion& operator+=(const Confusion& o) {
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
  }
};

struct EvalReport {
  Confusion confusion;
  std::map<std::string, Confusion> slices;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["confusion"] = {{"tp", confusion.tp}, {"fp", confusion.fp},
                      {"tn", confusion.tn}, {"fn", confusion.fn}};
    j["accuracy"] = confusion.accuracy();
    j["tpr"] = confusion.tpr();
    j["tnr"] = confusion.tnr();
    j["fpr"] = confusion.fpr();
    j["fnr"] = confusion.fnr();
    j["fdr"] = confusion.fdr();
    j["precision"] = confusion.precision();
    nlohmann::json slices_json;
    for (const auto& [key, c] : slices) {
      slices_json[key] = {{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn},
                          {"accuracy", c.accuracy()}};
    }
    j["slices"] = slices_json;
    return j;
  }
};

/// Predictions over one evaluated matrix; keyed by record id so flavor
/// outputs can be intersected.
struct Predictions {
  std::vector<std::string> ids;
  std::vector<double> probas;
  std::vector<bool> predicted;  // malicious flags
  std::vector<bool> actual;
  double threshold = 0.0;
};

namespace evaldetail {

inline std::string slice_month(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "month:%04d-%02d", d.year, d.month);
  return buf;
}

}  // namespace evaldetail

/// Classifies every usable row of the matrix and fills the sliced report.
/// Rows without source features are skipped for source/combined flavors
/// (they stay metadata-only); unknown labels are refused.
inline std::pair<EvalReport, Predictions> evaluate(const CalibratedModel& model,
                                                   const FeatureMatrix& matrix,
                                                   std::optional<double> threshold_override =
                                                       std::nullopt) {
  require_schema_match(model, matrix.schema_digest);
  if (matrix.n_cols != model.forest.feature_dim) {
    throw UsageError("DimMismatch", "matrix/model feature dimensions differ");
  }
  double threshold = threshold_override.value_or(model.threshold);
  EvalReport report;
  Predictions preds;
  preds.threshold = threshold;
  std::vector<double> row(matrix.n_cols);
  for (std::size_t r = 0; r < matrix.n_rows; ++r) {
    if (!matrix.row_usable(r)) continue;
    if (matrix.labels[r] == Label::unknown) {
      throw InputError("UnlabeledRecord", matrix.ids[r]);
    }
    for (std::size_t c = 0; c < matrix.n_cols; ++c) row[c] = matrix.at(r, c);
    double proba = model.forest.predict_proba(row.data());
    bool predicted = proba >= threshold;
    bool actual = matrix.labels[r] == Label::malicious;
    report.confusion.add(actual, predicted);
    report.slices["year:" + std::to_string(matrix.dates[r].year)].add(actual, predicted);
    report.slices[evaldetail::slice_month(matrix.dates[r])].add(actual, predicted);
    if (!matrix.categories[r].empty()) {
      report.slices["category:" + matrix.categories[r]].add(actual, predicted);
    }
    report.slices["mv:" + std::to_string(matrix.manifest_versions[r])].add(actual,
                                                                           predicted);
    report.slices[std::string("class:") + (actual ? "malicious" : "benign")].add(
        actual, predicted);
    preds.ids.push_back(matrix.ids[r]);
    preds.probas.push_back(proba);
    preds.predicted.push_back(predicted);
    preds.actual.push_back(actual);
  }
  return {std::move(report), std::move(preds)};
}

/// Flag malicious only when every flavor flags malicious, over the ids all
/// flavors could evaluate (the source-capable universe).
inline Predictions ensemble_intersection(const std::vector<Predictions>& flavors) {
  if (flavors.empty()) return {};
  std::map<std::string, std::size_t> counts;
  for (const auto& p : flavors) {
    std::set<std::string> seen;
    for (const auto& id : p.ids) {
      if (!seen.insert(id).second) {
        throw InputError("IdSetMismatch", "duplicate id in predictions: " + id);
      }
      ++counts[id];
    }
  }
  Predictions out;
  std::map<std::string, std::pair<bool, bool>> state;  // id -> (all_flag, actual)
  for (const auto& [id, n] : counts) {
    if (n == flavors.size()) state.emplace(id, std::make_pair(true, false));
  }
  for (const auto& p : flavors) {
    for (std::size_t i = 0; i < p.ids.size(); ++i) {
      auto it = state.find(p.ids[i]);
      if (it == state.end()) continue;
      it->second.first = it->second.first && p.predicted[i];
      it->second.second = p.actual[i];
    }
  }
  for (const auto& [id, flags] : state) {
    out.ids.push_back(id);
    out.predicted.push_back(flags.first);
    out.actual.push_back(flags.second);
    out.probas.push_back(flags.first ? 1.0 : 0.0);
  }
  return out;
}

inline Confusion confusion_of(const Predictions& preds) {
  Confusion c;
  for (std::size_t i = 0; i < preds.ids.size(); ++i) {
    c.add(preds.actual[i], preds.predicted[i]);
  }
  return c;
}

/// Re-applies classification at an override threshold with no retraining.
inline EvalReport fpr_threshold_experiment(const CalibratedModel& model,
                                           const FeatureMatrix& matrix,
                                           double threshold_override) {
  return evaluate(model, matrix, threshold_override).first;
}

/// Rows of (slice value, class, accuracy, total) for one slice dimension.
inline nlohmann::json slice_report(const EvalReport& report, const std::string& key) {
  std::string prefix = key + ":";
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [slice_key, c] : report.slices) {
    if (slice_key.rfind(prefix, 0) != 0) continue;
    std::string value = slice_key.substr(prefix.size());
    Confusion benign{0, c.fp, c.tn, 0};
    Confusion malicious{c.tp, 0, 0, c.fn};
    if (benign.total() > 0) {
      rows.push_back({{"slice", value}, {"class", "benign"},
                      {"accuracy", benign.accuracy()}, {"total", benign.total()}});
    }
    if (malicious.total() > 0) {
      rows.push_back({{"slice", value}, {"class", "malicious"},
                      {"accuracy", malicious.accuracy()}, {"total", malicious.total()}});
    }
  }
  return rows;
}

// ---- pipeline options shared by the harnesses ----

struct PipelineOptions {
  TrainConfig train;
  std::size_t folds = 5;
  std::size_t top_k = TopKVocabulary::kDefaultK;
  std::size_t ngram_cap = NGramVocabulary::kDefaultCap;
  Flavor flavor = Flavor::combined;
  std::optional<double> fixed_threshold;  // skip calibration when set
  PermissionCatalog catalog = PermissionCatalog::builtin();
};

/// Vocabulary build + extraction + calibration + final training against
/// one training corpus.
struct TrainedPipeline {
  FeatureSchema schema;
  CalibratedModel model;
};

inline TrainedPipeline train_pipeline(const Corpus& train, const PipelineOptions& options,
                                      std::uint64_t seed) {
  TrainedPipeline out;
  out.schema = build_schema(as_training(train), options.catalog, options.top_k,
                            options.ngram_cap);
  FeatureMatrix train_matrix = extract_features(train, out.schema, options.flavor);
  TrainConfig config = options.train;
  config.seed = mix_seed(seed, 0x7EA1);
  if (options.fixed_threshold) {
    out.model.flavor = options.flavor;
    out.model.threshold = *options.fixed_threshold;
    out.model.forest = train_forest(train_matrix, config);
  } else {
    out.model = train_calibrated(train_matrix, config, options.folds,
                                 mix_seed(seed, 0xCA1));
  }
  return out;
}

// ---- longitudinal concept-drift harness ----

inline double cross_validated_accuracy(const FeatureMatrix& matrix,
                                       const PipelineOptions& options,
                                       std::uint64_t seed);

struct YearResult {
  int year = 0;
  bool skipped = false;
  std::string skip_reason;
  EvalReport report;
  double threshold = 0.0;
  double cv_accuracy = 0.0;  // 5-fold CV accuracy on the training side
  std::vector<std::pair<std::size_t, double>> top_importances;
  std::vector<std::string> top_importance_names;
};

/// Per year Y: train on records strictly before Jan 1 of Y (vocabularies
/// rebuilt on that side only), evaluate on records updated in Y, and track
/// the importance ranking. The temporal split plus the training-view type
/// make leakage structurally impossible.
inline std::vector<YearResult> longitudinal(const Corpus& corpus,
                                            const std::vector<int>& years,
                                            const PipelineOptions& options,
                                            std::uint64_t seed,
                                            std::size_t importance_top_k = 5) {
  std::vector<YearResult> results;
  for (int year : years) {
    YearResult yr;
    yr.year = year;
    Corpus train, test;
    try {
      std::tie(train, test) = split_temporal(corpus, year);
    } catch (const InputError& e) {
      yr.skipped = true;
      yr.skip_reason = e.what();
      results.push_back(std::move(yr));
      continue;
    }
    for (const auto& rec : train.records) {
      if (!(rec.last_update < Date{year, 1, 1})) {
        throw UsageError("LeakySplit", "training record dated inside test year");
      }
    }
    std::uint64_t year_seed = mix_seed(seed, static_cast<std::uint64_t>(year));
    TrainedPipeline pipeline = train_pipeline(train, options, year_seed);
    yr.threshold = pipeline.model.threshold;

    FeatureMatrix train_matrix = extract_features(train, pipeline.schema, options.flavor);
    yr.cv_accuracy = cross_validated_accuracy(train_matrix, options, year_seed);

    FeatureMatrix test_matrix = extract_features(test, pipeline.schema, options.flavor);
    yr.report = evaluate(pipeline.model, test_matrix).first;

    auto ranked = feature_importance(pipeline.model.forest);
    for (std::size_t i = 0; i < ranked.size() && i < importance_top_k; ++i) {
      yr.top_importances.push_back(ranked[i]);
      std::size_t index = ranked[i].first;
      if (options.flavor == Flavor::source) index += pipeline.schema.metadata_dim();
      yr.top_importance_names.push_back(feature_display_name(pipeline.schema, index));
    }
    results.push_back(std::move(yr));
  }
  return results;
}

/// K-fold CV accuracy at the model's operating threshold, on the training
/// side only (the sanity check that pairs with the longitudinal decay).
inline double cross_validated_accuracy(const FeatureMatrix& matrix,
                                       const PipelineOptions& options,
                                       std::uint64_t seed) {
  forestdetail::TrainView all = forestdetail::make_view(matrix);
  std::vector<std::size_t> assignment =
      calibdetail::fold_assignment(matrix, all.rows, options.folds, mix_seed(seed, 0xCF));
  Confusion total;
  for (std::size_t f = 0; f < options.folds; ++f) {
    FeatureMatrix fold_train;
    fold_train.flavor = matrix.flavor;
    fold_train.schema_digest = matrix.schema_digest;
    fold_train.n_cols = matrix.n_cols;
    std::vector<std::size_t> val_rows;
    for (std::size_t r : all.rows) {
      if (assignment[r] == f) {
        val_rows.push_back(r);
      } else {
        fold_train.ids.push_back(matrix.ids[r]);
        fold_train.labels.push_back(matrix.labels[r]);
        fold_train.dates.push_back(matrix.dates[r]);
        fold_train.categories.push_back(matrix.categories[r]);
        fold_train.manifest_versions.push_back(matrix.manifest_versions[r]);
        fold_train.source_present.push_back(matrix.source_present[r]);
      }
    }
    fold_train.n_rows = fold_train.ids.size();
    fold_train.values.assign(fold_train.n_rows * fold_train.n_cols, 0.0);
    std::size_t tr = 0;
    for (std::size_t r : all.rows) {
      if (assignment[r] == f) continue;
      for (std::size_t c = 0; c < matrix.n_cols; ++c) fold_train.set(tr, c, matrix.at(r, c));
      ++tr;
    }
    TrainConfig config = options.train;
    config.seed = mix_seed(seed, 0xCF00 + f);
    Forest forest = train_forest(fold_train, config);
    FoldCalibration fold_best;
    std::vector<double> row(matrix.n_cols);
    std::vector<double> probas;
    std::vector<bool> positives;
    for (std::size_t r : val_rows) {
      for (std::size_t c = 0; c < matrix.n_cols; ++c) row[c] = matrix.at(r, c);
      probas.push_back(forest.predict_proba(row.data()));
      positives.push_back(matrix.labels[r] == Label::malicious);
    }
    fold_best = calibdetail::best_threshold_on_grid(probas, positives,
                                                    config.n_trees);
    for (std::size_t i = 0; i < probas.size(); ++i) {
      total.add(positives[i], probas[i] >= fold_best.threshold);
    }
  }
  return total.accuracy();
}

// ---- before/in cutoff FNR contrast ----

struct DriftFnrResult {
  Confusion before_cutoff;  // malicious records only
  Confusion in_cutoff;
  double fnr_before = 0.0;
  double fnr_in = 0.0;
};

/// Retrains with no cutoff-year malicious extensions in the training set
/// and contrasts the FNR on malicious records dated before vs. inside the
/// cutoff year.
inline DriftFnrResult drift_fnr_check(const Corpus& corpus, int cutoff_year,
                                      double ratio, const PipelineOptions& options,
                                      std::uint64_t seed) {
  bool has_before = false, has_in = false;
  for (const auto& rec : corpus.records) {
    if (rec.label != Label::malicious) continue;
    (rec.last_update.year < cutoff_year ? has_before : has_in) = true;
  }
  if (!has_before || !has_in) {
    throw InputError("EmptySide",
                     "need malicious records before and in the cutoff year");
  }
  auto [train0, test0] = split_random(corpus, ratio, mix_seed(seed, 0xD81F));
  Corpus train;
  Corpus test = std::move(test0);
  train.provenance = corpus.provenance;
  for (auto& rec : train0.records) {
    if (rec.label == Label::malicious && rec.last_update.year >= cutoff_year) {
      test.records.push_back(std::move(rec));
    } else {
      train.records.push_back(std::move(rec));
    }
  }
  TrainedPipeline pipeline = train_pipeline(train, options, seed);
  FeatureMatrix test_matrix = extract_features(test, pipeline.schema, options.flavor);
  auto [report, preds] = evaluate(pipeline.model, test_matrix);

  std::map<std::string, Date> date_by_id;
  std::map<std::string, Label> label_by_id;
  for (std::size_t r = 0; r < test_matrix.n_rows; ++r) {
    date_by_id[test_matrix.ids[r]] = test_matrix.dates[r];
    label_by_id[test_matrix.ids[r]] = test_matrix.labels[r];
  }
  DriftFnrResult out;
  for (std::size_t i = 0; i < preds.ids.size(); ++i) {
    if (label_by_id[preds.ids[i]] != Label::malicious) continue;
    Confusion& c = date_by_id[preds.ids[i]].year < cutoff_year ? out.before_cutoff
                                                               : out.in_cutoff;
    c.add(true, preds.predicted[i]);
  }
  out.fnr_before = out.before_cutoff.fnr();
  out.fnr_in = out.in_cutoff.fnr();
  return out;
}

// ---- benign sub-sampling ----

struct SubsampleCell {
  double fraction = 0.0;
  std::vector<double> accuracy, fpr, precision, tpr;

  static double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
  }
  static double stddev(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
  }
  static double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
  }
};

/// Trains on all malicious plus a benign subsample, repeated with fresh
/// draws; the decision threshold is calibrated once on the full training
/// corpus and held fixed so the cells differ only in training data.
inline std::vector<SubsampleCell> subsample_experiment(
    const Corpus& train, const Corpus& test, const std::vector<double>& fractions,
    std::size_t repeats, const PipelineOptions& options, std::uint64_t seed) {
  for (double f : fractions) {
    if (!(f > 0.0 && f < 1.0)) {
      throw UsageError("InvalidRatio", "subsample fractions must be in (0,1)");
    }
  }
  TrainedPipeline base = train_pipeline(train, options, seed);
  FeatureMatrix test_matrix = extract_features(test, base.schema, options.flavor);

  std::vector<std::size_t> benign_rows, malicious_rows;
  for (std::size_t i = 0; i < train.records.size(); ++i) {
    (train.records[i].label == Label::malicious ? malicious_rows : benign_rows)
        .push_back(i);
  }
  FeatureMatrix train_matrix = extract_features(train, base.schema, options.flavor);

  std::vector<SubsampleCell> cells;
  for (double fraction : fractions) {
    SubsampleCell cell;
    cell.fraction = fraction;
    for (std::size_t rep = 0; rep < repeats; ++rep) {
      Rng rng(mix_seed(seed, 0x5AB0 + rep * 131 +
                                 static_cast<std::uint64_t>(fraction * 1000)));
      std::vector<std::size_t> pool = benign_rows;
      rng.shuffle(pool);
      std::size_t take = static_cast<std::size_t>(
          static_cast<double>(pool.size()) * fraction + 0.5);
      pool.resize(std::max<std::size_t>(1, take));
      std::vector<std::size_t> rows = pool;
      rows.insert(rows.end(), malicious_rows.begin(), malicious_rows.end());
      std::sort(rows.begin(), rows.end());

      FeatureMatrix sub;
      sub.flavor = train_matrix.flavor;
      sub.schema_digest = train_matrix.schema_digest;
      sub.n_cols = train_matrix.n_cols;
      sub.n_rows = rows.size();
      sub.values.assign(sub.n_rows * sub.n_cols, 0.0);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        std::size_t r = rows[i];
        sub.ids.push_back(train_matrix.ids[r]);
        sub.labels.push_back(train_matrix.labels[r]);
        sub.dates.push_back(train_matrix.dates[r]);
        sub.categories.push_back(train_matrix.categories[r]);
        sub.manifest_versions.push_back(train_matrix.manifest_versions[r]);
        sub.source_present.push_back(train_matrix.source_present[r]);
        for (std::size_t c = 0; c < sub.n_cols; ++c) sub.set(i, c, train_matrix.at(r, c));
      }
      TrainConfig config = options.train;
      config.seed = mix_seed(seed, 0x5AB00 + rep * 977 +
                                       static_cast<std::uint64_t>(fraction * 1000));
      CalibratedModel model;
      model.flavor = options.flavor;
      model.threshold = base.model.threshold;
      model.forest = train_forest(sub, config);
      EvalReport report = evaluate(model, test_matrix).first;
      cell.accuracy.push_back(report.confusion.accuracy());
      cell.fpr.push_back(report.confusion.fpr());
      cell.precision.push_back(report.confusion.precision());
      cell.tpr.push_back(report.confusion.tpr());
    }
    cells.push_back(std::move(cell));
  }
  return cells;
}

}  // namespace extscan
