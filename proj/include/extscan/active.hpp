#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "extscan/corpus.hpp"
#include "extscan/eval.hpp"

namespace extscan {

enum class ActiveStrategy { uncertainty, random, none };

inline const char* to_string(ActiveStrategy s) {
  switch (s) {
    case ActiveStrategy::uncertainty: return "uncertainty";
    case ActiveStrategy::random: return "random";
    case ActiveStrategy::none: return "none";
  }
  return "?";
}

inline ActiveStrategy active_strategy_from_string(const std::string& s) {
  if (s == "uncertainty") return ActiveStrategy::uncertainty;
  if (s == "random") return ActiveStrategy::random;
  if (s == "none") return ActiveStrategy::none;
  throw InputError("BadStrategy", s);
}

struct ActiveRunConfig {
  int year = 0;
  std::size_t k = 15;
  ActiveStrategy strategy = ActiveStrategy::uncertainty;
  std::uint64_t seed = 0;
};

struct ActiveTrace {
  std::vector<EvalReport> monthly_reports;          // 12 entries
  std::vector<std::uint64_t> cumulative_errors;     // non-decreasing
  std::vector<std::vector<std::string>> selected_ids;  // per month
  std::vector<std::string> model_fingerprints;      // model used in month m
};

/// Ascending distance to the decision threshold; ties by record id. Rows
/// unusable for the model's flavor are not ranked.
inline std::vector<std::size_t> uncertainty_rank(const CalibratedModel& model,
                                                 const FeatureMatrix& matrix) {
  struct Entry {
    double distance;
    std::string id;
    std::size_t row;
  };
  std::vector<Entry> entries;
  std::vector<double> row(matrix.n_cols);
  for (std::size_t r = 0; r < matrix.n_rows; ++r) {
    if (!matrix.row_usable(r)) continue;
    for (std::size_t c = 0; c < matrix.n_cols; ++c) row[c] = matrix.at(r, c);
    double proba = model.forest.predict_proba(row.data());
    entries.push_back({std::fabs(proba - model.threshold), matrix.ids[r], r});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.id < b.id;
  });
  std::vector<std::size_t> order;
  order.reserve(entries.size());
  for (const Entry& e : entries) order.push_back(e.row);
  return order;
}

/// Monthly loop: evaluate the current model on month m, then (strategy
/// permitting) label K records from month m, retrain, and move on. The
/// model scoring month m therefore never saw any record from months >= m.
inline ActiveTrace run_active_loop(const Corpus& corpus, const ActiveRunConfig& config,
                                   const PipelineOptions& options) {
  Date year_start{config.year, 1, 1};
  Corpus training;
  training.provenance = corpus.provenance;
  for (const auto& rec : corpus.records) {
    if (rec.last_update < year_start) training.records.push_back(rec);
  }
  if (training.records.empty()) {
    throw InputError("EmptySide", "no records before the active-learning year");
  }
  std::vector<Corpus> months = split_monthly(corpus, config.year);

  ActiveTrace trace;
  std::uint64_t errors = 0;
  TrainedPipeline pipeline = train_pipeline(training, options, config.seed);
  bool stale = false;  // training set changed since last retrain

  for (std::size_t m = 0; m < months.size(); ++m) {
    if (stale) {
      // Vocabularies and model are rebuilt so newly labeled extensions
      // contribute everywhere; per-month seeds keep runs reproducible.
      pipeline = train_pipeline(training, options, mix_seed(config.seed, m));
      stale = false;
    }
    trace.model_fingerprints.push_back(pipeline.model.forest.train_fingerprint);
    const Corpus& month = months[m];
    EvalReport report;
    std::vector<std::string> selected;
    if (!month.records.empty()) {
      FeatureMatrix matrix = extract_features(month, pipeline.schema, options.flavor);
      auto [month_report, preds] = evaluate(pipeline.model, matrix);
      report = std::move(month_report);
      errors += report.confusion.fp + report.confusion.fn;

      if (config.strategy != ActiveStrategy::none && config.k > 0) {
        std::vector<std::size_t> order;
        if (config.strategy == ActiveStrategy::uncertainty) {
          order = uncertainty_rank(pipeline.model, matrix);
        } else {
          for (std::size_t r = 0; r < matrix.n_rows; ++r) {
            if (matrix.row_usable(r)) order.push_back(r);
          }
          Rng rng(mix_seed(config.seed, 0xA11E + m));
          rng.shuffle(order);
        }
        if (order.size() > config.k) order.resize(config.k);
        std::map<std::string, const ExtensionRecord*> by_id;
        for (const auto& rec : month.records) by_id.emplace(rec.id(), &rec);
        for (std::size_t r : order) {
          selected.push_back(matrix.ids[r]);
          training.records.push_back(*by_id.at(matrix.ids[r]));
        }
        if (!selected.empty()) stale = true;
      }
    }
    trace.monthly_reports.push_back(std::move(report));
    trace.cumulative_errors.push_back(errors);
    trace.selected_ids.push_back(std::move(selected));
  }
  return trace;
}

inline nlohmann::json active_trace_json(const ActiveTrace& trace) {
  nlohmann::json months = nlohmann::json::array();
  for (std::size_t m = 0; m < trace.monthly_reports.size(); ++m) {
    nlohmann::json entry;
    entry["month"] = m + 1;
    entry["report"] = trace.monthly_reports[m].to_json();
    entry["cumulative_errors"] = trace.cumulative_errors[m];
    entry["selected"] = trace.selected_ids[m];
    entry["model_fingerprint"] = trace.model_fingerprints[m];
    months.push_back(std::move(entry));
  }
  return nlohmann::json{{"months", months}};
}

}  // namespace extscan
