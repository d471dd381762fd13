// extscan command-line pipeline: synthesize or ingest extension corpora,
// build vocabularies, extract feature matrices, train and calibrate
// forest models, and run the evaluation harnesses. Every stochastic
// subcommand takes an explicit seed; identical inputs and seeds give
// byte-identical outputs.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "extscan/active.hpp"
#include "extscan/cluster.hpp"
#include "extscan/eval.hpp"
#include "extscan/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace extscan;

namespace {

fs::path output_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("EXTSCAN_OUT")) return env;
  return ".";
}

void write_json(const fs::path& path, const json& j) {
  write_text_file(path, j.dump(1) + "\n");
}

json read_json(const fs::path& path) {
  json j = json::parse(read_text_file(path), nullptr, false);
  if (j.is_discarded()) throw InputError("BadJson", path.string());
  return j;
}

Corpus load_corpus(const std::string& dir, WarningLog* warnings) {
  return ingest(dir, warnings);
}

void dump_warnings(const WarningLog& warnings, const fs::path& path) {
  std::string lines;
  for (const Warning& w : warnings) lines += w.to_json_line() + "\n";
  write_text_file(path, lines);
}

json corpus_summary(const Corpus& corpus) {
  json j;
  j["records"] = corpus.size();
  j["benign"] = corpus.count_label(Label::benign);
  j["malicious"] = corpus.count_label(Label::malicious);
  j["unknown"] = corpus.count_label(Label::unknown);
  return j;
}

json predictions_json(const Predictions& preds) {
  json rows = json::array();
  for (std::size_t i = 0; i < preds.ids.size(); ++i) {
    rows.push_back({{"id", preds.ids[i]},
                    {"proba", preds.probas[i]},
                    {"label", preds.predicted[i] ? "malicious" : "benign"},
                    {"actual", preds.actual[i] ? "malicious" : "benign"}});
  }
  return json{{"threshold", preds.threshold}, {"predictions", rows}};
}

Predictions predictions_from_json(const json& j) {
  Predictions preds;
  preds.threshold = j.value("threshold", 0.0);
  for (const auto& row : j.at("predictions")) {
    preds.ids.push_back(row.at("id").get<std::string>());
    preds.probas.push_back(row.value("proba", 0.0));
    preds.predicted.push_back(row.at("label").get<std::string>() == "malicious");
    preds.actual.push_back(row.value("actual", "benign") == "malicious");
  }
  return preds;
}

std::string csv_line(std::initializer_list<std::string> cells) {
  std::string line;
  for (const auto& c : cells) {
    if (!line.empty()) line += ",";
    line += c;
  }
  return line + "\n";
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct SplitFlags {
  double ratio = 0.8;
  std::uint64_t seed = 0;
};

// Shared split derivation: any stage given the same corpus, ratio and
// seed reproduces the same train/test sides.
std::pair<Corpus, Corpus> derive_split(const Corpus& corpus, const SplitFlags& split) {
  return split_random(corpus, split.ratio, split.seed);
}

TrainConfig train_config_from(std::size_t trees, std::uint64_t seed) {
  TrainConfig config;
  config.n_trees = trees;
  config.seed = seed;
  return config;
}

int run(int argc, char** argv) {
  CLI::App app{"extscan: browser-extension classification pipeline"};
  app.require_subcommand(1);

  std::string out_flag;
  app.add_option("--out", out_flag, "Output directory (or EXTSCAN_OUT)");

  // ---- synth ----
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic corpus directory");
  std::string synth_config_path;
  std::uint64_t synth_seed = 0;
  synth_cmd->add_option("--config", synth_config_path, "Synthesizer key=value config");
  synth_cmd->add_option("--seed", synth_seed, "Corpus seed")->required();
  synth_cmd->callback([&] {
    SynthConfig config;
    if (!synth_config_path.empty()) {
      config = SynthConfig::parse(read_text_file(synth_config_path));
    }
    Corpus corpus = synthesize(config, synth_seed);
    fs::path out = output_dir(out_flag);
    write_corpus_dir(corpus, out / "corpus");
    json summary = corpus_summary(corpus);
    summary["corpus_dir"] = (out / "corpus").string();
    std::cout << summary.dump(1) << "\n";
  });

  // ---- ingest ----
  auto* ingest_cmd = app.add_subcommand("ingest", "Validate a corpus directory");
  std::string ingest_dir;
  ingest_cmd->add_option("--corpus", ingest_dir, "Corpus directory")->required();
  ingest_cmd->callback([&] {
    WarningLog warnings;
    Corpus corpus = load_corpus(ingest_dir, &warnings);
    fs::path out = output_dir(out_flag);
    dump_warnings(warnings, out / "warnings.jsonl");
    json summary = corpus_summary(corpus);
    summary["warnings"] = warnings.size();
    std::cout << summary.dump(1) << "\n";
  });

  // ---- build-vocab ----
  auto* vocab_cmd = app.add_subcommand(
      "build-vocab", "Build vocabularies from the training side and freeze the schema");
  std::string vocab_corpus;
  SplitFlags vocab_split;
  std::size_t vocab_topk = TopKVocabulary::kDefaultK;
  std::size_t vocab_cap = NGramVocabulary::kDefaultCap;
  std::string vocab_permissions;
  vocab_cmd->add_option("--corpus", vocab_corpus, "Corpus directory")->required();
  vocab_cmd->add_option("--ratio", vocab_split.ratio, "Training split ratio");
  vocab_cmd->add_option("--seed", vocab_split.seed, "Split seed")->required();
  vocab_cmd->add_option("--top-k", vocab_topk, "Top-K list size");
  vocab_cmd->add_option("--ngram-cap", vocab_cap, "4-gram vocabulary cap");
  vocab_cmd->add_option("--permissions", vocab_permissions,
                        "Permission catalog file (default: built-in)");
  vocab_cmd->callback([&] {
    Corpus corpus = load_corpus(vocab_corpus, nullptr);
    auto [train, test] = derive_split(corpus, vocab_split);
    PermissionCatalog catalog = vocab_permissions.empty()
                                    ? PermissionCatalog::builtin()
                                    : PermissionCatalog::from_lines(
                                          read_text_file(vocab_permissions));
    FeatureSchema schema = build_schema(as_training(train), catalog, vocab_topk, vocab_cap);
    fs::path out = output_dir(out_flag);
    write_json(out / "schema.json", schema_to_json(schema));
    std::cout << json{{"schema", (out / "schema.json").string()},
                      {"digest", schema.digest},
                      {"metadata_dim", schema.metadata_dim()},
                      {"source_dim", schema.source_dim()}}
                     .dump(1)
              << "\n";
  });

  // ---- extract ----
  auto* extract_cmd =
      app.add_subcommand("extract", "Extract train/test feature matrices");
  std::string extract_corpus, extract_schema, extract_flavor = "combined";
  SplitFlags extract_split;
  bool extract_csv = false;
  extract_cmd->add_option("--corpus", extract_corpus, "Corpus directory")->required();
  extract_cmd->add_option("--schema", extract_schema, "Frozen schema JSON")->required();
  extract_cmd->add_option("--flavor", extract_flavor, "metadata|source|combined");
  extract_cmd->add_option("--ratio", extract_split.ratio, "Training split ratio");
  extract_cmd->add_option("--seed", extract_split.seed, "Split seed")->required();
  extract_cmd->add_flag("--csv", extract_csv, "Also export CSV");
  extract_cmd->callback([&] {
    Corpus corpus = load_corpus(extract_corpus, nullptr);
    auto [train, test] = derive_split(corpus, extract_split);
    FeatureSchema schema = schema_from_json(read_json(extract_schema));
    Flavor flavor = flavor_from_string(extract_flavor);
    fs::path out = output_dir(out_flag);
    FeatureMatrix train_m = extract_features(train, schema, flavor);
    FeatureMatrix test_m = extract_features(test, schema, flavor);
    fs::path train_path = out / (extract_flavor + "_train.fm");
    fs::path test_path = out / (extract_flavor + "_test.fm");
    Bytes tb = matrix_to_bytes(train_m);
    write_file(train_path, BytesView(tb.data(), tb.size()));
    Bytes sb = matrix_to_bytes(test_m);
    write_file(test_path, BytesView(sb.data(), sb.size()));
    if (extract_csv) {
      write_text_file(out / (extract_flavor + "_train.csv"), matrix_to_csv(train_m));
      write_text_file(out / (extract_flavor + "_test.csv"), matrix_to_csv(test_m));
    }
    std::cout << json{{"train", train_path.string()},
                      {"test", test_path.string()},
                      {"rows_train", train_m.n_rows},
                      {"rows_test", test_m.n_rows},
                      {"cols", train_m.n_cols}}
                     .dump(1)
              << "\n";
  });

  // ---- train ----
  auto* train_cmd = app.add_subcommand("train", "Train a forest on a matrix");
  std::string train_matrix_path, train_model_out = "model.bin";
  std::size_t train_trees = 300;
  std::uint64_t train_seed = 0;
  train_cmd->add_option("--matrix", train_matrix_path, "Training matrix (.fm)")->required();
  train_cmd->add_option("--trees", train_trees, "Number of trees");
  train_cmd->add_option("--seed", train_seed, "Training seed")->required();
  train_cmd->add_option("--model-out", train_model_out, "Model file name");
  train_cmd->callback([&] {
    Bytes data = read_file(train_matrix_path);
    FeatureMatrix matrix = matrix_from_bytes(BytesView(data.data(), data.size()));
    CalibratedModel model;
    model.flavor = matrix.flavor;
    model.threshold = 0.5;  // placeholder until `calibrate`
    model.forest = train_forest(matrix, train_config_from(train_trees, train_seed));
    fs::path out = output_dir(out_flag);
    Bytes bytes = model_to_bytes(model);
    write_file(out / train_model_out, BytesView(bytes.data(), bytes.size()));
    std::cout << json{{"model", (out / train_model_out).string()},
                      {"fingerprint", model.forest.train_fingerprint},
                      {"trees", train_trees}}
                     .dump(1)
              << "\n";
  });

  // ---- calibrate ----
  auto* cal_cmd = app.add_subcommand(
      "calibrate", "Pick the decision threshold by cross-validated Youden's J");
  std::string cal_matrix_path, cal_model_path;
  std::size_t cal_trees = 300, cal_folds = 5;
  std::uint64_t cal_seed = 0;
  cal_cmd->add_option("--matrix", cal_matrix_path, "Training matrix (.fm)")->required();
  cal_cmd->add_option("--model", cal_model_path, "Model file to update")->required();
  cal_cmd->add_option("--trees", cal_trees, "Trees per calibration forest");
  cal_cmd->add_option("--folds", cal_folds, "Cross-validation folds");
  cal_cmd->add_option("--seed", cal_seed, "Calibration seed")->required();
  cal_cmd->callback([&] {
    Bytes data = read_file(cal_matrix_path);
    FeatureMatrix matrix = matrix_from_bytes(BytesView(data.data(), data.size()));
    Bytes model_bytes = read_file(cal_model_path);
    CalibratedModel model = model_from_bytes(BytesView(model_bytes.data(), model_bytes.size()));
    require_schema_match(model, matrix.schema_digest);
    model.calibration_record =
        calibrate_folds(matrix, train_config_from(cal_trees, cal_seed), cal_folds, cal_seed);
    double sum = 0.0;
    for (const auto& f : model.calibration_record) sum += f.threshold;
    model.threshold = sum / static_cast<double>(model.calibration_record.size());
    Bytes bytes = model_to_bytes(model);
    write_file(cal_model_path, BytesView(bytes.data(), bytes.size()));
    json folds_json = json::array();
    for (const auto& f : model.calibration_record) {
      folds_json.push_back({{"threshold", f.threshold}, {"j", f.j_value}});
    }
    std::cout << json{{"threshold", model.threshold}, {"folds", folds_json}}.dump(1)
              << "\n";
  });

  // ---- predict ----
  auto* predict_cmd = app.add_subcommand("predict", "Classify one .crx/.zip file");
  std::string predict_schema, predict_model, predict_crx, predict_meta, predict_id;
  predict_cmd->add_option("--schema", predict_schema, "Frozen schema JSON")->required();
  predict_cmd->add_option("--model", predict_model, "Calibrated model")->required();
  predict_cmd->add_option("--crx", predict_crx, "Extension package")->required();
  predict_cmd->add_option("--meta", predict_meta, "Optional meta.json sidecar");
  predict_cmd->add_option("--id", predict_id, "Override record id");
  predict_cmd->callback([&] {
    FeatureSchema schema = schema_from_json(read_json(predict_schema));
    Bytes model_bytes = read_file(predict_model);
    CalibratedModel model =
        model_from_bytes(BytesView(model_bytes.data(), model_bytes.size()));
    require_schema_match(model, schema.digest);
    std::string id = predict_id.empty() ? fs::path(predict_crx).stem().string()
                                        : predict_id;
    WarningLog warnings;
    ExtensionRecord rec;
    rec.pkg = load_package(id, read_file(predict_crx), &warnings);
    if (!predict_meta.empty()) apply_sidecar_json(read_json(predict_meta), rec);
    if (!is_eligible(rec.pkg)) {
      throw InputError("Ineligible", "no valid manifest or no resolvable script");
    }
    Corpus single;
    single.records.push_back(std::move(rec));
    FeatureMatrix matrix = extract_features(single, schema, model.flavor);
    if (!matrix.row_usable(0)) {
      throw InputError("NoSourceFeatures",
                       "bundle does not parse; use a metadata-flavor model");
    }
    double proba = model.forest.predict_proba(matrix.row(0));
    std::cout << json{{"id", id},
                      {"proba", proba},
                      {"label", proba >= model.threshold ? "malicious" : "benign"},
                      {"flavor", to_string(model.flavor)}}
                     .dump(1)
              << "\n";
  });

  // ---- evaluate ----
  auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate a model on a matrix");
  std::string eval_matrix_path, eval_model_path;
  std::string eval_report_out = "report.json", eval_pred_out = "predictions.json";
  double eval_threshold = -1.0;
  bool eval_sweep = false;
  eval_cmd->add_option("--matrix", eval_matrix_path, "Labeled matrix (.fm)")->required();
  eval_cmd->add_option("--model", eval_model_path, "Calibrated model")->required();
  eval_cmd->add_option("--threshold", eval_threshold, "Override threshold");
  eval_cmd->add_option("--report-out", eval_report_out, "Report file name");
  eval_cmd->add_option("--pred-out", eval_pred_out, "Predictions file name");
  eval_cmd->add_flag("--sweep", eval_sweep, "Emit threshold->rate series CSV");
  eval_cmd->callback([&] {
    Bytes data = read_file(eval_matrix_path);
    FeatureMatrix matrix = matrix_from_bytes(BytesView(data.data(), data.size()));
    Bytes model_bytes = read_file(eval_model_path);
    CalibratedModel model =
        model_from_bytes(BytesView(model_bytes.data(), model_bytes.size()));
    std::optional<double> override_t;
    if (eval_threshold >= 0.0) override_t = eval_threshold;
    auto [report, preds] = evaluate(model, matrix, override_t);
    fs::path out = output_dir(out_flag);
    write_json(out / eval_report_out, report.to_json());
    write_json(out / eval_pred_out, predictions_json(preds));
    if (eval_sweep) {
      std::string csv = "threshold,fpr,fnr,tpr,accuracy\n";
      std::size_t n = model.forest.trees.size();
      for (std::size_t k = 0; k <= n; ++k) {
        double t = static_cast<double>(k) / static_cast<double>(n);
        Confusion c;
        for (std::size_t i = 0; i < preds.ids.size(); ++i) {
          c.add(preds.actual[i], preds.probas[i] >= t);
        }
        csv += csv_line({fmt(t), fmt(c.fpr()), fmt(c.fnr()), fmt(c.tpr()),
                         fmt(c.accuracy())});
      }
      write_text_file(out / "threshold_sweep.csv", csv);
    }
    std::cout << report.to_json().dump(1) << "\n";
  });

  // ---- intersect ----
  auto* intersect_cmd =
      app.add_subcommand("intersect", "Ensemble intersection of flavor predictions");
  std::vector<std::string> intersect_inputs;
  intersect_cmd->add_option("--predictions", intersect_inputs, "Prediction JSON files")
      ->required()
      ->expected(2, 3);
  intersect_cmd->callback([&] {
    std::vector<Predictions> preds;
    for (const auto& path : intersect_inputs) {
      preds.push_back(predictions_from_json(read_json(path)));
    }
    Predictions merged = ensemble_intersection(preds);
    Confusion c = confusion_of(merged);
    fs::path out = output_dir(out_flag);
    write_json(out / "intersection.json", predictions_json(merged));
    std::cout << json{{"universe", merged.ids.size()},
                      {"tp", c.tp},
                      {"fp", c.fp},
                      {"tn", c.tn},
                      {"fn", c.fn},
                      {"fdr", c.fdr()},
                      {"fnr", c.fnr()}}
                     .dump(1)
              << "\n";
  });

  // ---- longitudinal ----
  auto* longi_cmd = app.add_subcommand(
      "longitudinal", "Per-year temporal train/test with vocabulary rebuilds");
  std::string longi_corpus, longi_flavor = "combined";
  int longi_year_from = 2019, longi_year_to = 2022;
  std::size_t longi_trees = 120;
  std::uint64_t longi_seed = 0;
  double longi_fixed_threshold = -1.0;
  longi_cmd->add_option("--corpus", longi_corpus, "Corpus directory")->required();
  longi_cmd->add_option("--year-from", longi_year_from, "First test year");
  longi_cmd->add_option("--year-to", longi_year_to, "Last test year");
  longi_cmd->add_option("--flavor", longi_flavor, "metadata|source|combined");
  longi_cmd->add_option("--trees", longi_trees, "Trees per forest");
  longi_cmd->add_option("--seed", longi_seed, "Harness seed")->required();
  longi_cmd->add_option("--fixed-threshold", longi_fixed_threshold,
                        "Skip per-year calibration and use this threshold");
  longi_cmd->callback([&] {
    Corpus corpus = load_corpus(longi_corpus, nullptr);
    PipelineOptions options;
    options.flavor = flavor_from_string(longi_flavor);
    options.train = train_config_from(longi_trees, longi_seed);
    if (longi_fixed_threshold >= 0.0) options.fixed_threshold = longi_fixed_threshold;
    std::vector<int> years;
    for (int y = longi_year_from; y <= longi_year_to; ++y) years.push_back(y);
    std::vector<YearResult> results = longitudinal(corpus, years, options, longi_seed);
    fs::path out = output_dir(out_flag);
    std::string csv = "year,accuracy,tpr,tnr,precision,threshold,cv_accuracy\n";
    json yearly = json::array();
    for (const YearResult& yr : results) {
      json entry;
      entry["year"] = yr.year;
      entry["skipped"] = yr.skipped;
      if (yr.skipped) {
        entry["reason"] = yr.skip_reason;
      } else {
        entry["report"] = yr.report.to_json();
        entry["threshold"] = yr.threshold;
        entry["cv_accuracy"] = yr.cv_accuracy;
        json imps = json::array();
        for (std::size_t i = 0; i < yr.top_importances.size(); ++i) {
          imps.push_back({{"feature", yr.top_importance_names[i]},
                          {"index", yr.top_importances[i].first},
                          {"importance", yr.top_importances[i].second}});
        }
        entry["top_importances"] = imps;
        csv += csv_line({std::to_string(yr.year), fmt(yr.report.confusion.accuracy()),
                         fmt(yr.report.confusion.tpr()), fmt(yr.report.confusion.tnr()),
                         fmt(yr.report.confusion.precision()), fmt(yr.threshold),
                         fmt(yr.cv_accuracy)});
      }
      yearly.push_back(std::move(entry));
    }
    write_json(out / "longitudinal.json", yearly);
    write_text_file(out / "longitudinal.csv", csv);
    std::cout << yearly.dump(1) << "\n";
  });

  // ---- drift-check ----
  auto* drift_cmd = app.add_subcommand(
      "drift-check", "FNR contrast: malicious before vs. in the cutoff year");
  std::string drift_corpus, drift_flavor = "combined";
  int drift_cutoff = 2022;
  double drift_ratio = 0.8;
  std::size_t drift_trees = 120;
  std::uint64_t drift_seed = 0;
  drift_cmd->add_option("--corpus", drift_corpus, "Corpus directory")->required();
  drift_cmd->add_option("--cutoff-year", drift_cutoff, "Cutoff year");
  drift_cmd->add_option("--ratio", drift_ratio, "Base split ratio");
  drift_cmd->add_option("--flavor", drift_flavor, "metadata|source|combined");
  drift_cmd->add_option("--trees", drift_trees, "Trees per forest");
  drift_cmd->add_option("--seed", drift_seed, "Harness seed")->required();
  drift_cmd->callback([&] {
    Corpus corpus = load_corpus(drift_corpus, nullptr);
    PipelineOptions options;
    options.flavor = flavor_from_string(drift_flavor);
    options.train = train_config_from(drift_trees, drift_seed);
    DriftFnrResult result = drift_fnr_check(corpus, drift_cutoff, drift_ratio, options,
                                            drift_seed);
    fs::path out = output_dir(out_flag);
    std::string csv = "bucket,malicious,missed,fnr\n";
    csv += csv_line({"before_cutoff", std::to_string(result.before_cutoff.total()),
                     std::to_string(result.before_cutoff.fn), fmt(result.fnr_before)});
    csv += csv_line({"in_cutoff", std::to_string(result.in_cutoff.total()),
                     std::to_string(result.in_cutoff.fn), fmt(result.fnr_in)});
    write_text_file(out / "drift_fnr.csv", csv);
    json j{{"fnr_before", result.fnr_before},
           {"fnr_in", result.fnr_in},
           {"before_total", result.before_cutoff.total()},
           {"in_total", result.in_cutoff.total()}};
    write_json(out / "drift_fnr.json", j);
    std::cout << j.dump(1) << "\n";
  });

  // ---- active-learn ----
  auto* active_cmd = app.add_subcommand(
      "active-learn", "Monthly active-learning loop over one year");
  std::string active_corpus, active_strategy = "uncertainty", active_flavor = "combined";
  int active_year = 2022;
  std::size_t active_k = 15, active_trees = 120;
  std::uint64_t active_seed = 0;
  double active_fixed_threshold = -1.0;
  active_cmd->add_option("--corpus", active_corpus, "Corpus directory")->required();
  active_cmd->add_option("--year", active_year, "Loop year");
  active_cmd->add_option("--k", active_k, "Labels per month");
  active_cmd->add_option("--strategy", active_strategy, "uncertainty|random|none");
  active_cmd->add_option("--flavor", active_flavor, "metadata|source|combined");
  active_cmd->add_option("--trees", active_trees, "Trees per forest");
  active_cmd->add_option("--seed", active_seed, "Loop seed")->required();
  active_cmd->add_option("--fixed-threshold", active_fixed_threshold,
                         "Skip calibration and use this threshold");
  active_cmd->callback([&] {
    Corpus corpus = load_corpus(active_corpus, nullptr);
    PipelineOptions options;
    options.flavor = flavor_from_string(active_flavor);
    options.train = train_config_from(active_trees, active_seed);
    if (active_fixed_threshold >= 0.0) options.fixed_threshold = active_fixed_threshold;
    ActiveRunConfig config;
    config.year = active_year;
    config.k = active_k;
    config.strategy = active_strategy_from_string(active_strategy);
    config.seed = active_seed;
    ActiveTrace trace = run_active_loop(corpus, config, options);
    fs::path out = output_dir(out_flag);
    write_json(out / "active_trace.json", active_trace_json(trace));
    std::string errors_csv = "month,cumulative_errors\n";
    std::string precision_csv = "month,precision\n";
    std::string recall_csv = "month,recall\n";
    for (std::size_t m = 0; m < trace.monthly_reports.size(); ++m) {
      errors_csv += csv_line({std::to_string(m + 1),
                              std::to_string(trace.cumulative_errors[m])});
      precision_csv += csv_line({std::to_string(m + 1),
                                 fmt(trace.monthly_reports[m].confusion.precision())});
      recall_csv += csv_line({std::to_string(m + 1),
                              fmt(trace.monthly_reports[m].confusion.tpr())});
    }
    write_text_file(out / "active_cumulative_errors.csv", errors_csv);
    write_text_file(out / "active_precision.csv", precision_csv);
    write_text_file(out / "active_recall.csv", recall_csv);
    std::cout << json{{"cumulative_errors", trace.cumulative_errors.back()},
                      {"trace", (out / "active_trace.json").string()}}
                     .dump(1)
              << "\n";
  });

  // ---- subsample ----
  auto* subsample_cmd = app.add_subcommand(
      "subsample", "Benign sub-sampling experiment (mean +/- sd per fraction)");
  std::string subsample_corpus, subsample_flavor = "combined";
  std::vector<double> subsample_fractions{0.1, 0.2, 0.4, 0.8};
  std::size_t subsample_repeats = 5, subsample_trees = 120;
  SplitFlags subsample_split;
  std::uint64_t subsample_seed = 0;
  subsample_cmd->add_option("--corpus", subsample_corpus, "Corpus directory")->required();
  subsample_cmd->add_option("--fractions", subsample_fractions, "Benign fractions");
  subsample_cmd->add_option("--repeats", subsample_repeats, "Repeats per fraction");
  subsample_cmd->add_option("--ratio", subsample_split.ratio, "Train/test split ratio");
  subsample_cmd->add_option("--flavor", subsample_flavor, "metadata|source|combined");
  subsample_cmd->add_option("--trees", subsample_trees, "Trees per forest");
  subsample_cmd->add_option("--seed", subsample_seed, "Experiment seed")->required();
  subsample_cmd->callback([&] {
    Corpus corpus = load_corpus(subsample_corpus, nullptr);
    subsample_split.seed = subsample_seed;
    auto [train, test] = derive_split(corpus, subsample_split);
    PipelineOptions options;
    options.flavor = flavor_from_string(subsample_flavor);
    options.train = train_config_from(subsample_trees, subsample_seed);
    std::vector<SubsampleCell> cells = subsample_experiment(
        train, test, subsample_fractions, subsample_repeats, options, subsample_seed);
    fs::path out = output_dir(out_flag);
    std::string csv =
        "fraction,accuracy_mean,accuracy_sd,fpr_mean,fpr_sd,precision_mean,"
        "precision_sd,tpr_mean,tpr_sd,fpr_median\n";
    json rows = json::array();
    for (const SubsampleCell& cell : cells) {
      csv += csv_line({fmt(cell.fraction), fmt(SubsampleCell::mean(cell.accuracy)),
                       fmt(SubsampleCell::stddev(cell.accuracy)),
                       fmt(SubsampleCell::mean(cell.fpr)),
                       fmt(SubsampleCell::stddev(cell.fpr)),
                       fmt(SubsampleCell::mean(cell.precision)),
                       fmt(SubsampleCell::stddev(cell.precision)),
                       fmt(SubsampleCell::mean(cell.tpr)),
                       fmt(SubsampleCell::stddev(cell.tpr)),
                       fmt(SubsampleCell::median(cell.fpr))});
      rows.push_back({{"fraction", cell.fraction},
                      {"accuracy_mean", SubsampleCell::mean(cell.accuracy)},
                      {"fpr_mean", SubsampleCell::mean(cell.fpr)},
                      {"fpr_median", SubsampleCell::median(cell.fpr)},
                      {"precision_mean", SubsampleCell::mean(cell.precision)},
                      {"tpr_mean", SubsampleCell::mean(cell.tpr)}});
    }
    write_text_file(out / "subsample.csv", csv);
    write_json(out / "subsample.json", rows);
    std::cout << rows.dump(1) << "\n";
  });

  // ---- cluster ----
  auto* cluster_cmd = app.add_subcommand(
      "cluster", "Fuzzy-hash clustering of flagged extensions");
  std::string cluster_corpus, cluster_predictions;
  int cluster_min_sim = 90;
  bool cluster_all_malicious = false;
  cluster_cmd->add_option("--corpus", cluster_corpus, "Corpus directory")->required();
  cluster_cmd->add_option("--predictions", cluster_predictions,
                          "Predictions JSON; clusters the flagged ids");
  cluster_cmd->add_flag("--all-malicious", cluster_all_malicious,
                        "Cluster the labeled malicious records instead");
  cluster_cmd->add_option("--min-sim", cluster_min_sim,
                          "Similarity floor (strictly greater joins)");
  cluster_cmd->callback([&] {
    Corpus corpus = load_corpus(cluster_corpus, nullptr);
    std::vector<std::string> flagged;
    if (!cluster_predictions.empty()) {
      Predictions preds = predictions_from_json(read_json(cluster_predictions));
      for (std::size_t i = 0; i < preds.ids.size(); ++i) {
        if (preds.predicted[i]) flagged.push_back(preds.ids[i]);
      }
    } else if (cluster_all_malicious) {
      for (const auto& rec : corpus.records) {
        if (rec.label == Label::malicious) flagged.push_back(rec.id());
      }
    } else {
      throw InputError("ConfigError", "need --predictions or --all-malicious");
    }
    ClusterSet clusters = cluster_flagged(corpus, flagged, cluster_min_sim);
    fs::path out = output_dir(out_flag);
    json report = cluster_report_json(clusters);
    report["flagged"] = flagged.size();
    write_json(out / "clusters.json", report);
    std::cout << json{{"flagged", flagged.size()},
                      {"clusters", clusters.clusters.size()},
                      {"unclustered", clusters.unclustered.size()}}
                     .dump(1)
              << "\n";
  });

  // ---- importance ----
  auto* imp_cmd = app.add_subcommand("importance", "Ranked feature importances");
  std::string imp_model, imp_schema;
  std::size_t imp_top = 25;
  imp_cmd->add_option("--model", imp_model, "Calibrated model")->required();
  imp_cmd->add_option("--schema", imp_schema, "Frozen schema JSON")->required();
  imp_cmd->add_option("--top", imp_top, "Rows to emit");
  imp_cmd->callback([&] {
    Bytes model_bytes = read_file(imp_model);
    CalibratedModel model =
        model_from_bytes(BytesView(model_bytes.data(), model_bytes.size()));
    FeatureSchema schema = schema_from_json(read_json(imp_schema));
    require_schema_match(model, schema.digest);
    auto ranked = feature_importance(model.forest);
    fs::path out = output_dir(out_flag);
    std::string csv = "rank,feature,importance\n";
    for (std::size_t i = 0; i < ranked.size() && i < imp_top; ++i) {
      std::size_t index = ranked[i].first;
      if (model.flavor == Flavor::source) index += schema.metadata_dim();
      csv += csv_line({std::to_string(i + 1), feature_display_name(schema, index),
                       fmt(ranked[i].second)});
    }
    write_text_file(out / "importance.csv", csv);
    std::cout << csv;
  });

  // ---- report ----
  auto* report_cmd =
      app.add_subcommand("report", "Expand a report JSON into CSV tables");
  std::string report_in;
  report_cmd->add_option("--report", report_in, "Report JSON from evaluate")->required();
  report_cmd->callback([&] {
    json report = read_json(report_in);
    fs::path out = output_dir(out_flag);
    std::string metrics = "metric,value\n";
    for (const char* key : {"accuracy", "tpr", "tnr", "fpr", "fnr", "fdr", "precision"}) {
      metrics += csv_line({key, fmt(report.value(key, 0.0))});
    }
    write_text_file(out / "metrics.csv", metrics);
    for (const char* dimension : {"year", "month", "category", "mv", "class"}) {
      std::string prefix = std::string(dimension) + ":";
      std::string csv = "slice,tp,fp,tn,fn,accuracy\n";
      bool any = false;
      if (report.contains("slices")) {
        for (const auto& [key, c] : report["slices"].items()) {
          if (key.rfind(prefix, 0) != 0) continue;
          any = true;
          csv += csv_line({key.substr(prefix.size()),
                           std::to_string(c.value("tp", 0)),
                           std::to_string(c.value("fp", 0)),
                           std::to_string(c.value("tn", 0)),
                           std::to_string(c.value("fn", 0)),
                           fmt(c.value("accuracy", 0.0))});
        }
      }
      if (any) {
        write_text_file(out / ("slices_" + std::string(dimension) + ".csv"), csv);
      }
    }
    std::cout << json{{"out", out.string()}}.dump(1) << "\n";
  });

  CLI11_PARSE(app, argc, argv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const InputError& e) {
    std::cerr << json{{"error", e.code()}, {"detail", e.what()}}.dump() << "\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << json{{"error", e.code()}, {"detail", e.what()}}.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "Unexpected"}, {"detail", e.what()}}.dump() << "\n";
    return 3;
  }
}
