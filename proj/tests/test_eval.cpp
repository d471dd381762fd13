#include <gtest/gtest.h>

#include "extscan/eval.hpp"
#include "extscan/rng.hpp"
#include "extscan/synth.hpp"
#include "test_util.hpp"

using namespace extscan;

namespace {

Predictions stub_predictions(const std::vector<std::string>& ids,
                             const std::vector<bool>& predicted,
                             const std::vector<bool>& actual) {
  Predictions p;
  p.ids = ids;
  p.predicted = predicted;
  p.actual = actual;
  p.probas.assign(ids.size(), 0.5);
  return p;
}

}  // namespace

TEST(Confusion, MetricIdentitiesHoldExactly) {
  Rng rng(31);
  for (int i = 0; i < 200; ++i) {
    Confusion c;
    c.tp = rng.index(50);
    c.fp = rng.index(50);
    c.tn = rng.index(50);
    c.fn = rng.index(50);
    if (c.total() == 0) continue;
    EXPECT_DOUBLE_EQ(c.accuracy(),
                     static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total()));
    if (c.tp + c.fn > 0) {
      EXPECT_DOUBLE_EQ(c.tpr(), static_cast<double>(c.tp) /
                                    static_cast<double>(c.tp + c.fn));
      EXPECT_DOUBLE_EQ(c.fnr(), static_cast<double>(c.fn) /
                                    static_cast<double>(c.tp + c.fn));
      EXPECT_NEAR(c.fnr(), 1.0 - c.tpr(), 1e-15);
    }
    if (c.tn + c.fp > 0) {
      EXPECT_DOUBLE_EQ(c.tnr(), static_cast<double>(c.tn) /
                                    static_cast<double>(c.tn + c.fp));
      EXPECT_DOUBLE_EQ(c.fpr(), static_cast<double>(c.fp) /
                                    static_cast<double>(c.tn + c.fp));
      EXPECT_NEAR(c.fpr(), 1.0 - c.tnr(), 1e-15);
    }
    if (c.tp + c.fp > 0) {
      EXPECT_DOUBLE_EQ(c.fdr(), static_cast<double>(c.fp) /
                                    static_cast<double>(c.tp + c.fp));
    }
    EXPECT_DOUBLE_EQ(c.precision(), 1.0 - c.fdr());
    EXPECT_GE(c.accuracy(), 0.0);
    EXPECT_LE(c.accuracy(), 1.0);
  }
}

TEST(Confusion, StubArithmeticCase) {
  Confusion c{2, 1, 6, 1};
  EXPECT_DOUBLE_EQ(c.accuracy(), 0.8);
  EXPECT_DOUBLE_EQ(c.tpr(), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(c.fdr(), 1.0 / 3.0);
}

TEST(Confusion, FdrZeroWhenNoPredictedPositives) {
  Confusion c{0, 0, 9, 3};
  EXPECT_DOUBLE_EQ(c.fdr(), 0.0);
  EXPECT_DOUBLE_EQ(c.precision(), 1.0);
}

TEST(Evaluate, PerfectPredictionsAndSlices) {
  SynthConfig config;
  config.records = 120;
  config.year_start = 2020;
  config.year_end = 2021;
  Corpus corpus = synthesize(config, 8);
  FeatureSchema schema = build_schema(as_training(corpus));
  FeatureMatrix matrix = extract_features(corpus, schema, Flavor::metadata);
  TrainConfig tc;
  tc.n_trees = 40;
  tc.seed = 2;
  CalibratedModel model;
  model.flavor = Flavor::metadata;
  model.threshold = 0.5;
  model.forest = train_forest(matrix, tc);  // evaluated on its training set
  auto [report, preds] = evaluate(model, matrix);
  EXPECT_EQ(report.confusion.total(), corpus.size());
  EXPECT_DOUBLE_EQ(report.confusion.accuracy(), 1.0);
  EXPECT_DOUBLE_EQ(report.confusion.fdr(), 0.0);

  // Slices in one dimension sum to the global confusion.
  for (const char* dim : {"year:", "mv:", "class:"}) {
    Confusion sum;
    for (const auto& [key, c] : report.slices) {
      if (key.rfind(dim, 0) == 0) sum += c;
    }
    EXPECT_EQ(sum.total(), report.confusion.total()) << dim;
    EXPECT_EQ(sum.tp, report.confusion.tp) << dim;
    EXPECT_EQ(sum.fp, report.confusion.fp) << dim;
  }
}

TEST(Evaluate, UnlabeledRecordRefused) {
  Corpus corpus;
  corpus.records.push_back(testutil::simple_record("u", Label::unknown, 2021));
  corpus.records.push_back(testutil::simple_record("b", Label::benign, 2021));
  corpus.records.push_back(testutil::simple_record("m", Label::malicious, 2021));
  FeatureSchema schema = build_schema(as_training(corpus));
  FeatureMatrix matrix = extract_features(corpus, schema, Flavor::metadata);
  TrainConfig tc;
  tc.n_trees = 3;
  CalibratedModel model;
  model.flavor = Flavor::metadata;
  model.threshold = 0.5;
  // Train on the two labeled rows only.
  Corpus labeled;
  labeled.records.push_back(corpus.records[1]);
  labeled.records.push_back(corpus.records[2]);
  model.forest = train_forest(extract_features(labeled, schema, Flavor::metadata), tc);
  EXPECT_THROW(evaluate(model, matrix), InputError);
}

TEST(EnsembleIntersection, FlagsOnlyUnanimousMalicious) {
  auto a = stub_predictions({"x", "y", "z"}, {true, true, false}, {true, false, false});
  auto b = stub_predictions({"x", "y", "z"}, {true, true, true}, {true, false, false});
  auto c = stub_predictions({"x", "y", "z"}, {true, false, true}, {true, false, false});
  Predictions merged = ensemble_intersection({a, b, c});
  ASSERT_EQ(merged.ids.size(), 3u);
  std::map<std::string, bool> flag;
  for (std::size_t i = 0; i < merged.ids.size(); ++i) {
    flag[merged.ids[i]] = merged.predicted[i];
  }
  EXPECT_TRUE(flag["x"]);   // (M,M,M)
  EXPECT_FALSE(flag["y"]);  // (M,M,B)
  EXPECT_FALSE(flag["z"]);
}

TEST(EnsembleIntersection, UniverseIsCommonIds) {
  auto a = stub_predictions({"x", "y"}, {true, true}, {true, true});
  auto b = stub_predictions({"y", "z"}, {true, true}, {true, true});
  auto c = stub_predictions({"y"}, {true}, {true});
  Predictions merged = ensemble_intersection({a, b, c});
  ASSERT_EQ(merged.ids.size(), 1u);
  EXPECT_EQ(merged.ids[0], "y");
  EXPECT_TRUE(merged.predicted[0]);

  Predictions empty = ensemble_intersection(
      {stub_predictions({"a"}, {true}, {true}),
       stub_predictions({"b"}, {true}, {true}),
       stub_predictions({"c"}, {true}, {true})});
  EXPECT_TRUE(empty.ids.empty());
}

TEST(EnsembleIntersection, DuplicateIdRefused) {
  auto a = stub_predictions({"x", "x"}, {true, true}, {true, true});
  EXPECT_THROW(ensemble_intersection({a}), InputError);
}

TEST(EnsembleIntersection, PositiveSetIsSubsetOfEachFlavor) {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::string> ids;
    for (int i = 0; i < 40; ++i) ids.push_back("r" + std::to_string(i));
    std::vector<Predictions> flavors;
    for (int f = 0; f < 3; ++f) {
      std::vector<bool> predicted, actual;
      for (int i = 0; i < 40; ++i) {
        predicted.push_back(rng.bernoulli(0.4));
        actual.push_back(rng.bernoulli(0.3));
      }
      flavors.push_back(stub_predictions(ids, predicted, actual));
    }
    Predictions merged = ensemble_intersection(flavors);
    Confusion merged_c = confusion_of(merged);
    for (const auto& flavor : flavors) {
      Confusion c = confusion_of(flavor);
      EXPECT_LE(merged_c.fp, c.fp);
      EXPECT_LE(merged_c.tp, c.tp);
    }
  }
}

TEST(FprThresholdExperiment, ExtremesAndMonotonicity) {
  SynthConfig config;
  config.records = 200;
  Corpus corpus = synthesize(config, 21);
  auto [train, test] = split_random(corpus, 0.8, 4);
  PipelineOptions options;
  options.train.n_trees = 30;
  options.flavor = Flavor::combined;
  TrainedPipeline pipeline = train_pipeline(train, options, 11);
  FeatureMatrix test_m = extract_features(test, pipeline.schema, Flavor::combined);

  EvalReport at_one = fpr_threshold_experiment(pipeline.model, test_m, 1.0 + 1e-12);
  EXPECT_EQ(at_one.confusion.tp + at_one.confusion.fp, 0u);
  EXPECT_DOUBLE_EQ(at_one.confusion.fpr(), 0.0);

  EvalReport at_zero = fpr_threshold_experiment(pipeline.model, test_m, 0.0);
  EXPECT_EQ(at_zero.confusion.tn + at_zero.confusion.fn, 0u);
  EXPECT_DOUBLE_EQ(at_zero.confusion.tnr(), 0.0);

  double last_fpr = 1.0;
  for (double t : {0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0}) {
    EvalReport r = fpr_threshold_experiment(pipeline.model, test_m, t);
    EXPECT_LE(r.confusion.fpr(), last_fpr + 1e-12);
    last_fpr = r.confusion.fpr();
  }
}

TEST(SliceReport, GroupsByKeyAndPreservesTotals) {
  EvalReport report;
  report.confusion = {5, 2, 30, 3};
  report.slices["category:fun"] = {2, 1, 10, 1};
  report.slices["category:news"] = {3, 1, 20, 2};
  report.slices["year:2021"] = {5, 2, 30, 3};
  nlohmann::json rows = slice_report(report, "category");
  std::uint64_t total = 0;
  for (const auto& row : rows) total += row.at("total").get<std::uint64_t>();
  EXPECT_EQ(total, 40u);  // sums to the global confusion total
  nlohmann::json single = slice_report(report, "year");
  ASSERT_EQ(single.size(), 2u);  // benign + malicious rows for one slice
}

TEST(DriftFnr, DegenerateSingleYearCorpusRefused) {
  SynthConfig config;
  config.records = 80;
  config.year_start = 2022;
  config.year_end = 2022;
  Corpus corpus = synthesize(config, 3);
  PipelineOptions options;
  options.train.n_trees = 10;
  EXPECT_THROW(drift_fnr_check(corpus, 2022, 0.8, options, 1), InputError);
}

TEST(Subsample, FractionOneRejected) {
  SynthConfig config;
  config.records = 60;
  Corpus corpus = synthesize(config, 13);
  auto [train, test] = split_random(corpus, 0.8, 2);
  PipelineOptions options;
  options.train.n_trees = 5;
  EXPECT_THROW(
      subsample_experiment(train, test, {1.0}, 1, options, 3),
      UsageError);
}

TEST(Longitudinal, DriftFreeYearsMatchRandomSplit) {
  // With drift off, year splits are exchangeable with random splits: the
  // per-year TPR stays within 5 points of the random-split TPR. Median
  // over 5 seeds.
  std::vector<double> gaps;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SynthConfig config;
    config.records = 900;
    config.year_start = 2019;
    config.year_end = 2022;
    config.drift = 0.0;
    Corpus corpus = synthesize(config, 5000 + seed);
    PipelineOptions options;
    options.train.n_trees = 40;
    options.flavor = Flavor::combined;

    auto [train, test] = split_random(corpus, 0.8, seed);
    TrainedPipeline pipeline = train_pipeline(train, options, seed);
    FeatureMatrix test_m = extract_features(test, pipeline.schema, Flavor::combined);
    double random_tpr = evaluate(pipeline.model, test_m).first.confusion.tpr();

    std::vector<YearResult> years = longitudinal(corpus, {2021, 2022}, options, seed);
    for (const YearResult& yr : years) {
      ASSERT_FALSE(yr.skipped);
      gaps.push_back(std::fabs(yr.report.confusion.tpr() - random_tpr));
    }
  }
  std::sort(gaps.begin(), gaps.end());
  double median_gap = gaps[gaps.size() / 2];
  EXPECT_LE(median_gap, 0.05) << "median per-year TPR gap " << median_gap;
}

TEST(DriftFnr, EnabledCorpusShowsLargeGapDisabledDoesNot) {
  PipelineOptions options;
  options.train.n_trees = 50;
  options.flavor = Flavor::combined;

  SynthConfig drifted;
  drifted.records = 1500;
  drifted.year_start = 2019;
  drifted.year_end = 2022;
  drifted.drift = 1.0;
  DriftFnrResult on =
      drift_fnr_check(synthesize(drifted, 404), 2022, 0.8, options, 7);
  EXPECT_GE(on.fnr_in - on.fnr_before, 0.20)
      << "in=" << on.fnr_in << " before=" << on.fnr_before;

  SynthConfig flat = drifted;
  flat.drift = 0.0;
  DriftFnrResult off =
      drift_fnr_check(synthesize(flat, 404), 2022, 0.8, options, 7);
  EXPECT_LE(std::fabs(off.fnr_in - off.fnr_before), 0.05)
      << "in=" << off.fnr_in << " before=" << off.fnr_before;
}

TEST(Subsample, LargestFractionApproachesFullData) {
  SynthConfig config;
  config.records = 1200;
  Corpus corpus = synthesize(config, 606);
  auto [train, test] = split_random(corpus, 0.8, 9);
  PipelineOptions options;
  options.train.n_trees = 50;
  options.flavor = Flavor::combined;
  TrainedPipeline full = train_pipeline(train, options, 31);
  FeatureMatrix test_m = extract_features(test, full.schema, Flavor::combined);
  double full_acc = evaluate(full.model, test_m).first.confusion.accuracy();
  std::vector<SubsampleCell> cells =
      subsample_experiment(train, test, {0.8}, 5, options, 31);
  ASSERT_EQ(cells.size(), 1u);
  EXPECT_NEAR(SubsampleCell::mean(cells[0].accuracy), full_acc, 0.05);
}

TEST(SliceReport, Mv3MaliciousAccuracyDipsInIntroductionYear) {
  // The synthesizer couples new-manifest malicious campaigns in the
  // introduction year with fresh patterns; a model trained on earlier
  // years misses those hardest.
  SynthConfig config;
  config.records = 2200;
  config.year_start = 2018;
  config.year_end = 2022;
  config.drift = 1.0;
  config.mv3_year = 2021;
  Corpus corpus = synthesize(config, 2468);
  PipelineOptions options;
  options.train.n_trees = 60;
  options.flavor = Flavor::combined;
  std::vector<YearResult> years = longitudinal(corpus, {2021}, options, 13);
  ASSERT_FALSE(years[0].skipped);
  const auto& slices = years[0].report.slices;
  ASSERT_TRUE(slices.count("mv:3"));
  ASSERT_TRUE(slices.count("mv:2"));
  const Confusion& mv3 = slices.at("mv:3");
  const Confusion& mv2 = slices.at("mv:2");
  ASSERT_GT(mv3.tp + mv3.fn, 5u) << "not enough MV3 malicious to measure";
  // Malicious accuracy = TPR within the slice.
  EXPECT_LT(mv3.tpr() + 0.15, mv2.tpr())
      << "mv3 " << mv3.tpr() << " vs mv2 " << mv2.tpr();
}

TEST(Longitudinal, SkipsYearsWithEmptySides) {
  SynthConfig config;
  config.records = 100;
  config.year_start = 2021;
  config.year_end = 2022;
  Corpus corpus = synthesize(config, 9);
  PipelineOptions options;
  options.train.n_trees = 20;
  options.folds = 3;
  std::vector<YearResult> results = longitudinal(corpus, {2021, 2022, 2030}, options, 5);
  ASSERT_EQ(results.size(), 3u);
  EXPECT_TRUE(results[0].skipped);   // nothing before 2021
  EXPECT_FALSE(results[1].skipped);  // 2021 trains, 2022 tests
  EXPECT_TRUE(results[2].skipped);   // no records in 2030
  EXPECT_GT(results[1].report.confusion.total(), 0u);
  EXPECT_EQ(results[1].top_importances.size(), results[1].top_importance_names.size());
}
