#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "extscan/common.hpp"
#include "extscan/crx.hpp"
#include "extscan/zip.hpp"
#include "test_util.hpp"

// End-to-end checks of the shipped binary: golden pipeline, predict on a
// single package, and byte-identical reruns under fixed seeds.

namespace fs = std::filesystem;
using namespace extscan;

namespace {

class CliEnv : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("extscan_cli_" + std::to_string(::getpid()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  int run(const std::string& args, const fs::path& out_dir) const {
    fs::create_directories(out_dir);
    std::string cmd = std::string(EXTSCAN_CLI_PATH) + " --out " + out_dir.string() +
                      " " + args + " >> " + (out_dir / "stdout.log").string() +
                      " 2>> " + (out_dir / "stderr.log").string();
    int rc = std::system(cmd.c_str());
    return rc == -1 ? -1 : WEXITSTATUS(rc);
  }

  fs::path root_;
};

std::string file_bytes(const fs::path& p) { return read_text_file(p); }

}  // namespace

TEST_F(CliEnv, GoldenPipelineCompletes) {
  fs::path out = root_ / "run";
  write_text_file(root_ / "synth.conf",
                  "records = 220\nyear_start = 2020\nyear_end = 2022\n");
  ASSERT_EQ(run("synth --config " + (root_ / "synth.conf").string() + " --seed 7", out), 0);
  fs::path corpus = out / "corpus";
  ASSERT_TRUE(fs::exists(corpus));

  ASSERT_EQ(run("ingest --corpus " + corpus.string(), out), 0);
  ASSERT_TRUE(fs::exists(out / "warnings.jsonl"));

  ASSERT_EQ(run("build-vocab --corpus " + corpus.string() + " --seed 11", out), 0);
  ASSERT_TRUE(fs::exists(out / "schema.json"));

  ASSERT_EQ(run("extract --corpus " + corpus.string() + " --schema " +
                    (out / "schema.json").string() + " --flavor combined --seed 11",
                out),
            0);
  ASSERT_TRUE(fs::exists(out / "combined_train.fm"));
  ASSERT_TRUE(fs::exists(out / "combined_test.fm"));

  ASSERT_EQ(run("train --matrix " + (out / "combined_train.fm").string() +
                    " --trees 25 --seed 3",
                out),
            0);
  ASSERT_TRUE(fs::exists(out / "model.bin"));

  ASSERT_EQ(run("calibrate --matrix " + (out / "combined_train.fm").string() +
                    " --model " + (out / "model.bin").string() +
                    " --trees 25 --seed 3",
                out),
            0);

  ASSERT_EQ(run("evaluate --matrix " + (out / "combined_test.fm").string() +
                    " --model " + (out / "model.bin").string() + " --sweep",
                out),
            0);
  ASSERT_TRUE(fs::exists(out / "report.json"));
  ASSERT_TRUE(fs::exists(out / "predictions.json"));
  ASSERT_TRUE(fs::exists(out / "threshold_sweep.csv"));

  ASSERT_EQ(run("report --report " + (out / "report.json").string(), out), 0);
  ASSERT_TRUE(fs::exists(out / "metrics.csv"));

  ASSERT_EQ(run("importance --model " + (out / "model.bin").string() + " --schema " +
                    (out / "schema.json").string(),
                out),
            0);
  ASSERT_TRUE(fs::exists(out / "importance.csv"));

  ASSERT_EQ(run("cluster --corpus " + corpus.string() + " --predictions " +
                    (out / "predictions.json").string(),
                out),
            0);
  ASSERT_TRUE(fs::exists(out / "clusters.json"));
}

TEST_F(CliEnv, PredictSingleCrxEmitsLabeledJson) {
  fs::path out = root_ / "run";
  write_text_file(root_ / "small.conf", "records = 160\n");
  ASSERT_EQ(run("synth --config " + (root_ / "small.conf").string() + " --seed 5", out),
            0);
  fs::path corpus = out / "corpus";
  ASSERT_EQ(run("build-vocab --corpus " + corpus.string() + " --seed 2", out), 0);
  ASSERT_EQ(run("extract --corpus " + corpus.string() + " --schema " +
                    (out / "schema.json").string() + " --flavor metadata --seed 2",
                out),
            0);
  ASSERT_EQ(run("train --matrix " + (out / "metadata_train.fm").string() +
                    " --trees 15 --seed 4",
                out),
            0);

  // Package one extension as a CRX3 and classify it.
  Bytes zip = testutil::listing_style_package();
  Bytes opaque(4, 0xAB);
  Bytes crx = build_crx3(BytesView(zip.data(), zip.size()),
                         BytesView(opaque.data(), opaque.size()));
  write_file(root_ / "sample.crx", BytesView(crx.data(), crx.size()));
  ASSERT_EQ(run("predict --schema " + (out / "schema.json").string() + " --model " +
                    (out / "model.bin").string() + " --crx " +
                    (root_ / "sample.crx").string(),
                out),
            0);
  std::string log = file_bytes(out / "stdout.log");
  EXPECT_NE(log.find("\"id\""), std::string::npos);
  EXPECT_NE(log.find("\"proba\""), std::string::npos);
  EXPECT_NE(log.find("\"label\""), std::string::npos);
  EXPECT_NE(log.find("\"flavor\""), std::string::npos);
}

TEST_F(CliEnv, ErrorsAreMachineReadable) {
  fs::path out = root_ / "run";
  EXPECT_NE(run("ingest --corpus " + (root_ / "missing_dir").string(), out), 0);
  std::string err = file_bytes(out / "stderr.log");
  EXPECT_NE(err.find("\"error\""), std::string::npos);
}

TEST_F(CliEnv, StagesAreByteIdenticalAcrossReruns) {
  write_text_file(root_ / "synth.conf",
                  "records = 140\nyear_start = 2021\nyear_end = 2022\n");
  auto run_all = [&](const fs::path& out) {
    ASSERT_EQ(run("synth --config " + (root_ / "synth.conf").string() + " --seed 9", out),
              0);
    fs::path corpus = out / "corpus";
    ASSERT_EQ(run("build-vocab --corpus " + corpus.string() + " --seed 1", out), 0);
    ASSERT_EQ(run("extract --corpus " + corpus.string() + " --schema " +
                      (out / "schema.json").string() + " --flavor combined --seed 1",
                  out),
              0);
    ASSERT_EQ(run("train --matrix " + (out / "combined_train.fm").string() +
                      " --trees 10 --seed 2",
                  out),
              0);
    ASSERT_EQ(run("evaluate --matrix " + (out / "combined_test.fm").string() +
                      " --model " + (out / "model.bin").string(),
                  out),
              0);
  };
  fs::path first = root_ / "first";
  fs::path second = root_ / "second";
  run_all(first);
  run_all(second);
  for (const char* artifact :
       {"schema.json", "combined_train.fm", "combined_test.fm", "model.bin",
        "report.json", "predictions.json"}) {
    EXPECT_EQ(file_bytes(first / artifact), file_bytes(second / artifact))
        << artifact << " differs across reruns";
  }
  // Corpus directories byte-identical too.
  std::vector<fs::path> rel;
  for (const auto& e : fs::recursive_directory_iterator(first / "corpus")) {
    if (e.is_regular_file()) rel.push_back(fs::relative(e.path(), first / "corpus"));
  }
  ASSERT_FALSE(rel.empty());
  for (const auto& r : rel) {
    EXPECT_EQ(file_bytes(first / "corpus" / r), file_bytes(second / "corpus" / r))
        << "corpus file differs: " << r;
  }
}

TEST_F(CliEnv, ExperimentsRunOnSmallCorpus) {
  fs::path out = root_ / "run";
  write_text_file(root_ / "drift.conf",
                  "records = 240\nyear_start = 2019\nyear_end = 2022\ndrift = 1.0\n");
  ASSERT_EQ(run("synth --config " + (root_ / "drift.conf").string() + " --seed 13", out),
            0);
  fs::path corpus = out / "corpus";
  ASSERT_EQ(run("longitudinal --corpus " + corpus.string() +
                    " --year-from 2020 --year-to 2022 --trees 15 --seed 1 "
                    "--fixed-threshold 0.3",
                out),
            0);
  ASSERT_TRUE(fs::exists(out / "longitudinal.csv"));
  std::string longi_first = file_bytes(out / "longitudinal.csv");
  ASSERT_EQ(run("longitudinal --corpus " + corpus.string() +
                    " --year-from 2020 --year-to 2022 --trees 15 --seed 1 "
                    "--fixed-threshold 0.3",
                out),
            0);
  EXPECT_EQ(file_bytes(out / "longitudinal.csv"), longi_first)
      << "longitudinal CSV differs across identical runs";
  ASSERT_EQ(run("drift-check --corpus " + corpus.string() +
                    " --cutoff-year 2022 --trees 15 --seed 1",
                out),
            0);
  ASSERT_TRUE(fs::exists(out / "drift_fnr.csv"));
  ASSERT_EQ(run("active-learn --corpus " + corpus.string() +
                    " --year 2022 --k 5 --strategy uncertainty --trees 15 --seed 1 "
                    "--fixed-threshold 0.3",
                out),
            0);
  ASSERT_TRUE(fs::exists(out / "active_cumulative_errors.csv"));
  ASSERT_EQ(run("subsample --corpus " + corpus.string() +
                    " --fractions 0.2 0.8 --repeats 2 --trees 15 --seed 1",
                out),
            0);
  ASSERT_TRUE(fs::exists(out / "subsample.csv"));
}
