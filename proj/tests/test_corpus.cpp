#include <gtest/gtest.h>

#include <filesystem>

#include "extscan/corpus.hpp"
#include "extscan/synth.hpp"
#include "test_util.hpp"

using namespace extscan;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("extscan_test_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter_++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  static inline int counter_ = 0;
  fs::path path_;
};

void write_extension(const fs::path& dir, const std::string& id,
                     const std::string& label, bool with_sidecar = true,
                     bool with_package = true) {
  fs::create_directories(dir / id);
  if (with_sidecar) {
    write_text_file(dir / id / "meta.json",
                    "{\"id\": \"" + id + "\", \"label\": \"" + label +
                        "\", \"last_update\": \"2021-06-01\"}");
  }
  if (with_package) {
    Bytes zip = testutil::make_zip(
        {{"manifest.json",
          R"({"manifest_version":3, "background": {"service_worker": "w.js"}})"},
         {"w.js", "var seed = 3;"}});
    write_file(dir / id / "package.zip", BytesView(zip.data(), zip.size()));
  }
}

Corpus tiny_corpus(std::size_t benign, std::size_t malicious, int year = 2021) {
  Corpus corpus;
  for (std::size_t i = 0; i < benign; ++i) {
    corpus.records.push_back(
        testutil::simple_record("b" + std::to_string(i), Label::benign, year));
  }
  for (std::size_t i = 0; i < malicious; ++i) {
    corpus.records.push_back(
        testutil::simple_record("m" + std::to_string(i), Label::malicious, year));
  }
  return corpus;
}

}  // namespace

TEST(Sidecar, MalwareAliasNormalizesToMalicious) {
  TempDir tmp;
  write_extension(tmp.path(), "aliased", "malware");
  Corpus corpus = ingest(tmp.path(), nullptr);
  ASSERT_EQ(corpus.size(), 1u);
  EXPECT_EQ(corpus.records[0].label, Label::malicious);
}

TEST(Sidecar, RoundTripThroughDirectory) {
  SynthConfig config;
  config.records = 12;
  config.year_start = 2020;
  config.year_end = 2021;
  Corpus corpus = synthesize(config, 5);
  TempDir tmp;
  write_corpus_dir(corpus, tmp.path() / "corpus");
  Corpus back = ingest(tmp.path() / "corpus", nullptr);
  ASSERT_EQ(back.size(), corpus.size());
  std::map<std::string, const ExtensionRecord*> by_id;
  for (const auto& r : back.records) by_id.emplace(r.id(), &r);
  for (const auto& r : corpus.records) {
    ASSERT_TRUE(by_id.count(r.id()));
    const ExtensionRecord& b = *by_id[r.id()];
    EXPECT_EQ(b.label, r.label);
    EXPECT_EQ(b.last_update, r.last_update);
    EXPECT_EQ(b.users, r.users);
    EXPECT_EQ(b.rating_count, r.rating_count);
    EXPECT_DOUBLE_EQ(b.rating_avg, r.rating_avg);
    EXPECT_EQ(b.description, r.description);
    EXPECT_EQ(b.summary, r.summary);
    EXPECT_EQ(b.reviews, r.reviews);
    EXPECT_EQ(b.same_developer_count, r.same_developer_count);
    EXPECT_EQ(b.related_permission_sets, r.related_permission_sets);
    EXPECT_EQ(b.category, r.category);
    EXPECT_EQ(b.pkg.archive.zip_payload, r.pkg.archive.zip_payload);
  }
}

TEST(Ingest, MissingSidecarBecomesWarning) {
  TempDir tmp;
  write_extension(tmp.path(), "ok1", "benign");
  write_extension(tmp.path(), "ok2", "benign");
  write_extension(tmp.path(), "ok3", "malicious");
  write_extension(tmp.path(), "nosidecar", "benign", /*with_sidecar=*/false);
  WarningLog warnings;
  Corpus corpus = ingest(tmp.path(), &warnings);
  EXPECT_EQ(corpus.size(), 3u);
  bool saw = false;
  for (const auto& w : warnings) saw |= w.code == "MissingSidecar";
  EXPECT_TRUE(saw);
}

TEST(Ingest, EmptyDirectoryIsError) {
  TempDir tmp;
  EXPECT_THROW(ingest(tmp.path(), nullptr), InputError);
}

TEST(Ingest, MissingPackageBecomesWarning) {
  TempDir tmp;
  write_extension(tmp.path(), "ok", "benign");
  write_extension(tmp.path(), "nopkg", "benign", true, /*with_package=*/false);
  WarningLog warnings;
  Corpus corpus = ingest(tmp.path(), &warnings);
  EXPECT_EQ(corpus.size(), 1u);
  bool saw = false;
  for (const auto& w : warnings) saw |= w.code == "UnreadablePackage";
  EXPECT_TRUE(saw);
}

TEST(Ingest, UnpackedTreeAccepted) {
  TempDir tmp;
  fs::path dir = tmp.path() / "unpacked";
  fs::create_directories(dir / "package");
  write_text_file(dir / "meta.json", R"({"id": "unpacked", "label": "benign"})");
  write_text_file(dir / "package" / "manifest.json",
                  R"({"manifest_version":3, "background": {"service_worker": "w.js"}})");
  write_text_file(dir / "package" / "w.js", "var q = 1;");
  Corpus corpus = ingest(tmp.path(), nullptr);
  ASSERT_EQ(corpus.size(), 1u);
  EXPECT_TRUE(corpus.records[0].pkg.script_bundle.has_value());
}

TEST(SplitRandom, StratifiedCountsMatchPaperExample) {
  Corpus corpus = tiny_corpus(100, 10);
  auto [train, test] = split_random(corpus, 0.8, 17);
  EXPECT_EQ(train.count_label(Label::benign), 80u);
  EXPECT_EQ(train.count_label(Label::malicious), 8u);
  EXPECT_EQ(test.count_label(Label::benign), 20u);
  EXPECT_EQ(test.count_label(Label::malicious), 2u);
}

TEST(SplitRandom, BoundaryRatiosRejected) {
  Corpus corpus = tiny_corpus(4, 4);
  EXPECT_THROW(split_random(corpus, 1.0, 1), UsageError);
  EXPECT_THROW(split_random(corpus, 0.0, 1), UsageError);
}

TEST(SplitRandom, DeterministicUnderSeed) {
  Corpus corpus = tiny_corpus(50, 20);
  auto [train1, test1] = split_random(corpus, 0.7, 123);
  auto [train2, test2] = split_random(corpus, 0.7, 123);
  ASSERT_EQ(train1.size(), train2.size());
  for (std::size_t i = 0; i < train1.size(); ++i) {
    EXPECT_EQ(train1.records[i].id(), train2.records[i].id());
  }
  auto [train3, test3] = split_random(corpus, 0.7, 124);
  bool same = train3.size() == train1.size();
  if (same) {
    same = true;
    for (std::size_t i = 0; i < train1.size(); ++i) {
      if (train1.records[i].id() != train3.records[i].id()) {
        same = false;
        break;
      }
    }
  }
  EXPECT_FALSE(same);
}

TEST(SplitRandom, PartitionInvariant) {
  Corpus corpus = tiny_corpus(33, 11);
  auto [train, test] = split_random(corpus, 0.6, 9);
  EXPECT_EQ(train.size() + test.size(), corpus.size());
  std::set<std::string> ids;
  for (const auto& r : train.records) ids.insert(r.id());
  for (const auto& r : test.records) {
    EXPECT_TRUE(ids.insert(r.id()).second) << "id in both sides: " << r.id();
  }
  EXPECT_EQ(ids.size(), corpus.size());
}

TEST(SplitTemporal, YearBoundaryGoesToTestSide) {
  Corpus corpus;
  corpus.records.push_back(testutil::simple_record("old", Label::benign, 2018));
  corpus.records.push_back(
      testutil::simple_record("boundary", Label::benign, 2019, 1, 1));
  corpus.records.push_back(testutil::simple_record("in", Label::malicious, 2019));
  auto [train, test] = split_temporal(corpus, 2019);
  ASSERT_EQ(train.size(), 1u);
  EXPECT_EQ(train.records[0].id(), "old");
  ASSERT_EQ(test.size(), 2u);
}

TEST(SplitTemporal, EmptySideIsError) {
  Corpus corpus = tiny_corpus(5, 2, 2020);
  EXPECT_THROW(split_temporal(corpus, 2020), InputError);  // empty train side
  EXPECT_THROW(split_temporal(corpus, 2023), InputError);  // empty test side
}

TEST(SplitTemporal, NoFutureRecordInTrain) {
  SynthConfig config;
  config.records = 60;
  Corpus corpus = synthesize(config, 11);
  auto [train, test] = split_temporal(corpus, 2020);
  for (const auto& r : train.records) {
    EXPECT_LT(r.last_update, (Date{2020, 1, 1}));
  }
  for (const auto& r : test.records) {
    EXPECT_EQ(r.last_update.year, 2020);
  }
}

TEST(SplitMonthly, BucketsByMonthAllowingEmpty) {
  Corpus corpus;
  corpus.records.push_back(testutil::simple_record("jan", Label::benign, 2022, 1, 5));
  corpus.records.push_back(testutil::simple_record("mar1", Label::benign, 2022, 3, 9));
  corpus.records.push_back(testutil::simple_record("mar2", Label::malicious, 2022, 3, 30));
  corpus.records.push_back(testutil::simple_record("other", Label::benign, 2021, 3, 9));
  std::vector<Corpus> months = split_monthly(corpus, 2022);
  ASSERT_EQ(months.size(), 12u);
  EXPECT_EQ(months[0].size(), 1u);
  EXPECT_EQ(months[1].size(), 0u);
  EXPECT_EQ(months[2].size(), 2u);
  std::size_t total = 0;
  for (const auto& m : months) total += m.size();
  EXPECT_EQ(total, 3u);
}
