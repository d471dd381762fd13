#include <gtest/gtest.h>

#include <map>

#include "extscan/feat_src.hpp"
#include "extscan/matrix.hpp"
#include "extscan/rng.hpp"
#include "extscan/synth.hpp"
#include "extscan/vocab.hpp"
#include "test_util.hpp"

using namespace extscan;

namespace {

UnitSequence sequence_of(std::initializer_list<JsNodeType> units) {
  UnitSequence seq;
  seq.parse_ok = true;
  seq.units = units;
  return seq;
}

/// Brute-force reference counter: enumerate all windows, count matches per
/// vocabulary gram, divide by the window count.
std::vector<double> naive_frequencies(const UnitSequence& seq,
                                      const NGramVocabulary& vocab) {
  std::vector<double> out(vocab.size(), 0.0);
  if (seq.units.size() < 4) return out;
  double windows = static_cast<double>(seq.units.size() - 3);
  for (std::size_t g = 0; g < vocab.grams.size(); ++g) {
    double count = 0;
    for (std::size_t i = 0; i + 4 <= seq.units.size(); ++i) {
      bool match = true;
      for (std::size_t k = 0; k < 4; ++k) {
        if (seq.units[i + k] != vocab.grams[g][k]) {
          match = false;
          break;
        }
      }
      if (match) count += 1.0;
    }
    out[g] = count / windows;
  }
  return out;
}

}  // namespace

TEST(NgramFrequencies, ShortSequenceGivesZeroVector) {
  NGramVocabulary vocab;
  vocab.grams.push_back({JsNodeType::Program, JsNodeType::Identifier,
                         JsNodeType::Identifier, JsNodeType::Identifier});
  UnitSequence seq =
      sequence_of({JsNodeType::Program, JsNodeType::Identifier, JsNodeType::Identifier});
  SourceVector v = ngram_frequencies(seq, vocab);
  ASSERT_EQ(v.values.size(), 1u);
  EXPECT_EQ(v.values[0], 0.0);
}

TEST(NgramFrequencies, HandComputedRepeatedPattern) {
  // Units ABCDABCD: 5 windows, (A,B,C,D) appears at offsets 0 and 4 -> 2/5.
  using T = JsNodeType;
  NGramVocabulary vocab;
  vocab.grams.push_back({T::Program, T::BlockStatement, T::ExpressionStatement,
                         T::CallExpression});
  UnitSequence seq = sequence_of({T::Program, T::BlockStatement, T::ExpressionStatement,
                                  T::CallExpression, T::Program, T::BlockStatement,
                                  T::ExpressionStatement, T::CallExpression});
  SourceVector v = ngram_frequencies(seq, vocab);
  EXPECT_DOUBLE_EQ(v.values[0], 2.0 / 5.0);
}

TEST(NgramFrequencies, MatchesBruteForceOnRandomSequences) {
  Rng rng(1337);
  // Random vocabulary over a small alphabet so collisions actually occur.
  std::vector<JsNodeType> alphabet = {
      JsNodeType::Program, JsNodeType::Identifier, JsNodeType::Literal,
      JsNodeType::CallExpression, JsNodeType::BlockStatement};
  NGramVocabulary vocab;
  std::set<UnitGram> seen;
  while (vocab.grams.size() < 30) {
    UnitGram g{alphabet[rng.index(5)], alphabet[rng.index(5)], alphabet[rng.index(5)],
               alphabet[rng.index(5)]};
    if (seen.insert(g).second) vocab.grams.push_back(g);
  }
  auto index = vocab.index();
  for (int trial = 0; trial < 1000; ++trial) {
    UnitSequence seq;
    seq.parse_ok = true;
    std::size_t len = rng.index(60);
    for (std::size_t i = 0; i < len; ++i) seq.units.push_back(alphabet[rng.index(5)]);
    SourceVector fast = ngram_frequencies(seq, vocab, index);
    std::vector<double> slow = naive_frequencies(seq, vocab);
    ASSERT_EQ(fast.values.size(), slow.size());
    for (std::size_t i = 0; i < slow.size(); ++i) {
      ASSERT_EQ(fast.values[i], slow[i]) << "trial " << trial << " slot " << i;
    }
  }
}

TEST(NgramFrequencies, MassBounds) {
  Rng rng(7);
  std::vector<JsNodeType> alphabet = {JsNodeType::Identifier, JsNodeType::Literal};
  // Full vocabulary over the alphabet: every window is in-vocabulary.
  NGramVocabulary full;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      for (int c = 0; c < 2; ++c) {
        for (int d = 0; d < 2; ++d) {
          full.grams.push_back({alphabet[a], alphabet[b], alphabet[c], alphabet[d]});
        }
      }
    }
  }
  for (int trial = 0; trial < 50; ++trial) {
    UnitSequence seq;
    seq.parse_ok = true;
    std::size_t len = 4 + rng.index(40);
    for (std::size_t i = 0; i < len; ++i) seq.units.push_back(alphabet[rng.index(2)]);
    SourceVector v = ngram_frequencies(seq, full);
    double sum = 0.0;
    for (double x : v.values) {
      EXPECT_GE(x, 0.0);
      EXPECT_LE(x, 1.0);
      sum += x;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);  // full vocabulary keeps all the mass
  }
}

TEST(ExtractSource, AbsentWithoutBundleOrOnParseFailure) {
  Corpus train;
  train.records.push_back(testutil::simple_record("src", Label::benign, 2021));
  FeatureSchema schema = build_schema(as_training(train));
  auto index = schema.ngrams.index();

  WarningLog warnings;
  Bytes no_scripts = testutil::make_zip({{"manifest.json", R"({"manifest_version":3})"}});
  ExtensionPackage metadata_only =
      load_package("m", BytesView(no_scripts.data(), no_scripts.size()), &warnings);
  EXPECT_FALSE(extract_source(metadata_only, schema.ngrams, index, schema.digest));

  Bytes broken = testutil::make_zip(
      {{"manifest.json",
        R"({"manifest_version":3, "background": {"service_worker": "w.js"}})"},
       {"w.js", "var = ;"}});
  ExtensionPackage broken_pkg =
      load_package("b", BytesView(broken.data(), broken.size()), &warnings);
  ASSERT_TRUE(broken_pkg.script_bundle.has_value());
  EXPECT_FALSE(extract_source(broken_pkg, schema.ngrams, index, schema.digest));
}

TEST(ExtractSource, ParseFailuresNeverDropRowsFromMetadata) {
  SynthConfig config;
  config.records = 120;
  config.parse_fail_rate = 0.15;
  Corpus corpus = synthesize(config, 99);
  FeatureSchema schema = build_schema(as_training(corpus));
  FeatureMatrix combined = extract_features(corpus, schema, Flavor::combined);
  FeatureMatrix metadata = extract_features(corpus, schema, Flavor::metadata);
  EXPECT_EQ(combined.n_rows, corpus.size());
  EXPECT_EQ(metadata.n_rows, corpus.size());
  std::size_t without_source = 0;
  for (std::size_t r = 0; r < combined.n_rows; ++r) {
    if (!combined.row_usable(r)) ++without_source;
    EXPECT_TRUE(metadata.row_usable(r));
  }
  EXPECT_GT(without_source, 0u);  // the fraction is visible, not silently lost
}

TEST(ExtractSource, ComposesParseAndFrequencies) {
  Corpus train;
  train.records.push_back(testutil::simple_record("src", Label::benign, 2021,
                                                  6, 15, "var a = 1; var b = a;"));
  FeatureSchema schema = build_schema(as_training(train));
  auto index = schema.ngrams.index();
  const ExtensionPackage& pkg = train.records[0].pkg;
  auto direct = extract_source(pkg, schema.ngrams, index, schema.digest);
  ASSERT_TRUE(direct.has_value());
  UnitSequence seq = parse_units(pkg.script_bundle->concatenated_source);
  SourceVector expected = ngram_frequencies(seq, schema.ngrams, index);
  EXPECT_EQ(direct->values, expected.values);
  EXPECT_EQ(direct->schema_digest, schema.digest);
}
