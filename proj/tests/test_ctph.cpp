#include <gtest/gtest.h>

#include <json.hpp>

#include <fstream>

#include "extscan/cluster.hpp"
#include "extscan/ctph.hpp"
#include "extscan/rng.hpp"
#include "test_util.hpp"

using namespace extscan;

namespace {

Bytes from_hex(const std::string& hex) {
  Bytes out;
  for (std::size_t i = 0; i + 1 < hex.size(); i += 2) {
    out.push_back(static_cast<std::uint8_t>(std::stoi(hex.substr(i, 2), nullptr, 16)));
  }
  return out;
}

nlohmann::json load_fixtures() {
  std::ifstream in(std::string(EXTSCAN_FIXTURE_DIR) + "/ctph_fixtures.json");
  return nlohmann::json::parse(in);
}

Bytes random_bytes(Rng& rng, std::size_t n) {
  Bytes out(n);
  for (auto& b : out) b = static_cast<std::uint8_t>(rng.index(256));
  return out;
}

}  // namespace

TEST(Ctph, MatchesReferenceOracleVectors) {
  nlohmann::json doc = load_fixtures();
  for (const auto& e : doc["inputs"]) {
    Bytes data = from_hex(e["data_hex"]);
    FuzzyHash h = ctph(data);
    EXPECT_EQ(h.to_string(), e["hash"].get<std::string>()) << e["name"];
  }
}

TEST(Ctph, SimilarityMatrixMatchesOracle) {
  nlohmann::json doc = load_fixtures();
  std::vector<FuzzyHash> hashes;
  for (const auto& e : doc["inputs"]) {
    hashes.push_back(FuzzyHash::parse(e["hash"].get<std::string>()));
  }
  const auto& sim = doc["similarity"];
  std::size_t n = hashes.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      EXPECT_EQ(similarity(hashes[i], hashes[j]), sim[i * n + j].get<int>())
          << i << "," << j;
    }
  }
}

TEST(Ctph, EmptyInputRefused) {
  Bytes empty;
  EXPECT_THROW(ctph(empty), InputError);
}

TEST(Ctph, DeterministicAndParsable) {
  Rng rng(12);
  Bytes data = random_bytes(rng, 3000);
  FuzzyHash a = ctph(data);
  FuzzyHash b = ctph(data);
  EXPECT_EQ(a.to_string(), b.to_string());
  FuzzyHash parsed = FuzzyHash::parse(a.to_string());
  EXPECT_EQ(parsed.block_size, a.block_size);
  EXPECT_EQ(parsed.sig1, a.sig1);
  EXPECT_EQ(parsed.sig2, a.sig2);
  EXPECT_LE(a.sig1.size(), 64u);
  EXPECT_LE(a.sig2.size(), 32u);
}

TEST(Ctph, SelfSimilarityAndSymmetryOnRandomInputs) {
  Rng rng(77);
  std::vector<FuzzyHash> hashes;
  for (int i = 0; i < 1000; ++i) {
    Bytes data = random_bytes(rng, 64 + rng.index(4096));
    hashes.push_back(ctph(data));
  }
  for (const FuzzyHash& h : hashes) {
    EXPECT_EQ(similarity(h, h), 100);
  }
  for (int i = 0; i < 1000; ++i) {
    const FuzzyHash& a = hashes[rng.index(hashes.size())];
    const FuzzyHash& b = hashes[rng.index(hashes.size())];
    EXPECT_EQ(similarity(a, b), similarity(b, a));
  }
}

TEST(Ctph, IncomparableBlockSizesScoreZero) {
  FuzzyHash a;
  a.block_size = 3;
  a.sig1 = "AAAABBBBCCCC";
  a.sig2 = "AABB";
  FuzzyHash b = a;
  b.block_size = 48;  // more than one doubling away
  EXPECT_EQ(similarity(a, b), 0);
}

TEST(Ctph, OneByteChangeKeepsHighSimilarity) {
  Rng rng(5);
  Bytes data = random_bytes(rng, 8192);
  Bytes flipped = data;
  flipped[4000] ^= 0x55;
  int score = similarity(ctph(data), ctph(flipped));
  EXPECT_GT(score, 80);
}

TEST(Cluster, IdenticalBundlesFormOneCluster) {
  Corpus corpus;
  const std::string script = "var shared = 1;\nfunction tick() { shared += 1; }\n";
  for (int i = 0; i < 3; ++i) {
    corpus.records.push_back(testutil::simple_record("same" + std::to_string(i),
                                                     Label::malicious, 2022, 6, 1,
                                                     script));
  }
  ClusterSet set = cluster_flagged(corpus, {"same0", "same1", "same2"});
  ASSERT_EQ(set.clusters.size(), 1u);
  EXPECT_EQ(set.clusters[0].size(), 3u);
  EXPECT_TRUE(set.unclustered.empty());
}

TEST(Cluster, DistinctRandomInputsStayUnclustered) {
  Rng rng(31);
  std::vector<std::pair<std::string, FuzzyHash>> items;
  for (int i = 0; i < 46; ++i) {
    Bytes data = random_bytes(rng, 4096);
    items.emplace_back("r" + std::to_string(i), ctph(data));
  }
  // ~1000 distinct pairs: none should clear the >90 bar.
  ClusterSet set = cluster_hashes(items, 90);
  EXPECT_TRUE(set.clusters.empty());
  EXPECT_EQ(set.unclustered.size(), items.size());
}

TEST(Cluster, SingleLinkageIsTransitive) {
  // a~b and b~c merge a, b, c even if a~c alone would not.
  Rng rng(9);
  Bytes base = random_bytes(rng, 6000);
  Bytes ab = base;
  Bytes bc = base;
  for (int i = 0; i < 12; ++i) ab[100 + i * 37] ^= 0xFF;
  for (int i = 0; i < 12; ++i) bc[4200 + i * 41] ^= 0xFF;

  FuzzyHash ha = ctph(ab);
  FuzzyHash hb = ctph(base);
  FuzzyHash hc = ctph(bc);
  int sab = similarity(ha, hb);
  int sbc = similarity(hb, hc);
  int sac = similarity(ha, hc);
  ASSERT_GT(sab, 90);
  ASSERT_GT(sbc, 90);
  ASSERT_LE(sac, std::min(sab, sbc));

  ClusterSet set = cluster_hashes({{"a", ha}, {"b", hb}, {"c", hc}}, 90);
  ASSERT_EQ(set.clusters.size(), 1u);
  EXPECT_EQ(set.clusters[0], (std::vector<std::string>{"a", "b", "c"}));
}

TEST(Cluster, PartitionInvariant) {
  Rng rng(41);
  std::vector<std::pair<std::string, FuzzyHash>> items;
  Bytes base = random_bytes(rng, 4096);
  for (int i = 0; i < 10; ++i) {
    Bytes variant = base;
    variant[i * 17] ^= 0x01;
    items.emplace_back("near" + std::to_string(i), ctph(variant));
  }
  for (int i = 0; i < 10; ++i) {
    items.emplace_back("far" + std::to_string(i), ctph(random_bytes(rng, 4096)));
  }
  ClusterSet set = cluster_hashes(items, 90);
  std::set<std::string> seen;
  for (const auto& cluster : set.clusters) {
    EXPECT_GE(cluster.size(), 2u);
    for (const auto& id : cluster) EXPECT_TRUE(seen.insert(id).second);
  }
  for (const auto& id : set.unclustered) EXPECT_TRUE(seen.insert(id).second);
  EXPECT_EQ(seen.size(), items.size());
}

TEST(Cluster, ExactlyNinetyDoesNotMerge) {
  // The merge predicate is strictly greater than the floor.
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    Bytes a = random_bytes(rng, 2048);
    Bytes b = a;
    for (int i = 0; i < 40; ++i) b[rng.index(b.size())] ^= 0xFF;
    FuzzyHash ha = ctph(a);
    FuzzyHash hb = ctph(b);
    if (similarity(ha, hb) == 90) {
      ClusterSet set = cluster_hashes({{"a", ha}, {"b", hb}}, 90);
      EXPECT_TRUE(set.clusters.empty());
      return;
    }
  }
  GTEST_SKIP() << "no pair landed exactly on 90 in 200 trials";
}
