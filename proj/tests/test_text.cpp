#include <gtest/gtest.h>

#include "extscan/common.hpp"
#include "extscan/rng.hpp"
#include "extscan/text.hpp"
#include "extscan/vocab.hpp"

using namespace extscan;

TEST(PrepText, EmptyTextGivesEmptySet) { EXPECT_TRUE(prep_text("").empty()); }

TEST(PrepText, IrregularFormIsBecomesBe) {
  EXPECT_EQ(prep_text("is"), (WordSet{"BE"}));
}

TEST(PrepText, SuffixRulesOracleExample) {
  // By the shipped rules: running -ing-> runn -> run; the (stop); runner
  // unchanged; runs -s-> run.
  EXPECT_EQ(prep_text("running the runner runs"), (WordSet{"RUN", "RUNNER"}));
}

TEST(PrepText, DropsStopWordsAndPunctuation) {
  WordSet w = prep_text("The quick, quick brown fox -- and the lazy dog!!");
  EXPECT_EQ(w, (WordSet{"QUICK", "BROWN", "FOX", "LAZY", "DOG"}));
}

TEST(PrepText, Idempotence) {
  const char* samples[] = {
      "Running quickly; the FOXES' stories were AMAZING!",
      "glasses boxes needed asked using made comes going children",
      "better best worse tabs wallpapers themes new issues business",
      "address focus analyses updated created deleting watches goes news",
      "I was willing to be modified; it is what it is.",
  };
  for (const char* s : samples) {
    WordSet once = prep_text(s);
    WordSet twice = prep_text(join_words(once));
    EXPECT_EQ(once, twice) << "not idempotent for: " << s;
  }
}

TEST(PrepText, IdempotenceOnRandomWords) {
  Rng rng(404);
  for (int i = 0; i < 300; ++i) {
    std::string word;
    std::size_t len = 1 + rng.index(12);
    for (std::size_t c = 0; c < len; ++c) {
      word.push_back(static_cast<char>('a' + rng.index(26)));
    }
    WordSet once = prep_text(word);
    WordSet twice = prep_text(join_words(once));
    EXPECT_EQ(once, twice) << "not idempotent for: " << word;
  }
}

TEST(LemmaTable, ValuesAreFixedPoints) {
  for (const auto& [key, value] : tables::kLemmaTable) {
    std::string v(value);
    EXPECT_EQ(textdetail::lemmatize(v), v) << "lemma value drifts: " << v;
    EXPECT_EQ(textdetail::stop_words().count(v), 0u)
        << "lemma value is a stop word: " << v;
  }
}

TEST(PermissionCatalog, BuiltinMatchesShippedDataFile) {
  PermissionCatalog builtin = PermissionCatalog::builtin();
  builtin.validate();
  PermissionCatalog from_file = PermissionCatalog::from_lines(
      read_text_file(std::string(EXTSCAN_DATA_DIR) + "/permissions.txt"));
  EXPECT_EQ(builtin.names, from_file.names);
}
