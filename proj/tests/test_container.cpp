#include <gtest/gtest.h>

#include "extscan/crx.hpp"
#include "extscan/js_parser.hpp"
#include "extscan/manifest.hpp"
#include "extscan/package.hpp"
#include "extscan/rng.hpp"
#include "extscan/zip.hpp"
#include "test_util.hpp"

using namespace extscan;

TEST(ParseCrx, RejectsBadMagic) {
  Bytes garbage = to_bytes("XXXXnot a package at all");
  CrxParseResult r = parse_crx(garbage);
  EXPECT_EQ(r.error, CrxError::bad_magic);
}

TEST(ParseCrx, Crx3PayloadStartsAtOffset16WithFourByteHeader) {
  Bytes zip = testutil::make_zip({{"manifest.json", "{}"}});
  Bytes opaque{0xDE, 0xAD, 0xBE, 0xEF};
  Bytes crx = build_crx3(BytesView(zip.data(), zip.size()),
                         BytesView(opaque.data(), opaque.size()));
  // magic(4) + version(4) + header length(4) + 4 opaque bytes = 16.
  ASSERT_EQ(crx.size(), 16 + zip.size());
  CrxParseResult r = parse_crx(crx);
  ASSERT_TRUE(r.ok()) << r.detail;
  EXPECT_EQ(r.archive.format, CrxFormat::crx3);
  EXPECT_EQ(r.archive.declared_header_length, 4u);
  EXPECT_EQ(r.archive.zip_payload, zip);
}

TEST(ParseCrx, PlainZipPassesThroughWhole) {
  Bytes zip = testutil::make_zip({{"a.txt", "hello"}});
  CrxParseResult r = parse_crx(zip);
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.archive.format, CrxFormat::zip);
  EXPECT_EQ(r.archive.declared_header_length, 0u);
  EXPECT_EQ(r.archive.zip_payload, zip);
}

TEST(ParseCrx, TruncatedHeaderWhenDeclaredLengthsExceedInput) {
  Bytes zip = testutil::make_zip({{"a", "b"}});
  Bytes crx = build_crx2(BytesView(zip.data(), zip.size()),
                         to_bytes("key"), to_bytes("sig"));
  crx.resize(18);  // cut inside key/signature region
  CrxParseResult r = parse_crx(crx);
  EXPECT_EQ(r.error, CrxError::truncated_header);
}

TEST(ParseCrx, UnsupportedVersionRejected) {
  Bytes crx = {'C', 'r', '2', '4', 7, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0};
  CrxParseResult r = parse_crx(crx);
  EXPECT_EQ(r.error, CrxError::unsupported_version);
}

TEST(ParseCrx, RoundTripReproducesFormatAndPayload) {
  Rng rng(2024);
  for (int i = 0; i < 50; ++i) {
    std::map<std::string, std::string> files;
    std::size_t n = 1 + rng.index(4);
    for (std::size_t f = 0; f < n; ++f) {
      std::string content(rng.index(300), 'x');
      for (char& c : content) c = static_cast<char>('a' + rng.index(26));
      files["file" + std::to_string(f)] = content;
    }
    Bytes zip = testutil::make_zip(files);
    Bytes key(rng.index(40) + 1, 0x11);
    Bytes sig(rng.index(40) + 1, 0x22);
    int pick = static_cast<int>(rng.index(3));
    Bytes packaged;
    CrxFormat expected;
    if (pick == 0) {
      packaged = build_crx2(BytesView(zip.data(), zip.size()),
                            BytesView(key.data(), key.size()),
                            BytesView(sig.data(), sig.size()));
      expected = CrxFormat::crx2;
    } else if (pick == 1) {
      packaged = build_crx3(BytesView(zip.data(), zip.size()),
                            BytesView(key.data(), key.size()));
      expected = CrxFormat::crx3;
    } else {
      packaged = zip;
      expected = CrxFormat::zip;
    }
    CrxParseResult r = parse_crx(packaged);
    ASSERT_TRUE(r.ok()) << r.detail;
    EXPECT_EQ(r.archive.format, expected);
    EXPECT_EQ(r.archive.zip_payload, zip);
  }
}

TEST(ZipRoundTrip, StoredEntriesExtractExactly) {
  std::map<std::string, std::string> files{
      {"manifest.json", "{\"a\": 1}"},
      {"deep/nested/path.js", "var x;"},
      {"empty.txt", ""},
  };
  ZipReader reader(testutil::make_zip(files));
  ASSERT_EQ(reader.entries().size(), files.size());
  for (const auto& [name, content] : files) {
    ASSERT_TRUE(reader.contains(name));
    EXPECT_EQ(to_string(reader.extract(name)), content);
  }
}

TEST(ParseManifest, ListingStyleMv3) {
  ManifestParseResult r = parse_manifest(testutil::mv3_manifest());
  ASSERT_TRUE(r.ok());
  const Manifest& m = r.manifest;
  EXPECT_EQ(m.manifest_version, 3);
  EXPECT_EQ(m.api_permissions, (std::set<std::string>{"downloads", "history"}));
  EXPECT_EQ(m.host_permissions, (std::set<std::string>{"https://example.com/*"}));
  EXPECT_EQ(m.service_worker, "service_worker.js");
  ASSERT_EQ(m.content_scripts.size(), 1u);
  EXPECT_EQ(m.content_scripts[0].matches, std::vector<std::string>{"<all_urls>"});
  EXPECT_EQ(m.content_scripts[0].js, std::vector<std::string>{"script.js"});
}

TEST(ParseManifest, MinimalMv3) {
  ManifestParseResult r = parse_manifest(R"({"manifest_version":3})");
  ASSERT_TRUE(r.ok());
  EXPECT_TRUE(r.manifest.api_permissions.empty());
  EXPECT_TRUE(r.manifest.host_permissions.empty());
  EXPECT_TRUE(r.manifest.content_scripts.empty());
  EXPECT_FALSE(r.manifest.has_service_worker());
}

TEST(ParseManifest, Mv2SplitsPermissionsByHostPatternRule) {
  ManifestParseResult r = parse_manifest(
      R"({"manifest_version":2, "permissions":["tabs", "*://*/*"]})");
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.manifest.api_permissions, (std::set<std::string>{"tabs"}));
  EXPECT_EQ(r.manifest.host_permissions, (std::set<std::string>{"*://*/*"}));
}

TEST(ParseManifest, Mv2HostPatternEdgeForms) {
  ManifestParseResult r = parse_manifest(
      R"({"manifest_version":2,
          "permissions":["<all_urls>", "chrome://favicon/", "storage"]})");
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.manifest.api_permissions, (std::set<std::string>{"storage"}));
  EXPECT_EQ(r.manifest.host_permissions,
            (std::set<std::string>{"<all_urls>", "chrome://favicon/"}));
}

TEST(ParseManifest, DeclaredErrors) {
  EXPECT_EQ(parse_manifest("{not json").error, ManifestError::invalid_json);
  EXPECT_EQ(parse_manifest("[1,2,3]").error, ManifestError::invalid_json);
  EXPECT_EQ(parse_manifest("{}").error, ManifestError::missing_manifest_version);
  EXPECT_EQ(parse_manifest(R"({"manifest_version":"three"})").error,
            ManifestError::missing_manifest_version);
}

TEST(ParseManifest, TotalOverArbitraryBytes) {
  Rng rng(99);
  for (int i = 0; i < 500; ++i) {
    std::string junk(rng.index(200), ' ');
    for (char& c : junk) c = static_cast<char>(rng.index(256));
    ManifestParseResult r = parse_manifest(junk);  // must not throw
    if (r.ok()) EXPECT_GE(r.manifest.manifest_version, 0);
  }
}

TEST(ParseManifest, Mv3NeverPopulatesBackgroundScripts) {
  ManifestParseResult r = parse_manifest(
      R"({"manifest_version":3, "background": {"scripts": ["a.js"]}})");
  ASSERT_TRUE(r.ok());
  EXPECT_TRUE(r.manifest.background_scripts.empty());
}

TEST(ScriptBundle, WorkerPrecedesContentScripts) {
  ExtensionPackage pkg = testutil::load_listing_package();
  ASSERT_TRUE(pkg.script_bundle.has_value());
  const ScriptBundle& b = *pkg.script_bundle;
  EXPECT_EQ(b.part_count, 2u);
  ASSERT_EQ(b.part_boundaries.size(), 2u);
  EXPECT_EQ(b.part_boundaries[0].first, "service_worker.js");
  EXPECT_EQ(b.part_boundaries[1].first, "script.js");
  EXPECT_LT(b.part_boundaries[0].second, b.part_boundaries[1].second);
  EXPECT_LT(b.concatenated_source.find("ticks"),
            b.concatenated_source.find("document.title"));
}

TEST(ScriptBundle, NoScriptsYieldsAbsentBundle) {
  WarningLog warnings;
  Bytes zip = testutil::make_zip(
      {{"manifest.json", R"({"manifest_version":3})"}, {"readme.txt", "hi"}});
  ExtensionPackage pkg = load_package("noscripts", BytesView(zip.data(), zip.size()),
                                      &warnings);
  EXPECT_TRUE(pkg.manifest_ok);
  EXPECT_FALSE(pkg.script_bundle.has_value());
  bool saw_noscripts = false;
  for (const auto& w : warnings) saw_noscripts |= w.code == "NoScripts";
  EXPECT_TRUE(saw_noscripts);
}

TEST(ScriptBundle, DuplicateTopLevelConstsAcrossPartsStillParse) {
  WarningLog warnings;
  Bytes zip = testutil::make_zip({
      {"manifest.json",
       R"({"manifest_version":3,
           "content_scripts":[{"matches":["<all_urls>"],"js":["a.js","b.js"]}]})"},
      {"a.js", "const shared = 1;"},
      {"b.js", "const shared = 2;"},
  });
  ExtensionPackage pkg = load_package("dupconst", BytesView(zip.data(), zip.size()),
                                      &warnings);
  ASSERT_TRUE(pkg.script_bundle.has_value());
  JsAst ast = parse_js(pkg.script_bundle->concatenated_source);
  EXPECT_TRUE(ast.ok()) << ast.error();
}

TEST(ScriptBundle, MissingScriptSkippedWithWarning) {
  WarningLog warnings;
  Bytes zip = testutil::make_zip({
      {"manifest.json",
       R"({"manifest_version":3,
           "background": {"service_worker": "gone.js"},
           "content_scripts":[{"matches":["<all_urls>"],"js":["here.js"]}]})"},
      {"here.js", "var ok = true;"},
  });
  ExtensionPackage pkg = load_package("missing", BytesView(zip.data(), zip.size()),
                                      &warnings);
  ASSERT_TRUE(pkg.script_bundle.has_value());
  EXPECT_EQ(pkg.script_bundle->part_count, 1u);
  bool warned = false;
  for (const auto& w : warnings) warned |= w.code == "MissingScript";
  EXPECT_TRUE(warned);
}

TEST(ScriptBundle, DeterministicConcatenation) {
  ExtensionPackage a = testutil::load_listing_package("one");
  ExtensionPackage b = testutil::load_listing_package("two");
  ASSERT_TRUE(a.script_bundle && b.script_bundle);
  EXPECT_EQ(a.script_bundle->concatenated_source, b.script_bundle->concatenated_source);
}

TEST(Eligibility, RequiresManifestAndResolvableScript) {
  ExtensionPackage good = testutil::load_listing_package();
  EXPECT_TRUE(is_eligible(good));

  WarningLog warnings;
  Bytes no_scripts = testutil::make_zip({{"manifest.json", R"({"manifest_version":3})"}});
  EXPECT_FALSE(is_eligible(
      load_package("ns", BytesView(no_scripts.data(), no_scripts.size()), &warnings)));

  Bytes bad_manifest = testutil::make_zip(
      {{"manifest.json", "{broken"}, {"w.js", "var x;"}});
  EXPECT_FALSE(is_eligible(load_package(
      "bm", BytesView(bad_manifest.data(), bad_manifest.size()), &warnings)));
}

TEST(Package, FileAttributesComeFromArchive) {
  ExtensionPackage pkg = testutil::load_listing_package();
  EXPECT_EQ(pkg.files.size(), 4u);
  EXPECT_EQ(pkg.js_file_count(), 2u);
  EXPECT_GT(pkg.js_byte_size(), 0u);
  EXPECT_GT(pkg.package_byte_size, 0u);
}
