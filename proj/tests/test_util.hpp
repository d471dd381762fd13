#pragma once

// Shared fixture builders: hand-assembled extension packages and corpora
// small enough to reason about by eye.

#include <map>
#include <string>
#include <vector>

#include "extscan/corpus.hpp"
#include "extscan/package.hpp"
#include "extscan/zip.hpp"

namespace testutil {

using namespace extscan;

inline Bytes make_zip(const std::map<std::string, std::string>& files) {
  ZipWriter zip;
  for (const auto& [name, content] : files) zip.add_text(name, content);
  return zip.finish();
}

inline std::string mv3_manifest(const std::string& extra_fields = "") {
  return R"({
    "manifest_version": 3,
    "permissions": ["downloads", "history"],
    "host_permissions": ["https://example.com/*"],
    "background": { "service_worker": "service_worker.js" },
    "content_scripts": [ { "matches": ["<all_urls>"], "js": ["script.js"] } ])" +
         extra_fields + "\n}";
}

inline Bytes listing_style_package() {
  return make_zip({
      {"manifest.json", mv3_manifest()},
      {"service_worker.js", "var ticks = 0;\nfunction tick() { ticks += 1; }\n"},
      {"script.js", "document.title = \"x\";\n"},
      {"icon.png", "not really a png"},
  });
}

inline ExtensionPackage load_listing_package(const std::string& id = "listingext") {
  WarningLog warnings;
  Bytes zip = listing_style_package();
  return load_package(id, BytesView(zip.data(), zip.size()), &warnings);
}

inline ExtensionRecord make_record(const std::string& id, Label label,
                                   const Date& date,
                                   const std::map<std::string, std::string>& files) {
  WarningLog warnings;
  ExtensionRecord rec;
  Bytes zip = make_zip(files);
  rec.pkg = load_package(id, BytesView(zip.data(), zip.size()), &warnings);
  rec.label = label;
  rec.last_update = date;
  return rec;
}

inline ExtensionRecord simple_record(const std::string& id, Label label, int year,
                                     int month = 6, int day = 15,
                                     const std::string& script = "var a = 1;\n") {
  return make_record(id, label, Date{year, month, day},
                     {{"manifest.json",
                       R"({"manifest_version": 3,
                           "permissions": ["storage"],
                           "background": {"service_worker": "w.js"}})"},
                      {"w.js", script}});
}

}  // namespace testutil
