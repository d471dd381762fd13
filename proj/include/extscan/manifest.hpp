#pragma once

#include <json.hpp>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "extscan/common.hpp"

namespace extscan {

struct ContentScriptDecl {
  std::vector<std::string> matches;
  std::vector<std::string> js;
};

struct Manifest {
  int manifest_version = 0;  // 2 or 3
  std::set<std::string> api_permissions;
  std::set<std::string> host_permissions;
  std::vector<ContentScriptDecl> content_scripts;  // declaration order
  std::vector<std::string> background_scripts;     // MV2 only
  std::string service_worker;                      // MV3, empty if absent

  bool has_service_worker() const { return !service_worker.empty(); }

  std::size_t script_file_count() const {
    std::size_t n = background_scripts.size() + (has_service_worker() ? 1 : 0);
    for (const auto& cs : content_scripts) n += cs.js.size();
    return n;
  }
};

enum class ManifestError { none, invalid_json, missing_manifest_version };

inline const char* to_string(ManifestError e) {
  switch (e) {
    case ManifestError::none: return "none";
    case ManifestError::invalid_json: return "InvalidJson";
    case ManifestError::missing_manifest_version: return "MissingManifestVersion";
  }
  return "?";
}

struct ManifestParseResult {
  ManifestError error = ManifestError::none;
  Manifest manifest;
  bool ok() const { return error == ManifestError::none; }
};

/// Host-pattern test for the MV2 "permissions" array, which mixes API
/// permissions and host patterns in one list.
inline bool looks_like_host_pattern(const std::string& s) {
  return s == "<all_urls>" || s.find("://") != std::string::npos ||
         s.rfind("chrome://", 0) == 0;
}

/// Total over arbitrary input: returns a Manifest or one of the declared
/// errors, never throws. Unknown fields and malformed subobjects are
/// ignored so that a real-store manifest with oddities still parses.
inline ManifestParseResult parse_manifest(std::string_view json_text);

namespace detail {

inline std::vector<std::string> string_array(const nlohmann::json& v) {
  std::vector<std::string> out;
  if (!v.is_array()) return out;
  for (const auto& e : v) {
    if (e.is_string()) {
      std::string s = e.get<std::string>();
      if (!s.empty()) out.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace detail

inline ManifestParseResult parse_manifest(std::string_view json_text) {
  ManifestParseResult r;
  nlohmann::json doc = nlohmann::json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    r.error = ManifestError::invalid_json;
    return r;
  }
  auto mv = doc.find("manifest_version");
  if (mv == doc.end() || !mv->is_number_integer()) {
    r.error = ManifestError::missing_manifest_version;
    return r;
  }
  Manifest& m = r.manifest;
  m.manifest_version = mv->get<int>();

  std::vector<std::string> perms;
  if (auto it = doc.find("permissions"); it != doc.end()) {
    perms = detail::string_array(*it);
  }
  if (m.manifest_version >= 3) {
    m.api_permissions.insert(perms.begin(), perms.end());
    if (auto it = doc.find("host_permissions"); it != doc.end()) {
      for (auto& s : detail::string_array(*it)) m.host_permissions.insert(std::move(s));
    }
  } else {
    for (auto& s : perms) {
      if (looks_like_host_pattern(s)) {
        m.host_permissions.insert(std::move(s));
      } else {
        m.api_permissions.insert(std::move(s));
      }
    }
  }

  if (auto it = doc.find("background"); it != doc.end() && it->is_object()) {
    if (auto sw = it->find("service_worker"); sw != it->end() && sw->is_string()) {
      if (m.manifest_version >= 3) m.service_worker = sw->get<std::string>();
    }
    if (auto sc = it->find("scripts"); sc != it->end() && m.manifest_version < 3) {
      m.background_scripts = detail::string_array(*sc);
    }
  }

  if (auto it = doc.find("content_scripts"); it != doc.end() && it->is_array()) {
    for (const auto& entry : *it) {
      if (!entry.is_object()) continue;
      ContentScriptDecl cs;
      if (auto mt = entry.find("matches"); mt != entry.end()) {
        cs.matches = detail::string_array(*mt);
      }
      if (auto js = entry.find("js"); js != entry.end()) {
        cs.js = detail::string_array(*js);
      }
      m.content_scripts.push_back(std::move(cs));
    }
  }
  return r;
}

}  // namespace extscan
