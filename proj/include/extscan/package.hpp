#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "extscan/common.hpp"
#include "extscan/crx.hpp"
#include "extscan/manifest.hpp"
#include "extscan/zip.hpp"

namespace extscan {

struct Warning {
  std::string id;
  std::string code;
  std::string detail;

  std::string to_json_line() const {
    nlohmann::json j{{"id", id}, {"code", code}, {"detail", detail}};
    return j.dump();
  }
};

using WarningLog = std::vector<Warning>;

struct ScriptBundle {
  std::string concatenated_source;
  std::size_t part_count = 0;
  std::vector<std::pair<std::string, std::size_t>> part_boundaries;
};

struct ExtensionPackage {
  std::string id;
  CrxArchive archive;
  bool manifest_ok = false;
  Manifest manifest;
  std::map<std::string, std::uint64_t> files;  // path -> byte size
  std::optional<ScriptBundle> script_bundle;
  std::uint64_t package_byte_size = 0;  // whole .crx/.zip stream

  std::uint64_t js_file_count() const {
    std::uint64_t n = 0;
    for (const auto& [path, size] : files) {
      if (is_js_path(path)) ++n;
    }
    return n;
  }

  std::uint64_t js_byte_size() const {
    std::uint64_t n = 0;
    for (const auto& [path, size] : files) {
      if (is_js_path(path)) n += size;
    }
    return n;
  }

  static bool is_js_path(const std::string& path) {
    if (path.size() < 3) return false;
    std::string tail = path.substr(path.size() - 3);
    for (char& c : tail) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return tail == ".js";
  }
};

inline std::string normalize_member_path(std::string path) {
  while (path.rfind("./", 0) == 0) path.erase(0, 2);
  while (!path.empty() && path.front() == '/') path.erase(0, 1);
  return path;
}

/// Resolves manifest-referenced script files against a content source and
/// concatenates them, worker/background first, then content scripts in
/// declaration order. Every part sits in its own block statement so
/// top-level const redeclarations across parts keep the bundle parseable.
/// Missing files are skipped with a warning; no resolvable file at all
/// yields nullopt (NoScripts: the extension is metadata-only downstream).
template <class FileReader>
std::optional<ScriptBundle> build_script_bundle_with(const std::string& id,
                                                     const Manifest& manifest,
                                                     FileReader&& read_file_fn,
                                                     WarningLog* warnings) {
  std::vector<std::string> order;
  if (manifest.has_service_worker()) order.push_back(manifest.service_worker);
  for (const auto& p : manifest.background_scripts) order.push_back(p);
  for (const auto& cs : manifest.content_scripts) {
    for (const auto& p : cs.js) order.push_back(p);
  }
  ScriptBundle bundle;
  for (const auto& raw_path : order) {
    std::string path = normalize_member_path(raw_path);
    std::optional<std::string> text = read_file_fn(path);
    if (!text) {
      if (warnings) warnings->push_back({id, "MissingScript", raw_path});
      continue;
    }
    bundle.part_boundaries.emplace_back(path, bundle.concatenated_source.size());
    bundle.concatenated_source += "{\n";
    bundle.concatenated_source += *text;
    bundle.concatenated_source += "\n}\n";
    ++bundle.part_count;
  }
  if (bundle.part_count == 0) return std::nullopt;
  return bundle;
}

inline std::optional<ScriptBundle> build_script_bundle(const std::string& id,
                                                       const CrxArchive& archive,
                                                       const Manifest& manifest,
                                                       WarningLog* warnings) {
  ZipReader zip(archive.zip_payload);
  return build_script_bundle_with(
      id, manifest,
      [&](const std::string& path) -> std::optional<std::string> {
        if (!zip.contains(path)) return std::nullopt;
        Bytes b = zip.extract(path);
        return std::string(b.begin(), b.end());
      },
      warnings);
}

inline bool is_eligible(const ExtensionPackage& pkg) {
  return pkg.manifest_ok && pkg.script_bundle.has_value();
}

/// Assembles a package from raw .crx/.zip bytes. Parse failures are
/// recorded as warnings and reflected in manifest_ok / script_bundle;
/// only a structurally unreadable archive throws.
inline ExtensionPackage load_package(const std::string& id, BytesView raw,
                                     WarningLog* warnings) {
  ExtensionPackage pkg;
  pkg.id = id;
  pkg.package_byte_size = raw.size();
  CrxParseResult parsed = parse_crx(raw);
  if (!parsed.ok()) {
    throw InputError(to_string(parsed.error), id + ": " + parsed.detail);
  }
  pkg.archive = std::move(parsed.archive);

  ZipReader zip(pkg.archive.zip_payload);
  for (const ZipEntry& e : zip.entries()) {
    if (!e.name.empty() && e.name.back() == '/') continue;  // directory entry
    pkg.files[normalize_member_path(e.name)] = e.uncompressed_size;
  }
  if (pkg.files.empty()) throw InputError("EmptyArchive", id);

  if (!zip.contains("manifest.json")) {
    if (warnings) warnings->push_back({id, "MissingManifest", "manifest.json not found"});
    return pkg;
  }
  Bytes mf = zip.extract("manifest.json");
  ManifestParseResult mp = parse_manifest(std::string_view(
      reinterpret_cast<const char*>(mf.data()), mf.size()));
  if (!mp.ok()) {
    if (warnings) warnings->push_back({id, to_string(mp.error), "manifest.json"});
    return pkg;
  }
  pkg.manifest_ok = true;
  pkg.manifest = std::move(mp.manifest);
  pkg.script_bundle = build_script_bundle(id, pkg.archive, pkg.manifest, warnings);
  if (!pkg.script_bundle && warnings) {
    warnings->push_back({id, "NoScripts", "no resolvable script file"});
  }
  return pkg;
}

/// Same contract for an unpacked extension tree on disk.
inline ExtensionPackage load_package_dir(const std::string& id,
                                         const std::filesystem::path& root,
                                         WarningLog* warnings) {
  namespace fs = std::filesystem;
  ExtensionPackage pkg;
  pkg.id = id;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    std::string rel = fs::relative(entry.path(), root).generic_string();
    std::uint64_t size = entry.file_size();
    pkg.files[normalize_member_path(rel)] = size;
    pkg.package_byte_size += size;
  }
  if (pkg.files.empty()) throw InputError("EmptyArchive", id);
  fs::path manifest_path = root / "manifest.json";
  if (!fs::exists(manifest_path)) {
    if (warnings) warnings->push_back({id, "MissingManifest", "manifest.json not found"});
    return pkg;
  }
  ManifestParseResult mp = parse_manifest(read_text_file(manifest_path));
  if (!mp.ok()) {
    if (warnings) warnings->push_back({id, to_string(mp.error), "manifest.json"});
    return pkg;
  }
  pkg.manifest_ok = true;
  pkg.manifest = std::move(mp.manifest);
  pkg.script_bundle = build_script_bundle_with(
      id, pkg.manifest,
      [&](const std::string& path) -> std::optional<std::string> {
        fs::path p = root / path;
        if (!fs::exists(p) || !fs::is_regular_file(p)) return std::nullopt;
        return read_text_file(p);
      },
      warnings);
  if (!pkg.script_bundle && warnings) {
    warnings->push_back({id, "NoScripts", "no resolvable script file"});
  }
  return pkg;
}

}  // namespace extscan
