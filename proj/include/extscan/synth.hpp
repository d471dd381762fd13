#pragma once

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "extscan/corpus.hpp"
#include "extscan/jsgen.hpp"
#include "extscan/rng.hpp"
#include "extscan/zip.hpp"

namespace extscan {

/// Synthetic-corpus configuration. Parsed from a key=value file
/// (comments with '#'); every knob has a default so `synth` runs out of
/// the box.
struct SynthConfig {
  std::size_t records = 5000;
  double malicious_ratio = 0.1;  // 9:1 benign:malicious
  int year_start = 2018;
  int year_end = 2022;
  double drift = 0.0;           // pattern-drift weight reached in the final year
  double drift_exponent = 2.0;  // w(y) = drift * progress^exponent
  double parse_fail_rate = 0.02;
  int mv3_year = 2021;
  double grammar_scale = 1.0;
  double confusable_rate = 0.06;  // borderline records per class

  static SynthConfig parse(const std::string& text) {
    SynthConfig c;
    std::map<std::string, std::string> kv;
    std::string line;
    auto flush_line = [&]() {
      std::string s = line;
      line.clear();
      if (auto hash = s.find('#'); hash != std::string::npos) s.erase(hash);
      auto eq = s.find('=');
      if (eq == std::string::npos) return;
      auto trim = [](std::string v) {
        while (!v.empty() && (v.front() == ' ' || v.front() == '\t')) v.erase(0, 1);
        while (!v.empty() && (v.back() == ' ' || v.back() == '\t' || v.back() == '\r')) {
          v.pop_back();
        }
        return v;
      };
      std::string key = trim(s.substr(0, eq));
      std::string value = trim(s.substr(eq + 1));
      if (!key.empty()) kv[key] = value;
    };
    for (char ch : text) {
      if (ch == '\n') {
        flush_line();
      } else {
        line.push_back(ch);
      }
    }
    flush_line();
    try {
      if (kv.count("records")) c.records = std::stoull(kv["records"]);
      if (kv.count("malicious_ratio")) c.malicious_ratio = std::stod(kv["malicious_ratio"]);
      if (kv.count("year_start")) c.year_start = std::stoi(kv["year_start"]);
      if (kv.count("year_end")) c.year_end = std::stoi(kv["year_end"]);
      if (kv.count("drift")) c.drift = std::stod(kv["drift"]);
      if (kv.count("drift_exponent")) c.drift_exponent = std::stod(kv["drift_exponent"]);
      if (kv.count("parse_fail_rate")) c.parse_fail_rate = std::stod(kv["parse_fail_rate"]);
      if (kv.count("mv3_year")) c.mv3_year = std::stoi(kv["mv3_year"]);
      if (kv.count("grammar_scale")) c.grammar_scale = std::stod(kv["grammar_scale"]);
      if (kv.count("confusable_rate")) c.confusable_rate = std::stod(kv["confusable_rate"]);
    } catch (const std::exception& e) {
      throw InputError("InvalidConfig", e.what());
    }
    c.validate();
    return c;
  }

  void validate() const {
    if (records == 0) throw InputError("InvalidConfig", "records must be positive");
    if (!(malicious_ratio > 0.0 && malicious_ratio < 1.0)) {
      throw InputError("InvalidConfig", "malicious_ratio must be in (0,1)");
    }
    if (year_end < year_start) {
      throw InputError("InvalidConfig", "year_end before year_start");
    }
    if (drift < 0.0 || drift > 1.0) {
      throw InputError("InvalidConfig", "drift must be in [0,1]");
    }
    if (parse_fail_rate < 0.0 || parse_fail_rate >= 1.0 || confusable_rate < 0.0 ||
        confusable_rate >= 0.5) {
      throw InputError("InvalidConfig", "bad rate");
    }
  }

  /// Pattern-drift weight for one year, 0 in year_start, `drift` in
  /// year_end; convex by default so early training years stay clean.
  double weight_at(int year) const {
    if (year_end == year_start) return 0.0;
    double progress = static_cast<double>(year - year_start) /
                      static_cast<double>(year_end - year_start);
    progress = std::clamp(progress, 0.0, 1.0);
    return drift * std::pow(progress, drift_exponent);
  }
};

/// Closed-form per-feature location parameters so tests can check the
/// drift schedule itself rather than sampled estimates. The continuous
/// features interpolate between the class bases toward their midpoint;
/// categorical pattern pools rotate instead (see synthdetail::Profile).
enum class SynthFeature { file_count, users, rating_count, same_developer_count };

namespace synthdetail {

/// Both classes converge on one point as the drift weight grows. The
/// point sits close to the benign base, so late malicious records lose
/// the location cues a past-trained model keys on, while benign records
/// shift only mildly.
inline double converge(double benign_value, double malicious_value, Label label,
                       double w) {
  constexpr double kBenignPull = 0.15;
  double meet = benign_value + kBenignPull * (malicious_value - benign_value);
  double base = label == Label::malicious ? malicious_value : benign_value;
  return base + w * (meet - base);
}

struct LogNormalParam {
  double mu_benign;
  double mu_malicious;
  double sigma;

  double mu(Label label, double w) const {
    return converge(mu_benign, mu_malicious, label, w);
  }

  double mean(Label label, double w) const {
    double m = mu(label, w);
    return std::exp(m + sigma * sigma / 2.0);
  }
};

// Location parameters sized to the desk-scale corpus; medians keep the
// 16-vs-141 file count contrast.
inline LogNormalParam file_count_param() { return {std::log(16.0), std::log(141.0), 0.45}; }
inline LogNormalParam users_param() { return {std::log(2400.0), std::log(160.0), 1.1}; }
inline LogNormalParam rating_count_param() { return {std::log(36.0), std::log(6.0), 0.9}; }
inline LogNormalParam same_dev_param() { return {std::log(1.6), std::log(18.0), 0.8}; }

inline LogNormalParam param_for(SynthFeature f) {
  switch (f) {
    case SynthFeature::file_count: return file_count_param();
    case SynthFeature::users: return users_param();
    case SynthFeature::rating_count: return rating_count_param();
    case SynthFeature::same_developer_count: return same_dev_param();
  }
  return file_count_param();
}

struct TokenPool {
  std::vector<std::string> base;
  std::vector<std::string> alt;

  /// Drift rotates draws from the base pool to the alt pool.
  const std::string& draw(Rng& rng, double w) const {
    const auto& pool = (w > 0.0 && rng.bernoulli(w)) ? alt : base;
    return pool[rng.index(pool.size())];
  }
};

struct Profile {
  TokenPool summary_tokens;
  TokenPool description_tokens;
  TokenPool review_tokens;
  TokenPool host_patterns;
  TokenPool cs_patterns;
  TokenPool api_permissions;
  std::array<double, JsGenerator::kStatementKinds> grammar_base{};
  std::array<double, JsGenerator::kStatementKinds> grammar_alt{};
  double rating_avg_mean = 4.0;
  double related_missing_prob = 0.1;
  double worker_stmts_mean = 10.0;
  double cs_stmts_mean = 6.0;
  double extra_js_mean = 1.0;  // unreferenced .js files (dead code)

  std::array<double, JsGenerator::kStatementKinds> grammar(double w) const {
    std::array<double, JsGenerator::kStatementKinds> mixed{};
    for (std::size_t i = 0; i < mixed.size(); ++i) {
      mixed[i] = (1.0 - w) * grammar_base[i] + w * grammar_alt[i];
    }
    return mixed;
  }
};

inline Profile benign_profile() {
  Profile p;
  p.summary_tokens.base = {"extension", "click", "page", "chrome", "use",
                           "add",       "time",  "website", "browser", "manage",
                           "simple",    "easy",  "quick",   "organize", "bookmark"};
  p.summary_tokens.alt = {"new", "tab", "dark", "theme", "speed",
                          "clean", "modern", "smart", "privacy", "secure"};
  p.description_tokens.base = {"extension", "chrome", "page", "tab", "add",
                               "web",       "website", "browser", "allow", "click",
                               "tool",      "feature", "support", "customize", "fast"};
  p.description_tokens.alt = {"new", "dark", "mode", "theme", "boost",
                              "speed", "privacy", "minimal", "elegant", "secure"};
  p.review_tokens.base = {"extension", "work", "great", "good", "thank",
                          "use",       "like", "love",  "time", "helpful"};
  p.review_tokens.alt = {"nice", "clean", "fast", "simple", "perfect",
                         "smooth", "handy", "recommend", "solid", "neat"};
  p.host_patterns.base = {"<all_urls>", "https://*/*", "http://*/*", "*://*/*",
                          "https://*/", "http://*/",
                          "https://ajax.googleapis.com/",
                          "https://www.youtube.com/*"};
  p.host_patterns.alt = {"https://mail.google.com/*", "https://docs.google.com/*",
                         "https://*.github.com/*", "https://drive.google.com/*"};
  p.cs_patterns.base = {"<all_urls>", "https://*/*", "http://*/*", "*://*/*",
                        "https://www.youtube.com/*", "https://mail.google.com/*",
                        "https://twitter.com/*", "https://github.com/*"};
  p.cs_patterns.alt = {"*://*.youtube.com/*", "file://*/*",
                       "*://*.reddit.com/*", "https://docs.google.com/*"};
  p.api_permissions.base = {"storage", "activeTab", "contextMenus", "tabs",
                            "bookmarks", "notifications", "downloads", "history",
                            "clipboardWrite"};
  p.api_permissions.alt = {"storage", "scripting", "sidePanel", "alarms",
                           "activeTab", "offscreen", "identity"};
  p.grammar_base = {2, 1, 6, 5, 5, 4, 4, 1, 2, 0.3, 0.1, 1, 1, 1, 4, 1, 2, 0.2};
  p.grammar_alt = {1, 1, 4, 4, 5, 4, 2, 1, 3, 0.2, 0.1, 1, 1, 1, 3, 4, 6, 0.2};
  p.rating_avg_mean = 4.2;
  p.related_missing_prob = 0.12;
  p.worker_stmts_mean = 9.0;
  p.cs_stmts_mean = 6.0;
  p.extra_js_mean = 0.6;
  return p;
}

inline Profile malicious_profile() {
  Profile p;
  p.summary_tokens.base = {"new", "tab", "wallpaper", "hd", "theme",
                           "favorite", "background", "time", "good", "free"};
  p.summary_tokens.alt = {"deal", "coupon", "price", "track", "boost",
                          "vpn", "proxy", "unlock", "premium", "crypto"};
  p.description_tokens.base = {"new", "tab", "wallpaper", "wallpapers", "hd",
                               "theme", "useful", "utility", "lot", "chrome"};
  p.description_tokens.alt = {"deal", "shopping", "discount", "price", "fast",
                              "vpn", "free", "premium", "unlock", "exclusive"};
  p.review_tokens.base = {"good", "love", "extension", "like", "great",
                          "work", "thank", "use", "nice", "amazing"};
  p.review_tokens.alt = {"best", "awesome", "cool", "wow", "super",
                         "perfect", "great", "love", "nice", "amazing"};
  p.host_patterns.base = {"*://www.google.com.kh/*", "*://mail.google.com/*",
                          "*://www.google.com.au/*", "*://www.google.us/*",
                          "*://www.google.ca/*", "*://www.google.de/*",
                          "*://www.google.dk/*", "*://www.google.fr/*",
                          "*://www.google.co.jp/*", "*://www.google.nl/*"};
  p.host_patterns.alt = {"*://*.shopdeals.example/*", "*://track.pricebar.example/*",
                         "*://*.couponhub.example/*", "*://go.fastlink.example/*",
                         "*://*.vpn-gate.example/*"};
  p.cs_patterns.base = {"<all_urls>", "*://duckduckgo.com/*", "*://gl-search.com/*",
                        "*://redirect.lovelytab.com/*", "*://str-search.com/*",
                        "*://search.yahoo.com/search*", "*://www.google.com/search*",
                        "*://www.bing.com/search*"};
  p.cs_patterns.alt = {"*://*.pricetrack.example/*", "*://*.dealfinder.example/*",
                       "*://checkout.shopping.example/*", "*://*.adsfeed.example/*"};
  p.api_permissions.base = {"tabs", "topSites", "storage", "history", "webRequest",
                            "cookies", "management", "notifications", "downloads",
                            "search"};
  p.api_permissions.alt = {"scripting", "declarativeNetRequest", "cookies",
                           "webNavigation", "alarms", "proxy", "privacy", "tabs"};
  p.grammar_base = {1, 6, 1, 1, 1, 2, 1, 4, 5, 5, 4, 3, 5, 3, 1, 0.3, 0.3, 2};
  p.grammar_alt = {1, 3, 1, 1, 1, 2, 2, 4, 6, 2, 2, 2, 4, 2, 1, 2, 4, 5};
  p.rating_avg_mean = 4.6;  // inflated fake-positive reviews
  p.related_missing_prob = 0.72;
  p.worker_stmts_mean = 26.0;
  p.cs_stmts_mean = 14.0;
  p.extra_js_mean = 6.0;
  return p;
}

}  // namespace synthdetail

/// Expected value of a drifted continuous feature under the closed-form
/// schedule (lognormal mean with interpolated location).
inline double synth_expected_mean(const SynthConfig& config, SynthFeature feature,
                                  Label label, int year) {
  return synthdetail::param_for(feature).mean(label, config.weight_at(year));
}

namespace synthdetail {

inline std::string make_id(Rng& rng) {
  std::string id(32, 'a');
  for (char& c : id) c = static_cast<char>('a' + rng.index(16));
  return id;
}

inline std::string sentence_from(const TokenPool& pool, Rng& rng, double w,
                                 std::size_t words) {
  std::string text;
  for (std::size_t i = 0; i < words; ++i) {
    if (!text.empty()) text += " ";
    text += pool.draw(rng, w);
  }
  return text;
}

inline std::size_t clipped_count(Rng& rng, double mean, double sd, std::size_t lo,
                                 std::size_t hi) {
  double v = rng.normal(mean, sd);
  v = std::clamp(v, static_cast<double>(lo), static_cast<double>(hi));
  return static_cast<std::size_t>(std::llround(v));
}

/// One synthetic extension: manifest + scripts + filler files as a stored
/// ZIP, plus the store-metadata fields of the sidecar.
inline ExtensionRecord make_record(const SynthConfig& config, Label label, int year,
                                   bool confusable, Rng rng) {
  const Profile own = label == Label::malicious ? malicious_profile() : benign_profile();
  const Profile other = label == Label::malicious ? benign_profile() : malicious_profile();
  // A confusable record draws its categorical patterns mostly from the
  // opposite class; continuous features stay on a blended location.
  double w = config.weight_at(year);
  double cross = confusable ? 0.75 : 0.0;

  // Manifest version first: malicious campaigns adopting the new manifest
  // version in its introduction year arrive with fresh patterns, so a
  // model trained before the introduction misses them hardest there.
  int manifest_version = 2;
  if (year >= config.mv3_year) {
    double p_mv3 = std::min(0.9, 0.45 * (1 + year - config.mv3_year));
    if (rng.bernoulli(p_mv3)) manifest_version = 3;
  }
  if (manifest_version == 3 && year == config.mv3_year &&
      label == Label::malicious && config.drift > 0.0) {
    w = std::max(w, 0.85 * config.drift);
  }

  auto draw_tokens = [&](const TokenPool& mine, const TokenPool& theirs, std::size_t n) {
    std::string text;
    for (std::size_t i = 0; i < n; ++i) {
      if (!text.empty()) text += " ";
      const TokenPool& pool = rng.bernoulli(cross) ? theirs : mine;
      text += pool.draw(rng, w);
    }
    return text;
  };

  ExtensionRecord rec;
  rec.label = label;
  rec.last_update = Date{year, static_cast<int>(1 + rng.index(12)),
                         static_cast<int>(1 + rng.index(28))};

  double blend = confusable ? 0.6 : 0.0;
  auto draw_lognormal = [&](const LogNormalParam& p) {
    double mu_own = p.mu(label, w);
    double mu_other =
        p.mu(label == Label::malicious ? Label::benign : Label::malicious, w);
    double mu = mu_own + blend * (mu_other - mu_own);
    return rng.lognormal(mu, p.sigma);
  };
  const Profile& benign_side = label == Label::malicious ? other : own;
  const Profile& malicious_side = label == Label::malicious ? own : other;
  auto drifted = [&](double Profile::*knob) {
    return converge(benign_side.*knob, malicious_side.*knob, label, w);
  };

  rec.users = static_cast<std::uint64_t>(draw_lognormal(users_param()));
  rec.rating_count = static_cast<std::uint64_t>(draw_lognormal(rating_count_param()));
  if (rec.rating_count > 0) {
    rec.rating_avg =
        std::clamp(rng.normal(drifted(&Profile::rating_avg_mean), 0.35), 1.0, 5.0);
  }
  rec.same_developer_count = static_cast<std::uint64_t>(draw_lognormal(same_dev_param()));
  rec.description = draw_tokens(own.description_tokens, other.description_tokens,
                                8 + rng.index(6));
  rec.summary = draw_tokens(own.summary_tokens, other.summary_tokens, 18 + rng.index(10));
  std::size_t n_reviews = rng.index(5);
  for (std::size_t i = 0; i < n_reviews; ++i) {
    rec.reviews.push_back(draw_tokens(own.review_tokens, other.review_tokens,
                                      4 + rng.index(5)));
  }

  static const char* kBenignCategories[] = {"productivity", "fun", "web-development",
                                            "communication", "accessibility",
                                            "shopping", "photos", "news"};
  static const char* kMaliciousCategories[] = {"search-tools", "photos", "fun",
                                               "productivity", "communication"};
  rec.category = label == Label::malicious
                     ? kMaliciousCategories[rng.index(5)]
                     : kBenignCategories[rng.index(8)];

  std::set<std::string> api_perms;
  std::size_t n_perms = 1 + rng.index(5);
  for (std::size_t i = 0; i < n_perms; ++i) {
    const TokenPool& pool = rng.bernoulli(cross) ? other.api_permissions : own.api_permissions;
    api_perms.insert(pool.draw(rng, w));
  }
  std::set<std::string> hosts;
  std::size_t n_hosts = 1 + rng.index(4);
  for (std::size_t i = 0; i < n_hosts; ++i) {
    const TokenPool& pool = rng.bernoulli(cross) ? other.host_patterns : own.host_patterns;
    hosts.insert(pool.draw(rng, w));
  }
  std::set<std::string> cs_matches;
  std::size_t n_matches = 1 + rng.index(3);
  for (std::size_t i = 0; i < n_matches; ++i) {
    const TokenPool& pool = rng.bernoulli(cross) ? other.cs_patterns : own.cs_patterns;
    cs_matches.insert(pool.draw(rng, w));
  }

  // Related permission sets: neighbors of benign extensions mostly share
  // their permissions; malicious neighbors mostly lack them. The gap
  // closes as the classes drift.
  double missing_prob = drifted(&Profile::related_missing_prob);
  std::size_t n_related = 4;
  for (std::size_t s = 0; s < n_related; ++s) {
    std::set<std::string> related;
    for (const auto& perm : api_perms) {
      if (!rng.bernoulli(missing_prob)) related.insert(perm);
    }
    related.insert(own.api_permissions.base[rng.index(own.api_permissions.base.size())]);
    rec.related_permission_sets.push_back(std::move(related));
  }

  // Scripts from the class grammar; drift mixes the statement weights.
  auto grammar_weights = own.grammar(w);
  if (confusable) {
    auto theirs = other.grammar(w);
    for (std::size_t i = 0; i < grammar_weights.size(); ++i) {
      grammar_weights[i] = 0.3 * grammar_weights[i] + 0.7 * theirs[i];
    }
  }
  JsGenerator gen(rng, grammar_weights);
  double scale = config.grammar_scale;
  double worker_mean = drifted(&Profile::worker_stmts_mean) * scale;
  std::string worker =
      gen.script(clipped_count(rng, worker_mean, worker_mean * 0.3, 2, 200));
  bool broken = rng.bernoulli(config.parse_fail_rate);
  if (broken) worker += "\nvar = ;\n";

  std::size_t n_cs = 1 + rng.index(2);
  double cs_mean = drifted(&Profile::cs_stmts_mean) * scale;
  std::vector<std::string> cs_sources;
  for (std::size_t i = 0; i < n_cs; ++i) {
    cs_sources.push_back(gen.script(clipped_count(rng, cs_mean, cs_mean * 0.3, 1, 120)));
  }

  nlohmann::json manifest;
  manifest["manifest_version"] = manifest_version;
  manifest["name"] = "synthetic extension";
  manifest["version"] = "1.0." + std::to_string(rng.index(40));
  if (manifest_version == 3) {
    manifest["permissions"] = std::vector<std::string>(api_perms.begin(), api_perms.end());
    manifest["host_permissions"] = std::vector<std::string>(hosts.begin(), hosts.end());
    manifest["background"] = {{"service_worker", "worker.js"}};
  } else {
    std::vector<std::string> combined(api_perms.begin(), api_perms.end());
    combined.insert(combined.end(), hosts.begin(), hosts.end());
    manifest["permissions"] = combined;
    manifest["background"] = {{"scripts", std::vector<std::string>{"worker.js"}}};
  }
  nlohmann::json cs_decls = nlohmann::json::array();
  for (std::size_t i = 0; i < cs_sources.size(); ++i) {
    cs_decls.push_back({{"matches", std::vector<std::string>(cs_matches.begin(),
                                                             cs_matches.end())},
                        {"js", std::vector<std::string>{"cs" + std::to_string(i) + ".js"}}});
  }
  manifest["content_scripts"] = cs_decls;

  ZipWriter zip;
  zip.add_text("manifest.json", manifest.dump(1));
  zip.add_text("worker.js", worker);
  for (std::size_t i = 0; i < cs_sources.size(); ++i) {
    zip.add_text("cs" + std::to_string(i) + ".js", cs_sources[i]);
  }
  // Dead-code .js files count toward the file attributes but never reach
  // the bundle.
  double extra_js_mean = drifted(&Profile::extra_js_mean);
  std::size_t extra_js = static_cast<std::size_t>(
      std::llround(std::max(0.0, rng.normal(extra_js_mean, extra_js_mean / 2))));
  for (std::size_t i = 0; i < extra_js; ++i) {
    zip.add_text("lib/dead" + std::to_string(i) + ".js",
                 gen.script(1 + rng.index(4)));
  }
  double target_files = draw_lognormal(file_count_param());
  std::size_t have = 2 + cs_sources.size() + extra_js;
  std::size_t fillers = target_files > static_cast<double>(have)
                            ? static_cast<std::size_t>(target_files) - have
                            : 0;
  for (std::size_t i = 0; i < fillers; ++i) {
    std::string blob(20 + rng.index(90), ' ');
    for (char& ch : blob) ch = static_cast<char>('a' + rng.index(26));
    zip.add_text("assets/r" + std::to_string(i) + ".dat", blob);
  }

  Bytes package = zip.finish();
  WarningLog ignored;
  rec.pkg = load_package(make_id(rng), BytesView(package.data(), package.size()),
                         &ignored);
  return rec;
}

}  // namespace synthdetail

/// Deterministic synthetic corpus. Every record is assembled as a real
/// ZIP package and re-read through the production loader, so ingested and
/// synthetic corpora exercise the same code path. Record-level seeds
/// derive from (seed, index): generation order never matters.
inline Corpus synthesize(const SynthConfig& config, std::uint64_t seed) {
  config.validate();
  Corpus corpus;
  corpus.provenance = Corpus::Provenance::synthetic;
  corpus.seed = seed;
  std::size_t n_mal = static_cast<std::size_t>(
      std::llround(static_cast<double>(config.records) * config.malicious_ratio));
  n_mal = std::clamp<std::size_t>(n_mal, 1, config.records - 1);
  int n_years = config.year_end - config.year_start + 1;
  for (std::size_t i = 0; i < config.records; ++i) {
    Label label = i < n_mal ? Label::malicious : Label::benign;
    Rng rng(mix_seed(seed, 0x5EED0000 + i));
    int year = config.year_start + static_cast<int>(i % static_cast<std::size_t>(n_years));
    bool confusable = rng.bernoulli(config.confusable_rate);
    corpus.records.push_back(
        synthdetail::make_record(config, label, year, confusable, rng));
  }
  return corpus;
}

/// Persists a corpus in the ingest directory layout (meta.json +
/// package.zip per extension).
inline void write_corpus_dir(const Corpus& corpus, const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  fs::create_directories(root);
  for (const auto& rec : corpus.records) {
    fs::path dir = root / rec.id();
    fs::create_directories(dir);
    write_text_file(dir / "meta.json", sidecar_to_json(rec).dump(1));
    write_file(dir / "package.zip",
               BytesView(rec.pkg.archive.zip_payload.data(),
                         rec.pkg.archive.zip_payload.size()));
  }
}

}  // namespace extscan
