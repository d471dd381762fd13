#pragma once

#include <array>
#include <string>
#include <vector>

#include "extscan/rng.hpp"

namespace extscan {

/// Probabilistic ECMAScript generator. Each statement kind leaves a
/// distinct AST footprint, so two weight vectors induce measurably
/// different 4-gram distributions. Everything emitted parses with the
/// in-tree parser.
class JsGenerator {
 public:
  static constexpr std::size_t kStatementKinds = 18;

  JsGenerator(Rng& rng, const std::array<double, kStatementKinds>& weights)
      : rng_(rng), weights_(weights) {
    total_ = 0.0;
    for (double w : weights_) total_ += w;
  }

  std::string script(std::size_t statement_count) {
    std::string out;
    for (std::size_t i = 0; i < statement_count; ++i) {
      out += statement();
      out += "\n";
    }
    return out;
  }

 private:
  std::size_t pick_kind() {
    double x = rng_.uniform(0.0, total_);
    double acc = 0.0;
    for (std::size_t k = 0; k < kStatementKinds; ++k) {
      acc += weights_[k];
      if (x < acc) return k;
    }
    return kStatementKinds - 1;
  }

  std::string ident() {
    static const char* kNames[] = {"item", "value", "node", "list", "conf", "state",
                                   "panel", "entry", "query", "token", "count",
                                   "result", "input", "cache", "index", "buffer"};
    return std::string(kNames[rng_.index(16)]) + std::to_string(rng_.index(40));
  }

  std::string word() {
    static const char* kWords[] = {"alpha", "beta", "delta", "key", "tab", "page",
                                   "data", "href", "mode", "slot", "path", "name"};
    return kWords[rng_.index(12)];
  }

  std::string number() { return std::to_string(rng_.index(500)); }

  std::string url_fragment() {
    return "https://" + word() + "." + word() + ".example/" + word();
  }

  std::string statement() {
    switch (pick_kind()) {
      case 0:
        return "var " + ident() + " = " + number() + ";";
      case 1: {
        std::string s = "var " + ident() + " = \"" + word() + "\"";
        std::size_t parts = 2 + rng_.index(3);
        for (std::size_t i = 0; i < parts; ++i) {
          s += rng_.bernoulli(0.5) ? " + \"" + word() + "\"" : " + " + ident();
        }
        return s + ";";
      }
      case 2: {
        std::string fn = ident();
        std::string acc = ident();
        std::string arg = ident();
        std::string k = "k" + number();
        return "function " + fn + "(" + arg + ") { var " + acc + " = 0; for (var " +
               k + " = 0; " + k + " < " + arg + "; " + k + "++) { " + acc + " += " +
               k + "; } return " + acc + "; }";
      }
      case 3:
        return "document.addEventListener(\"" + word() +
               "\", function (ev) { if (ev.target) { " + ident() +
               "(ev.target); } });";
      case 4:
        return "chrome.storage.local.get(\"" + word() + "\", function (items) { " +
               ident() + "(items[\"" + word() + "\"]); });";
      case 5: {
        std::string v = ident();
        return "if (" + v + " > " + number() + ") { " + v + " = " + number() +
               "; } else { " + v + " = " + v + " + 1; }";
      }
      case 6: {
        std::string acc = ident();
        std::string j = "j" + number();
        return "var " + acc + " = 0; for (var " + j + " = 0; " + j + " < " +
               number() + "; " + j + "++) { " + acc + " += " + j + " * 2; }";
      }
      case 7: {
        std::string v = ident();
        return "var " + v + " = " + number() + "; while (" + v + " > 0) { " + v +
               "--; }";
      }
      case 8:
        return "try { " + ident() + "(" + number() + "); } catch (err) { console.log(err); }";
      case 9:
        return "fetch(\"" + url_fragment() +
               "\").then(function (res) { return res.json(); }).then(function (body) { " +
               ident() + "(body); });";
      case 10:
        return "window.location.href = \"" + url_fragment() + "\" + " + ident() + ";";
      case 11:
        return "setTimeout(function () { " + ident() + "(\"" + word() + "\"); }, " +
               number() + ");";
      case 12: {
        std::string v = ident();
        return "var " + v + " = [\"" + word() + "\", \"" + word() + "\", \"" + word() +
               "\"]; var " + ident() + " = " + v + ".join(\"\");";
      }
      case 13: {
        std::string v = ident();
        return "switch (" + v + ") { case " + number() + ": " + ident() +
               "(); break; case " + number() + ": " + ident() +
               "(); break; default: " + ident() + "(); }";
      }
      case 14:
        return "var " + ident() + " = { name: \"" + word() + "\", limit: " + number() +
               ", refresh: function () { return this.limit; } };";
      case 15:
        return "var " + ident() + " = `" + word() + "=${" + ident() + "}`;";
      case 16:
        return "const " + ident() + " = (x) => x * " + number() + " + " + number() + ";";
      case 17: {
        std::string v = ident();
        return "var " + v + " = new XMLHttpRequest(); " + v + ".open(\"GET\", \"" +
               url_fragment() + "\"); " + v + ".send();";
      }
      default:
        return ";";
    }
  }

  Rng& rng_;
  std::array<double, kStatementKinds> weights_;
  double total_ = 0.0;
};

}  // namespace extscan
