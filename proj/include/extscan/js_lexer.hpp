#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>

namespace extscan {

enum class JsTokenKind {
  eof,
  identifier,  // includes contextual words (let, of, get, async, ...)
  keyword,     // reserved words
  punctuator,
  number,
  string,
  regex,
  template_full,    // `abc`
  template_head,    // `abc${
  template_middle,  // }abc${
  template_tail,    // }abc`
};

struct JsToken {
  JsTokenKind kind = JsTokenKind::eof;
  std::string_view text;  // backed by the source buffer
  std::size_t start = 0;
  std::size_t end = 0;
  bool newline_before = false;

  bool is(std::string_view s) const { return text == s; }
  bool is_punct(std::string_view s) const {
    return kind == JsTokenKind::punctuator && text == s;
  }
  bool is_keyword(std::string_view s) const {
    return kind == JsTokenKind::keyword && text == s;
  }
  bool is_identifier(std::string_view s) const {
    return kind == JsTokenKind::identifier && text == s;
  }
};

struct JsLexError {
  std::string message;
  std::size_t position = 0;
};

/// Hand-rolled ECMAScript lexer. Regex-vs-division is resolved from the
/// previous significant token, which covers real-world extension code; the
/// parser re-scans `}` as a template continuation where the grammar
/// requires it.
class JsLexer {
 public:
  explicit JsLexer(std::string_view source) : src_(source) {}

  JsToken next() {
    bool newline = skip_trivia();
    JsToken tok;
    tok.newline_before = newline;
    tok.start = pos_;
    if (pos_ >= src_.size()) {
      tok.kind = JsTokenKind::eof;
      tok.end = pos_;
      prev_ = tok;
      return tok;
    }
    char c = src_[pos_];
    if (is_ident_start(c)) {
      scan_identifier(tok);
    } else if (is_digit(c) || (c == '.' && pos_ + 1 < src_.size() && is_digit(src_[pos_ + 1]))) {
      scan_number(tok);
    } else if (c == '"' || c == '\'') {
      scan_string(tok);
    } else if (c == '`') {
      scan_template(tok, /*from_brace=*/false);
    } else if (c == '/' && regex_allowed()) {
      scan_regex(tok);
    } else {
      scan_punctuator(tok);
    }
    prev_ = tok;
    return tok;
  }

  /// Re-lex from a `}` token as a template middle/tail part.
  JsToken rescan_as_template_continuation(const JsToken& closing_brace) {
    pos_ = closing_brace.start;
    JsToken tok;
    tok.newline_before = closing_brace.newline_before;
    tok.start = pos_;
    scan_template(tok, /*from_brace=*/true);
    prev_ = tok;
    return tok;
  }

  void restore(std::size_t position, const JsToken& previous) {
    pos_ = position;
    prev_ = previous;
  }

  std::size_t position() const { return pos_; }
  const JsToken& previous() const { return prev_; }

  bool failed() const { return failed_; }
  const JsLexError& error() const { return error_; }

  static bool is_reserved_word(std::string_view s) {
    static const std::unordered_set<std::string_view> kReserved = {
        "var",    "function", "return",  "if",     "else",       "for",
        "while",  "do",       "break",   "continue", "new",      "delete",
        "typeof", "instanceof", "void",  "this",   "null",       "true",
        "false",  "in",       "case",    "switch", "default",    "throw",
        "try",    "catch",    "finally", "class",  "extends",    "super",
        "const",  "debugger", "with",    "import", "export",     "yield",
    };
    return kReserved.count(s) > 0;
  }

 private:
  bool regex_allowed() const {
    switch (prev_.kind) {
      case JsTokenKind::eof:
        return prev_.end == 0;  // genuine start of input
      case JsTokenKind::identifier:
      case JsTokenKind::number:
      case JsTokenKind::string:
      case JsTokenKind::regex:
      case JsTokenKind::template_full:
      case JsTokenKind::template_tail:
        return false;
      case JsTokenKind::keyword:
        // `this` and literal-like keywords end an expression.
        return !(prev_.text == "this" || prev_.text == "null" ||
                 prev_.text == "true" || prev_.text == "false" ||
                 prev_.text == "super");
      case JsTokenKind::punctuator:
        if (prev_.text == ")" || prev_.text == "]" || prev_.text == "++" ||
            prev_.text == "--") {
          return false;
        }
        return true;
      default:
        return true;
    }
  }

  bool skip_trivia() {
    bool newline = false;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '\n' || c == '\r') {
        newline = true;
        ++pos_;
      } else if (c == ' ' || c == '\t' || c == '\v' || c == '\f') {
        ++pos_;
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '*') {
        pos_ += 2;
        bool closed = false;
        while (pos_ + 1 < src_.size()) {
          if (src_[pos_] == '\n') newline = true;
          if (src_[pos_] == '*' && src_[pos_ + 1] == '/') {
            pos_ += 2;
            closed = true;
            break;
          }
          ++pos_;
        }
        if (!closed) {
          pos_ = src_.size();
          set_error("unterminated block comment");
        }
      } else if (static_cast<unsigned char>(c) == 0xE2 && pos_ + 2 < src_.size() &&
                 static_cast<unsigned char>(src_[pos_ + 1]) == 0x80 &&
                 (static_cast<unsigned char>(src_[pos_ + 2]) == 0xA8 ||
                  static_cast<unsigned char>(src_[pos_ + 2]) == 0xA9)) {
        newline = true;  // U+2028 / U+2029
        pos_ += 3;
      } else if (static_cast<unsigned char>(c) == 0xEF && pos_ + 2 < src_.size() &&
                 static_cast<unsigned char>(src_[pos_ + 1]) == 0xBB &&
                 static_cast<unsigned char>(src_[pos_ + 2]) == 0xBF) {
        pos_ += 3;  // BOM
      } else if (static_cast<unsigned char>(c) == 0xC2 && pos_ + 1 < src_.size() &&
                 static_cast<unsigned char>(src_[pos_ + 1]) == 0xA0) {
        pos_ += 2;  // NBSP
      } else {
        break;
      }
    }
    return newline;
  }

  static bool is_digit(char c) { return c >= '0' && c <= '9'; }
  static bool is_hex(char c) {
    return is_digit(c) || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
  }
  static bool is_ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == '$' ||
           static_cast<unsigned char>(c) >= 0x80;
  }
  static bool is_ident_part(char c) { return is_ident_start(c) || is_digit(c); }

  void scan_identifier(JsToken& tok) {
    std::size_t begin = pos_;
    while (pos_ < src_.size() && is_ident_part(src_[pos_])) ++pos_;
    tok.text = src_.substr(begin, pos_ - begin);
    tok.end = pos_;
    tok.kind = is_reserved_word(tok.text) ? JsTokenKind::keyword : JsTokenKind::identifier;
  }

  void scan_number(JsToken& tok) {
    std::size_t begin = pos_;
    if (src_[pos_] == '0' && pos_ + 1 < src_.size() &&
        (src_[pos_ + 1] == 'x' || src_[pos_ + 1] == 'X')) {
      pos_ += 2;
      if (pos_ >= src_.size() || !is_hex(src_[pos_])) set_error("bad hex literal");
      while (pos_ < src_.size() && is_hex(src_[pos_])) ++pos_;
    } else if (src_[pos_] == '0' && pos_ + 1 < src_.size() &&
               (src_[pos_ + 1] == 'b' || src_[pos_ + 1] == 'B' || src_[pos_ + 1] == 'o' ||
                src_[pos_ + 1] == 'O')) {
      pos_ += 2;
      if (pos_ >= src_.size() || !is_digit(src_[pos_])) set_error("bad radix literal");
      while (pos_ < src_.size() && is_hex(src_[pos_])) ++pos_;
    } else {
      while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
      if (pos_ < src_.size() && src_[pos_] == '.') {
        ++pos_;
        while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
      }
      if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        ++pos_;
        if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
        if (pos_ >= src_.size() || !is_digit(src_[pos_])) {
          set_error("bad exponent");
        }
        while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
      }
    }
    if (pos_ < src_.size() && src_[pos_] == 'n') ++pos_;  // BigInt suffix
    if (pos_ < src_.size() && is_ident_start(src_[pos_])) {
      set_error("identifier after number literal");
    }
    tok.kind = JsTokenKind::number;
    tok.text = src_.substr(begin, pos_ - begin);
    tok.end = pos_;
  }

  void scan_string(JsToken& tok) {
    char quote = src_[pos_];
    std::size_t begin = pos_++;
    bool closed = false;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '\\') {
        pos_ += 2;
        continue;
      }
      if (c == quote) {
        ++pos_;
        closed = true;
        break;
      }
      if (c == '\n' || c == '\r') break;
      ++pos_;
    }
    if (!closed) set_error("unterminated string literal");
    tok.kind = JsTokenKind::string;
    tok.text = src_.substr(begin, pos_ - begin);
    tok.end = pos_;
  }

  void scan_template(JsToken& tok, bool from_brace) {
    std::size_t begin = pos_;
    ++pos_;  // consume ` or }
    bool head_start = !from_brace;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '\\') {
        pos_ += 2;
        continue;
      }
      if (c == '`') {
        ++pos_;
        tok.kind = head_start ? JsTokenKind::template_full : JsTokenKind::template_tail;
        tok.text = src_.substr(begin, pos_ - begin);
        tok.end = pos_;
        return;
      }
      if (c == '$' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '{') {
        pos_ += 2;
        tok.kind = head_start ? JsTokenKind::template_head : JsTokenKind::template_middle;
        tok.text = src_.substr(begin, pos_ - begin);
        tok.end = pos_;
        return;
      }
      ++pos_;
    }
    set_error("unterminated template literal");
    tok.kind = head_start ? JsTokenKind::template_full : JsTokenKind::template_tail;
    tok.text = src_.substr(begin, pos_ - begin);
    tok.end = pos_;
  }

  void scan_regex(JsToken& tok) {
    std::size_t begin = pos_++;
    bool in_class = false;
    bool closed = false;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '\\') {
        pos_ += 2;
        continue;
      }
      if (c == '\n' || c == '\r') break;
      if (c == '[') in_class = true;
      if (c == ']') in_class = false;
      if (c == '/' && !in_class) {
        ++pos_;
        closed = true;
        break;
      }
      ++pos_;
    }
    if (!closed) {
      set_error("unterminated regular expression");
    }
    while (pos_ < src_.size() && is_ident_part(src_[pos_])) ++pos_;  // flags
    tok.kind = JsTokenKind::regex;
    tok.text = src_.substr(begin, pos_ - begin);
    tok.end = pos_;
  }

  void scan_punctuator(JsToken& tok) {
    static constexpr std::string_view k4[] = {">>>="};
    static constexpr std::string_view k3[] = {"===", "!==", ">>>", "**=", "<<=",
                                              ">>=", "&&=", "||=", "?\?=", "..."};
    static constexpr std::string_view k2[] = {
        "=>", "==", "!=", "<=", ">=", "&&", "||", "??", "?.", "++", "--", "+=",
        "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<", ">>", "**"};
    std::string_view rest = src_.substr(pos_);
    for (auto p : k4) {
      if (rest.rfind(p, 0) == 0) return finish_punct(tok, p.size());
    }
    for (auto p : k3) {
      if (rest.rfind(p, 0) == 0) return finish_punct(tok, p.size());
    }
    for (auto p : k2) {
      if (rest.rfind(p, 0) == 0) return finish_punct(tok, p.size());
    }
    static constexpr std::string_view k1 = "{}()[];,<>+-*/%&|^!~?:=.";
    if (k1.find(src_[pos_]) != std::string_view::npos) return finish_punct(tok, 1);
    set_error(std::string("unexpected character '") + src_[pos_] + "'");
    finish_punct(tok, 1);
  }

  void finish_punct(JsToken& tok, std::size_t len) {
    tok.kind = JsTokenKind::punctuator;
    tok.text = src_.substr(pos_, len);
    pos_ += len;
    tok.end = pos_;
  }

  void set_error(std::string message) {
    if (!failed_) {
      failed_ = true;
      error_ = {std::move(message), pos_};
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  JsToken prev_{};  // kind eof + end 0 marks start of input
  bool failed_ = false;
  JsLexError error_;
};

}  // namespace extscan
