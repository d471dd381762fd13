#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "extscan/js_ast.hpp"
#include "extscan/js_lexer.hpp"

namespace extscan {

/// Recursive-descent ECMAScript parser producing ESTree-shaped trees.
///
/// Coverage: the script grammar through ES2017 plus object/array
/// destructuring, spread/rest, template literals, classes and async
/// functions. `?.` is accepted as plain member access. Not covered (a
/// syntax error, tolerated downstream as a metadata-only extension):
/// modules, generators, class fields, BigInt-specific semantics.
///
/// Child order per node matches the reference traversal order frozen in
/// tests/fixtures/js_ast_fixtures.json.
class JsParser {
 public:
  explicit JsParser(std::string_view source, JsAst& ast)
      : lex_(source), ast_(ast) {}

  void run() {
    try {
      advance();
      JsNode* program = ast_.make(JsNodeType::Program);
      while (!at_eof()) program->children.push_back(parse_statement());
      ast_.set_root(program);
    } catch (const ParseError& e) {
      ast_.set_error(e.message + " at offset " + std::to_string(e.position));
    }
  }

 private:
  struct ParseError {
    std::string message;
    std::size_t position;
  };

  struct Snapshot {
    std::size_t lex_pos;
    JsToken cur;
  };

  [[noreturn]] void fail(std::string message) {
    throw ParseError{std::move(message), cur_.start};
  }

  void advance() {
    cur_ = lex_.next();
    if (lex_.failed()) {
      throw ParseError{lex_.error().message, lex_.error().position};
    }
  }

  Snapshot save() { return {lex_.position(), cur_}; }
  void restore(const Snapshot& s) {
    lex_.restore(s.lex_pos, s.cur);
    cur_ = s.cur;
  }

  bool at_eof() const { return cur_.kind == JsTokenKind::eof; }

  void expect_punct(std::string_view p) {
    if (!cur_.is_punct(p)) fail("expected '" + std::string(p) + "'");
    advance();
  }

  bool eat_punct(std::string_view p) {
    if (cur_.is_punct(p)) {
      advance();
      return true;
    }
    return false;
  }

  void expect_keyword(std::string_view k) {
    if (!cur_.is_keyword(k)) fail("expected '" + std::string(k) + "'");
    advance();
  }

  bool eat_keyword(std::string_view k) {
    if (cur_.is_keyword(k)) {
      advance();
      return true;
    }
    return false;
  }

  /// Automatic semicolon insertion at statement end.
  void consume_semicolon() {
    if (eat_punct(";")) return;
    if (cur_.is_punct("}") || at_eof() || cur_.newline_before) return;
    fail("expected ';'");
  }

  JsNode* make(JsNodeType t) { return ast_.make(t); }

  JsNode* make_identifier() {
    if (cur_.kind != JsTokenKind::identifier) fail("expected identifier");
    JsNode* n = make(JsNodeType::Identifier);
    advance();
    return n;
  }

  // ---- statements ----

  JsNode* parse_statement() {
    if (cur_.is_punct("{")) return parse_block();
    if (cur_.is_punct(";")) {
      advance();
      return make(JsNodeType::EmptyStatement);
    }
    if (cur_.kind == JsTokenKind::keyword) {
      std::string_view k = cur_.text;
      if (k == "var" || k == "const") return parse_variable_statement();
      if (k == "function") return parse_function(JsNodeType::FunctionDeclaration, false);
      if (k == "class") return parse_class(JsNodeType::ClassDeclaration);
      if (k == "if") return parse_if();
      if (k == "for") return parse_for();
      if (k == "while") return parse_while();
      if (k == "do") return parse_do_while();
      if (k == "switch") return parse_switch();
      if (k == "try") return parse_try();
      if (k == "throw") return parse_throw();
      if (k == "return") return parse_return();
      if (k == "break" || k == "continue") return parse_break_continue(k == "break");
      if (k == "debugger") {
        advance();
        consume_semicolon();
        return make(JsNodeType::DebuggerStatement);
      }
      if (k == "with") return parse_with();
      if (k == "import" || k == "export") fail("modules are not supported");
    }
    if (cur_.kind == JsTokenKind::identifier) {
      if (cur_.text == "let" && let_starts_declaration()) return parse_variable_statement();
      if (cur_.text == "async" && async_starts_function_declaration()) {
        advance();  // async
        return parse_function(JsNodeType::FunctionDeclaration, true);
      }
      // Labeled statement: identifier ':'.
      Snapshot snap = save();
      advance();
      if (cur_.is_punct(":")) {
        advance();
        JsNode* labeled = make(JsNodeType::LabeledStatement);
        labeled->children.push_back(make(JsNodeType::Identifier));
        labeled->children.push_back(parse_statement());
        return labeled;
      }
      restore(snap);
    }
    JsNode* stmt = make(JsNodeType::ExpressionStatement);
    stmt->children.push_back(parse_expression(false));
    consume_semicolon();
    return stmt;
  }

  bool let_starts_declaration() {
    Snapshot snap = save();
    advance();
    bool is_decl = cur_.kind == JsTokenKind::identifier || cur_.is_punct("[") ||
                   cur_.is_punct("{");
    restore(snap);
    return is_decl;
  }

  bool async_starts_function_declaration() {
    Snapshot snap = save();
    advance();
    bool yes = cur_.is_keyword("function") && !cur_.newline_before;
    restore(snap);
    return yes;
  }

  JsNode* parse_block() {
    expect_punct("{");
    JsNode* block = make(JsNodeType::BlockStatement);
    while (!cur_.is_punct("}")) {
      if (at_eof()) fail("unterminated block");
      block->children.push_back(parse_statement());
    }
    advance();
    return block;
  }

  JsNode* parse_variable_statement() {
    JsNode* decl = parse_variable_declaration(false);
    consume_semicolon();
    return decl;
  }

  JsNode* parse_variable_declaration(bool no_in) {
    advance();  // var / let / const
    JsNode* decl = make(JsNodeType::VariableDeclaration);
    while (true) {
      JsNode* d = make(JsNodeType::VariableDeclarator);
      d->children.push_back(parse_binding_target());
      if (eat_punct("=")) d->children.push_back(parse_assignment(no_in));
      decl->children.push_back(d);
      if (!eat_punct(",")) break;
    }
    return decl;
  }

  JsNode* parse_if() {
    advance();
    expect_punct("(");
    JsNode* stmt = make(JsNodeType::IfStatement);
    stmt->children.push_back(parse_expression(false));
    expect_punct(")");
    stmt->children.push_back(parse_statement());
    if (eat_keyword("else")) stmt->children.push_back(parse_statement());
    return stmt;
  }

  JsNode* parse_while() {
    advance();
    expect_punct("(");
    JsNode* stmt = make(JsNodeType::WhileStatement);
    stmt->children.push_back(parse_expression(false));
    expect_punct(")");
    stmt->children.push_back(parse_statement());
    return stmt;
  }

  JsNode* parse_do_while() {
    advance();
    JsNode* stmt = make(JsNodeType::DoWhileStatement);
    stmt->children.push_back(parse_statement());
    expect_keyword("while");
    expect_punct("(");
    stmt->children.push_back(parse_expression(false));
    expect_punct(")");
    eat_punct(";");  // always optional after do-while
    return stmt;
  }

  JsNode* parse_for() {
    advance();
    expect_punct("(");
    JsNode* init = nullptr;
    if (cur_.is_punct(";")) {
      // no init
    } else if (cur_.is_keyword("var") || cur_.is_keyword("const") ||
               (cur_.is_identifier("let") && let_starts_declaration())) {
      init = parse_variable_declaration(true);
    } else {
      init = parse_expression(true);
    }
    if (init != nullptr && cur_.is_keyword("in")) {
      advance();
      JsNode* stmt = make(JsNodeType::ForInStatement);
      stmt->children.push_back(to_for_target(init));
      stmt->children.push_back(parse_expression(false));
      expect_punct(")");
      stmt->children.push_back(parse_statement());
      return stmt;
    }
    if (init != nullptr && cur_.is_identifier("of")) {
      advance();
      JsNode* stmt = make(JsNodeType::ForOfStatement);
      stmt->children.push_back(to_for_target(init));
      stmt->children.push_back(parse_assignment(false));
      expect_punct(")");
      stmt->children.push_back(parse_statement());
      return stmt;
    }
    expect_punct(";");
    JsNode* stmt = make(JsNodeType::ForStatement);
    if (init != nullptr) stmt->children.push_back(init);
    if (!cur_.is_punct(";")) stmt->children.push_back(parse_expression(false));
    expect_punct(";");
    if (!cur_.is_punct(")")) stmt->children.push_back(parse_expression(false));
    expect_punct(")");
    stmt->children.push_back(parse_statement());
    return stmt;
  }

  JsNode* to_for_target(JsNode* init) {
    if (init->type == JsNodeType::VariableDeclaration) {
      if (init->children.size() != 1 || init->children[0]->children.size() != 1) {
        fail("bad for-in/of declaration");
      }
      return init;
    }
    return to_pattern(init);
  }

  JsNode* parse_switch() {
    advance();
    expect_punct("(");
    JsNode* stmt = make(JsNodeType::SwitchStatement);
    stmt->children.push_back(parse_expression(false));
    expect_punct(")");
    expect_punct("{");
    bool seen_default = false;
    while (!cur_.is_punct("}")) {
      if (at_eof()) fail("unterminated switch");
      JsNode* kase = make(JsNodeType::SwitchCase);
      if (eat_keyword("case")) {
        kase->children.push_back(parse_expression(false));
      } else if (cur_.is_keyword("default")) {
        if (seen_default) fail("duplicate default clause");
        seen_default = true;
        advance();
      } else {
        fail("expected case or default");
      }
      expect_punct(":");
      while (!cur_.is_punct("}") && !cur_.is_keyword("case") &&
             !cur_.is_keyword("default")) {
        if (at_eof()) fail("unterminated switch");
        kase->children.push_back(parse_statement());
      }
      stmt->children.push_back(kase);
    }
    advance();
    return stmt;
  }

  JsNode* parse_try() {
    advance();
    JsNode* stmt = make(JsNodeType::TryStatement);
    stmt->children.push_back(parse_block());
    bool has_handler = false;
    if (eat_keyword("catch")) {
      has_handler = true;
      JsNode* handler = make(JsNodeType::CatchClause);
      if (eat_punct("(")) {
        handler->children.push_back(parse_binding_target());
        expect_punct(")");
      }
      handler->children.push_back(parse_block());
      stmt->children.push_back(handler);
    }
    if (eat_keyword("finally")) {
      stmt->children.push_back(parse_block());
    } else if (!has_handler) {
      fail("try requires catch or finally");
    }
    return stmt;
  }

  JsNode* parse_throw() {
    advance();
    if (cur_.newline_before) fail("illegal newline after throw");
    JsNode* stmt = make(JsNodeType::ThrowStatement);
    stmt->children.push_back(parse_expression(false));
    consume_semicolon();
    return stmt;
  }

  JsNode* parse_return() {
    advance();
    JsNode* stmt = make(JsNodeType::ReturnStatement);
    if (!cur_.is_punct(";") && !cur_.is_punct("}") && !at_eof() &&
        !cur_.newline_before) {
      stmt->children.push_back(parse_expression(false));
    }
    consume_semicolon();
    return stmt;
  }

  JsNode* parse_break_continue(bool is_break) {
    advance();
    JsNode* stmt = make(is_break ? JsNodeType::BreakStatement
                                 : JsNodeType::ContinueStatement);
    if (cur_.kind == JsTokenKind::identifier && !cur_.newline_before) {
      stmt->children.push_back(make_identifier());
    }
    consume_semicolon();
    return stmt;
  }

  JsNode* parse_with() {
    advance();
    expect_punct("(");
    JsNode* stmt = make(JsNodeType::WithStatement);
    stmt->children.push_back(parse_expression(false));
    expect_punct(")");
    stmt->children.push_back(parse_statement());
    return stmt;
  }

  // ---- functions, classes, patterns ----

  JsNode* parse_function(JsNodeType type, bool async) {
    expect_keyword("function");
    if (cur_.is_punct("*")) fail("generators are not supported");
    JsNode* fn = make(type);
    if (cur_.kind == JsTokenKind::identifier) {
      fn->children.push_back(make_identifier());
    } else if (type == JsNodeType::FunctionDeclaration) {
      fail("function declaration requires a name");
    }
    parse_params_into(fn);
    bool saved_async = in_async_;
    in_async_ = async;
    fn->children.push_back(parse_block());
    in_async_ = saved_async;
    return fn;
  }

  void parse_params_into(JsNode* fn) {
    expect_punct("(");
    bool seen_rest = false;
    while (!cur_.is_punct(")")) {
      if (seen_rest) fail("rest parameter must be last");
      if (cur_.is_punct("...")) {
        advance();
        JsNode* rest = make(JsNodeType::RestElement);
        rest->children.push_back(parse_binding_target());
        fn->children.push_back(rest);
        seen_rest = true;
      } else {
        fn->children.push_back(parse_binding_element());
      }
      if (!cur_.is_punct(")")) expect_punct(",");
    }
    advance();
  }

  /// Binding target with optional default: `x`, `x = init`, patterns too.
  JsNode* parse_binding_element() {
    JsNode* target = parse_binding_target();
    if (eat_punct("=")) {
      JsNode* pat = make(JsNodeType::AssignmentPattern);
      pat->children.push_back(target);
      pat->children.push_back(parse_assignment(false));
      return pat;
    }
    return target;
  }

  JsNode* parse_binding_target() {
    if (cur_.kind == JsTokenKind::identifier) return make_identifier();
    if (cur_.is_punct("[")) return parse_array_pattern();
    if (cur_.is_punct("{")) return parse_object_pattern();
    fail("expected binding target");
  }

  JsNode* parse_array_pattern() {
    expect_punct("[");
    JsNode* pat = make(JsNodeType::ArrayPattern);
    while (!cur_.is_punct("]")) {
      if (cur_.is_punct(",")) {
        advance();  // hole
        continue;
      }
      if (cur_.is_punct("...")) {
        advance();
        JsNode* rest = make(JsNodeType::RestElement);
        rest->children.push_back(parse_binding_target());
        pat->children.push_back(rest);
      } else {
        pat->children.push_back(parse_binding_element());
      }
      if (!cur_.is_punct("]")) expect_punct(",");
    }
    advance();
    return pat;
  }

  JsNode* parse_object_pattern() {
    expect_punct("{");
    JsNode* pat = make(JsNodeType::ObjectPattern);
    while (!cur_.is_punct("}")) {
      if (at_eof()) fail("unterminated object pattern");
      if (cur_.is_punct("...")) {
        advance();
        JsNode* rest = make(JsNodeType::RestElement);
        rest->children.push_back(parse_binding_target());
        pat->children.push_back(rest);
      } else {
        JsNode* prop = make(JsNodeType::Property);
        bool computed = cur_.is_punct("[");
        prop->children.push_back(parse_property_key());
        if (eat_punct(":")) {
          prop->children.push_back(parse_binding_element());
        } else {
          if (computed) fail("computed key requires a value");
          // Shorthand: the value is its own identifier node.
          JsNode* value = make(JsNodeType::Identifier);
          if (eat_punct("=")) {
            JsNode* def = make(JsNodeType::AssignmentPattern);
            def->children.push_back(value);
            def->children.push_back(parse_assignment(false));
            prop->children.push_back(def);
          } else {
            prop->children.push_back(value);
          }
        }
        pat->children.push_back(prop);
      }
      if (!cur_.is_punct("}")) expect_punct(",");
    }
    advance();
    return pat;
  }

  JsNode* parse_property_key() {
    if (cur_.is_punct("[")) {
      advance();
      JsNode* key = parse_assignment(false);
      expect_punct("]");
      return key;
    }
    if (cur_.kind == JsTokenKind::identifier || cur_.kind == JsTokenKind::keyword) {
      JsNode* n = make(JsNodeType::Identifier);
      advance();
      return n;
    }
    if (cur_.kind == JsTokenKind::string || cur_.kind == JsTokenKind::number) {
      JsNode* n = make(JsNodeType::Literal);
      advance();
      return n;
    }
    fail("expected property key");
  }

  JsNode* parse_class(JsNodeType type) {
    expect_keyword("class");
    JsNode* cls = make(type);
    if (cur_.kind == JsTokenKind::identifier) {
      cls->children.push_back(make_identifier());
    } else if (type == JsNodeType::ClassDeclaration) {
      fail("class declaration requires a name");
    }
    if (eat_keyword("extends")) cls->children.push_back(parse_lhs_expression());
    JsNode* body = make(JsNodeType::ClassBody);
    expect_punct("{");
    while (!cur_.is_punct("}")) {
      if (at_eof()) fail("unterminated class body");
      if (eat_punct(";")) continue;
      body->children.push_back(parse_method_definition());
    }
    advance();
    cls->children.push_back(body);
    return cls;
  }

  JsNode* parse_method_definition() {
    if (cur_.is_identifier("static") && !peek_is_punct("(")) advance();
    bool async = false;
    if (cur_.is_identifier("async") && !peek_is_punct("(") && !peek_is_punct("=")) {
      advance();
      async = true;
    }
    if ((cur_.is_identifier("get") || cur_.is_identifier("set")) &&
        !peek_is_punct("(")) {
      advance();  // accessor kind does not change the traversal
    }
    JsNode* method = make(JsNodeType::MethodDefinition);
    method->children.push_back(parse_property_key());
    if (!cur_.is_punct("(")) fail("class fields are not supported");
    JsNode* fn = make(JsNodeType::FunctionExpression);
    parse_params_into(fn);
    bool saved_async = in_async_;
    in_async_ = async;
    fn->children.push_back(parse_block());
    in_async_ = saved_async;
    method->children.push_back(fn);
    return method;
  }

  bool peek_is_punct(std::string_view p) {
    Snapshot snap = save();
    advance();
    bool yes = cur_.is_punct(p);
    restore(snap);
    return yes;
  }

  // ---- expressions ----

  JsNode* parse_expression(bool no_in) {
    JsNode* first = parse_assignment(no_in);
    if (!cur_.is_punct(",")) return first;
    JsNode* seq = make(JsNodeType::SequenceExpression);
    seq->children.push_back(first);
    while (eat_punct(",")) seq->children.push_back(parse_assignment(no_in));
    return seq;
  }

  JsNode* parse_assignment(bool no_in) {
    if (JsNode* arrow = try_parse_arrow()) return arrow;
    JsNode* left = parse_conditional(no_in);
    if (cur_.kind == JsTokenKind::punctuator && is_assignment_op(cur_.text)) {
      bool plain = cur_.text == "=";
      advance();
      JsNode* expr = make(JsNodeType::AssignmentExpression);
      expr->children.push_back(plain ? to_pattern(left) : check_simple_target(left));
      expr->children.push_back(parse_assignment(no_in));
      return expr;
    }
    return left;
  }

  static bool is_assignment_op(std::string_view t) {
    return t == "=" || t == "+=" || t == "-=" || t == "*=" || t == "/=" ||
           t == "%=" || t == "**=" || t == "<<=" || t == ">>=" || t == ">>>=" ||
           t == "&=" || t == "|=" || t == "^=" || t == "&&=" || t == "||=" ||
           t == "?\?=";
  }

  JsNode* check_simple_target(JsNode* n) {
    if (n->type != JsNodeType::Identifier && n->type != JsNodeType::MemberExpression) {
      fail("invalid assignment target");
    }
    return n;
  }

  /// Converts an expression already parsed as a literal into the pattern
  /// ESTree uses for destructuring assignment targets.
  JsNode* to_pattern(JsNode* n) {
    switch (n->type) {
      case JsNodeType::Identifier:
      case JsNodeType::MemberExpression:
      case JsNodeType::ObjectPattern:
      case JsNodeType::ArrayPattern:
      case JsNodeType::AssignmentPattern:
      case JsNodeType::RestElement:
        return n;
      case JsNodeType::ArrayExpression:
        n->type = JsNodeType::ArrayPattern;
        for (JsNode*& c : n->children) c = to_pattern(c);
        return n;
      case JsNodeType::ObjectExpression:
        n->type = JsNodeType::ObjectPattern;
        for (JsNode* prop : n->children) {
          if (prop->type == JsNodeType::Property && prop->children.size() == 2) {
            prop->children[1] = to_pattern(prop->children[1]);
          } else if (prop->type == JsNodeType::SpreadElement) {
            prop->type = JsNodeType::RestElement;
          }
        }
        return n;
      case JsNodeType::SpreadElement: {
        n->type = JsNodeType::RestElement;
        for (JsNode*& c : n->children) c = to_pattern(c);
        return n;
      }
      case JsNodeType::AssignmentExpression: {
        n->type = JsNodeType::AssignmentPattern;
        n->children[0] = to_pattern(n->children[0]);
        return n;
      }
      default:
        fail("invalid assignment target");
    }
  }

  /// Arrow functions need lookahead: `x =>`, `(params) =>`, and the async
  /// variants. Probes with save/restore and returns nullptr when the input
  /// is not an arrow head.
  JsNode* try_parse_arrow() {
    bool async = false;
    Snapshot start = save();
    if (cur_.is_identifier("async")) {
      Snapshot after_async = save();
      advance();
      if (!cur_.newline_before &&
          (cur_.kind == JsTokenKind::identifier || cur_.is_punct("("))) {
        async = true;
      } else {
        restore(after_async);
        return nullptr;  // `async` used as a plain identifier
      }
    }
    if (cur_.kind == JsTokenKind::identifier) {
      Snapshot before_ident = save();
      advance();
      if (cur_.is_punct("=>") && !cur_.newline_before) {
        restore(before_ident);
        JsNode* fn = make(JsNodeType::ArrowFunctionExpression);
        fn->children.push_back(make_identifier());
        expect_punct("=>");
        parse_arrow_body(fn, async);
        return fn;
      }
      restore(async ? start : before_ident);
      return nullptr;
    }
    if (cur_.is_punct("(")) {
      if (!paren_list_is_arrow_head()) {
        if (async) restore(start);
        return nullptr;
      }
      JsNode* fn = make(JsNodeType::ArrowFunctionExpression);
      parse_params_into(fn);
      if (!cur_.is_punct("=>") || cur_.newline_before) fail("expected '=>'");
      advance();
      parse_arrow_body(fn, async);
      return fn;
    }
    if (async) restore(start);
    return nullptr;
  }

  /// Scans a balanced parenthesis group and reports whether `=>` follows.
  bool paren_list_is_arrow_head() {
    Snapshot snap = save();
    int depth = 0;
    bool arrow = false;
    while (!at_eof()) {
      if (cur_.kind == JsTokenKind::punctuator) {
        if (cur_.text == "(" || cur_.text == "[" || cur_.text == "{") {
          ++depth;
        } else if (cur_.text == ")" || cur_.text == "]" || cur_.text == "}") {
          --depth;
          if (depth == 0) {
            advance();
            arrow = cur_.is_punct("=>") && !cur_.newline_before;
            break;
          }
        }
      }
      advance();
    }
    restore(snap);
    return arrow;
  }

  void parse_arrow_body(JsNode* fn, bool async) {
    bool saved_async = in_async_;
    in_async_ = async;
    if (cur_.is_punct("{")) {
      fn->children.push_back(parse_block());
    } else {
      fn->children.push_back(parse_assignment(false));
    }
    in_async_ = saved_async;
  }

  JsNode* parse_conditional(bool no_in) {
    JsNode* test = parse_binary(0, no_in);
    if (!eat_punct("?")) return test;
    JsNode* expr = make(JsNodeType::ConditionalExpression);
    expr->children.push_back(test);
    expr->children.push_back(parse_assignment(false));
    expect_punct(":");
    expr->children.push_back(parse_assignment(no_in));
    return expr;
  }

  int binary_precedence(const JsToken& tok, bool no_in) const {
    if (tok.kind == JsTokenKind::keyword) {
      if (tok.text == "instanceof") return 8;
      if (tok.text == "in") return no_in ? 0 : 8;
      return 0;
    }
    if (tok.kind != JsTokenKind::punctuator) return 0;
    std::string_view t = tok.text;
    if (t == "??") return 1;
    if (t == "||") return 2;
    if (t == "&&") return 3;
    if (t == "|") return 4;
    if (t == "^") return 5;
    if (t == "&") return 6;
    if (t == "==" || t == "!=" || t == "===" || t == "!==") return 7;
    if (t == "<" || t == ">" || t == "<=" || t == ">=") return 8;
    if (t == "<<" || t == ">>" || t == ">>>") return 9;
    if (t == "+" || t == "-") return 10;
    if (t == "*" || t == "/" || t == "%") return 11;
    if (t == "**") return 12;
    return 0;
  }

  static bool is_logical_op(std::string_view t) {
    return t == "&&" || t == "||" || t == "??";
  }

  JsNode* parse_binary(int min_prec, bool no_in) {
    JsNode* left = parse_unary();
    while (true) {
      int prec = binary_precedence(cur_, no_in);
      if (prec == 0 || prec < min_prec) return left;
      bool logical = is_logical_op(cur_.text);
      bool right_assoc = cur_.text == "**";
      advance();
      JsNode* right = parse_binary(right_assoc ? prec : prec + 1, no_in);
      JsNode* expr = make(logical ? JsNodeType::LogicalExpression
                                  : JsNodeType::BinaryExpression);
      expr->children.push_back(left);
      expr->children.push_back(right);
      left = expr;
    }
  }

  JsNode* parse_unary() {
    if (cur_.kind == JsTokenKind::punctuator &&
        (cur_.text == "+" || cur_.text == "-" || cur_.text == "~" ||
         cur_.text == "!")) {
      advance();
      JsNode* expr = make(JsNodeType::UnaryExpression);
      expr->children.push_back(parse_unary());
      return expr;
    }
    if (cur_.is_keyword("delete") || cur_.is_keyword("void") ||
        cur_.is_keyword("typeof")) {
      advance();
      JsNode* expr = make(JsNodeType::UnaryExpression);
      expr->children.push_back(parse_unary());
      return expr;
    }
    if (cur_.is_punct("++") || cur_.is_punct("--")) {
      advance();
      JsNode* expr = make(JsNodeType::UpdateExpression);
      JsNode* arg = parse_unary();
      check_simple_target(arg);
      expr->children.push_back(arg);
      return expr;
    }
    if (in_async_ && cur_.is_identifier("await")) {
      advance();
      JsNode* expr = make(JsNodeType::AwaitExpression);
      expr->children.push_back(parse_unary());
      return expr;
    }
    return parse_postfix();
  }

  JsNode* parse_postfix() {
    JsNode* expr = parse_lhs_expression();
    if ((cur_.is_punct("++") || cur_.is_punct("--")) && !cur_.newline_before) {
      check_simple_target(expr);
      advance();
      JsNode* update = make(JsNodeType::UpdateExpression);
      update->children.push_back(expr);
      return update;
    }
    return expr;
  }

  JsNode* parse_lhs_expression() {
    JsNode* expr = cur_.is_keyword("new") ? parse_new() : parse_primary();
    return parse_call_member_tail(expr, /*allow_call=*/true);
  }

  JsNode* parse_new() {
    expect_keyword("new");
    if (cur_.is_punct(".")) {  // new.target
      advance();
      if (!cur_.is_identifier("target")) fail("expected 'target'");
      advance();
      return make(JsNodeType::MetaProperty);
    }
    JsNode* callee = cur_.is_keyword("new") ? parse_new() : parse_primary();
    callee = parse_call_member_tail(callee, /*allow_call=*/false);
    JsNode* expr = make(JsNodeType::NewExpression);
    expr->children.push_back(callee);
    if (cur_.is_punct("(")) parse_arguments_into(expr);
    return expr;
  }

  JsNode* parse_call_member_tail(JsNode* expr, bool allow_call) {
    while (true) {
      if (eat_punct(".") || eat_punct("?.")) {
        JsNode* member = make(JsNodeType::MemberExpression);
        member->children.push_back(expr);
        if (cur_.kind != JsTokenKind::identifier && cur_.kind != JsTokenKind::keyword) {
          fail("expected property name");
        }
        JsNode* prop = make(JsNodeType::Identifier);
        advance();
        member->children.push_back(prop);
        expr = member;
      } else if (cur_.is_punct("[")) {
        advance();
        JsNode* member = make(JsNodeType::MemberExpression);
        member->children.push_back(expr);
        member->children.push_back(parse_expression(false));
        expect_punct("]");
        expr = member;
      } else if (allow_call && cur_.is_punct("(")) {
        JsNode* call = make(JsNodeType::CallExpression);
        call->children.push_back(expr);
        parse_arguments_into(call);
        expr = call;
      } else if (cur_.kind == JsTokenKind::template_full ||
                 cur_.kind == JsTokenKind::template_head) {
        JsNode* tagged = make(JsNodeType::TaggedTemplateExpression);
        tagged->children.push_back(expr);
        tagged->children.push_back(parse_template_literal());
        expr = tagged;
      } else {
        return expr;
      }
    }
  }

  void parse_arguments_into(JsNode* call) {
    expect_punct("(");
    while (!cur_.is_punct(")")) {
      if (cur_.is_punct("...")) {
        advance();
        JsNode* spread = make(JsNodeType::SpreadElement);
        spread->children.push_back(parse_assignment(false));
        call->children.push_back(spread);
      } else {
        call->children.push_back(parse_assignment(false));
      }
      if (!cur_.is_punct(")")) expect_punct(",");
    }
    advance();
  }

  JsNode* parse_template_literal() {
    JsNode* tpl = make(JsNodeType::TemplateLiteral);
    std::vector<JsNode*> expressions;
    // Reference layout: all quasis, then all expressions.
    if (cur_.kind == JsTokenKind::template_full) {
      tpl->children.push_back(make(JsNodeType::TemplateElement));
      advance();
    } else {
      tpl->children.push_back(make(JsNodeType::TemplateElement));
      advance();  // template_head
      while (true) {
        expressions.push_back(parse_expression(false));
        if (!cur_.is_punct("}")) fail("expected '}' in template literal");
        cur_ = lex_.rescan_as_template_continuation(cur_);
        if (lex_.failed()) {
          throw ParseError{lex_.error().message, lex_.error().position};
        }
        tpl->children.push_back(make(JsNodeType::TemplateElement));
        bool done = cur_.kind == JsTokenKind::template_tail;
        advance();
        if (done) break;
      }
    }
    for (JsNode* e : expressions) tpl->children.push_back(e);
    return tpl;
  }

  JsNode* parse_primary() {
    switch (cur_.kind) {
      case JsTokenKind::identifier: {
        if (cur_.text == "async") {
          Snapshot snap = save();
          advance();
          if (cur_.is_keyword("function") && !cur_.newline_before) {
            return parse_function(JsNodeType::FunctionExpression, true);
          }
          restore(snap);
        }
        return make_identifier();
      }
      case JsTokenKind::number:
      case JsTokenKind::string:
      case JsTokenKind::regex: {
        JsNode* n = make(JsNodeType::Literal);
        advance();
        return n;
      }
      case JsTokenKind::template_full:
      case JsTokenKind::template_head:
        return parse_template_literal();
      case JsTokenKind::keyword: {
        std::string_view k = cur_.text;
        if (k == "this") {
          advance();
          return make(JsNodeType::ThisExpression);
        }
        if (k == "super") {
          advance();
          return make(JsNodeType::Super);
        }
        if (k == "null" || k == "true" || k == "false") {
          JsNode* n = make(JsNodeType::Literal);
          advance();
          return n;
        }
        if (k == "function") return parse_function(JsNodeType::FunctionExpression, false);
        if (k == "class") return parse_class(JsNodeType::ClassExpression);
        fail("unexpected keyword '" + std::string(k) + "'");
      }
      case JsTokenKind::punctuator: {
        if (cur_.text == "(") {
          advance();
          JsNode* inner = parse_expression(false);
          expect_punct(")");
          return inner;
        }
        if (cur_.text == "[") return parse_array_literal();
        if (cur_.text == "{") return parse_object_literal();
        fail("unexpected token '" + std::string(cur_.text) + "'");
      }
      default:
        fail("unexpected end of input");
    }
  }

  JsNode* parse_array_literal() {
    expect_punct("[");
    JsNode* arr = make(JsNodeType::ArrayExpression);
    while (!cur_.is_punct("]")) {
      if (at_eof()) fail("unterminated array literal");
      if (cur_.is_punct(",")) {
        advance();  // hole
        continue;
      }
      if (cur_.is_punct("...")) {
        advance();
        JsNode* spread = make(JsNodeType::SpreadElement);
        spread->children.push_back(parse_assignment(false));
        arr->children.push_back(spread);
      } else {
        arr->children.push_back(parse_assignment(false));
      }
      if (!cur_.is_punct("]")) expect_punct(",");
    }
    advance();
    return arr;
  }

  JsNode* parse_object_literal() {
    expect_punct("{");
    JsNode* obj = make(JsNodeType::ObjectExpression);
    while (!cur_.is_punct("}")) {
      if (at_eof()) fail("unterminated object literal");
      obj->children.push_back(parse_object_property());
      if (!cur_.is_punct("}")) expect_punct(",");
    }
    advance();
    return obj;
  }

  JsNode* parse_object_property() {
    if (cur_.is_punct("...")) {
      advance();
      JsNode* spread = make(JsNodeType::SpreadElement);
      spread->children.push_back(parse_assignment(false));
      return spread;
    }
    bool async = false;
    if (cur_.is_identifier("async") && !peek_is_punct("(") && !peek_is_punct(":") &&
        !peek_is_punct(",") && !peek_is_punct("}") && !peek_is_punct("=")) {
      advance();
      async = true;
    }
    if (!async && (cur_.is_identifier("get") || cur_.is_identifier("set")) &&
        !peek_is_punct("(") && !peek_is_punct(":") && !peek_is_punct(",") &&
        !peek_is_punct("}") && !peek_is_punct("=")) {
      advance();  // accessor
      JsNode* prop = make(JsNodeType::Property);
      prop->children.push_back(parse_property_key());
      JsNode* fn = make(JsNodeType::FunctionExpression);
      parse_params_into(fn);
      bool saved_async = in_async_;
      in_async_ = false;
      fn->children.push_back(parse_block());
      in_async_ = saved_async;
      prop->children.push_back(fn);
      return prop;
    }
    JsNode* prop = make(JsNodeType::Property);
    bool was_identifier = cur_.kind == JsTokenKind::identifier;
    prop->children.push_back(parse_property_key());
    if (cur_.is_punct("(")) {  // method shorthand
      JsNode* fn = make(JsNodeType::FunctionExpression);
      parse_params_into(fn);
      bool saved_async = in_async_;
      in_async_ = async;
      fn->children.push_back(parse_block());
      in_async_ = saved_async;
      prop->children.push_back(fn);
      return prop;
    }
    if (eat_punct(":")) {
      prop->children.push_back(parse_assignment(false));
      return prop;
    }
    if (!was_identifier) fail("expected ':' after property key");
    // Shorthand; `= default` only makes sense as a destructuring target.
    JsNode* value = make(JsNodeType::Identifier);
    if (eat_punct("=")) {
      JsNode* def = make(JsNodeType::AssignmentPattern);
      def->children.push_back(value);
      def->children.push_back(parse_assignment(false));
      prop->children.push_back(def);
    } else {
      prop->children.push_back(value);
    }
    return prop;
  }

  JsLexer lex_;
  JsAst& ast_;
  JsToken cur_;
  bool in_async_ = false;
};

inline JsAst parse_js(std::string_view source) {
  JsAst ast;
  JsParser parser(source, ast);
  parser.run();
  return ast;
}

}  // namespace extscan
