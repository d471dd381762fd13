#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <string_view>
#include <vector>

namespace extscan {

/// Syntactic-unit alphabet: ESTree node-type names, emitted in depth-first
/// pre-order with child fields visited in ESTree declaration order.
enum class JsNodeType : std::uint8_t {
  Program,
  ExpressionStatement,
  BlockStatement,
  EmptyStatement,
  VariableDeclaration,
  VariableDeclarator,
  FunctionDeclaration,
  FunctionExpression,
  ArrowFunctionExpression,
  ReturnStatement,
  IfStatement,
  ForStatement,
  ForInStatement,
  ForOfStatement,
  WhileStatement,
  DoWhileStatement,
  BreakStatement,
  ContinueStatement,
  ThrowStatement,
  TryStatement,
  CatchClause,
  SwitchStatement,
  SwitchCase,
  LabeledStatement,
  DebuggerStatement,
  WithStatement,
  Identifier,
  Literal,
  TemplateLiteral,
  TemplateElement,
  TaggedTemplateExpression,
  ThisExpression,
  Super,
  ArrayExpression,
  ObjectExpression,
  Property,
  UnaryExpression,
  UpdateExpression,
  BinaryExpression,
  LogicalExpression,
  AssignmentExpression,
  ConditionalExpression,
  CallExpression,
  NewExpression,
  MemberExpression,
  SequenceExpression,
  SpreadElement,
  RestElement,
  AssignmentPattern,
  ObjectPattern,
  ArrayPattern,
  ClassDeclaration,
  ClassExpression,
  ClassBody,
  MethodDefinition,
  AwaitExpression,
  MetaProperty,
  kCount,
};

constexpr std::size_t kJsNodeTypeCount = static_cast<std::size_t>(JsNodeType::kCount);

inline std::string_view js_node_type_name(JsNodeType t) {
  static constexpr std::string_view names[] = {
      "Program",
      "ExpressionStatement",
      "BlockStatement",
      "EmptyStatement",
      "VariableDeclaration",
      "VariableDeclarator",
      "FunctionDeclaration",
      "FunctionExpression",
      "ArrowFunctionExpression",
      "ReturnStatement",
      "IfStatement",
      "ForStatement",
      "ForInStatement",
      "ForOfStatement",
      "WhileStatement",
      "DoWhileStatement",
      "BreakStatement",
      "ContinueStatement",
      "ThrowStatement",
      "TryStatement",
      "CatchClause",
      "SwitchStatement",
      "SwitchCase",
      "LabeledStatement",
      "DebuggerStatement",
      "WithStatement",
      "Identifier",
      "Literal",
      "TemplateLiteral",
      "TemplateElement",
      "TaggedTemplateExpression",
      "ThisExpression",
      "Super",
      "ArrayExpression",
      "ObjectExpression",
      "Property",
      "UnaryExpression",
      "UpdateExpression",
      "BinaryExpression",
      "LogicalExpression",
      "AssignmentExpression",
      "ConditionalExpression",
      "CallExpression",
      "NewExpression",
      "MemberExpression",
      "SequenceExpression",
      "SpreadElement",
      "RestElement",
      "AssignmentPattern",
      "ObjectPattern",
      "ArrayPattern",
      "ClassDeclaration",
      "ClassExpression",
      "ClassBody",
      "MethodDefinition",
      "AwaitExpression",
      "MetaProperty",
  };
  static_assert(sizeof(names) / sizeof(names[0]) == kJsNodeTypeCount);
  return names[static_cast<std::size_t>(t)];
}

/// AST node reduced to what unit extraction needs: a type and ordered
/// children. Field order matches the reference traversal order.
struct JsNode {
  JsNodeType type;
  std::vector<JsNode*> children;
};

class JsAst {
 public:
  bool ok() const { return ok_; }
  const JsNode* root() const { return root_; }
  std::string_view error() const { return error_; }

  JsNode* make(JsNodeType t) {
    arena_.push_back(JsNode{t, {}});
    return &arena_.back();
  }

  void set_root(JsNode* r) {
    root_ = r;
    ok_ = true;
  }

  void set_error(std::string err) {
    ok_ = false;
    root_ = nullptr;
    error_ = std::move(err);
  }

  void preorder_units(std::vector<JsNodeType>& out) const {
    out.clear();
    if (!ok_ || root_ == nullptr) return;
    std::vector<const JsNode*> stack{root_};
    while (!stack.empty()) {
      const JsNode* n = stack.back();
      stack.pop_back();
      out.push_back(n->type);
      for (auto it = n->children.rbegin(); it != n->children.rend(); ++it) {
        stack.push_back(*it);
      }
    }
  }

 private:
  std::deque<JsNode> arena_;
  JsNode* root_ = nullptr;
  bool ok_ = false;
  std::string error_;
};

}  // namespace extscan
