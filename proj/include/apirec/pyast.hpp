// Simplified Python AST lifted from a tree-sitter parse. Only the statement
// and expression kinds the usage analysis consumes are given structured
// kinds; everything else becomes a pass-through Other node whose children
// are still lifted, so traversal never loses call sites.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "apirec/errors.hpp"
#include "apirec/span.hpp"

namespace apirec::pyast {

struct SourceModule {
  std::string project_id;
  std::string path;  // relative to the project root, unique within it
  std::string text;  // UTF-8
};

enum class NodeKind {
  Module,
  Import,
  ImportFrom,
  Assign,
  WithItem,
  Call,
  Attribute,
  Name,
  If,
  For,
  While,
  FunctionDef,
  ClassDef,
  Other,
};

const char* to_string(NodeKind kind);

// Child layout per kind (positions are fixed; optional children only at the
// tail):
//   Module      statements
//   Import      one Name per binding; payload is the bound alias and the
//               single child Name holds the fully qualified dotted path
//   ImportFrom  payload = source module path; bindings as in Import
//   Assign      [target, value]
//   WithItem    [value] or [value, target]
//   Call        [callee, arguments...]
//   Attribute   [object]; payload = attribute name
//   Name        leaf; payload = identifier
//   If          [condition, then-block, else-block?]  (elif chains are
//               rewritten as a nested If inside the else block)
//   For         [target, iterable, body-block, else-block?]
//   While       [condition, body-block, else-block?]
//   FunctionDef [parameter-expressions-block, body-block]; payload = name
//   ClassDef    [superclass-expressions-block, body-block]; payload = name
//   Other       anything else, children lifted; blocks are bare Others
//
// A with statement is an Other whose children are its WithItems followed by
// the body block. Assignments inside try/except/finally bodies are lifted as
// Other (their right-hand calls stay visible) so they never produce
// assignment events; nested function and class bodies are unaffected.
struct AstNode {
  NodeKind kind = NodeKind::Other;
  Span span;
  std::string name_payload;  // empty when absent
  std::vector<AstNode> children;

  bool operator==(const AstNode&) const = default;
};

// Strict parse of a whole source file. Throws SyntaxError (with the first
// offending line) if the grammar reports any error or missing token.
AstNode parse_module(const SourceModule& source);

// Tolerant parse for completion prefixes: error subtrees are lifted as Other
// and traversal continues into them.
AstNode parse_prefix(const std::string& text);

// Dotted path of a Name/Attribute chain ("os.path.join"); nullopt when the
// expression is anything else.
std::optional<std::string> dotted_path(const AstNode& node);

// Vendored grammar identification, surfaced in train diagnostics.
std::string grammar_version();

}  // namespace apirec::pyast
