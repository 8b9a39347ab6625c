// Lifts tree-sitter-python parse trees into the simplified AST.
#include "apirec/pyast.hpp"

#include <cstring>
#include <string_view>

#include <tree_sitter/api.h>

extern "C" const TSLanguage* tree_sitter_python(void);

namespace apirec::pyast {
namespace {

struct Parser {
  TSParser* parser;
  Parser() {
    parser = ts_parser_new();
    ts_parser_set_language(parser, tree_sitter_python());
  }
  ~Parser() { ts_parser_delete(parser); }
  Parser(const Parser&) = delete;
  Parser& operator=(const Parser&) = delete;
};

struct Tree {
  TSTree* tree;
  explicit Tree(TSTree* t) : tree(t) {}
  ~Tree() { ts_tree_delete(tree); }
  Tree(const Tree&) = delete;
  Tree& operator=(const Tree&) = delete;
};

Span span_of(TSNode n) {
  TSPoint a = ts_node_start_point(n);
  TSPoint b = ts_node_end_point(n);
  return Span{static_cast<int>(a.row) + 1, static_cast<int>(a.column),
              static_cast<int>(b.row) + 1, static_cast<int>(b.column),
              ts_node_start_byte(n), ts_node_end_byte(n)};
}

// Depth-first search for the first ERROR or missing token.
bool first_error_line(TSNode n, int* line) {
  if (ts_node_is_missing(n) || strcmp(ts_node_type(n), "ERROR") == 0) {
    *line = static_cast<int>(ts_node_start_point(n).row) + 1;
    return true;
  }
  if (!ts_node_has_error(n)) return false;
  uint32_t count = ts_node_child_count(n);
  for (uint32_t i = 0; i < count; ++i) {
    if (first_error_line(ts_node_child(n, i), line)) return true;
  }
  *line = static_cast<int>(ts_node_start_point(n).row) + 1;
  return true;
}

class Lifter {
 public:
  explicit Lifter(const std::string& text) : text_(text) {}

  AstNode lift_module(TSNode root) {
    AstNode mod;
    mod.kind = NodeKind::Module;
    mod.span = span_of(root);
    lift_children_into(root, mod, /*in_try=*/false);
    return mod;
  }

 private:
  std::string text_of(TSNode n) const {
    uint32_t a = ts_node_start_byte(n), b = ts_node_end_byte(n);
    return text_.substr(a, b - a);
  }

  static std::string_view type_of(TSNode n) { return ts_node_type(n); }

  void lift_children_into(TSNode n, AstNode& out, bool in_try) {
    uint32_t count = ts_node_named_child_count(n);
    for (uint32_t i = 0; i < count; ++i) {
      TSNode c = ts_node_named_child(n, i);
      if (type_of(c) == "comment" || ts_node_is_missing(c)) continue;
      out.children.push_back(lift(c, in_try));
    }
  }

  AstNode other(TSNode n, bool in_try) {
    AstNode node;
    node.kind = NodeKind::Other;
    node.span = span_of(n);
    lift_children_into(n, node, in_try);
    return node;
  }

  AstNode name_node(TSNode n) {
    return AstNode{NodeKind::Name, span_of(n), text_of(n), {}};
  }

  // One Name per import binding: payload = bound alias, single child Name =
  // fully qualified path. A plain `import a.b.c` binds only the root name.
  // The synthesized target mentions segments from several tokens, so both
  // nodes span the whole statement to keep child spans nested.
  AstNode binding(std::string alias, const Span& stmt_span,
                  std::string target) {
    AstNode b{NodeKind::Name, stmt_span, std::move(alias), {}};
    b.children.push_back(AstNode{NodeKind::Name, stmt_span, std::move(target),
                                 {}});
    return b;
  }

  static std::string root_segment(const std::string& dotted) {
    auto dot = dotted.find('.');
    return dot == std::string::npos ? dotted : dotted.substr(0, dot);
  }

  AstNode lift_import(TSNode n) {
    AstNode node{NodeKind::Import, span_of(n), {}, {}};
    uint32_t count = ts_node_named_child_count(n);
    for (uint32_t i = 0; i < count; ++i) {
      TSNode c = ts_node_named_child(n, i);
      if (type_of(c) == "dotted_name") {
        std::string root = root_segment(text_of(c));
        node.children.push_back(binding(root, node.span, root));
      } else if (type_of(c) == "aliased_import") {
        TSNode name = ts_node_child_by_field_name(c, "name", 4);
        TSNode alias = ts_node_child_by_field_name(c, "alias", 5);
        node.children.push_back(
            binding(text_of(alias), node.span, text_of(name)));
      }
    }
    return node;
  }

  AstNode lift_import_from(TSNode n) {
    AstNode node{NodeKind::ImportFrom, span_of(n), {}, {}};
    TSNode module = ts_node_child_by_field_name(n, "module_name", 11);
    std::string module_path;
    if (!ts_node_is_null(module)) {
      if (type_of(module) == "relative_import") {
        // `from .pkg import x` contributes pkg.x; bare `from . import x`
        // has no module path to prepend.
        uint32_t mc = ts_node_named_child_count(module);
        for (uint32_t i = 0; i < mc; ++i) {
          TSNode mchild = ts_node_named_child(module, i);
          if (type_of(mchild) == "dotted_name") module_path = text_of(mchild);
        }
      } else {
        module_path = text_of(module);
      }
    }
    node.name_payload = module_path;
    uint32_t count = ts_node_named_child_count(n);
    for (uint32_t i = 0; i < count; ++i) {
      TSNode c = ts_node_named_child(n, i);
      if (type_of(c) == "dotted_name" && !ts_node_eq(c, module)) {
        std::string name = text_of(c);
        std::string target =
            module_path.empty() ? name : module_path + "." + name;
        node.children.push_back(binding(name, node.span, target));
      } else if (type_of(c) == "aliased_import") {
        TSNode name = ts_node_child_by_field_name(c, "name", 4);
        TSNode alias = ts_node_child_by_field_name(c, "alias", 5);
        std::string target = module_path.empty()
                                 ? text_of(name)
                                 : module_path + "." + text_of(name);
        node.children.push_back(
            binding(text_of(alias), node.span, target));
      }
      // wildcard_import contributes no bindings
    }
    return node;
  }

  AstNode lift_if_chain(TSNode cond, TSNode consequence,
                        const std::vector<TSNode>& alternatives, size_t next,
                        Span whole, bool in_try) {
    AstNode node{NodeKind::If, whole, {}, {}};
    node.children.push_back(lift(cond, in_try));
    node.children.push_back(other(consequence, in_try));
    if (next < alternatives.size()) {
      TSNode alt = alternatives[next];
      if (type_of(alt) == "elif_clause") {
        TSNode econd = ts_node_child_by_field_name(alt, "condition", 9);
        TSNode econs = ts_node_child_by_field_name(alt, "consequence", 11);
        AstNode wrapper{NodeKind::Other, span_of(alt), {}, {}};
        wrapper.children.push_back(lift_if_chain(
            econd, econs, alternatives, next + 1, span_of(alt), in_try));
        node.children.push_back(std::move(wrapper));
      } else {  // else_clause
        TSNode body = ts_node_child_by_field_name(alt, "body", 4);
        node.children.push_back(other(body, in_try));
      }
    }
    return node;
  }

  AstNode lift(TSNode n, bool in_try) {
    std::string_view type = type_of(n);

    if (type == "module") {
      AstNode mod{NodeKind::Module, span_of(n), {}, {}};
      lift_children_into(n, mod, in_try);
      return mod;
    }
    if (type == "import_statement") return lift_import(n);
    if (type == "import_from_statement") return lift_import_from(n);
    if (type == "future_import_statement") {
      return AstNode{NodeKind::Other, span_of(n), {}, {}};
    }
    if (type == "expression_statement") {
      // Hoist the single wrapped expression; multi-expression statements
      // (`a; b` style) stay wrapped.
      uint32_t count = ts_node_named_child_count(n);
      if (count == 1) return lift(ts_node_named_child(n, 0), in_try);
      return other(n, in_try);
    }
    if (type == "assignment") {
      TSNode left = ts_node_child_by_field_name(n, "left", 4);
      TSNode right = ts_node_child_by_field_name(n, "right", 5);
      if (ts_node_is_null(right)) return other(n, in_try);  // bare annotation
      AstNode node{in_try ? NodeKind::Other : NodeKind::Assign, span_of(n),
                   {}, {}};
      node.children.push_back(lift(left, in_try));
      node.children.push_back(lift(right, in_try));
      return node;
    }
    if (type == "call") {
      TSNode fn = ts_node_child_by_field_name(n, "function", 8);
      TSNode args = ts_node_child_by_field_name(n, "arguments", 9);
      AstNode node{NodeKind::Call, span_of(n), {}, {}};
      node.children.push_back(lift(fn, in_try));
      if (!ts_node_is_null(args)) lift_children_into(args, node, in_try);
      return node;
    }
    if (type == "attribute") {
      TSNode object = ts_node_child_by_field_name(n, "object", 6);
      TSNode attr = ts_node_child_by_field_name(n, "attribute", 9);
      AstNode node{NodeKind::Attribute, span_of(n), text_of(attr), {}};
      node.children.push_back(lift(object, in_try));
      return node;
    }
    if (type == "identifier") return name_node(n);
    if (type == "if_statement") {
      TSNode cond = ts_node_child_by_field_name(n, "condition", 9);
      TSNode consequence = ts_node_child_by_field_name(n, "consequence", 11);
      std::vector<TSNode> alternatives;
      uint32_t count = ts_node_child_count(n);
      for (uint32_t i = 0; i < count; ++i) {
        const char* field = ts_node_field_name_for_child(n, i);
        if (field && strcmp(field, "alternative") == 0) {
          alternatives.push_back(ts_node_child(n, i));
        }
      }
      return lift_if_chain(cond, consequence, alternatives, 0, span_of(n),
                           in_try);
    }
    if (type == "for_statement") {
      TSNode left = ts_node_child_by_field_name(n, "left", 4);
      TSNode right = ts_node_child_by_field_name(n, "right", 5);
      TSNode body = ts_node_child_by_field_name(n, "body", 4);
      AstNode node{NodeKind::For, span_of(n), {}, {}};
      node.children.push_back(lift(left, in_try));
      node.children.push_back(lift(right, in_try));
      node.children.push_back(other(body, in_try));
      TSNode alt = ts_node_child_by_field_name(n, "alternative", 11);
      if (!ts_node_is_null(alt)) {
        TSNode else_body = ts_node_child_by_field_name(alt, "body", 4);
        node.children.push_back(other(else_body, in_try));
      }
      return node;
    }
    if (type == "while_statement") {
      TSNode cond = ts_node_child_by_field_name(n, "condition", 9);
      TSNode body = ts_node_child_by_field_name(n, "body", 4);
      AstNode node{NodeKind::While, span_of(n), {}, {}};
      node.children.push_back(lift(cond, in_try));
      node.children.push_back(other(body, in_try));
      TSNode alt = ts_node_child_by_field_name(n, "alternative", 11);
      if (!ts_node_is_null(alt)) {
        TSNode else_body = ts_node_child_by_field_name(alt, "body", 4);
        node.children.push_back(other(else_body, in_try));
      }
      return node;
    }
    if (type == "function_definition") {
      TSNode name = ts_node_child_by_field_name(n, "name", 4);
      TSNode params = ts_node_child_by_field_name(n, "parameters", 10);
      TSNode body = ts_node_child_by_field_name(n, "body", 4);
      AstNode node{NodeKind::FunctionDef, span_of(n), text_of(name), {}};
      // Parameter defaults evaluate in the enclosing scope; the body is a
      // fresh scope, so assignment demotion stops here.
      node.children.push_back(ts_node_is_null(params)
                                  ? AstNode{NodeKind::Other, span_of(name),
                                            {}, {}}
                                  : other(params, in_try));
      node.children.push_back(other(body, /*in_try=*/false));
      return node;
    }
    if (type == "class_definition") {
      TSNode name = ts_node_child_by_field_name(n, "name", 4);
      TSNode supers = ts_node_child_by_field_name(n, "superclasses", 12);
      TSNode body = ts_node_child_by_field_name(n, "body", 4);
      AstNode node{NodeKind::ClassDef, span_of(n), text_of(name), {}};
      node.children.push_back(ts_node_is_null(supers)
                                  ? AstNode{NodeKind::Other, span_of(name),
                                            {}, {}}
                                  : other(supers, in_try));
      node.children.push_back(other(body, /*in_try=*/false));
      return node;
    }
    if (type == "with_statement") {
      // Other wrapping [WithItem..., body-block]; the graph builder treats
      // this shape as a scoped block.
      AstNode node{NodeKind::Other, span_of(n), {}, {}};
      uint32_t count = ts_node_named_child_count(n);
      for (uint32_t i = 0; i < count; ++i) {
        TSNode c = ts_node_named_child(n, i);
        if (type_of(c) == "with_clause") {
          uint32_t items = ts_node_named_child_count(c);
          for (uint32_t j = 0; j < items; ++j) {
            TSNode item = ts_node_named_child(c, j);
            if (type_of(item) != "with_item") continue;
            node.children.push_back(lift_with_item(item, in_try));
          }
        }
      }
      TSNode body = ts_node_child_by_field_name(n, "body", 4);
      if (!ts_node_is_null(body)) node.children.push_back(other(body, in_try));
      return node;
    }
    if (type == "try_statement") {
      AstNode node{NodeKind::Other, span_of(n), {}, {}};
      lift_children_into(n, node, /*in_try=*/true);
      return node;
    }
    // Everything else: comparison/binary/literals/return/lambda/
    // comprehensions/ERROR recovery... traversed, no structured kind.
    return other(n, in_try);
  }

  AstNode lift_with_item(TSNode item, bool in_try) {
    TSNode value = ts_node_child_by_field_name(item, "value", 5);
    AstNode node{in_try ? NodeKind::Other : NodeKind::WithItem, span_of(item),
                 {}, {}};
    if (!ts_node_is_null(value) && type_of(value) == "as_pattern") {
      TSNode expr = ts_node_named_child(value, 0);
      TSNode alias = ts_node_child_by_field_name(value, "alias", 5);
      node.children.push_back(lift(expr, in_try));
      if (!ts_node_is_null(alias)) {
        TSNode target = ts_node_named_child_count(alias) > 0
                            ? ts_node_named_child(alias, 0)
                            : alias;
        node.children.push_back(lift(target, in_try));
      }
    } else if (!ts_node_is_null(value)) {
      node.children.push_back(lift(value, in_try));
    }
    return node;
  }

  const std::string& text_;
};

AstNode parse_impl(const std::string& text, const std::string& path,
                   bool strict) {
  thread_local Parser parser;
  Tree tree(ts_parser_parse_string(parser.parser, nullptr, text.data(),
                                   static_cast<uint32_t>(text.size())));
  TSNode root = ts_tree_root_node(tree.tree);
  if (strict && ts_node_has_error(root)) {
    int line = 1;
    first_error_line(root, &line);
    throw SyntaxError(path, line);
  }
  Lifter lifter(text);
  return lifter.lift_module(root);
}

}  // namespace

const char* to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Module: return "Module";
    case NodeKind::Import: return "Import";
    case NodeKind::ImportFrom: return "ImportFrom";
    case NodeKind::Assign: return "Assign";
    case NodeKind::WithItem: return "WithItem";
    case NodeKind::Call: return "Call";
    case NodeKind::Attribute: return "Attribute";
    case NodeKind::Name: return "Name";
    case NodeKind::If: return "If";
    case NodeKind::For: return "For";
    case NodeKind::While: return "While";
    case NodeKind::FunctionDef: return "FunctionDef";
    case NodeKind::ClassDef: return "ClassDef";
    case NodeKind::Other: return "Other";
  }
  return "Other";
}

AstNode parse_module(const SourceModule& source) {
  return parse_impl(source.text, source.path, /*strict=*/true);
}

AstNode parse_prefix(const std::string& text) {
  return parse_impl(text, "<prefix>", /*strict=*/false);
}

std::optional<std::string> dotted_path(const AstNode& node) {
  if (node.kind == NodeKind::Name) return node.name_payload;
  if (node.kind == NodeKind::Attribute && node.children.size() == 1) {
    auto base = dotted_path(node.children[0]);
    if (!base) return std::nullopt;
    return *base + "." + node.name_payload;
  }
  return std::nullopt;
}

std::string grammar_version() {
  return "tree-sitter-python 0.25.0 (abi " +
         std::to_string(ts_language_abi_version(tree_sitter_python())) + ")";
}

}  // namespace apirec::pyast
