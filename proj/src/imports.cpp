#include "apirec/imports.hpp"

namespace apirec::extractor {

using pyast::AstNode;
using pyast::NodeKind;

std::optional<std::string> ImportTable::resolve(
    const std::string& dotted) const {
  auto dot = dotted.find('.');
  std::string root =
      dot == std::string::npos ? dotted : dotted.substr(0, dot);
  auto it = aliases_.find(root);
  if (it == aliases_.end()) return std::nullopt;
  if (dot == std::string::npos) return it->second;
  return it->second + dotted.substr(dot);
}

namespace {

void walk_imports(const AstNode& node, ImportTable& table) {
  if (node.kind == NodeKind::Import || node.kind == NodeKind::ImportFrom) {
    for (const AstNode& b : node.children) {
      if (b.kind == NodeKind::Name && b.children.size() == 1) {
        table.bind(b.name_payload, b.children[0].name_payload);
      }
    }
    return;
  }
  for (const AstNode& c : node.children) walk_imports(c, table);
}

void walk_patches(const AstNode& node, const ImportTable& imports,
                  std::vector<PatchedPath>& out) {
  if (node.kind == NodeKind::Assign && node.children.size() == 2) {
    const AstNode& target = node.children[0];
    if (is_monkey_patch(target, imports)) {
      out.push_back(PatchedPath{node.span.start_byte,
                                *imports.resolve(*pyast::dotted_path(target))});
    }
  }
  for (const AstNode& c : node.children) walk_patches(c, imports, out);
}

}  // namespace

ImportTable resolve_imports(const AstNode& module) {
  ImportTable table;
  walk_imports(module, table);
  return table;
}

bool is_monkey_patch(const AstNode& assign_target, const ImportTable& imports) {
  // Plain names rebind locals, never library attributes.
  if (assign_target.kind != NodeKind::Attribute) return false;
  auto path = pyast::dotted_path(assign_target);
  if (!path) return false;
  return imports.resolve(*path).has_value();
}

std::vector<PatchedPath> collect_patches(const AstNode& module,
                                         const ImportTable& imports) {
  std::vector<PatchedPath> patches;
  walk_patches(module, imports, patches);
  return patches;
}

bool is_patched(const std::vector<PatchedPath>& patches,
                const std::string& path, uint32_t at_byte) {
  for (const PatchedPath& p : patches) {
    if (p.byte_offset >= at_byte) continue;
    if (path == p.path) return true;
    if (path.size() > p.path.size() && path.compare(0, p.path.size(), p.path) == 0 &&
        path[p.path.size()] == '.') {
      return true;
    }
  }
  return false;
}

}  // namespace apirec::extractor
