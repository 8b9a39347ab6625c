// Import alias resolution and monkey-patch screening.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "apirec/pyast.hpp"

namespace apirec::extractor {

// alias -> fully qualified dotted path. `import numpy as np` maps np to
// numpy; `from collections import OrderedDict` maps OrderedDict to
// collections.OrderedDict. Later imports shadow earlier ones.
class ImportTable {
 public:
  void bind(std::string alias, std::string target) {
    aliases_[std::move(alias)] = std::move(target);
  }

  bool has(const std::string& alias) const { return aliases_.count(alias); }

  // Resolves a dotted path by rewriting its root through the table:
  // np.linalg.norm -> numpy.linalg.norm. Returns nullopt when the root is
  // not an imported name.
  std::optional<std::string> resolve(const std::string& dotted) const;

  const std::map<std::string, std::string>& bindings() const {
    return aliases_;
  }

 private:
  std::map<std::string, std::string> aliases_;
};

// Walks every Import/ImportFrom in the module (any scope; source order, so
// later bindings win).
ImportTable resolve_imports(const pyast::AstNode& module);

// True when the assignment target is a dotted attribute path whose root is
// an imported module: the statement rebinds a library attribute and must
// not be tracked.
bool is_monkey_patch(const pyast::AstNode& assign_target,
                     const ImportTable& imports);

// A detected library-attribute rebind; creations through `path` (or any
// deeper path) are excluded from tracking past `byte_offset`.
struct PatchedPath {
  uint32_t byte_offset;
  std::string path;
};

std::vector<PatchedPath> collect_patches(const pyast::AstNode& module,
                                         const ImportTable& imports);

// True when `path` equals or extends (segment-wise) a path patched before
// `at_byte`.
bool is_patched(const std::vector<PatchedPath>& patches,
                const std::string& path, uint32_t at_byte);

}  // namespace apirec::extractor
