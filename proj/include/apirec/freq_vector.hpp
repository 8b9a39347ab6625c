// Frequency vectors over call features. Own-call and context-call features
// live in disjoint namespaces: Own("close") and Ctx("close") are different
// features even though the method name matches.
#pragma once

#include <map>
#include <string>

namespace apirec::bmo {

enum class FeatureKind { OwnCall, ContextCall };

struct Feature {
  FeatureKind kind;
  std::string name;

  auto operator<=>(const Feature&) const = default;
};

struct FrequencyVector {
  // method name -> count; entries are always positive, absent means zero.
  std::map<std::string, int> own;
  std::map<std::string, int> ctx;

  bool operator==(const FrequencyVector&) const = default;

  int get(const Feature& f) const {
    const auto& m = f.kind == FeatureKind::OwnCall ? own : ctx;
    auto it = m.find(f.name);
    return it == m.end() ? 0 : it->second;
  }

  void add(const Feature& f, int count) {
    if (count <= 0) return;
    auto& m = f.kind == FeatureKind::OwnCall ? own : ctx;
    m[f.name] += count;
  }

  bool empty() const { return own.empty() && ctx.empty(); }
};

}  // namespace apirec::bmo
