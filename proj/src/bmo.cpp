#include "apirec/bmo.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>

#include "apirec/errors.hpp"

namespace apirec::bmo {

void UsageIndex::add(std::string type_key, TrainingVector v) {
  by_type_[std::move(type_key)].push_back(std::move(v));
}

const std::vector<TrainingVector>* UsageIndex::find(
    const std::string& type_key) const {
  auto it = by_type_.find(type_key);
  return it == by_type_.end() ? nullptr : &it->second;
}

std::set<std::string> UsageIndex::vocabulary(
    const std::string& type_key) const {
  std::set<std::string> vocab;
  if (const auto* vectors = find(type_key)) {
    for (const TrainingVector& v : *vectors) {
      for (const auto& [method, count] : v.vec.own) vocab.insert(method);
    }
  }
  return vocab;
}

size_t UsageIndex::vector_count() const {
  size_t n = 0;
  for (const auto& [key, vectors] : by_type_) n += vectors.size();
  return n;
}

FrequencyVector encode(const extractor::ObjectUsage& usage) {
  FrequencyVector vec;
  for (const auto& [method, count] : usage.own_calls) {
    if (count > 0) vec.own[method] = count;
  }
  for (const auto& [method, count] : usage.context_calls) {
    if (count > 0) vec.ctx[method] = count;
  }
  return vec;
}

namespace {

int restricted_sum(const std::map<std::string, int>& query,
                   const std::map<std::string, int>& candidate) {
  int sum = 0;
  for (const auto& [name, count] : query) {
    auto it = candidate.find(name);
    int other = it == candidate.end() ? 0 : it->second;
    sum += std::abs(count - other);
  }
  return sum;
}

}  // namespace

int manhattan_distance(const FrequencyVector& query,
                       const FrequencyVector& candidate) {
  return restricted_sum(query.own, candidate.own) +
         restricted_sum(query.ctx, candidate.ctx);
}

std::vector<size_t> nearest(const FrequencyVector& query,
                            const std::vector<TrainingVector>& candidates,
                            DistanceFn distance) {
  std::vector<size_t> best;
  int best_distance = std::numeric_limits<int>::max();
  for (size_t i = 0; i < candidates.size(); ++i) {
    int d = distance(query, candidates[i].vec);
    if (d < best_distance) {
      best_distance = d;
      best.clear();
    }
    if (d == best_distance) best.push_back(i);
  }
  return best;
}

std::vector<size_t> nearest(const FrequencyVector& query,
                            const UsageIndex& index,
                            const std::string& type_key, DistanceFn distance) {
  const std::vector<TrainingVector>* candidates = index.find(type_key);
  if (!candidates || candidates->empty()) throw UnknownTypeKey(type_key);
  return nearest(query, *candidates, distance);
}

std::vector<Recommendation> recommend(const extractor::QueryContext& query,
                                      const UsageIndex& index, int limit,
                                      DistanceFn distance) {
  std::map<std::string, int> merged;
  bool any_key_known = false;
  for (const std::string& key : query.type_keys) {
    const std::vector<TrainingVector>* candidates = index.find(key);
    if (!candidates || candidates->empty()) continue;
    any_key_known = true;
    std::map<std::string, int> votes;
    for (size_t i : nearest(query.vector, *candidates, distance)) {
      for (const auto& [method, count] : (*candidates)[i].vec.own) {
        votes[method] += count;
      }
    }
    for (const auto& [method, vote] : votes) {
      auto already = query.vector.own.find(method);
      int score =
          vote - (already == query.vector.own.end() ? 0 : already->second);
      if (score > 0) merged[method] += score;
    }
  }
  if (!any_key_known) {
    throw NoRecommendation("no training data for any reaching type key");
  }
  if (merged.empty()) {
    throw NoRecommendation("every candidate method scored out");
  }

  std::vector<Recommendation> out;
  out.reserve(merged.size());
  for (const auto& [method, score] : merged) {
    out.push_back(Recommendation{method, score, 0});
  }
  std::sort(out.begin(), out.end(),
            [](const Recommendation& a, const Recommendation& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.method < b.method;
            });
  if (limit >= 0 && out.size() > static_cast<size_t>(limit)) {
    out.resize(static_cast<size_t>(limit));
  }
  for (size_t i = 0; i < out.size(); ++i) {
    out[i].rank = static_cast<int>(i) + 1;
  }
  return out;
}

UsageIndex train(const std::vector<extractor::ObjectUsage>& usages) {
  UsageIndex index;
  for (const extractor::ObjectUsage& usage : usages) {
    if (usage.own_calls.empty()) continue;
    TrainingVector v;
    v.vec = encode(usage);
    v.prov = Provenance{usage.project_id, usage.path, usage.object,
                        usage.span};
    index.add(usage.type_key, std::move(v));
  }
  return index;
}

}  // namespace apirec::bmo
