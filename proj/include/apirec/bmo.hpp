// Best-matching-object ranking: encode usages as frequency vectors, pick
// the minimum-distance training vectors per type key, and vote methods by
// summed neighbor frequency minus what the query already called.
#pragma once

#include <set>
#include <string>
#include <vector>

#include "apirec/extractor.hpp"
#include "apirec/freq_vector.hpp"
#include "apirec/span.hpp"

namespace apirec::bmo {

struct Provenance {
  std::string project;
  std::string path;
  std::string object;
  Span span;

  bool operator==(const Provenance&) const = default;
};

struct TrainingVector {
  FrequencyVector vec;
  Provenance prov;
};

// Immutable after train(); reads are safe from any number of threads.
class UsageIndex {
 public:
  void add(std::string type_key, TrainingVector v);

  // nullptr when the key has no training data.
  const std::vector<TrainingVector>* find(const std::string& type_key) const;

  const std::map<std::string, std::vector<TrainingVector>>& types() const {
    return by_type_;
  }

  // Every own-call method name seen for the key.
  std::set<std::string> vocabulary(const std::string& type_key) const;

  size_t vector_count() const;
  bool empty() const { return by_type_.empty(); }

  std::string corpus_fingerprint;

 private:
  std::map<std::string, std::vector<TrainingVector>> by_type_;
};

struct Recommendation {
  std::string method;
  int score = 0;
  int rank = 0;  // 1-based

  bool operator==(const Recommendation&) const = default;
};

FrequencyVector encode(const extractor::ObjectUsage& usage);

// Sum of |query(f) - candidate(f)| over exactly the features present in the
// query; candidate-only features contribute nothing. Not symmetric.
int manhattan_distance(const FrequencyVector& query,
                       const FrequencyVector& candidate);

using DistanceFn = int (*)(const FrequencyVector&, const FrequencyVector&);

// Indices of every candidate at the global minimum distance (ties all
// included), in candidate order.
std::vector<size_t> nearest(const FrequencyVector& query,
                            const std::vector<TrainingVector>& candidates,
                            DistanceFn distance = manhattan_distance);

// Same, against one type key of the index. Throws UnknownTypeKey.
std::vector<size_t> nearest(const FrequencyVector& query,
                            const UsageIndex& index,
                            const std::string& type_key,
                            DistanceFn distance = manhattan_distance);

inline constexpr int kRecommendationLimit = 10;

// Per type key: vote own-call frequencies of the nearest neighbors, subtract
// the query's own frequency per method, drop non-positive scores. Scores
// merge across type keys by sum; ties order lexicographically. Throws
// NoRecommendation when every key is unknown or nothing scores positive.
std::vector<Recommendation> recommend(const extractor::QueryContext& query,
                                      const UsageIndex& index,
                                      int limit = kRecommendationLimit,
                                      DistanceFn distance = manhattan_distance);

// Groups encoded usages by type key, keeping input order. Usages without
// own calls carry no pattern and are skipped.
UsageIndex train(const std::vector<extractor::ObjectUsage>& usages);

}  // namespace apirec::bmo
