#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "apirec/bmo.hpp"
#include "apirec/errors.hpp"
#include "apirec/extractor.hpp"
#include "apirec/pyast.hpp"

using namespace apirec;
using bmo::FrequencyVector;
using bmo::Recommendation;
using bmo::TrainingVector;
using bmo::UsageIndex;
using extractor::ObjectUsage;
using extractor::QueryContext;

namespace {

ObjectUsage usage(std::string key, std::map<std::string, int> own,
                  std::map<std::string, int> ctx = {}) {
  ObjectUsage u;
  u.type_key = std::move(key);
  u.own_calls = std::move(own);
  u.context_calls = std::move(ctx);
  return u;
}

TrainingVector tv(std::map<std::string, int> own,
                  std::map<std::string, int> ctx = {}) {
  TrainingVector v;
  v.vec.own = std::move(own);
  v.vec.ctx = std::move(ctx);
  return v;
}

QueryContext query(std::set<std::string> keys, std::map<std::string, int> own,
                   std::map<std::string, int> ctx = {}) {
  QueryContext q;
  q.object = "obj";
  q.type_keys = std::move(keys);
  q.vector.own = std::move(own);
  q.vector.ctx = std::move(ctx);
  return q;
}

std::vector<std::string> names(const std::vector<Recommendation>& recs) {
  std::vector<std::string> out;
  for (const Recommendation& r : recs) out.push_back(r.method);
  return out;
}

}  // namespace

TEST_CASE("encode keeps counts and separates own from context features") {
  FrequencyVector v = bmo::encode(
      usage("open", {{"write", 2}, {"close", 1}},
            {{"readlines", 1}, {"close", 1}}));
  CHECK(v.own == std::map<std::string, int>{{"write", 2}, {"close", 1}});
  CHECK(v.ctx == std::map<std::string, int>{{"readlines", 1}, {"close", 1}});
  CHECK(v.get({bmo::FeatureKind::OwnCall, "close"}) == 1);
  CHECK(v.get({bmo::FeatureKind::ContextCall, "close"}) == 1);
  CHECK(v.get({bmo::FeatureKind::OwnCall, "readlines"}) == 0);

  FrequencyVector own_only = bmo::encode(usage("open", {{"read", 1}}));
  CHECK(own_only.ctx.empty());
  CHECK(own_only.own == std::map<std::string, int>{{"read", 1}});
}

TEST_CASE("distance is restricted to query features") {
  FrequencyVector a, b;
  a.own = {{"readlines", 1}};
  CHECK(bmo::manhattan_distance(a, a) == 0);

  b.own = {{"readlines", 1}, {"write", 2}, {"close", 1}};
  CHECK(bmo::manhattan_distance(a, b) == 0);  // candidate-only features ignored

  FrequencyVector q, c;
  q.own = {{"readlines", 2}};
  q.ctx = {{"write", 1}};
  c.own = {{"readlines", 1}};
  CHECK(bmo::manhattan_distance(q, c) == 2);  // |2-1| + |1-0|
}

TEST_CASE("distance axioms under query restriction") {
  std::mt19937 rng(11);
  const char* vocab[] = {"a", "b", "c", "d", "e"};
  auto random_vector = [&]() {
    FrequencyVector v;
    for (const char* m : vocab) {
      if (rng() % 2) v.own[m] = 1 + static_cast<int>(rng() % 4);
      if (rng() % 3 == 0) v.ctx[m] = 1 + static_cast<int>(rng() % 3);
    }
    return v;
  };
  for (int i = 0; i < 200; ++i) {
    FrequencyVector q = random_vector();
    FrequencyVector c = random_vector();
    CHECK(bmo::manhattan_distance(q, q) == 0);
    int d = bmo::manhattan_distance(q, c);
    CHECK(d >= 0);
    if (!q.own.empty()) {
      // Pushing a candidate count one step further from the query grows the
      // distance by exactly one.
      auto& [name, qcount] = *q.own.begin();
      int current = c.own.count(name) ? c.own[name] : 0;
      if (current >= qcount || current > 0) {
        FrequencyVector further = c;
        further.own[name] = current >= qcount ? current + 1 : current - 1;
        if (further.own[name] == 0) further.own.erase(name);
        CHECK(bmo::manhattan_distance(q, further) == d + 1);
      }
    }
  }
}

TEST_CASE("nearest returns all candidates at the minimum distance") {
  FrequencyVector q;
  q.own = {{"readlines", 1}};

  std::vector<TrainingVector> single{tv({{"write", 9}})};
  CHECK(bmo::nearest(q, single) == std::vector<size_t>{0});

  // Two equally near usages are both selected.
  std::vector<TrainingVector> tied{
      tv({{"readlines", 1}, {"readline", 3}, {"read", 2}, {"close", 1}}),
      tv({{"readlines", 1}, {"readline", 2}, {"read", 2}, {"close", 2}}),
      tv({{"write", 4}}),
  };
  CHECK(bmo::nearest(q, tied) == std::vector<size_t>{0, 1});

  std::vector<TrainingVector> strict{tv({{"readlines", 1}}),
                                     tv({{"readlines", 4}})};
  CHECK(bmo::nearest(q, strict) == std::vector<size_t>{0});
}

TEST_CASE("nearest against an index rejects unknown type keys") {
  UsageIndex empty;
  FrequencyVector q;
  CHECK_THROWS_AS(bmo::nearest(q, empty, "open"), UnknownTypeKey);
}

TEST_CASE("recommendation for a fresh reader ranks the follow-up methods") {
  // Two archetypal open objects tie as neighbors; their summed votes put
  // readline first, then read, then close.
  UsageIndex index = bmo::train({
      usage("open", {{"readlines", 1}, {"readline", 3}, {"read", 2}, {"close", 1}}),
      usage("open", {{"readlines", 1}, {"readline", 2}, {"read", 2}, {"close", 2}}),
      usage("open", {{"write", 5}, {"flush", 2}}),
  });
  auto recs = bmo::recommend(query({"open"}, {{"readlines", 1}}), index);
  REQUIRE(recs.size() >= 3);
  CHECK(recs[0].method == "readline");
  CHECK(recs[1].method == "read");
  CHECK(recs[2].method == "close");
  CHECK(recs[0].score == 5);
  CHECK(recs[0].rank == 1);
  CHECK(recs[2].rank == 3);
}

TEST_CASE("votes subtract what the query already called") {
  UsageIndex index = bmo::train({usage("open", {{"read", 3}, {"close", 3}})});
  auto recs = bmo::recommend(query({"open"}, {{"read", 1}}), index);
  REQUIRE(recs.size() == 2);
  CHECK(recs[0] == Recommendation{"close", 3, 1});
  CHECK(recs[1] == Recommendation{"read", 2, 2});
}

TEST_CASE("methods with non-positive scores are dropped") {
  UsageIndex index = bmo::train({usage("open", {{"read", 2}})});
  CHECK_THROWS_AS(bmo::recommend(query({"open"}, {{"read", 2}}), index),
                  NoRecommendation);
  // A second method keeps the answer alive while read is scored out.
  UsageIndex index2 =
      bmo::train({usage("open", {{"read", 2}, {"close", 1}})});
  auto recs = bmo::recommend(query({"open"}, {{"read", 2}}), index2);
  CHECK(names(recs) == std::vector<std::string>{"close"});
}

TEST_CASE("at most ten methods are recommended") {
  std::map<std::string, int> many;
  for (char c = 'a'; c < 'a' + 15; ++c) many[std::string(1, c)] = 1;
  UsageIndex index = bmo::train({usage("open", many)});
  auto recs = bmo::recommend(query({"open"}, {}), index);
  CHECK(recs.size() == 10);
  for (size_t i = 0; i < recs.size(); ++i) {
    CHECK(recs[i].rank == static_cast<int>(i) + 1);
  }
  CHECK(bmo::recommend(query({"open"}, {}), index, 3).size() == 3);
}

TEST_CASE("union queries merge per-key scores by sum") {
  UsageIndex index = bmo::train({
      usage("open", {{"x", 2}}),
      usage("os.path", {{"x", 1}, {"y", 3}}),
  });
  auto recs = bmo::recommend(query({"open", "os.path"}, {}), index);
  REQUIRE(recs.size() == 2);
  CHECK(recs[0] == Recommendation{"x", 3, 1});  // 2 + 1
  CHECK(recs[1] == Recommendation{"y", 3, 2});  // tie broken by name
}

TEST_CASE("unknown keys fall out of the union; all-unknown is an error") {
  UsageIndex index = bmo::train({usage("open", {{"read", 1}})});
  auto recs = bmo::recommend(query({"open", "socket.socket"}, {}), index);
  CHECK(names(recs) == std::vector<std::string>{"read"});
  CHECK_THROWS_AS(bmo::recommend(query({"socket.socket"}, {}), index),
                  NoRecommendation);
  CHECK_THROWS_AS(bmo::recommend(query({}, {}), index), NoRecommendation);
}

TEST_CASE("training groups vectors by type key and keeps provenance") {
  ObjectUsage with_prov = usage("open", {{"read", 1}});
  with_prov.project_id = "projX";
  with_prov.path = "a/b.py";
  UsageIndex index =
      bmo::train({with_prov, usage("open", {{"write", 1}}),
                  usage("re.compile", {{"match", 2}})});
  REQUIRE(index.find("open") != nullptr);
  CHECK(index.find("open")->size() == 2);
  CHECK(index.find("re.compile")->size() == 1);
  CHECK(index.find("json.loads") == nullptr);
  CHECK(index.vector_count() == 3);
  CHECK((*index.find("open"))[0].prov.project == "projX");
  CHECK(index.vocabulary("open") ==
        std::set<std::string>{"read", "write"});

  // Usages without own calls never enter the index.
  UsageIndex skipped = bmo::train({usage("open", {}, {{"write", 1}})});
  CHECK(skipped.empty());

  UsageIndex empty = bmo::train({});
  CHECK(empty.empty());
  FrequencyVector q;
  CHECK_THROWS_AS(bmo::nearest(q, empty, "open"), UnknownTypeKey);
}

TEST_CASE("a single training usage answers its own truncated query") {
  UsageIndex index = bmo::train({usage("open", {{"read", 2}, {"close", 1}})});
  auto recs = bmo::recommend(query({"open"}, {{"read", 2}}), index);
  CHECK(names(recs) == std::vector<std::string>{"close"});
}

TEST_CASE("ranking is deterministic") {
  std::mt19937 rng(23);
  const char* vocab[] = {"m0", "m1", "m2", "m3", "m4", "m5"};
  std::vector<ObjectUsage> usages;
  for (int i = 0; i < 40; ++i) {
    std::map<std::string, int> own;
    for (const char* m : vocab) {
      if (rng() % 2) own[m] = 1 + static_cast<int>(rng() % 3);
    }
    if (own.empty()) own["m0"] = 1;
    usages.push_back(usage("open", own));
  }
  UsageIndex index = bmo::train(usages);
  auto q = query({"open"}, {{"m1", 1}});
  auto first = bmo::recommend(q, index);
  for (int i = 0; i < 5; ++i) {
    auto again = bmo::recommend(q, index);
    CHECK(again == first);
  }
}

TEST_CASE("the distance is a pluggable point") {
  // A degenerate metric that sees every candidate as equally near turns
  // neighbor selection into the full candidate list.
  bmo::DistanceFn flat = [](const FrequencyVector&, const FrequencyVector&) {
    return 0;
  };
  std::vector<TrainingVector> candidates{tv({{"a", 1}}), tv({{"b", 5}}),
                                         tv({{"c", 2}})};
  FrequencyVector q;
  q.own = {{"a", 1}};
  CHECK(bmo::nearest(q, candidates, flat) ==
        std::vector<size_t>{0, 1, 2});
  CHECK(bmo::nearest(q, candidates) == std::vector<size_t>{0});

  UsageIndex index = bmo::train(
      {usage("open", {{"a", 1}}), usage("open", {{"b", 5}})});
  auto recs = bmo::recommend(query({"open"}, {}), index, 10, flat);
  CHECK(names(recs) == std::vector<std::string>{"b", "a"});
}

TEST_CASE("neighbor sets match an exhaustive scan on random instances") {
  std::mt19937 rng(31);
  const char* vocab[] = {"a", "b", "c", "d", "e", "f"};
  auto random_vec = [&](bool allow_empty) {
    FrequencyVector v;
    for (const char* m : vocab) {
      if (rng() % 3 == 0) v.own[m] = 1 + static_cast<int>(rng() % 4);
      if (rng() % 4 == 0) v.ctx[m] = 1 + static_cast<int>(rng() % 2);
    }
    if (!allow_empty && v.own.empty()) v.own["a"] = 1;
    return v;
  };
  // Oracle: feature-by-feature absolute differences over the query's
  // entries, then a full scan keeping every argmin.
  auto oracle_distance = [](const FrequencyVector& q,
                            const FrequencyVector& c) {
    int d = 0;
    for (const auto& [m, count] : q.own) {
      int other = c.own.count(m) ? c.own.at(m) : 0;
      d += count > other ? count - other : other - count;
    }
    for (const auto& [m, count] : q.ctx) {
      int other = c.ctx.count(m) ? c.ctx.at(m) : 0;
      d += count > other ? count - other : other - count;
    }
    return d;
  };
  for (int round = 0; round < 300; ++round) {
    std::vector<TrainingVector> candidates;
    size_t n = 1 + rng() % 20;
    for (size_t i = 0; i < n; ++i) {
      TrainingVector v;
      v.vec = random_vec(false);
      candidates.push_back(std::move(v));
    }
    FrequencyVector q = random_vec(true);
    int best = std::numeric_limits<int>::max();
    for (const TrainingVector& c : candidates) {
      best = std::min(best, oracle_distance(q, c.vec));
    }
    std::vector<size_t> expected;
    for (size_t i = 0; i < candidates.size(); ++i) {
      if (oracle_distance(q, candidates[i].vec) == best) expected.push_back(i);
    }
    CHECK(bmo::nearest(q, candidates) == expected);
  }
}
