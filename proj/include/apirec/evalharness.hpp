// Automated evaluation: completion queries generated from held-out
// projects, k-fold cross-validation with project-level fold assignment,
// MRR and Recall per library.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "apirec/corpus.hpp"
#include "apirec/extractor.hpp"
#include "apirec/flowgraph.hpp"

namespace apirec::evalharness {

// One completion query replayed from real code: the buffer truncated just
// after the receiver's `.`, paired with the method the author actually
// wrote (the singleton relevant set).
struct EvalQuery {
  std::string prefix;
  std::string expected_method;
  std::string library;  // first dotted segment of the receiver's type key
  std::string project_id;
  std::string path;
};

// One query per method-call node on a tracked object, in source order.
// Files that fail to parse contribute no queries.
std::vector<EvalQuery> generate_queries(
    const std::vector<pyast::SourceModule>& modules,
    const flowgraph::BuildOptions& options = {});

struct FoldAssignment {
  int k = 0;
  std::map<std::string, int> fold_of;  // project_id -> fold in [0, k)
};

// Seeded shuffle then round-robin: fold sizes differ by at most one and all
// queries of one project share a fold. Throws TooFewProjects when the
// project list cannot fill k folds.
FoldAssignment assign_folds(const std::vector<std::string>& project_ids,
                            int k, uint64_t seed);

// Mean of reciprocal ranks (1/rank per hit, 0 per miss). Throws
// EmptyQuerySet.
double mrr(const std::vector<double>& reciprocal_ranks);

// Fraction of queries whose expected method appeared among the returned
// candidates; with singleton relevant sets this is hit-rate at the
// recommendation cap. Throws EmptyQuerySet.
double recall(const std::vector<bool>& hits);

struct MetricRow {
  std::string library;
  size_t query_count = 0;
  double mrr = 0.0;
  double recall = 0.0;
};

struct FoldRow {
  int fold = 0;
  size_t query_count = 0;
  double mrr = 0.0;
  double recall = 0.0;
};

struct QueryOutcome {
  std::string project_id;
  std::string path;
  std::string library;
  std::string expected_method;
  int fold = 0;
  int rank = 0;  // 0 = miss (not returned, unresolved, or no answer)
};

struct EvalReport {
  uint64_t seed = 0;
  int folds = 0;
  std::string corpus_fingerprint;
  MetricRow overall;              // library field reads "overall"
  std::vector<MetricRow> per_library;
  std::vector<FoldRow> per_fold;
  std::vector<QueryOutcome> details;  // not serialized
};

// Trains on k-1 folds, replays every held-out query through the full query
// pipeline (prefix re-parse included) and aggregates. Queries whose
// receiver cannot be resolved count as misses, as do libraries absent from
// the training folds. `libraries` filters queries by library when
// non-empty.
EvalReport run_cv(const corpus::IngestReport& corpus, int k, uint64_t seed,
                  const std::vector<std::string>& libraries = {},
                  const flowgraph::BuildOptions& options = {});

// Deterministic serializations; two runs with equal seed and corpus
// fingerprint produce byte-identical output.
std::string report_to_json(const EvalReport& report);
std::string report_to_table(const EvalReport& report);

}  // namespace apirec::evalharness
