// Turns program graphs into training records (ObjectUsage) and completion
// prefixes into query contexts.
#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "apirec/flowgraph.hpp"
#include "apirec/freq_vector.hpp"
#include "apirec/imports.hpp"
#include "apirec/pyast.hpp"

namespace apirec::extractor {

// One tracked object definition and the calls observed during its life.
// own_calls counts the object's method-call sites; each graph node counts
// once, so both branch arms contribute. context_calls counts the method
// calls of other tracked objects at program points the definition reaches;
// it never contains the object's own calls. When a definition's live region
// overlaps another definition of the same name (union types from
// branching), calls in the shared region show up under every reaching key.
struct ObjectUsage {
  std::string type_key;
  std::map<std::string, int> own_calls;
  std::map<std::string, int> context_calls;
  // provenance
  std::string project_id;
  std::string path;
  std::string object;
  Span span;  // of the creating assignment
};

// One ObjectUsage per Assign node whose definition sees at least one own
// call. Records are ordered by assignment node id.
std::vector<ObjectUsage> extract_usages(const flowgraph::ProgramGraph& graph,
                                        const flowgraph::ReachingDefs& defs);

// Full per-module pipeline: strict parse, import resolution, monkey-patch
// screening, one graph per scope, extraction. Throws SyntaxError; corpus
// callers catch it, record a diagnostic and move on.
std::vector<ObjectUsage> extract_module_usages(
    const pyast::SourceModule& source,
    const flowgraph::BuildOptions& options = {});

struct CorpusUsages {
  // Index-aligned with the input modules; unparseable files leave an empty
  // slot and a diagnostic.
  std::vector<std::vector<ObjectUsage>> per_module;
  std::vector<std::string> diagnostics;
};

// extract_module_usages over many files with a bounded worker pool. Results
// are merged by input position, so the output is identical to a sequential
// run.
CorpusUsages extract_many(const std::vector<pyast::SourceModule>& modules,
                          const flowgraph::BuildOptions& options = {});

// A completion query: the receiver identifier, its reaching type keys at
// the cursor, and the calls observed so far encoded as a frequency vector.
struct QueryContext {
  std::string object;
  std::set<std::string> type_keys;
  bmo::FrequencyVector vector;
};

// `line` is 1-based, `col` 0-based; the cursor must sit immediately after
// the `.` following a tracked receiver (a partial method prefix after the
// dot is allowed and discarded). The dangling receiver expression is cut
// and the rest of the buffer parsed tolerantly. Throws UnresolvedReceiver
// when no tracked definition of the receiver reaches the cursor.
QueryContext build_query(const pyast::SourceModule& source, int line, int col,
                         const flowgraph::BuildOptions& options = {});

// Same, with the cursor as a byte offset into source.text.
QueryContext build_query_at(const pyast::SourceModule& source,
                            size_t cursor_byte,
                            const flowgraph::BuildOptions& options = {});

// Line-delimited JSON record for --emit-usages.
std::string usage_to_json(const ObjectUsage& usage);

// 1-based line / 0-based column to byte offset. Throws IoError when the
// position lies outside the buffer.
size_t byte_offset(const std::string& text, int line, int col);

}  // namespace apirec::extractor
