// Program graph of object assignment/call/death events with control-flow
// split/merge edges, plus reaching-definitions dataflow over it.
//
// The graph is built per scope (module top level, each function body, each
// class body). Nodes exist only for events on tracked library objects;
// branching and looping show up purely in the edge structure: arms of a
// construct get distinct successors of the pre-split frontier and re-merge
// at the construct's exit. Loop bodies are modeled as body-taken /
// body-skipped splits; no back edge is materialized.
#pragma once

#include <compare>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "apirec/imports.hpp"
#include "apirec/pyast.hpp"
#include "apirec/span.hpp"

namespace apirec::flowgraph {

enum class EventKind { Assign, MethodCall, Death };

struct GraphEvent {
  EventKind kind;
  std::string object;
  std::string type_key;     // Assign: fully qualified creator path
  std::string method;       // MethodCall
  std::string kill_object;  // Death: whose definitions this node kills
};

struct GraphNode {
  int id = 0;  // 1-based, equal to position in ProgramGraph::nodes
  GraphEvent event;
  std::set<int> entries;
  std::set<int> exits;         // symmetric with entries
  std::set<int> bypass_exits;  // subset of exits: construct-skip edges,
                               // omitted from the dumped exit column
  Span span;
  // MethodCall: byte offset where the receiver expression ends; the `.`
  // token is the next non-space byte.
  uint32_t recv_end_byte = 0;
};

struct ProgramGraph {
  std::string scope_name;
  std::vector<GraphNode> nodes;
  // Nodes whose exits dangle at the end of the scope; the observable state
  // at a truncated scope's end is the union of their post-states.
  std::set<int> end_frontier;

  const GraphNode& node(int id) const { return nodes[static_cast<size_t>(id) - 1]; }
};

struct BuildOptions {
  // Builtin constructors tracked without an import (minimum: open).
  std::set<std::string> builtin_creators = {"open"};
  // Completion prefixes end mid-scope; the query path disables the
  // end-of-scope death group so definitions stay observable at the cursor.
  bool scope_end_deaths = true;
  // A with block ending at or past this byte is unterminated in a truncated
  // buffer; its exit deaths are not emitted. The query path sets it to the
  // prefix end.
  uint32_t open_block_min_byte = UINT32_MAX;
};

// `scope_body` is a Module node or a definition's body block; its children
// are processed as the scope's statements. Nested function/class bodies are
// separate scopes and contribute no events here.
ProgramGraph build_graph(const pyast::AstNode& scope_body,
                         const extractor::ImportTable& imports,
                         const std::vector<extractor::PatchedPath>& patches = {},
                         const BuildOptions& options = {});

struct ScopeRef {
  std::string name;  // "<module>", "f", "Cls.method", ...
  const pyast::AstNode* body;
};

// The module scope plus every function/class body, in source order.
std::vector<ScopeRef> collect_scopes(const pyast::AstNode& module);

// One reaching definition: object was bound with type_key at def_node.
struct Definition {
  std::string object;
  std::string type_key;
  int def_node = 0;

  auto operator<=>(const Definition&) const = default;
};

using DefSet = std::set<Definition>;

struct ReachingDefs {
  // Post-state per node: defs(S) = union over entries of defs(entry),
  // minus killed(S), plus generated(S).
  std::vector<DefSet> out;

  const DefSet& at(int id) const { return out[static_cast<size_t>(id) - 1]; }

  // Keys of `object`'s definitions in `defs`.
  static std::set<std::string> keys_of(const DefSet& defs,
                                       const std::string& object);
};

ReachingDefs reaching_definitions(const ProgramGraph& graph);

// Union of post-states over the given entry nodes (the pre-state of a node,
// or the state at a truncated scope's end).
DefSet defs_at_frontier(const ReachingDefs& defs, const std::set<int>& ids);

// Tab-separated node table: No, Node, Entry Pts, Exit Pts, Reaching Defs.
// Sets of node ids print bare when singleton and as {a,b} otherwise; the
// defs column lists object:key pairs most recent definition first; empty
// cells stay empty. Bypass edges are hidden from the exit column only.
std::string dump_node_table(const ProgramGraph& graph,
                            const ReachingDefs& defs);

}  // namespace apirec::flowgraph
