#include "apirec/extractor.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <thread>

#include <nlohmann/json.hpp>

#include "apirec/errors.hpp"

namespace apirec::extractor {

using flowgraph::Definition;
using flowgraph::EventKind;
using flowgraph::GraphNode;
using flowgraph::ProgramGraph;
using flowgraph::ReachingDefs;
using pyast::AstNode;
using pyast::SourceModule;

std::vector<ObjectUsage> extract_usages(const ProgramGraph& graph,
                                        const ReachingDefs& defs) {
  std::vector<ObjectUsage> usages;
  for (const GraphNode& assign : graph.nodes) {
    if (assign.event.kind != EventKind::Assign) continue;
    Definition def{assign.event.object, assign.event.type_key, assign.id};
    ObjectUsage usage;
    usage.type_key = assign.event.type_key;
    usage.object = assign.event.object;
    usage.span = assign.span;
    for (const GraphNode& call : graph.nodes) {
      if (call.event.kind != EventKind::MethodCall) continue;
      if (!defs.at(call.id).count(def)) continue;  // def does not reach call
      if (call.event.object == def.object) {
        usage.own_calls[call.event.method] += 1;
      } else {
        usage.context_calls[call.event.method] += 1;
      }
    }
    // A definition that saw no calls of its own carries no usage pattern.
    if (!usage.own_calls.empty()) usages.push_back(std::move(usage));
  }
  return usages;
}

std::vector<ObjectUsage> extract_module_usages(
    const SourceModule& source, const flowgraph::BuildOptions& options) {
  AstNode module = pyast::parse_module(source);
  ImportTable imports = resolve_imports(module);
  std::vector<PatchedPath> patches = collect_patches(module, imports);
  std::vector<ObjectUsage> all;
  for (const flowgraph::ScopeRef& scope : flowgraph::collect_scopes(module)) {
    ProgramGraph graph =
        flowgraph::build_graph(*scope.body, imports, patches, options);
    ReachingDefs defs = flowgraph::reaching_definitions(graph);
    for (ObjectUsage& usage : extract_usages(graph, defs)) {
      usage.project_id = source.project_id;
      usage.path = source.path;
      all.push_back(std::move(usage));
    }
  }
  return all;
}

CorpusUsages extract_many(const std::vector<pyast::SourceModule>& modules,
                          const flowgraph::BuildOptions& options) {
  CorpusUsages out;
  out.per_module.resize(modules.size());
  std::vector<std::string> errors(modules.size());

  size_t worker_count = std::min<size_t>(
      std::max(1u, std::thread::hardware_concurrency()), modules.size());
  std::atomic<size_t> cursor{0};
  auto work = [&]() {
    for (size_t i = cursor.fetch_add(1); i < modules.size();
         i = cursor.fetch_add(1)) {
      try {
        out.per_module[i] = extract_module_usages(modules[i], options);
      } catch (const SyntaxError& e) {
        errors[i] = "skipped " + modules[i].path + " (syntax error, line " +
                    std::to_string(e.line) + ")";
      }
    }
  };
  if (worker_count <= 1) {
    work();
  } else {
    std::vector<std::thread> workers;
    for (size_t w = 0; w < worker_count; ++w) workers.emplace_back(work);
    for (std::thread& t : workers) t.join();
  }
  for (std::string& e : errors) {
    if (!e.empty()) out.diagnostics.push_back(std::move(e));
  }
  return out;
}

size_t byte_offset(const std::string& text, int line, int col) {
  if (line < 1 || col < 0) throw IoError("position out of bounds");
  int current = 1;
  size_t pos = 0;
  while (current < line) {
    size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) throw IoError("position out of bounds");
    pos = nl + 1;
    ++current;
  }
  size_t line_end = text.find('\n', pos);
  if (line_end == std::string::npos) line_end = text.size();
  size_t offset = pos + static_cast<size_t>(col);
  if (offset > line_end) throw IoError("position out of bounds");
  return offset;
}

namespace {

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// Locates the receiver identifier before the cursor. Accepts an optional
// partial method prefix between the `.` and the cursor; rejects dotted or
// computed receivers (the analysis tracks plain names only).
struct ReceiverAt {
  std::string name;
  size_t dot;  // byte of the `.` after the receiver
};

ReceiverAt receiver_before(const std::string& text, size_t cursor) {
  size_t end = std::min(cursor, text.size());
  while (end > 0 && ident_char(text[end - 1])) --end;  // partial method
  if (end == 0 || text[end - 1] != '.') {
    throw UnresolvedReceiver("cursor is not after '.'");
  }
  size_t dot = end - 1;
  size_t recv_end = dot;
  while (recv_end > 0 &&
         std::isspace(static_cast<unsigned char>(text[recv_end - 1]))) {
    --recv_end;
  }
  size_t recv_start = recv_end;
  while (recv_start > 0 && ident_char(text[recv_start - 1])) --recv_start;
  if (recv_start == recv_end) {
    throw UnresolvedReceiver("receiver is not a plain name");
  }
  if (recv_start > 0 && text[recv_start - 1] == '.') {
    throw UnresolvedReceiver("receiver is not a plain name");
  }
  return ReceiverAt{text.substr(recv_start, recv_end - recv_start), dot};
}

// Innermost scope still open at the truncated buffer's end: of the scopes
// whose body reaches the last significant byte, the one starting latest.
const flowgraph::ScopeRef& scope_at_end(
    const std::vector<flowgraph::ScopeRef>& scopes, uint32_t significant_end) {
  const flowgraph::ScopeRef* best = &scopes.front();  // module fallback
  for (const flowgraph::ScopeRef& s : scopes) {
    if (s.body->span.end_byte < significant_end) continue;
    if (s.body->span.start_byte >= best->body->span.start_byte) best = &s;
  }
  return *best;
}

}  // namespace

QueryContext build_query_at(const SourceModule& source, size_t cursor_byte,
                            const flowgraph::BuildOptions& options) {
  if (cursor_byte > source.text.size()) {
    throw IoError("position out of bounds");
  }
  ReceiverAt receiver = receiver_before(source.text, cursor_byte);

  // The buffer keeps the receiver identifier: its indentation decides which
  // scope the cursor is in, and a dangling name emits no events. Only the
  // `.` and any partial method name are dropped.
  std::string prefix = source.text.substr(0, receiver.dot);
  AstNode module = pyast::parse_prefix(prefix);
  ImportTable imports = resolve_imports(module);
  std::vector<PatchedPath> patches = collect_patches(module, imports);

  size_t last_significant = prefix.find_last_not_of(" \t\r\n");
  uint32_t significant_end =
      last_significant == std::string::npos
          ? 0
          : static_cast<uint32_t>(last_significant + 1);

  std::vector<flowgraph::ScopeRef> scopes = flowgraph::collect_scopes(module);
  const flowgraph::ScopeRef& scope = scope_at_end(scopes, significant_end);

  flowgraph::BuildOptions query_options = options;
  query_options.scope_end_deaths = false;
  query_options.open_block_min_byte = significant_end;
  ProgramGraph graph =
      flowgraph::build_graph(*scope.body, imports, patches, query_options);
  ReachingDefs defs = flowgraph::reaching_definitions(graph);
  flowgraph::DefSet at_cursor =
      flowgraph::defs_at_frontier(defs, graph.end_frontier);

  QueryContext query;
  query.object = receiver.name;
  int first_def = 0;
  for (const Definition& d : at_cursor) {
    if (d.object != receiver.name) continue;
    query.type_keys.insert(d.type_key);
    if (first_def == 0 || d.def_node < first_def) first_def = d.def_node;
  }
  if (query.type_keys.empty()) {
    throw UnresolvedReceiver("'" + receiver.name +
                             "' is not a tracked library object here");
  }

  // Calls observed since the receiver's first live definition.
  for (const GraphNode& node : graph.nodes) {
    if (node.event.kind != EventKind::MethodCall) continue;
    if (node.id <= first_def) continue;
    if (node.event.object == receiver.name) {
      query.vector.own[node.event.method] += 1;
    } else {
      query.vector.ctx[node.event.method] += 1;
    }
  }
  return query;
}

QueryContext build_query(const SourceModule& source, int line, int col,
                         const flowgraph::BuildOptions& options) {
  return build_query_at(source, byte_offset(source.text, line, col), options);
}

std::string usage_to_json(const ObjectUsage& usage) {
  nlohmann::json j;
  j["type_key"] = usage.type_key;
  j["own_calls"] = usage.own_calls;
  j["context_calls"] = usage.context_calls;
  j["project"] = usage.project_id;
  j["path"] = usage.path;
  j["object"] = usage.object;
  j["span"] = to_string(usage.span);
  return j.dump();
}

}  // namespace apirec::extractor
