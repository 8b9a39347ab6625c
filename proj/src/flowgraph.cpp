#include "apirec/flowgraph.hpp"

#include <algorithm>
#include <sstream>

namespace apirec::flowgraph {

using extractor::ImportTable;
using extractor::PatchedPath;
using pyast::AstNode;
using pyast::NodeKind;

namespace {

bool is_with_shape(const AstNode& node) {
  return node.kind == NodeKind::Other && !node.children.empty() &&
         node.children[0].kind == NodeKind::WithItem;
}

class GraphBuilder {
 public:
  GraphBuilder(const ImportTable& imports,
               const std::vector<PatchedPath>& patches,
               const BuildOptions& options)
      : imports_(imports), patches_(patches), options_(options) {}

  ProgramGraph build(const AstNode& scope_body, std::string scope_name) {
    graph_.scope_name = std::move(scope_name);
    process_block(scope_body);
    if (options_.scope_end_deaths) {
      std::vector<std::string> all;
      for (const auto& [name, info] : live_) all.push_back(name);
      Span end_span = scope_body.span;
      end_span.start_line = end_span.end_line;
      end_span.start_col = end_span.end_col;
      end_span.start_byte = end_span.end_byte;
      death_group(all, end_span);
    }
    for (const auto& [id, bypass] : frontier_) graph_.end_frontier.insert(id);
    return std::move(graph_);
  }

 private:
  struct LiveInfo {
    std::set<std::string> keys;
    int last_event = 0;
  };
  using LiveTable = std::map<std::string, LiveInfo>;
  // Pending edge sources; true marks a construct-skip (bypass) edge.
  using Frontier = std::map<int, bool>;

  int add_node(GraphEvent event, const Span& span, uint32_t recv_end = 0) {
    GraphNode node;
    node.id = static_cast<int>(graph_.nodes.size()) + 1;
    node.event = std::move(event);
    node.span = span;
    node.recv_end_byte = recv_end;
    for (const auto& [src, bypass] : frontier_) {
      node.entries.insert(src);
      GraphNode& pred = graph_.nodes[static_cast<size_t>(src) - 1];
      pred.exits.insert(node.id);
      if (bypass) pred.bypass_exits.insert(node.id);
    }
    graph_.nodes.push_back(std::move(node));
    frontier_ = {{graph_.nodes.back().id, false}};
    return graph_.nodes.back().id;
  }

  static Frontier mark_bypass(const Frontier& f) {
    Frontier out;
    for (const auto& [id, _] : f) out[id] = true;
    return out;
  }

  // A real arm edge wins over a skip edge to the same successor.
  static Frontier merge_frontiers(const Frontier& a, const Frontier& b) {
    Frontier out = a;
    for (const auto& [id, bypass] : b) {
      auto it = out.find(id);
      if (it == out.end()) {
        out[id] = bypass;
      } else {
        it->second = it->second && bypass;
      }
    }
    return out;
  }

  static LiveTable merge_live(const LiveTable& a, const LiveTable& b) {
    LiveTable out = a;
    for (const auto& [name, info] : b) {
      LiveInfo& slot = out[name];
      slot.keys.insert(info.keys.begin(), info.keys.end());
      slot.last_event = std::max(slot.last_event, info.last_event);
    }
    return out;
  }

  void process_block(const AstNode& block) {
    for (const AstNode& stmt : block.children) process_stmt(stmt);
  }

  void process_stmt(const AstNode& node) {
    switch (node.kind) {
      case NodeKind::Import:
      case NodeKind::ImportFrom:
        return;
      case NodeKind::Assign:
        process_assign(node);
        return;
      case NodeKind::If:
        process_if(node);
        return;
      case NodeKind::For:
        process_loop(node, /*iter_child=*/1, /*body_child=*/2);
        return;
      case NodeKind::While:
        process_loop(node, /*iter_child=*/0, /*body_child=*/1);
        return;
      case NodeKind::FunctionDef:
      case NodeKind::ClassDef:
        // Parameter defaults / superclass expressions evaluate here; the
        // body is a separate scope.
        if (!node.children.empty()) process_expr(node.children[0]);
        return;
      case NodeKind::Call:
      case NodeKind::Attribute:
      case NodeKind::Name:
        process_expr(node);
        return;
      case NodeKind::WithItem:
        // Only meaningful inside a with block; stray items are traversed
        // for call events only.
        for (const AstNode& c : node.children) process_expr(c);
        return;
      case NodeKind::Other:
        if (is_with_shape(node)) {
          process_with(node);
        } else {
          for (const AstNode& c : node.children) process_stmt(c);
        }
        return;
      case NodeKind::Module:
        process_block(node);
        return;
    }
  }

  void process_if(const AstNode& node) {
    if (node.children.empty()) return;
    process_expr(node.children[0]);  // condition, evaluated pre-split

    Frontier pre = frontier_;
    LiveTable base = live_;

    if (node.children.size() >= 2) process_block(node.children[1]);
    Frontier after_then = frontier_;
    LiveTable live_then = live_;

    Frontier after_else;
    LiveTable live_else;
    if (node.children.size() >= 3) {
      frontier_ = pre;
      live_ = base;
      process_block(node.children[2]);
      after_else = frontier_;
      live_else = live_;
    } else {
      after_else = mark_bypass(pre);
      live_else = base;
    }
    frontier_ = merge_frontiers(after_then, after_else);
    live_ = merge_live(live_then, live_else);
  }

  void process_loop(const AstNode& node, size_t iter_child,
                    size_t body_child) {
    if (node.children.size() <= body_child) return;
    // The iterable / condition is evaluated on the inbound path.
    process_expr(node.children[iter_child]);
    // For targets carry no type information and are never tracked.

    Frontier pre = frontier_;
    LiveTable base = live_;
    process_block(node.children[body_child]);
    frontier_ = merge_frontiers(frontier_, mark_bypass(pre));
    live_ = merge_live(live_, base);

    if (node.children.size() > body_child + 1) {
      process_block(node.children[body_child + 1]);  // for/while else
    }
  }

  void process_with(const AstNode& node) {
    std::vector<std::string> scoped;
    Span exit_span = node.span;
    exit_span.start_line = exit_span.end_line;
    exit_span.start_col = exit_span.end_col;
    exit_span.start_byte = exit_span.end_byte;
    for (const AstNode& child : node.children) {
      if (child.kind == NodeKind::WithItem) {
        if (child.children.empty()) continue;
        const AstNode& value = child.children[0];
        const AstNode* target = child.children.size() > 1 ? &child.children[1]
                                                          : nullptr;
        std::string key;
        bool creation = creation_key(value, &key);
        emit_value_events(value, creation);
        if (target && target->kind == NodeKind::Name) {
          const std::string& name = target->name_payload;
          if (creation) {
            kill_if_live(name, child.span);
            int id = add_node(
                GraphEvent{EventKind::Assign, name, key, {}, {}}, child.span);
            live_[name] = LiveInfo{{key}, id};
            scoped.push_back(name);
          } else {
            kill_if_live(name, child.span);
            if (options_.builtin_creators.count(name)) shadowed_.insert(name);
          }
        }
      } else {
        process_block(child);
      }
    }
    if (node.span.end_byte < options_.open_block_min_byte) {
      death_group(scoped, exit_span);
    }
  }

  void process_assign(const AstNode& node) {
    if (node.children.size() != 2) return;
    // Chained assignment: collect all targets, innermost value.
    std::vector<const AstNode*> targets{&node.children[0]};
    const AstNode* value = &node.children[1];
    while (value->kind == NodeKind::Assign && value->children.size() == 2) {
      targets.push_back(&value->children[0]);
      value = &value->children[1];
    }

    std::string key;
    bool creation = creation_key(*value, &key);
    emit_value_events(*value, creation);

    for (const AstNode* target : targets) {
      if (target->kind == NodeKind::Name) {
        const std::string& name = target->name_payload;
        if (creation) {
          kill_if_live(name, node.span);
          int id = add_node(GraphEvent{EventKind::Assign, name, key, {}, {}},
                            node.span);
          live_[name] = LiveInfo{{key}, id};
        } else {
          kill_if_live(name, node.span);
          // A rebound builtin no longer names the library constructor.
          if (options_.builtin_creators.count(name)) shadowed_.insert(name);
        }
      }
      // Attribute targets were screened as monkey patches up front and
      // emit nothing; tuple and subscript targets are untracked.
    }
  }

  // True when `value` is a call whose callee resolves to an unpatched
  // library path (via imports) or an unshadowed builtin creator.
  bool creation_key(const AstNode& value, std::string* key) const {
    if (value.kind != NodeKind::Call || value.children.empty()) return false;
    auto path = pyast::dotted_path(value.children[0]);
    if (!path) return false;
    // A live local name shadows any import alias or builtin.
    auto root_end = path->find('.');
    std::string root = root_end == std::string::npos
                           ? *path
                           : path->substr(0, root_end);
    if (live_.count(root)) return false;
    std::string resolved;
    if (auto via_imports = imports_.resolve(*path)) {
      resolved = *via_imports;
    } else if (root_end == std::string::npos &&
               options_.builtin_creators.count(*path) &&
               !shadowed_.count(*path)) {
      resolved = *path;
    } else {
      return false;
    }
    if (extractor::is_patched(patches_, resolved, value.span.start_byte)) {
      return false;
    }
    *key = resolved;
    return true;
  }

  // Emits events inside an assignment's right-hand side. The creating call
  // itself becomes the Assign node, so it is excluded; everything nested in
  // it (receivers, arguments) is still traversed.
  void emit_value_events(const AstNode& value, bool top_call_is_creation) {
    if (value.kind == NodeKind::Call && !value.children.empty()) {
      const AstNode& callee = value.children[0];
      if (callee.kind == NodeKind::Attribute && !callee.children.empty()) {
        process_expr(callee.children[0]);
      } else if (callee.kind != NodeKind::Name) {
        process_expr(callee);
      }
      for (size_t i = 1; i < value.children.size(); ++i) {
        process_expr(value.children[i]);
      }
      if (!top_call_is_creation) maybe_method_call(value);
    } else {
      process_expr(value);
    }
  }

  // Post-order expression walk: nested call events fire before the
  // enclosing call's own event, matching evaluation order.
  void process_expr(const AstNode& node) {
    switch (node.kind) {
      case NodeKind::Call: {
        if (!node.children.empty()) {
          const AstNode& callee = node.children[0];
          if (callee.kind == NodeKind::Attribute && !callee.children.empty()) {
            process_expr(callee.children[0]);
          } else if (callee.kind != NodeKind::Name) {
            process_expr(callee);
          }
        }
        for (size_t i = 1; i < node.children.size(); ++i) {
          process_expr(node.children[i]);
        }
        maybe_method_call(node);
        return;
      }
      case NodeKind::Attribute:
        if (!node.children.empty()) process_expr(node.children[0]);
        return;
      case NodeKind::Name:
        return;
      default:
        for (const AstNode& c : node.children) process_expr(c);
        return;
    }
  }

  // MethodCall event iff the callee is an attribute of a live tracked name.
  void maybe_method_call(const AstNode& call) {
    if (call.children.empty()) return;
    const AstNode& callee = call.children[0];
    if (callee.kind != NodeKind::Attribute || callee.children.empty()) return;
    const AstNode& object = callee.children[0];
    if (object.kind != NodeKind::Name) return;
    const std::string& name = object.name_payload;
    auto it = live_.find(name);
    if (it == live_.end()) return;
    int id = add_node(
        GraphEvent{EventKind::MethodCall, name, {}, callee.name_payload, {}},
        call.span, object.span.end_byte);
    it->second.last_event = id;
  }

  void kill_if_live(const std::string& name, const Span& span) {
    auto it = live_.find(name);
    if (it == live_.end()) return;
    add_node(GraphEvent{EventKind::Death, name, {}, {}, name}, span);
    live_.erase(it);
  }

  // Deaths of a block or scope exit are emitted as one group, ordered by
  // last use ascending. Each node in the group kills the definitions of the
  // mirrored member (last emitted kills first used); the union of kills
  // over the group is the same either way, so downstream dataflow is
  // unaffected.
  void death_group(const std::vector<std::string>& names, const Span& span) {
    std::vector<std::pair<int, std::string>> dying;
    for (const std::string& name : names) {
      auto it = live_.find(name);
      if (it != live_.end()) dying.emplace_back(it->second.last_event, name);
    }
    std::sort(dying.begin(), dying.end());
    size_t n = dying.size();
    for (size_t i = 0; i < n; ++i) {
      add_node(GraphEvent{EventKind::Death, dying[i].second, {}, {},
                          dying[n - 1 - i].second},
               span);
      live_.erase(dying[i].second);
    }
  }

  const ImportTable& imports_;
  const std::vector<PatchedPath>& patches_;
  const BuildOptions& options_;
  ProgramGraph graph_;
  LiveTable live_;
  Frontier frontier_;
  std::set<std::string> shadowed_;
};

void collect_scopes_rec(const AstNode& node, const std::string& prefix,
                        std::vector<ScopeRef>& out) {
  for (const AstNode& child : node.children) {
    if ((child.kind == NodeKind::FunctionDef ||
         child.kind == NodeKind::ClassDef) &&
        child.children.size() >= 2) {
      std::string name = prefix.empty() ? child.name_payload
                                        : prefix + "." + child.name_payload;
      out.push_back(ScopeRef{name, &child.children[1]});
      collect_scopes_rec(child.children[1], name, out);
    } else {
      collect_scopes_rec(child, prefix, out);
    }
  }
}

}  // namespace

ProgramGraph build_graph(const AstNode& scope_body, const ImportTable& imports,
                         const std::vector<PatchedPath>& patches,
                         const BuildOptions& options) {
  GraphBuilder builder(imports, patches, options);
  std::string name = scope_body.kind == NodeKind::Module ? "<module>" : "";
  return builder.build(scope_body, std::move(name));
}

std::vector<ScopeRef> collect_scopes(const AstNode& module) {
  std::vector<ScopeRef> out;
  out.push_back(ScopeRef{"<module>", &module});
  collect_scopes_rec(module, "", out);
  return out;
}

std::set<std::string> ReachingDefs::keys_of(const DefSet& defs,
                                            const std::string& object) {
  std::set<std::string> keys;
  for (const Definition& d : defs) {
    if (d.object == object) keys.insert(d.type_key);
  }
  return keys;
}

ReachingDefs reaching_definitions(const ProgramGraph& graph) {
  ReachingDefs result;
  result.out.assign(graph.nodes.size(), {});
  // Node ids ascend along every edge, so a forward sweep reaches the fixed
  // point; iterate anyway until stable.
  bool changed = true;
  while (changed) {
    changed = false;
    for (const GraphNode& node : graph.nodes) {
      DefSet in;
      for (int p : node.entries) {
        const DefSet& pred = result.at(p);
        in.insert(pred.begin(), pred.end());
      }
      DefSet out;
      switch (node.event.kind) {
        case EventKind::Assign:
          for (const Definition& d : in) {
            if (d.object != node.event.object) out.insert(d);
          }
          out.insert(Definition{node.event.object, node.event.type_key,
                                node.id});
          break;
        case EventKind::Death:
          for (const Definition& d : in) {
            if (d.object != node.event.kill_object) out.insert(d);
          }
          break;
        case EventKind::MethodCall:
          out = std::move(in);
          break;
      }
      if (out != result.out[static_cast<size_t>(node.id) - 1]) {
        result.out[static_cast<size_t>(node.id) - 1] = std::move(out);
        changed = true;
      }
    }
  }
  return result;
}

DefSet defs_at_frontier(const ReachingDefs& defs, const std::set<int>& ids) {
  DefSet out;
  for (int id : ids) {
    const DefSet& d = defs.at(id);
    out.insert(d.begin(), d.end());
  }
  return out;
}

namespace {

std::string format_id_set(const std::set<int>& ids) {
  if (ids.empty()) return "";
  if (ids.size() == 1) return std::to_string(*ids.begin());
  std::string out = "{";
  bool first = true;
  for (int id : ids) {
    if (!first) out += ",";
    out += std::to_string(id);
    first = false;
  }
  out += "}";
  return out;
}

std::string format_defs(const DefSet& defs) {
  if (defs.empty()) return "";
  std::vector<const Definition*> ordered;
  for (const Definition& d : defs) ordered.push_back(&d);
  std::sort(ordered.begin(), ordered.end(),
            [](const Definition* a, const Definition* b) {
              return a->def_node > b->def_node;
            });
  std::string out = "{";
  for (size_t i = 0; i < ordered.size(); ++i) {
    if (i) out += ", ";
    out += ordered[i]->object + ":" + ordered[i]->type_key;
  }
  out += "}";
  return out;
}

std::string event_text(const GraphEvent& e) {
  switch (e.kind) {
    case EventKind::Assign: return e.object + " becomes " + e.type_key;
    case EventKind::MethodCall: return e.object + " calls " + e.method;
    case EventKind::Death: return e.object + " dies";
  }
  return "";
}

}  // namespace

std::string dump_node_table(const ProgramGraph& graph,
                            const ReachingDefs& defs) {
  std::ostringstream out;
  out << "No\tNode\tEntry Pts\tExit Pts\tReaching Defs\n";
  for (const GraphNode& node : graph.nodes) {
    std::set<int> shown_exits;
    for (int e : node.exits) {
      if (!node.bypass_exits.count(e)) shown_exits.insert(e);
    }
    out << node.id << "\t" << event_text(node.event) << "\t"
        << format_id_set(node.entries) << "\t" << format_id_set(shown_exits)
        << "\t" << format_defs(defs.at(node.id)) << "\n";
  }
  return out.str();
}

}  // namespace apirec::flowgraph
