#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "apirec/flowgraph.hpp"
#include "apirec/imports.hpp"
#include "apirec/pyast.hpp"

using namespace apirec;
using flowgraph::DefSet;
using flowgraph::Definition;
using flowgraph::EventKind;
using flowgraph::GraphNode;
using flowgraph::ProgramGraph;
using flowgraph::ReachingDefs;

namespace {

std::string read_fixture(const std::string& rel) {
  std::ifstream in(std::string(APIREC_FIXTURES_DIR) + "/" + rel,
                   std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

struct Built {
  pyast::AstNode ast;
  ProgramGraph graph;
  ReachingDefs defs;
};

Built build(const std::string& text) {
  Built b;
  b.ast = pyast::parse_module(pyast::SourceModule{"test", "mem.py", text});
  extractor::ImportTable imports = extractor::resolve_imports(b.ast);
  auto patches = extractor::collect_patches(b.ast, imports);
  b.graph = flowgraph::build_graph(b.ast, imports, patches);
  b.defs = flowgraph::reaching_definitions(b.graph);
  return b;
}

std::string event_str(const GraphNode& n) {
  switch (n.event.kind) {
    case EventKind::Assign:
      return n.event.object + "=" + n.event.type_key;
    case EventKind::MethodCall:
      return n.event.object + "." + n.event.method;
    case EventKind::Death:
      return "~" + n.event.object;
  }
  return "?";
}

std::vector<std::string> events(const ProgramGraph& g) {
  std::vector<std::string> out;
  for (const GraphNode& n : g.nodes) out.push_back(event_str(n));
  return out;
}

}  // namespace

// Frozen expected node table for the branching file-copy snippet: two
// creations, a split at the loop/branch, merged close calls, two deaths.
static const char* kGoldenNodeTable =
    "No\tNode\tEntry Pts\tExit Pts\tReaching Defs\n"
    "1\tfi becomes open\t\t2\t{fi:open}\n"
    "2\tfo becomes open\t1\t3\t{fo:open, fi:open}\n"
    "3\tfi calls readlines\t2\t{4,5}\t{fo:open, fi:open}\n"
    "4\tfo calls write\t3\t6\t{fo:open, fi:open}\n"
    "5\tfo calls write\t3\t6\t{fo:open, fi:open}\n"
    "6\tfo calls close\t{3,4,5}\t7\t{fo:open, fi:open}\n"
    "7\tfi calls close\t6\t8\t{fo:open, fi:open}\n"
    "8\tfo dies\t7\t9\t{fo:open}\n"
    "9\tfi dies\t8\t\t\n";

TEST_CASE("golden node table for the file copy snippet") {
  Built b = build(read_fixture("snippets/file_copy.py"));
  CHECK(flowgraph::dump_node_table(b.graph, b.defs) == kGoldenNodeTable);
}

TEST_CASE("minimal tracked program: assign then death at scope end") {
  Built b = build("x = open(f)\n");
  CHECK(events(b.graph) == std::vector<std::string>{"x=open", "~x"});
  CHECK(b.defs.at(1) == DefSet{{"x", "open", 1}});
  CHECK(b.defs.at(2).empty());
}

TEST_CASE("reassignment kills the first definition") {
  Built b = build(
      "import os\n"
      "x = open(f)\n"
      "x = os.path.join(a, b)\n");
  CHECK(events(b.graph) ==
        std::vector<std::string>{"x=open", "~x", "x=os.path.join", "~x"});
  CHECK(b.defs.at(2).empty());
  CHECK(b.defs.at(3) == DefSet{{"x", "os.path.join", 3}});
}

TEST_CASE("straight-line program: one definition reaches every later node") {
  Built b = build(
      "x = open(f)\n"
      "x.read()\n"
      "x.seek(0)\n"
      "x.close()\n");
  Definition def{"x", "open", 1};
  for (int id = 1; id <= 4; ++id) {
    CHECK(b.defs.at(id) == DefSet{def});
  }
}

TEST_CASE("diamond merge unions both arms") {
  Built b = build(read_fixture("snippets/file_copy_union.py"));
  // The close call on the reassigned object sees both creations.
  const GraphNode* close_node = nullptr;
  for (const GraphNode& n : b.graph.nodes) {
    if (n.event.kind == EventKind::MethodCall && n.event.object == "fo" &&
        n.event.method == "close") {
      close_node = &n;
    }
  }
  REQUIRE(close_node != nullptr);
  CHECK(ReachingDefs::keys_of(b.defs.at(close_node->id), "fo") ==
        std::set<std::string>{"open", "os.path"});
}

TEST_CASE("branch-skip edges appear on entries but not dumped exits") {
  Built b = build(
      "x = open(f)\n"
      "if cond:\n"
      "    x.read()\n"
      "x.close()\n");
  CHECK(events(b.graph) ==
        std::vector<std::string>{"x=open", "x.read", "x.close", "~x"});
  const GraphNode& assign = b.graph.node(1);
  const GraphNode& close = b.graph.node(3);
  CHECK(close.entries == std::set<int>{1, 2});
  CHECK(assign.exits == std::set<int>{2, 3});        // symmetric relation
  CHECK(assign.bypass_exits == std::set<int>{3});    // hidden in the dump
  std::string dump = flowgraph::dump_node_table(b.graph, b.defs);
  CHECK(dump.find("1\tx becomes open\t\t2\t") != std::string::npos);
}

TEST_CASE("entry/exit relation is symmetric") {
  for (const char* rel :
       {"snippets/file_copy.py", "snippets/file_copy_union.py"}) {
    Built b = build(read_fixture(rel));
    for (const GraphNode& n : b.graph.nodes) {
      for (int e : n.entries) {
        CHECK(b.graph.node(e).exits.count(n.id) == 1);
      }
      for (int x : n.exits) {
        CHECK(b.graph.node(x).entries.count(n.id) == 1);
      }
    }
  }
}

TEST_CASE("with blocks assign on entry and die at block exit") {
  Built b = build(
      "with open(p) as fh:\n"
      "    fh.read()\n"
      "z = open(q)\n"
      "z.close()\n");
  CHECK(events(b.graph) == std::vector<std::string>{"fh=open", "fh.read",
                                                    "~fh", "z=open",
                                                    "z.close", "~z"});
}

TEST_CASE("while loops split like for loops") {
  Built b = build(
      "x = open(f)\n"
      "while x.readable():\n"
      "    x.read()\n"
      "x.close()\n");
  // condition event fires pre-split; close merges loop-taken and skip paths
  CHECK(events(b.graph) ==
        std::vector<std::string>{"x=open", "x.readable", "x.read", "x.close",
                                 "~x"});
  CHECK(b.graph.node(4).entries == std::set<int>{2, 3});
}

TEST_CASE("module objects are invisible inside nested scopes") {
  std::string text =
      "fi = open(f)\n"
      "def g():\n"
      "    fi.read()\n"
      "    local = open(h)\n"
      "    local.close()\n";
  pyast::AstNode ast =
      pyast::parse_module(pyast::SourceModule{"t", "m.py", text});
  extractor::ImportTable imports = extractor::resolve_imports(ast);
  auto scopes = flowgraph::collect_scopes(ast);
  REQUIRE(scopes.size() == 2);
  CHECK(scopes[0].name == "<module>");
  CHECK(scopes[1].name == "g");
  ProgramGraph module_graph =
      flowgraph::build_graph(*scopes[0].body, imports, {});
  ProgramGraph fn_graph = flowgraph::build_graph(*scopes[1].body, imports, {});
  CHECK(events(module_graph) == std::vector<std::string>{"fi=open", "~fi"});
  // fi.read() emits nothing in g: the outer object is not in scope.
  CHECK(events(fn_graph) ==
        std::vector<std::string>{"local=open", "local.close", "~local"});
}

TEST_CASE("class bodies and methods get their own scopes") {
  std::string text =
      "class Store:\n"
      "    conn = open(path)\n"
      "    def close_all(self):\n"
      "        h = open(p)\n"
      "        h.close()\n";
  pyast::AstNode ast =
      pyast::parse_module(pyast::SourceModule{"t", "m.py", text});
  auto scopes = flowgraph::collect_scopes(ast);
  REQUIRE(scopes.size() == 3);
  CHECK(scopes[1].name == "Store");
  CHECK(scopes[2].name == "Store.close_all");
}

TEST_CASE("untracked assignments emit nothing") {
  Built b = build(
      "a = 'text'\n"
      "b = helper()\n"
      "c = b.compute()\n"
      "for item in items:\n"
      "    pass\n");
  CHECK(b.graph.nodes.empty());
}

// --- dataflow properties ---------------------------------------------------

namespace {

// Independent recomputation of the transfer function, applied to the union
// of predecessor post-states.
DefSet transfer(const GraphNode& node, const DefSet& in) {
  DefSet out;
  switch (node.event.kind) {
    case EventKind::Assign:
      for (const Definition& d : in) {
        if (d.object != node.event.object) out.insert(d);
      }
      out.insert(Definition{node.event.object, node.event.type_key, node.id});
      break;
    case EventKind::Death:
      for (const Definition& d : in) {
        if (d.object != node.event.kill_object) out.insert(d);
      }
      break;
    case EventKind::MethodCall:
      out = in;
      break;
  }
  return out;
}

void enumerate_paths(const ProgramGraph& g, int id, const DefSet& state,
                     std::map<int, DefSet>& reachable) {
  const GraphNode& node = g.node(id);
  DefSet out = transfer(node, state);
  reachable[id].insert(out.begin(), out.end());
  for (int succ : node.exits) enumerate_paths(g, succ, out, reachable);
}

}  // namespace

TEST_CASE("merge-union property holds at every node") {
  for (const char* rel :
       {"snippets/file_copy.py", "snippets/file_copy_union.py"}) {
    Built b = build(read_fixture(rel));
    for (const GraphNode& n : b.graph.nodes) {
      DefSet in;
      for (int p : n.entries) {
        const DefSet& d = b.defs.at(p);
        in.insert(d.begin(), d.end());
      }
      CHECK(b.defs.at(n.id) == transfer(n, in));
    }
  }
}

TEST_CASE("dataflow is a fixed point") {
  Built b = build(read_fixture("snippets/file_copy_union.py"));
  ReachingDefs again = flowgraph::reaching_definitions(b.graph);
  CHECK(again.out == b.defs.out);
}

TEST_CASE("dataflow equals brute-force path enumeration on loop-free graphs") {
  const char* programs[] = {
      // diamond with a reassignment in one arm
      "import os\n"
      "x = open(f)\n"
      "if c:\n"
      "    x = os.path(f)\n"
      "else:\n"
      "    x.read()\n"
      "x.close()\n",
      // nested branches over two objects
      "a = open(f)\n"
      "b = open(g)\n"
      "if c1:\n"
      "    a.read()\n"
      "    if c2:\n"
      "        b.write(x)\n"
      "else:\n"
      "    a = open(h)\n"
      "a.close()\n"
      "b.close()\n",
      // with block between branches
      "a = open(f)\n"
      "if c:\n"
      "    with open(g) as w:\n"
      "        w.write(d)\n"
      "a.close()\n",
  };
  for (const char* text : programs) {
    Built b = build(text);
    std::map<int, DefSet> reachable;
    for (const GraphNode& n : b.graph.nodes) {
      if (n.entries.empty()) enumerate_paths(b.graph, n.id, {}, reachable);
    }
    for (const GraphNode& n : b.graph.nodes) {
      CHECK(b.defs.at(n.id) == reachable[n.id]);
    }
  }
}

TEST_CASE("every assign is eventually followed by a death or graph end") {
  for (const char* rel :
       {"snippets/file_copy.py", "snippets/file_copy_union.py"}) {
    Built b = build(read_fixture(rel));
    for (const GraphNode& n : b.graph.nodes) {
      if (n.event.kind != EventKind::Assign) continue;
      bool died = false;
      for (const GraphNode& later : b.graph.nodes) {
        if (later.id > n.id && later.event.kind == EventKind::Death &&
            later.event.object == n.event.object) {
          died = true;
        }
      }
      CHECK(died);
    }
  }
}
