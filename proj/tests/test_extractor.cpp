#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "apirec/bmo.hpp"
#include "apirec/errors.hpp"
#include "apirec/extractor.hpp"

using namespace apirec;
using extractor::ImportTable;
using extractor::ObjectUsage;
using extractor::QueryContext;
using pyast::AstNode;
using pyast::SourceModule;

namespace {

std::string read_fixture(const std::string& rel) {
  std::ifstream in(std::string(APIREC_FIXTURES_DIR) + "/" + rel,
                   std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

SourceModule module_of(const std::string& text) {
  return SourceModule{"test", "mem.py", text};
}

AstNode parse(const std::string& text) {
  return pyast::parse_module(module_of(text));
}

std::map<std::string, ObjectUsage> usages_by_object(const std::string& text) {
  std::map<std::string, ObjectUsage> out;
  for (ObjectUsage& u : extractor::extract_module_usages(module_of(text))) {
    out[u.object] = std::move(u);
  }
  return out;
}

using Counts = std::map<std::string, int>;

}  // namespace

TEST_CASE("imports resolve aliases to fully qualified paths") {
  ImportTable t = extractor::resolve_imports(parse(
      "import os\n"
      "import numpy as np\n"
      "from collections import OrderedDict\n"
      "from os import path as p\n"
      "from .local import helper\n"
      "from m import *\n"));
  CHECK(t.resolve("os") == "os");
  CHECK(t.resolve("np") == "numpy");
  CHECK(t.resolve("np.linalg.norm") == "numpy.linalg.norm");
  CHECK(t.resolve("OrderedDict") == "collections.OrderedDict");
  CHECK(t.resolve("p") == "os.path");
  CHECK(t.resolve("helper") == "local.helper");
  CHECK(t.resolve("unknown") == std::nullopt);
  CHECK(t.resolve("m") == std::nullopt);  // wildcard binds nothing
}

TEST_CASE("later imports shadow earlier ones") {
  ImportTable t = extractor::resolve_imports(parse(
      "import json\n"
      "import ujson as json\n"));
  CHECK(t.resolve("json") == "ujson");
}

TEST_CASE("monkey patch detection") {
  AstNode mod = parse(
      "import datetime\n"
      "import builtins\n"
      "datetime.datetime.now = fake_now\n"
      "x = 1\n"
      "builtins.str = unicode\n");
  ImportTable t = extractor::resolve_imports(mod);

  const AstNode& patch1 = mod.children[2];  // datetime.datetime.now = ...
  const AstNode& plain = mod.children[3];   // x = 1
  const AstNode& patch2 = mod.children[4];  // builtins.str = ...
  CHECK(extractor::is_monkey_patch(patch1.children[0], t));
  CHECK_FALSE(extractor::is_monkey_patch(plain.children[0], t));
  CHECK(extractor::is_monkey_patch(patch2.children[0], t));

  auto patches = extractor::collect_patches(mod, t);
  REQUIRE(patches.size() == 2);
  CHECK(patches[0].path == "datetime.datetime.now");
  CHECK(patches[1].path == "builtins.str");
}

TEST_CASE("patched paths are excluded for the remainder of the module") {
  auto usages = usages_by_object(
      "import time\n"
      "early = time.monotonic()\n"
      "early.compare(t0)\n"
      "time.monotonic = fake\n"
      "late = time.monotonic()\n"
      "late.compare(t1)\n");
  CHECK(usages.count("early") == 1);  // created before the patch
  CHECK(usages.count("late") == 0);   // created after: excluded

  // Deeper paths under the patched prefix are excluded too.
  auto deep = usages_by_object(
      "import os\n"
      "os.path = stub\n"
      "q = os.path.join(a, b)\n"
      "q.strip()\n");
  CHECK(deep.empty());
}

TEST_CASE("file copy usages carry the stated call multisets") {
  auto usages = usages_by_object(read_fixture("snippets/file_copy.py"));
  REQUIRE(usages.count("fi") == 1);
  REQUIRE(usages.count("fo") == 1);

  const ObjectUsage& fi = usages.at("fi");
  CHECK(fi.type_key == "open");
  CHECK(fi.own_calls == Counts{{"readlines", 1}, {"close", 1}});
  CHECK(fi.context_calls == Counts{{"write", 2}, {"close", 1}});

  const ObjectUsage& fo = usages.at("fo");
  CHECK(fo.type_key == "open");
  CHECK(fo.own_calls == Counts{{"write", 2}, {"close", 1}});
  CHECK(fo.context_calls == Counts{{"readlines", 1}, {"close", 1}});
}

TEST_CASE("objects with no calls produce no training record") {
  CHECK(extractor::extract_module_usages(module_of("x = open(f)\n")).empty());
}

TEST_CASE("for-loop iterator targets are never tracked") {
  auto usages = usages_by_object(
      "fi = open(f)\n"
      "for s in fi.readlines():\n"
      "    s.strip()\n");
  CHECK(usages.count("s") == 0);
  REQUIRE(usages.count("fi") == 1);
  // s.strip() is untracked, so fi sees no context calls either.
  CHECK(usages.at("fi").context_calls.empty());
}

TEST_CASE("union-typed definitions contribute a usage per type key") {
  auto all = extractor::extract_module_usages(
      module_of(read_fixture("snippets/file_copy_union.py")));
  Counts open_own, ospath_own;
  for (const ObjectUsage& u : all) {
    if (u.object != "fo") continue;
    if (u.type_key == "open") open_own = u.own_calls;
    if (u.type_key == "os.path") ospath_own = u.own_calls;
  }
  // The close call lands in the region both definitions reach, so both
  // keys learn it; the branch-guarded write belongs only to the original.
  CHECK(open_own == Counts{{"write", 1}, {"close", 1}});
  CHECK(ospath_own == Counts{{"close", 1}});
}

TEST_CASE("context symmetry for co-live objects in straight-line code") {
  std::mt19937 rng(7);
  const char* methods[] = {"read", "write", "seek", "flush"};
  for (int round = 0; round < 20; ++round) {
    std::ostringstream src;
    src << "a = open(f)\n"
        << "b = open(g)\n";
    Counts calls_a, calls_b;
    int n = 2 + static_cast<int>(rng() % 5);
    for (int i = 0; i < n; ++i) {
      bool on_a = rng() % 2 == 0;
      const char* m = methods[rng() % 4];
      src << (on_a ? "a." : "b.") << m << "(x)\n";
      (on_a ? calls_a : calls_b)[m] += 1;
    }
    auto usages = usages_by_object(src.str());
    if (!calls_a.empty() && !calls_b.empty()) {
      // Both alive over the whole program: each object's context is exactly
      // the other's own calls.
      CHECK(usages.at("a").context_calls == usages.at("b").own_calls);
      CHECK(usages.at("b").context_calls == usages.at("a").own_calls);
    }
  }
}

TEST_CASE("build_query mid-file sees calls so far only") {
  std::string text = read_fixture("snippets/file_copy.py");
  // Cursor just after `fo.` on the first write line.
  QueryContext q = extractor::build_query(module_of(text), 7, 11);
  CHECK(q.object == "fo");
  CHECK(q.type_keys == std::set<std::string>{"open"});
  CHECK(q.vector.own.empty());
  CHECK(q.vector.ctx == Counts{{"readlines", 1}});
}

TEST_CASE("build_query at the final call sees the whole history") {
  std::string text = read_fixture("snippets/file_copy.py");
  QueryContext q = extractor::build_query(module_of(text), 12, 3);
  CHECK(q.object == "fi");
  CHECK(q.type_keys == std::set<std::string>{"open"});
  CHECK(q.vector.own == Counts{{"readlines", 1}});
  CHECK(q.vector.ctx == Counts{{"write", 2}, {"close", 1}});
}

TEST_CASE("build_query reports union type keys at the cursor") {
  std::string text = read_fixture("snippets/file_copy_union.py");
  // Cursor just after `fo.` on the close line (line 12, col 3).
  QueryContext q = extractor::build_query(module_of(text), 12, 3);
  CHECK(q.type_keys == std::set<std::string>{"open", "os.path"});
}

TEST_CASE("build_query tolerates a partial method prefix") {
  std::string text =
      "fi = open(f)\n"
      "fi.readlines()\n"
      "fi.rea";
  QueryContext q =
      extractor::build_query_at(module_of(text), text.size());
  CHECK(q.object == "fi");
  CHECK(q.vector.own == Counts{{"readlines", 1}});
}

TEST_CASE("build_query inside an open with block") {
  std::string text =
      "with open(p) as fh:\n"
      "    fh.read()\n"
      "    fh.";
  QueryContext q = extractor::build_query_at(module_of(text), text.size());
  CHECK(q.object == "fh");
  CHECK(q.type_keys == std::set<std::string>{"open"});
  CHECK(q.vector.own == Counts{{"read", 1}});
}

TEST_CASE("unresolved receivers are rejected") {
  std::string untracked =
      "q = helper()\n"
      "q.";
  CHECK_THROWS_AS(
      extractor::build_query_at(module_of(untracked), untracked.size()),
      UnresolvedReceiver);

  std::string no_dot = "value = 1\n";
  CHECK_THROWS_AS(extractor::build_query(module_of(no_dot), 1, 5),
                  UnresolvedReceiver);

  // Dotted receivers are not plain names.
  std::string chained =
      "fi = open(f)\n"
      "self.fi.";
  CHECK_THROWS_AS(
      extractor::build_query_at(module_of(chained), chained.size()),
      UnresolvedReceiver);

  // Dead objects do not answer.
  std::string dead =
      "x = open(f)\n"
      "x = 'done'\n"
      "x.";
  CHECK_THROWS_AS(extractor::build_query_at(module_of(dead), dead.size()),
                  UnresolvedReceiver);
}

TEST_CASE("queries inside a function see only that scope") {
  std::string text =
      "fi = open(f)\n"
      "def worker():\n"
      "    local = open(h)\n"
      "    local.seek(0)\n"
      "    local.";
  QueryContext q = extractor::build_query_at(module_of(text), text.size());
  CHECK(q.object == "local");
  CHECK(q.vector.own == Counts{{"seek", 1}});

  // The module-level object is out of scope inside the function.
  std::string outer =
      "fi = open(f)\n"
      "def worker():\n"
      "    fi.";
  CHECK_THROWS_AS(extractor::build_query_at(module_of(outer), outer.size()),
                  UnresolvedReceiver);

  // Back at module level after the function, module objects answer again.
  std::string after =
      "fi = open(f)\n"
      "def worker():\n"
      "    local = open(h)\n"
      "    local.seek(0)\n"
      "fi.";
  QueryContext back = extractor::build_query_at(module_of(after), after.size());
  CHECK(back.object == "fi");
}

TEST_CASE("positions outside the buffer are rejected") {
  CHECK_THROWS_AS(extractor::build_query(module_of("x = 1\n"), 9, 0), IoError);
  CHECK_THROWS_AS(extractor::build_query(module_of("x = 1\n"), 1, 42),
                  IoError);
}

TEST_CASE("file copy usages train into two vectors under one type key") {
  auto usages = extractor::extract_module_usages(
      module_of(read_fixture("snippets/file_copy.py")));
  bmo::UsageIndex index = bmo::train(usages);
  REQUIRE(index.find("open") != nullptr);
  CHECK(index.find("open")->size() == 2);
  CHECK(index.types().size() == 1);
}

TEST_CASE("usage records serialize as one JSON object per line") {
  auto usages =
      extractor::extract_module_usages(module_of(read_fixture("snippets/file_copy.py")));
  REQUIRE(!usages.empty());
  std::string line = extractor::usage_to_json(usages[0]);
  CHECK(line.find("\"type_key\":\"open\"") != std::string::npos);
  CHECK(line.find('\n') == std::string::npos);
}
