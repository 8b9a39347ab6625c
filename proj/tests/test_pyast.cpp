#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "apirec/pyast.hpp"

using namespace apirec;
using pyast::AstNode;
using pyast::NodeKind;

namespace {

std::string read_fixture(const std::string& rel) {
  std::ifstream in(std::string(APIREC_FIXTURES_DIR) + "/" + rel,
                   std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

AstNode parse(const std::string& text, const std::string& path = "mem.py") {
  return pyast::parse_module(pyast::SourceModule{"test", path, text});
}

void collect(const AstNode& node, NodeKind kind,
             std::vector<const AstNode*>& out) {
  if (node.kind == kind) out.push_back(&node);
  for (const AstNode& c : node.children) collect(c, kind, out);
}

std::vector<const AstNode*> find_all(const AstNode& node, NodeKind kind) {
  std::vector<const AstNode*> out;
  collect(node, kind, out);
  return out;
}

}  // namespace

TEST_CASE("file copy snippet lifts to the expected statement shapes") {
  std::string text = read_fixture("snippets/file_copy.py");
  AstNode mod = parse(text);
  REQUIRE(mod.kind == NodeKind::Module);
  REQUIRE(mod.children.size() == 7);

  CHECK(mod.children[0].kind == NodeKind::Assign);  // string literal
  CHECK(mod.children[1].kind == NodeKind::Assign);
  CHECK(mod.children[2].kind == NodeKind::Assign);  // open(...)
  CHECK(mod.children[3].kind == NodeKind::Assign);
  CHECK(mod.children[4].kind == NodeKind::For);
  CHECK(mod.children[5].kind == NodeKind::Call);  // fo.close()
  CHECK(mod.children[6].kind == NodeKind::Call);

  // Assign children are [target, value]; the open calls have Name callees.
  const AstNode& fi = mod.children[2];
  REQUIRE(fi.children.size() == 2);
  CHECK(fi.children[0].name_payload == "fi");
  REQUIRE(fi.children[1].kind == NodeKind::Call);
  CHECK(fi.children[1].children[0].name_payload == "open");

  // For: [target, iterable, body]; body holds the if with both arms.
  const AstNode& loop = mod.children[4];
  REQUIRE(loop.children.size() == 3);
  CHECK(loop.children[0].name_payload == "s");
  CHECK(loop.children[1].kind == NodeKind::Call);
  REQUIRE(loop.children[2].children.size() == 1);
  const AstNode& branch = loop.children[2].children[0];
  REQUIRE(branch.kind == NodeKind::If);
  REQUIRE(branch.children.size() == 3);
  CHECK(branch.children[0].kind == NodeKind::Call);  // s.strip()
  CHECK(branch.children[1].children.size() == 1);    // fo.write(s)
  CHECK(branch.children[2].children.size() == 2);    // write + break

  // Method calls appear with their receiver chain, in source order.
  std::vector<std::string> methods;
  for (const AstNode* call : find_all(mod, NodeKind::Call)) {
    if (!call->children.empty() &&
        call->children[0].kind == NodeKind::Attribute) {
      methods.push_back(call->children[0].name_payload);
    }
  }
  CHECK(methods == std::vector<std::string>{"readlines", "strip", "write",
                                            "write", "close", "close"});
}

TEST_CASE("empty file lifts to an empty module") {
  AstNode mod = parse("");
  CHECK(mod.kind == NodeKind::Module);
  CHECK(mod.children.empty());
}

TEST_CASE("malformed input raises a syntax error naming the line") {
  try {
    parse("def f(:", "bad.py");
    FAIL("expected SyntaxError");
  } catch (const SyntaxError& e) {
    CHECK(e.path == "bad.py");
    CHECK(e.line == 1);
  }
  CHECK_THROWS_AS(parse("x = open(\n\n)) oops", "bad2.py"), SyntaxError);
}

TEST_CASE("parsing is deterministic") {
  std::string text = read_fixture("snippets/file_copy.py");
  CHECK(parse(text) == parse(text));
}

TEST_CASE("import statements lift to alias/target binding pairs") {
  AstNode mod = parse(
      "import os\n"
      "import numpy as np\n"
      "from collections import OrderedDict\n"
      "from os import path as p\n"
      "import a.b.c\n");
  REQUIRE(mod.children.size() == 5);
  auto binding = [](const AstNode& stmt, size_t i) {
    REQUIRE(stmt.children.size() > i);
    const AstNode& b = stmt.children[i];
    REQUIRE(b.children.size() == 1);
    return std::pair{b.name_payload, b.children[0].name_payload};
  };
  using P = std::pair<std::string, std::string>;
  CHECK(binding(mod.children[0], 0) == P{"os", "os"});
  CHECK(binding(mod.children[1], 0) == P{"np", "numpy"});
  CHECK(binding(mod.children[2], 0) == P{"OrderedDict", "collections.OrderedDict"});
  CHECK(binding(mod.children[3], 0) == P{"p", "os.path"});
  // A plain dotted import only binds the root module name.
  CHECK(binding(mod.children[4], 0) == P{"a", "a"});
}

TEST_CASE("unsupported constructs become Other but keep their calls") {
  AstNode mod = parse(
      "x += fn()\n"
      "result = [w.strip() for w in words]\n"
      "return_value = lambda: conn.close()\n");
  CHECK(find_all(mod, NodeKind::Call).size() == 3);
}

TEST_CASE("try bodies keep calls but lose assignment structure") {
  AstNode mod = parse(
      "try:\n"
      "    fh = open(path)\n"
      "except IOError:\n"
      "    log.warn(msg)\n"
      "finally:\n"
      "    other = open(alt)\n");
  CHECK(find_all(mod, NodeKind::Assign).empty());
  CHECK(find_all(mod, NodeKind::Call).size() == 3);

  // A function defined inside try is a fresh scope: its body assigns.
  AstNode nested = parse(
      "try:\n"
      "    def helper():\n"
      "        fh = open(path)\n"
      "except IOError:\n"
      "    pass\n");
  CHECK(find_all(nested, NodeKind::Assign).size() == 1);
}

TEST_CASE("with statements lift to WithItem shapes") {
  AstNode mod = parse(
      "with open(a) as fh, open(b) as gh:\n"
      "    fh.read()\n");
  REQUIRE(mod.children.size() == 1);
  const AstNode& with_stmt = mod.children[0];
  CHECK(with_stmt.kind == NodeKind::Other);
  REQUIRE(with_stmt.children.size() == 3);
  CHECK(with_stmt.children[0].kind == NodeKind::WithItem);
  CHECK(with_stmt.children[1].kind == NodeKind::WithItem);
  const AstNode& item = with_stmt.children[0];
  REQUIRE(item.children.size() == 2);
  CHECK(item.children[0].kind == NodeKind::Call);
  CHECK(item.children[1].name_payload == "fh");
}

TEST_CASE("elif chains desugar to nested ifs") {
  AstNode mod = parse(
      "if a:\n"
      "    f1()\n"
      "elif b:\n"
      "    f2()\n"
      "else:\n"
      "    f3()\n");
  REQUIRE(mod.children.size() == 1);
  const AstNode& outer = mod.children[0];
  REQUIRE(outer.kind == NodeKind::If);
  REQUIRE(outer.children.size() == 3);
  REQUIRE(outer.children[2].children.size() == 1);
  const AstNode& inner = outer.children[2].children[0];
  REQUIRE(inner.kind == NodeKind::If);
  REQUIRE(inner.children.size() == 3);  // cond, f2 block, else block
}

TEST_CASE("dotted_path reads name and attribute chains") {
  AstNode mod = parse("os.path.join(a, b)\n");
  const AstNode& call = mod.children[0];
  REQUIRE(call.kind == NodeKind::Call);
  CHECK(pyast::dotted_path(call.children[0]) == "os.path.join");
  CHECK(pyast::dotted_path(call) == std::nullopt);
}

TEST_CASE("prefix parsing tolerates dangling input") {
  AstNode mod = pyast::parse_prefix("if cond:\n    fh.");
  CHECK(mod.kind == NodeKind::Module);
  AstNode empty = pyast::parse_prefix("value = ");
  CHECK(empty.kind == NodeKind::Module);
}

namespace {

void check_spans(const AstNode& node, const AstNode* parent,
                 const std::string& text) {
  if (parent) {
    CHECK(node.span.start_byte >= parent->span.start_byte);
    CHECK(node.span.end_byte <= parent->span.end_byte);
  }
  if (!node.name_payload.empty()) {
    std::string window = text.substr(
        node.span.start_byte, node.span.end_byte - node.span.start_byte);
    // Dotted payloads are synthesized from several tokens; every segment
    // must come from the spanned text.
    std::istringstream segments(node.name_payload);
    std::string segment;
    while (std::getline(segments, segment, '.')) {
      CHECK(window.find(segment) != std::string::npos);
    }
  }
  for (const AstNode& c : node.children) check_spans(c, &node, text);
}

}  // namespace

TEST_CASE("spans nest and contain their identifier payloads") {
  for (const char* rel :
       {"snippets/file_copy.py", "snippets/file_copy_union.py"}) {
    std::string text = read_fixture(rel);
    AstNode mod = parse(text);
    check_spans(mod, nullptr, text);
  }
  std::string text =
      "import numpy as np\n"
      "from os import path as p\n"
      "def compute(data, scale=2):\n"
      "    out = np.dot(data, scale)\n"
      "    return out\n"
      "class Runner(Base):\n"
      "    def go(self):\n"
      "        with open(f) as fh:\n"
      "            fh.read()\n";
  check_spans(parse(text), nullptr, text);
}

TEST_CASE("every call node carries its callee as the first child") {
  AstNode mod = parse(
      "plain()\n"
      "obj.method(arg)\n"
      "a.b.c(x)\n"
      "get_handler()(request)\n"
      "items[0](y)\n");
  for (const AstNode* call : find_all(mod, NodeKind::Call)) {
    REQUIRE(!call->children.empty());
    const AstNode& callee = call->children[0];
    // Name or Attribute chains are resolvable receivers; anything else is a
    // receiverless call.
    bool resolvable = pyast::dotted_path(callee).has_value();
    bool receiverless = callee.kind == NodeKind::Other ||
                        callee.kind == NodeKind::Call;
    CHECK((resolvable || receiverless));
  }
}

TEST_CASE("grammar version string is reported for diagnostics") {
  CHECK(pyast::grammar_version().find("tree-sitter-python") !=
        std::string::npos);
}
