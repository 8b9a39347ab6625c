#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "apirec/bmo.hpp"
#include "apirec/corpus.hpp"
#include "apirec/errors.hpp"
#include "apirec/extractor.hpp"

using namespace apirec;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = APIREC_FIXTURES_DIR;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("apirec_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

void write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << text;
}

bool git_available() {
  return std::system("git --version >/dev/null 2>&1") == 0;
}

bool run(const std::string& cmd) {
  return std::system((cmd + " >/dev/null 2>&1").c_str()) == 0;
}

}  // namespace

TEST_CASE("discover_projects lists one root per top-level child") {
  auto roots = corpus::discover_projects(kFixtures / "corpus");
  CHECK(roots.size() == 12);
  CHECK(std::is_sorted(roots.begin(), roots.end()));
  // A directory holding loose source files is its own project.
  auto loose = corpus::discover_projects(kFixtures / "snippets");
  REQUIRE(loose.size() == 1);
  CHECK(loose[0] == kFixtures / "snippets");
}

TEST_CASE("ingest collects source files in sorted order") {
  TempDir tmp;
  write_file(tmp.path / "proj" / "b.py", "x = 1\n");
  write_file(tmp.path / "proj" / "a.py", "y = 2\n");
  write_file(tmp.path / "proj" / "sub" / "c.py", "z = 3\n");
  write_file(tmp.path / "proj" / "notes.txt", "not python\n");

  corpus::IngestReport report = corpus::ingest({tmp.path / "proj"});
  REQUIRE(report.projects.size() == 1);
  const auto& modules = report.projects[0].modules;
  REQUIRE(modules.size() == 3);
  CHECK(modules[0].path == "a.py");
  CHECK(modules[1].path == "b.py");
  CHECK(modules[2].path == "sub/c.py");
  CHECK(modules[0].project_id == report.projects[0].record.project_id);
}

TEST_CASE("ingest skips junk dirs, oversized files and symlinks") {
  TempDir tmp;
  write_file(tmp.path / "p" / "keep.py", "x = 1\n");
  write_file(tmp.path / "p" / "__pycache__" / "junk.py", "x = 1\n");
  write_file(tmp.path / "p" / "node_modules" / "dep.py", "x = 1\n");
  write_file(tmp.path / "p" / "big.py", std::string(1 << 21, '#'));
  std::error_code ec;
  fs::create_symlink(tmp.path / "p" / "keep.py", tmp.path / "p" / "link.py",
                     ec);

  corpus::IngestReport report = corpus::ingest({tmp.path / "p"});
  REQUIRE(report.projects.size() == 1);
  REQUIRE(report.projects[0].modules.size() == 1);
  CHECK(report.projects[0].modules[0].path == "keep.py");
  bool big_diagnosed = false;
  for (const std::string& d : report.diagnostics) {
    if (d.find("big.py") != std::string::npos) big_diagnosed = true;
  }
  CHECK(big_diagnosed);
}

TEST_CASE("ingest isolates missing roots and empty projects") {
  TempDir tmp;
  fs::create_directories(tmp.path / "empty");
  corpus::IngestReport report =
      corpus::ingest({tmp.path / "missing", tmp.path / "empty"});
  CHECK(report.projects.size() == 1);  // the empty one still records
  CHECK(report.projects[0].modules.empty());
  CHECK(report.diagnostics.size() == 2);
}

TEST_CASE("ingestion and fingerprints are deterministic") {
  auto roots = corpus::discover_projects(kFixtures / "corpus");
  corpus::IngestReport a = corpus::ingest(roots);
  corpus::IngestReport b = corpus::ingest(roots);
  REQUIRE(a.projects.size() == b.projects.size());
  for (size_t i = 0; i < a.projects.size(); ++i) {
    CHECK(a.projects[i].record.project_id == b.projects[i].record.project_id);
  }
  CHECK(corpus::corpus_fingerprint(a) == corpus::corpus_fingerprint(b));
}

TEST_CASE("manifest parsing validates entries") {
  TempDir tmp;
  write_file(tmp.path / "ok.jsonl",
             "{\"origin\": \"/repos/a\"}\n"
             "{\"origin\": \"/repos/b\", \"ref\": \"v1\"}\n");
  corpus::CorpusManifest manifest =
      corpus::load_manifest(tmp.path / "ok.jsonl");
  REQUIRE(manifest.size() == 2);
  CHECK(manifest[0].origin == "/repos/a");
  CHECK(manifest[1].ref == "v1");

  write_file(tmp.path / "dup.jsonl",
             "{\"origin\": \"/r\"}\n{\"origin\": \"/r\"}\n");
  CHECK_THROWS_AS(corpus::load_manifest(tmp.path / "dup.jsonl"), FormatError);
  write_file(tmp.path / "bad.jsonl", "{\"no_origin\": 1}\n");
  CHECK_THROWS_AS(corpus::load_manifest(tmp.path / "bad.jsonl"), FormatError);
  CHECK_THROWS_AS(corpus::load_manifest(tmp.path / "absent.jsonl"), IoError);
}

TEST_CASE("fetch clones local repositories and isolates failures") {
  if (!git_available()) {
    MESSAGE("git not available; skipping fetch test");
    return;
  }
  TempDir tmp;
  fs::path repo = tmp.path / "origin_repo";
  write_file(repo / "pkg" / "mod.py", "fh = open(p)\nfh.read()\n");
  REQUIRE(run("git -C '" + repo.string() + "' init -q"));
  REQUIRE(run("git -C '" + repo.string() +
              "' -c user.email=t@t -c user.name=t add -A"));
  REQUIRE(run("git -C '" + repo.string() +
              "' -c user.email=t@t -c user.name=t commit -qm seed"));

  REQUIRE(run("git -C '" + repo.string() + "' branch pinned"));

  corpus::CorpusManifest manifest{
      {repo.string(), ""},
      {(tmp.path / "nowhere").string(), ""},  // unreachable entry
  };
  fs::path dest = tmp.path / "clones";
  corpus::FetchResult result = corpus::fetch(manifest, dest);
  REQUIRE(result.records.size() == 1);
  CHECK(fs::exists(result.records[0].root / "pkg" / "mod.py"));
  REQUIRE(result.diagnostics.size() == 1);
  CHECK(result.diagnostics[0].find("nowhere") != std::string::npos);

  // Pinned refs clone at the named branch.
  corpus::FetchResult pinned =
      corpus::fetch({{repo.string(), "pinned"}}, tmp.path / "clones2");
  REQUIRE(pinned.records.size() == 1);
  CHECK(fs::exists(pinned.records[0].root / "pkg" / "mod.py"));

  // A second fetch reuses the clone instead of failing.
  corpus::FetchResult again = corpus::fetch({{repo.string(), ""}}, dest);
  CHECK(again.records.size() == 1);

  // Empty manifests fetch nothing.
  CHECK(corpus::fetch({}, dest).records.empty());
}

namespace {

bmo::UsageIndex fixture_index() {
  auto roots = corpus::discover_projects(kFixtures / "corpus");
  corpus::IngestReport report = corpus::ingest(roots);
  std::vector<extractor::ObjectUsage> usages;
  for (const auto& project : report.projects) {
    for (const auto& module : project.modules) {
      try {
        auto more = extractor::extract_module_usages(module);
        usages.insert(usages.end(), more.begin(), more.end());
      } catch (const SyntaxError&) {
      }
    }
  }
  bmo::UsageIndex index = bmo::train(usages);
  index.corpus_fingerprint = corpus::corpus_fingerprint(report);
  return index;
}

std::vector<extractor::QueryContext> probe_queries() {
  std::vector<extractor::QueryContext> probes;
  std::mt19937 rng(5);
  const char* keys[] = {"open", "re.compile", "json.loads",
                        "logging.getLogger", "sqlite3.connect",
                        "collections.OrderedDict"};
  const char* methods[] = {"read", "write", "close", "match", "findall",
                           "get", "keys", "info", "error", "execute"};
  for (int i = 0; i < 60; ++i) {
    extractor::QueryContext q;
    q.object = "obj";
    q.type_keys = {keys[rng() % 6]};
    int n = static_cast<int>(rng() % 3);
    for (int j = 0; j < n; ++j) {
      q.vector.own[methods[rng() % 10]] += 1;
    }
    if (rng() % 3 == 0) q.vector.ctx[methods[rng() % 10]] += 1;
    probes.push_back(std::move(q));
  }
  return probes;
}

std::string recommendations_digest(const bmo::UsageIndex& index) {
  std::string out;
  for (const extractor::QueryContext& q : probe_queries()) {
    try {
      for (const bmo::Recommendation& r : bmo::recommend(q, index)) {
        out += r.method + ":" + std::to_string(r.score) + ":" +
               std::to_string(r.rank) + ";";
      }
    } catch (const Error& e) {
      out += std::string("err=") + e.what() + ";";
    }
    out += "\n";
  }
  return out;
}

}  // namespace

TEST_CASE("model files round-trip to identical recommendations") {
  TempDir tmp;
  bmo::UsageIndex index = fixture_index();
  fs::path model = tmp.path / "model.jsonl";
  corpus::save_index(index, model);
  bmo::UsageIndex loaded = corpus::load_index(model);
  CHECK(loaded.vector_count() == index.vector_count());
  CHECK(loaded.corpus_fingerprint == index.corpus_fingerprint);
  CHECK(recommendations_digest(loaded) == recommendations_digest(index));
}

TEST_CASE("empty indexes round-trip") {
  TempDir tmp;
  fs::path model = tmp.path / "empty.jsonl";
  corpus::save_index(bmo::UsageIndex{}, model);
  bmo::UsageIndex loaded = corpus::load_index(model);
  CHECK(loaded.empty());
}

TEST_CASE("malformed model files raise FormatError with the record number") {
  TempDir tmp;
  bmo::UsageIndex index = fixture_index();
  fs::path model = tmp.path / "model.jsonl";
  corpus::save_index(index, model);

  std::ifstream in(model);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() >= 3);

  // Truncated mid-record: the bad record is named.
  write_file(tmp.path / "truncated.jsonl",
             lines[0] + "\n" + lines[1] + "\n" +
                 lines[2].substr(0, lines[2].size() / 2));
  try {
    corpus::load_index(tmp.path / "truncated.jsonl");
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.record == 2);
  }

  // Unknown format version is rejected at the header.
  write_file(tmp.path / "version.jsonl",
             "{\"format_version\": 99}\n" + lines[1] + "\n");
  try {
    corpus::load_index(tmp.path / "version.jsonl");
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.record == 0);
  }

  write_file(tmp.path / "garbage.jsonl", "not json at all\n");
  CHECK_THROWS_AS(corpus::load_index(tmp.path / "garbage.jsonl"), FormatError);
  write_file(tmp.path / "empty_file.jsonl", "");
  CHECK_THROWS_AS(corpus::load_index(tmp.path / "empty_file.jsonl"),
                  FormatError);
  CHECK_THROWS_AS(corpus::load_index(tmp.path / "no_such.jsonl"), IoError);

  // A record whose vector has no own calls violates the index invariant.
  write_file(tmp.path / "no_own.jsonl",
             lines[0] + "\n{\"type_key\":\"open\",\"own\":{},\"ctx\":{}}\n");
  try {
    corpus::load_index(tmp.path / "no_own.jsonl");
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.record == 1);
  }
}

TEST_CASE("project ids are stable hashes of the origin") {
  CHECK(corpus::project_id_for("https://host/r.git") ==
        corpus::project_id_for("https://host/r.git"));
  CHECK(corpus::project_id_for("https://host/a.git") !=
        corpus::project_id_for("https://host/b.git"));
  CHECK(corpus::fnv1a64("") == 14695981039346656037ull);
}
