#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

const std::string kBin = APIREC_BIN;
const fs::path kFixtures = APIREC_FIXTURES_DIR;

struct RunResult {
  int status = -1;
  std::string out;
};

RunResult run(const std::string& args, const std::string& stdin_text = "") {
  fs::path dir = fs::temp_directory_path();
  static std::mt19937_64 rng(std::random_device{}());
  fs::path in_file = dir / ("apirec_in_" + std::to_string(rng()));
  {
    std::ofstream in(in_file, std::ios::binary);
    in << stdin_text;
  }
  std::string cmd =
      kBin + " " + args + " < '" + in_file.string() + "' 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult result;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) {
    result.out.append(buf, n);
  }
  int rc = pclose(pipe);
  result.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  std::error_code ec;
  fs::remove(in_file, ec);
  return result;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("apirec_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string fixture(const std::string& rel) {
  return (kFixtures / rel).string();
}

}  // namespace

TEST_CASE("train writes a model and query ranks completions from it") {
  TempDir tmp;
  std::string model = (tmp.path / "model.jsonl").string();

  RunResult train =
      run("train --corpus " + fixture("corpus") + " --out " + model);
  CHECK(train.status == 0);
  REQUIRE(fs::exists(model));
  {
    std::ifstream in(model);
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    CHECK(content.find("\"type_key\":\"open\"") != std::string::npos);
    CHECK(content.find("\"format_version\":1") != std::string::npos);
  }

  RunResult query = run("query --model " + model + " --file " +
                        fixture("snippets/file_copy.py") +
                        " --line 12 --col 3");
  CHECK(query.status == 0);
  CHECK(query.out.find("\"ok\":true") != std::string::npos);
  CHECK(query.out.find("\"name\":\"close\"") != std::string::npos);

  SUBCASE("a cursor away from any tracked dot answers ok=false, exit 0") {
    RunResult miss = run("query --model " + model + " --file " +
                         fixture("snippets/file_copy.py") +
                         " --line 1 --col 4");
    CHECK(miss.status == 0);
    CHECK(miss.out.find("\"ok\":false") != std::string::npos);
    CHECK(miss.out.find("\"candidates\":[]") != std::string::npos);
  }

  SUBCASE("serve answers the same requests as query, in order") {
    std::ifstream in(fixture("snippets/file_copy.py"), std::ios::binary);
    std::string source((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
    std::string escaped;
    for (char c : source) {
      switch (c) {
        case '\\': escaped += "\\\\"; break;
        case '"': escaped += "\\\""; break;
        case '\n': escaped += "\\n"; break;
        case '\t': escaped += "\\t"; break;
        case '\r': escaped += "\\r"; break;
        default: escaped += c;
      }
    }
    std::string request =
        "{\"source\":\"" + escaped + "\",\"line\":12,\"col\":3}";
    RunResult serve = run("serve --model " + model,
                          request + "\n" + "garbage line\n" + request + "\n");
    CHECK(serve.status == 0);
    std::vector<std::string> lines;
    std::istringstream stream(serve.out);
    std::string line;
    while (std::getline(stream, line)) lines.push_back(line);
    REQUIRE(lines.size() == 3);
    CHECK(lines[0] == query.out.substr(0, query.out.size() - 1));
    CHECK(lines[1].find("\"ok\":false") != std::string::npos);
    CHECK(lines[2] == lines[0]);  // stateless: identical request, answer
  }
}

TEST_CASE("train tolerates an empty corpus and fails on a missing one") {
  TempDir tmp;
  fs::create_directories(tmp.path / "empty_corpus");
  RunResult empty = run("train --corpus " +
                        (tmp.path / "empty_corpus").string() + " --out " +
                        (tmp.path / "m.jsonl").string());
  CHECK(empty.status == 0);
  CHECK(fs::exists(tmp.path / "m.jsonl"));

  RunResult missing = run("train --corpus " +
                          (tmp.path / "no_such_dir").string() + " --out " +
                          (tmp.path / "m2.jsonl").string());
  CHECK(missing.status != 0);
}

TEST_CASE("query with a missing model exits nonzero") {
  RunResult result = run("query --model /no/such/model.jsonl --file " +
                         fixture("snippets/file_copy.py") +
                         " --line 12 --col 3");
  CHECK(result.status != 0);
}

TEST_CASE("train can emit the extracted usage records") {
  TempDir tmp;
  std::string usages = (tmp.path / "usages.jsonl").string();
  RunResult result =
      run("train --corpus " + fixture("snippets") + " --out " +
          (tmp.path / "m.jsonl").string() + " --emit-usages " + usages);
  CHECK(result.status == 0);
  std::ifstream in(usages);
  std::string line;
  size_t count = 0;
  bool has_own = false;
  while (std::getline(in, line)) {
    ++count;
    if (line.find("\"own_calls\"") != std::string::npos) has_own = true;
  }
  CHECK(count >= 4);
  CHECK(has_own);
}

TEST_CASE("analyze dumps the node table in the documented layout") {
  RunResult result = run("analyze --file " + fixture("snippets/file_copy.py") +
                         " --emit-graph");
  CHECK(result.status == 0);
  CHECK(result.out.find("No\tNode\tEntry Pts\tExit Pts\tReaching Defs\n") !=
        std::string::npos);
  CHECK(result.out.find("6\tfo calls close\t{3,4,5}\t7\t{fo:open, fi:open}") !=
        std::string::npos);
}

TEST_CASE("eval prints the metric table and writes the JSON report") {
  TempDir tmp;
  std::string json_path = (tmp.path / "report.json").string();
  RunResult result = run("eval --corpus " + fixture("corpus") +
                         " --folds 10 --seed 42 --json " + json_path);
  CHECK(result.status == 0);
  CHECK(result.out.rfind("Library\tMRR\tRecall\n", 0) == 0);
  CHECK(result.out.find("overall\t") != std::string::npos);
  std::ifstream in(json_path);
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  CHECK(content.find("\"corpus_fingerprint\"") != std::string::npos);
  CHECK(content.find("\"per_fold\"") != std::string::npos);

  SUBCASE("library filters narrow the table") {
    RunResult filtered = run("eval --corpus " + fixture("corpus") +
                             " --folds 10 --seed 42 --libraries re json");
    CHECK(filtered.status == 0);
    CHECK(filtered.out.find("\nre\t") != std::string::npos);
    CHECK(filtered.out.find("\nopen\t") == std::string::npos);
  }
}

TEST_CASE("fetch clones manifest entries and feeds the eval harness") {
  if (std::system("git --version >/dev/null 2>&1") != 0) {
    MESSAGE("git not available; skipping");
    return;
  }
  TempDir tmp;
  auto sh = [](const std::string& c) {
    return std::system((c + " >/dev/null 2>&1").c_str()) == 0;
  };
  auto make_repo = [&](const std::string& name) {
    fs::path repo = tmp.path / name;
    fs::create_directories(repo);
    std::ofstream f(repo / "mod.py");
    f << "fh = open(p)\nfh.read()\nfh.read()\nfh.close()\n";
    f.close();
    REQUIRE(sh("git -C '" + repo.string() + "' init -q"));
    REQUIRE(sh("git -C '" + repo.string() +
               "' -c user.email=t@t -c user.name=t add -A"));
    REQUIRE(sh("git -C '" + repo.string() +
               "' -c user.email=t@t -c user.name=t commit -qm seed"));
    return repo;
  };
  fs::path repo_a = make_repo("seed_repo");
  fs::path repo_b = make_repo("twin_repo");

  fs::path workdir = tmp.path / "work";
  fs::create_directories(workdir);
  {
    std::ofstream m(workdir / "manifest.jsonl");
    m << "{\"origin\": \"" << repo_a.string() << "\"}\n";
    m << "{\"origin\": \"" << repo_b.string() << "\"}\n";
  }
  RunResult result = run("--workdir " + workdir.string() +
                         " fetch --manifest manifest.jsonl");
  CHECK(result.status == 0);
  CHECK(result.out.find("\"project_id\"") != std::string::npos);
  CHECK(fs::exists(workdir / "seed_repo" / "mod.py"));
  CHECK(fs::exists(workdir / "twin_repo" / "mod.py"));

  // The fetched workdir is a corpus: the whole manifest-to-report chain.
  std::error_code ec;
  fs::remove(workdir / "manifest.jsonl", ec);
  RunResult eval = run("eval --corpus " + workdir.string() +
                       " --folds 2 --seed 1");
  CHECK(eval.status == 0);
  CHECK(eval.out.rfind("Library\tMRR\tRecall\n", 0) == 0);
  CHECK(eval.out.find("\nopen\t") != std::string::npos);
}
