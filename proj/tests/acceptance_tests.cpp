// Acceptance suite: runs every promised behavior end to end and prints one
// PASS/FAIL line per criterion. Exits nonzero if any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "apirec/bmo.hpp"
#include "apirec/corpus.hpp"
#include "apirec/errors.hpp"
#include "apirec/evalharness.hpp"
#include "apirec/extractor.hpp"
#include "apirec/flowgraph.hpp"
#include "apirec/pyast.hpp"

using namespace apirec;
namespace fs = std::filesystem;

namespace {

fs::path g_fixtures = APIREC_FIXTURES_DIR;
std::vector<std::string> g_notes;

void note(const std::string& s) { g_notes.push_back(s); }

std::string read_fixture(const std::string& rel) {
  std::ifstream in(g_fixtures / rel, std::ios::binary);
  if (!in) throw IoError("missing fixture " + rel);
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

struct Analysis {
  pyast::AstNode ast;
  flowgraph::ProgramGraph graph;
  flowgraph::ReachingDefs defs;
};

Analysis analyze(const std::string& text) {
  Analysis a;
  a.ast = pyast::parse_module(pyast::SourceModule{"t", "mem.py", text});
  extractor::ImportTable imports = extractor::resolve_imports(a.ast);
  auto patches = extractor::collect_patches(a.ast, imports);
  a.graph = flowgraph::build_graph(a.ast, imports, patches);
  a.defs = flowgraph::reaching_definitions(a.graph);
  return a;
}

// --- criterion 1: golden node table ----------------------------------------

const char* kGoldenNodeTable =
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

bool criterion_1_golden_table() {
  auto start = std::chrono::steady_clock::now();
  Analysis a = analyze(read_fixture("snippets/file_copy.py"));
  std::string table = flowgraph::dump_node_table(a.graph, a.defs);
  double elapsed = seconds_since(start);
  if (table != kGoldenNodeTable) {
    note("node table mismatch:\n" + table);
    return false;
  }
  if (elapsed >= 1.0) {
    note("took " + std::to_string(elapsed) + "s");
    return false;
  }
  return true;
}

// --- criterion 2: union type at the merged close call ----------------------

bool criterion_2_union_types() {
  auto start = std::chrono::steady_clock::now();
  Analysis a = analyze(read_fixture("snippets/file_copy_union.py"));
  const flowgraph::GraphNode* close_call = nullptr;
  for (const auto& n : a.graph.nodes) {
    if (n.event.kind == flowgraph::EventKind::MethodCall &&
        n.event.object == "fo" && n.event.method == "close") {
      close_call = &n;
    }
  }
  if (!close_call) {
    note("no close call found");
    return false;
  }
  auto keys = flowgraph::ReachingDefs::keys_of(a.defs.at(close_call->id), "fo");
  double elapsed = seconds_since(start);
  if (keys != std::set<std::string>{"open", "os.path"}) {
    std::string got;
    for (const auto& k : keys) got += k + " ";
    note("reaching set was: " + got);
    return false;
  }
  return elapsed < 1.0;
}

// --- criterion 3: extracted call sequences ----------------------------------

bool criterion_3_extraction() {
  auto usages = extractor::extract_module_usages(
      pyast::SourceModule{"t", "mem.py", read_fixture("snippets/file_copy.py")});
  std::map<std::string, extractor::ObjectUsage> by_object;
  for (auto& u : usages) by_object[u.object] = u;
  if (by_object.size() != 2) {
    note("expected 2 usages, got " + std::to_string(by_object.size()));
    return false;
  }
  using Counts = std::map<std::string, int>;
  // Own-call multiplicities count static call sites: both branch arms'
  // writes contribute.
  bool fi_ok =
      by_object["fi"].own_calls == Counts{{"readlines", 1}, {"close", 1}} &&
      by_object["fi"].context_calls == Counts{{"write", 2}, {"close", 1}};
  bool fo_ok =
      by_object["fo"].own_calls == Counts{{"write", 2}, {"close", 1}} &&
      by_object["fo"].context_calls == Counts{{"readlines", 1}, {"close", 1}};
  if (!fi_ok) note("fi usage mismatch");
  if (!fo_ok) note("fo usage mismatch");
  return fi_ok && fo_ok;
}

// --- criterion 4: metric oracles --------------------------------------------

bool criterion_4_metrics() {
  // Worked example: the relevant method at rank 2 of a returned list.
  if (evalharness::mrr({1.0 / 2}) != 0.5) {
    note("mrr([rank 2]) != 0.5");
    return false;
  }
  if (evalharness::recall({true}) != 1.0) {
    note("single-hit recall != 1.0");
    return false;
  }
  // Randomized rank lists against exact integer-ratio recomputation.
  constexpr long long kScale = 360360;  // lcm(1..15)
  std::mt19937 rng(4242);
  for (int round = 0; round < 1000; ++round) {
    size_t n = 1 + rng() % 50;
    std::vector<double> rrs;
    std::vector<bool> hits;
    long long scaled = 0;
    long long hit_count = 0;
    for (size_t i = 0; i < n; ++i) {
      if (rng() % 3 == 0) {
        rrs.push_back(0.0);
        hits.push_back(false);
      } else {
        int rank = 1 + static_cast<int>(rng() % 15);
        rrs.push_back(1.0 / rank);
        hits.push_back(true);
        scaled += kScale / rank;
        ++hit_count;
      }
    }
    double brute_mrr =
        static_cast<double>(scaled) / (static_cast<double>(kScale) * n);
    double brute_recall = static_cast<double>(hit_count) / n;
    if (std::abs(evalharness::mrr(rrs) - brute_mrr) > 1e-12 ||
        std::abs(evalharness::recall(hits) - brute_recall) > 1e-12) {
      note("metric mismatch at round " + std::to_string(round));
      return false;
    }
  }
  return true;
}

// --- criterion 5: neighbor correctness --------------------------------------

bool criterion_5_neighbors() {
  std::mt19937 rng(555);
  const int kVocab = 8;
  auto random_vec = [&](bool allow_empty) {
    bmo::FrequencyVector v;
    for (int m = 0; m < kVocab; ++m) {
      std::string name = "m" + std::to_string(m);
      if (rng() % 3 == 0) v.own[name] = 1 + static_cast<int>(rng() % 4);
      if (rng() % 4 == 0) v.ctx[name] = 1 + static_cast<int>(rng() % 3);
    }
    if (!allow_empty && v.own.empty()) v.own["m0"] = 1;
    return v;
  };
  // Independent oracle: walk the union of feature names, counting only the
  // ones the query holds, then keep every index at the minimum.
  auto oracle_distance = [](const bmo::FrequencyVector& q,
                            const bmo::FrequencyVector& c) {
    long long d = 0;
    auto side = [&](const std::map<std::string, int>& qm,
                    const std::map<std::string, int>& cm) {
      std::set<std::string> all;
      for (auto& [k, v] : qm) all.insert(k);
      for (auto& [k, v] : cm) all.insert(k);
      for (const std::string& k : all) {
        auto qi = qm.find(k);
        if (qi == qm.end()) continue;  // candidate-only: no contribution
        auto ci = cm.find(k);
        int cv = ci == cm.end() ? 0 : ci->second;
        d += std::llabs(static_cast<long long>(qi->second) - cv);
      }
    };
    side(q.own, c.own);
    side(q.ctx, c.ctx);
    return d;
  };
  for (int round = 0; round < 1000; ++round) {
    size_t n = 1 + rng() % 50;
    std::vector<bmo::TrainingVector> candidates(n);
    for (auto& c : candidates) c.vec = random_vec(false);
    bmo::FrequencyVector query = random_vec(true);

    long long best = -1;
    for (const auto& c : candidates) {
      long long d = oracle_distance(query, c.vec);
      if (best < 0 || d < best) best = d;
    }
    std::vector<size_t> expected;
    for (size_t i = 0; i < n; ++i) {
      if (oracle_distance(query, candidates[i].vec) == best) {
        expected.push_back(i);
      }
    }
    if (bmo::nearest(query, candidates) != expected) {
      note("neighbor mismatch at round " + std::to_string(round));
      return false;
    }
  }
  return true;
}

// --- criterion 6: self-retrieval --------------------------------------------

bool criterion_6_self_retrieval() {
  std::mt19937 rng(6001);
  const std::vector<std::string> vocab = {"ma", "mb", "mc", "md", "me",
                                          "mf", "mg", "mh", "mi", "mj"};
  // Five archetypal call sequences with noise keep neighbors clustered.
  std::vector<std::vector<int>> archetypes = {
      {0, 1, 1, 2}, {2, 3, 4}, {5, 6, 5, 7}, {8, 9, 8}, {0, 4, 7, 9}};
  struct Sample {
    std::vector<int> calls;
  };
  std::vector<Sample> samples;
  std::vector<extractor::ObjectUsage> usages;
  for (int i = 0; i < 100; ++i) {
    Sample s;
    s.calls = archetypes[rng() % archetypes.size()];
    if (rng() % 3 == 0) {
      s.calls.push_back(static_cast<int>(rng() % vocab.size()));
    }
    extractor::ObjectUsage u;
    u.type_key = "lib.make";
    for (int call : s.calls) u.own_calls[vocab[call]] += 1;
    usages.push_back(u);
    samples.push_back(std::move(s));
  }
  bmo::UsageIndex index = bmo::train(usages);
  const std::vector<bmo::TrainingVector>& vectors = *index.find("lib.make");

  int eligible = 0;
  int in_top10 = 0;
  for (const Sample& s : samples) {
    if (s.calls.size() < 2) continue;
    ++eligible;
    std::string removed = vocab[s.calls.back()];
    extractor::QueryContext query;
    query.object = "obj";
    query.type_keys = {"lib.make"};
    for (size_t i = 0; i + 1 < s.calls.size(); ++i) {
      query.vector.own[vocab[s.calls[i]]] += 1;
    }
    bool neighbor_has_removed = false;
    for (size_t i : bmo::nearest(query.vector, vectors)) {
      if (vectors[i].vec.own.count(removed)) neighbor_has_removed = true;
    }
    bool found = false;
    int found_rank = 0;
    try {
      for (const auto& rec : bmo::recommend(query, index)) {
        if (rec.method == removed) {
          found = true;
          found_rank = rec.rank;
          if (rec.score <= 0) {
            note("non-positive score surfaced");
            return false;
          }
        }
      }
    } catch (const NoRecommendation&) {
    }
    if (neighbor_has_removed) {
      // The removed call must score positive... unless the query already
      // held enough residual count to cancel the vote; with archetypal
      // duplicates the vote always survives, so treat absence as failure.
      if (!found) {
        note("removed method lost despite a neighbor containing it");
        return false;
      }
    }
    if (found && found_rank <= 10) ++in_top10;
    if (!found && neighbor_has_removed) return false;
  }
  if (eligible == 0) {
    note("no eligible vectors");
    return false;
  }
  double rate = static_cast<double>(in_top10) / eligible;
  note("self-retrieval top-10 rate: " + std::to_string(rate) + " over " +
       std::to_string(eligible) + " queries");
  return rate >= 0.95;
}

// --- criteria 7/8/10: cross-validation on the bundled corpus ---------------

corpus::IngestReport ingest_bundled() {
  return corpus::ingest(corpus::discover_projects(g_fixtures / "corpus"));
}

bool criterion_7_leave_one_out() {
  corpus::IngestReport corpus_report = ingest_bundled();
  int k = static_cast<int>(corpus_report.projects.size());
  if (k < 10) {
    note("bundled corpus has fewer than 10 projects");
    return false;
  }
  evalharness::EvalReport report =
      evalharness::run_cv(corpus_report, k, /*seed=*/42);
  note("leave-one-out: MRR " + std::to_string(report.overall.mrr) +
       ", Recall " + std::to_string(report.overall.recall) + " over " +
       std::to_string(report.overall.query_count) + " queries");
  return report.overall.recall >= 0.9 && report.overall.mrr >= 0.7;
}

bool criterion_8_report_shape() {
  evalharness::EvalReport report =
      evalharness::run_cv(ingest_bundled(), 10, /*seed=*/7);
  std::string table = evalharness::report_to_table(report);
  if (table.rfind("Library\tMRR\tRecall\n", 0) != 0) {
    note("table header missing");
    return false;
  }
  // Every data row carries library, MRR, Recall; MRR <= Recall throughout.
  std::istringstream lines(table);
  std::string line;
  std::getline(lines, line);  // header
  size_t rows = 0;
  while (std::getline(lines, line)) {
    std::istringstream cells(line);
    std::string library, mrr_text, recall_text;
    if (!std::getline(cells, library, '\t') ||
        !std::getline(cells, mrr_text, '\t') ||
        !std::getline(cells, recall_text)) {
      note("bad row: " + line);
      return false;
    }
    if (std::stod(mrr_text) > std::stod(recall_text) + 1e-9) {
      note("MRR > Recall in row: " + line);
      return false;
    }
    ++rows;
  }
  if (rows < 2) {
    note("no data rows");
    return false;
  }
  for (const auto& row : report.per_library) {
    if (row.mrr > row.recall + 1e-12) return false;
  }
  for (const auto& row : report.per_fold) {
    if (row.mrr > row.recall + 1e-12) return false;
  }
  return report.overall.mrr <= report.overall.recall + 1e-12;
}

bool criterion_10_determinism() {
  corpus::IngestReport corpus_report = ingest_bundled();
  evalharness::EvalReport a = evalharness::run_cv(corpus_report, 10, 42);
  evalharness::EvalReport b = evalharness::run_cv(corpus_report, 10, 42);
  return evalharness::report_to_json(a) == evalharness::report_to_json(b) &&
         evalharness::report_to_table(a) == evalharness::report_to_table(b);
}

// --- criterion 9: model round-trip -------------------------------------------

bool criterion_9_round_trip() {
  corpus::IngestReport corpus_report = ingest_bundled();
  std::vector<extractor::ObjectUsage> usages;
  for (const auto& project : corpus_report.projects) {
    for (const auto& module : project.modules) {
      try {
        auto more = extractor::extract_module_usages(module);
        usages.insert(usages.end(), more.begin(), more.end());
      } catch (const SyntaxError&) {
      }
    }
  }
  bmo::UsageIndex index = bmo::train(usages);
  index.corpus_fingerprint = corpus::corpus_fingerprint(corpus_report);

  // 60 probe queries spanning every type key, cold and warm.
  std::vector<extractor::QueryContext> probes;
  std::mt19937 rng(99);
  std::vector<std::string> keys;
  for (const auto& [key, vectors] : index.types()) keys.push_back(key);
  const char* methods[] = {"read", "write", "close", "match", "findall",
                           "get", "keys", "info", "error", "execute"};
  for (int i = 0; i < 60; ++i) {
    extractor::QueryContext q;
    q.object = "obj";
    q.type_keys = {keys[rng() % keys.size()]};
    for (unsigned j = rng() % 3; j > 0; --j) {
      q.vector.own[methods[rng() % 10]] += 1;
    }
    probes.push_back(std::move(q));
  }
  auto digest = [&](const bmo::UsageIndex& idx) {
    std::string out;
    for (const auto& q : probes) {
      try {
        for (const auto& r : bmo::recommend(q, idx)) {
          out += r.method + "/" + std::to_string(r.score) + "/" +
                 std::to_string(r.rank) + ";";
        }
      } catch (const Error& e) {
        out += std::string("!") + e.what();
      }
      out += "\n";
    }
    return out;
  };

  fs::path dir = fs::temp_directory_path() /
                 ("apirec_accept_" + std::to_string(rng()));
  fs::create_directories(dir);
  struct Cleanup {
    fs::path dir;
    ~Cleanup() {
      std::error_code ec;
      fs::remove_all(dir, ec);
    }
  } cleanup{dir};

  fs::path model = dir / "model.jsonl";
  corpus::save_index(index, model);
  bmo::UsageIndex loaded = corpus::load_index(model);
  if (digest(loaded) != digest(index)) {
    note("round-trip changed recommendations");
    return false;
  }

  // Corruption must be detected, never silently misread.
  std::ifstream in(model);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  auto expect_format_error = [&](const std::string& name,
                                 const std::string& content) {
    fs::path p = dir / name;
    std::ofstream out(p, std::ios::binary);
    out << content;
    out.close();
    try {
      corpus::load_index(p);
      note("corrupted file " + name + " loaded without error");
      return false;
    } catch (const FormatError&) {
      return true;
    }
  };
  std::string truncated = lines[0] + "\n" + lines[1] + "\n" +
                          lines[2].substr(0, lines[2].size() / 3);
  std::string flipped = lines[0] + "\n" + lines[1];
  flipped[flipped.size() / 2] = '\x01';
  return expect_format_error("truncated.jsonl", truncated) &&
         expect_format_error("flipped.jsonl", flipped + "\n") &&
         expect_format_error("version.jsonl",
                             "{\"format_version\": 2}\n" + lines[1] + "\n");
}

struct Criterion {
  int id;
  const char* description;
  std::function<bool()> run;
};

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_fixtures = argv[1];

  std::vector<Criterion> criteria = {
      {1, "program graph reproduces the golden node table, under 1s",
       criterion_1_golden_table},
      {2, "branch reassignment yields the {open, os.path} union at the close",
       criterion_2_union_types},
      {3, "extracted call sequences and static-site multiplicities",
       criterion_3_extraction},
      {4, "MRR/Recall worked examples and 1000-case brute-force agreement",
       criterion_4_metrics},
      {5, "neighbor sets equal an exhaustive minimum-distance scan (1000 cases)",
       criterion_5_neighbors},
      {6, "self-retrieval: removed last call resurfaces in the top 10 (>=95%)",
       criterion_6_self_retrieval},
      {7, "leave-one-out on the bundled corpus: Recall >= 0.9, MRR >= 0.7",
       criterion_7_leave_one_out},
      {8, "report has the Library/MRR/Recall shape and MRR <= Recall holds",
       criterion_8_report_shape},
      {9, "model round-trip preserves answers; corruption raises FormatError",
       criterion_9_round_trip},
      {10, "fixed seed and corpus produce byte-identical reports",
       criterion_10_determinism},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    g_notes.clear();
    bool ok = false;
    try {
      ok = c.run();
    } catch (const std::exception& e) {
      note(std::string("exception: ") + e.what());
    }
    std::printf("%s criterion %2d: %s\n", ok ? "PASS" : "FAIL", c.id,
                c.description);
    for (const std::string& n : g_notes) {
      std::printf("       - %s\n", n.c_str());
    }
    if (!ok) ++failures;
  }
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
