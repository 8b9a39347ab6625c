// apirec: mines library-object usage patterns from Python corpora and ranks
// API completion candidates with a nearest-neighbor vote.
//
//   fetch    clone the repositories of a manifest
//   train    mine a corpus into a model file
//   query    rank completions for one cursor position
//   eval     cross-validated MRR/Recall report
//   serve    JSON-per-line completion loop over stdin/stdout
//   analyze  per-file debug dumps (program graph, usage records)
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "apirec/completion.hpp"
#include "apirec/corpus.hpp"
#include "apirec/errors.hpp"
#include "apirec/evalharness.hpp"

namespace fs = std::filesystem;
using namespace apirec;

namespace {

fs::path resolve(const fs::path& workdir, const fs::path& path) {
  return path.is_absolute() ? path : workdir / path;
}

std::string read_file_or_die(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

corpus::IngestReport ingest_corpus(const fs::path& corpus_dir) {
  corpus::IngestReport report =
      corpus::ingest(corpus::discover_projects(corpus_dir));
  for (const std::string& d : report.diagnostics) {
    std::cerr << "apirec: " << d << "\n";
  }
  return report;
}

int cmd_fetch(const fs::path& workdir, const fs::path& manifest_path) {
  corpus::CorpusManifest manifest =
      corpus::load_manifest(resolve(workdir, manifest_path));
  corpus::FetchResult result = corpus::fetch(manifest, workdir);
  for (const std::string& d : result.diagnostics) {
    std::cerr << "apirec: " << d << "\n";
  }
  for (const corpus::ProjectRecord& r : result.records) {
    std::cout << "{\"project_id\":\"" << r.project_id << "\",\"root\":\""
              << r.root.generic_string() << "\"}\n";
  }
  return 0;
}

int cmd_train(const fs::path& workdir, const fs::path& corpus_path,
              const fs::path& model_out, const std::string& emit_usages) {
  corpus::IngestReport report = ingest_corpus(resolve(workdir, corpus_path));
  std::vector<pyast::SourceModule> modules;
  for (const corpus::IngestedProject& project : report.projects) {
    modules.insert(modules.end(), project.modules.begin(),
                   project.modules.end());
  }
  extractor::CorpusUsages extracted = extractor::extract_many(modules);
  for (const std::string& d : extracted.diagnostics) {
    std::cerr << "apirec: " << d << "\n";
  }
  std::vector<extractor::ObjectUsage> usages;
  for (std::vector<extractor::ObjectUsage>& m : extracted.per_module) {
    usages.insert(usages.end(), std::make_move_iterator(m.begin()),
                  std::make_move_iterator(m.end()));
  }
  size_t files = modules.size();
  if (!emit_usages.empty()) {
    std::ofstream out(resolve(workdir, emit_usages));
    if (!out) throw IoError("cannot write " + emit_usages);
    for (const extractor::ObjectUsage& u : usages) {
      out << extractor::usage_to_json(u) << "\n";
    }
  }
  bmo::UsageIndex index = bmo::train(usages);
  index.corpus_fingerprint = corpus::corpus_fingerprint(report);
  corpus::save_index(index, resolve(workdir, model_out));
  if (report.projects.empty() || index.empty()) {
    std::cerr << "apirec: warning: empty corpus, model has no vectors\n";
  }
  std::cerr << "apirec: trained on " << report.projects.size() << " projects, "
            << files << " files; " << index.vector_count() << " usages over "
            << index.types().size() << " type keys ["
            << pyast::grammar_version() << "]\n";
  return 0;
}

int cmd_query(const fs::path& workdir, const fs::path& model_path,
              const fs::path& file, int line, int col, int limit) {
  bmo::UsageIndex index = corpus::load_index(resolve(workdir, model_path));
  cli::CompletionRequest request;
  request.source = read_file_or_die(resolve(workdir, file));
  request.line = line;
  request.col = col;
  request.limit = limit;
  std::cout << cli::response_to_json(cli::handle_request(request, index))
            << "\n";
  return 0;
}

int cmd_eval(const fs::path& workdir, const fs::path& corpus_path, int folds,
             uint64_t seed, const std::vector<std::string>& libraries,
             const std::string& json_out) {
  corpus::IngestReport report = ingest_corpus(resolve(workdir, corpus_path));
  evalharness::EvalReport result =
      evalharness::run_cv(report, folds, seed, libraries);
  std::cout << evalharness::report_to_table(result);
  if (!json_out.empty()) {
    std::ofstream out(resolve(workdir, json_out));
    if (!out) throw IoError("cannot write " + json_out);
    out << evalharness::report_to_json(result);
  }
  return 0;
}

int cmd_serve(const fs::path& workdir, const fs::path& model_path) {
  bmo::UsageIndex index = corpus::load_index(resolve(workdir, model_path));
  cli::run_serve(std::cin, std::cout, index);
  return 0;
}

int cmd_analyze(const fs::path& workdir, const fs::path& file,
                bool emit_graph, bool emit_usages) {
  pyast::SourceModule module{"", file.generic_string(),
                             read_file_or_die(resolve(workdir, file))};
  pyast::AstNode ast = pyast::parse_module(module);
  extractor::ImportTable imports = extractor::resolve_imports(ast);
  auto patches = extractor::collect_patches(ast, imports);
  for (const flowgraph::ScopeRef& scope : flowgraph::collect_scopes(ast)) {
    flowgraph::ProgramGraph graph =
        flowgraph::build_graph(*scope.body, imports, patches);
    flowgraph::ReachingDefs defs = flowgraph::reaching_definitions(graph);
    if (emit_graph && !graph.nodes.empty()) {
      std::cout << "# " << scope.name << "\n"
                << flowgraph::dump_node_table(graph, defs);
    }
    if (emit_usages) {
      for (extractor::ObjectUsage& usage :
           extractor::extract_usages(graph, defs)) {
        usage.path = module.path;
        std::cout << extractor::usage_to_json(usage) << "\n";
      }
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"API completion ranking from mined library usage patterns"};
  app.require_subcommand(1);
  // --workdir may come before or after the subcommand.
  app.fallthrough();

  std::string workdir = ".";
  app.add_option("--workdir", workdir,
                 "base directory for relative paths (default: .)");

  auto* fetch = app.add_subcommand("fetch", "clone manifest repositories");
  std::string manifest;
  fetch->add_option("--manifest", manifest, "line-delimited JSON manifest")
      ->required();

  auto* train = app.add_subcommand("train", "mine a corpus into a model");
  std::string train_corpus, train_out, train_emit_usages;
  train->add_option("--corpus", train_corpus, "corpus directory")->required();
  train->add_option("--out", train_out, "model file to write")->required();
  train->add_option("--emit-usages", train_emit_usages,
                    "also write extracted usage records (JSONL)");

  auto* query = app.add_subcommand("query", "rank completions at a cursor");
  std::string query_model, query_file;
  int query_line = 1, query_col = 0, query_limit = bmo::kRecommendationLimit;
  query->add_option("--model", query_model, "model file")->required();
  query->add_option("--file", query_file, "source buffer")->required();
  query->add_option("--line", query_line, "1-based cursor line")->required();
  query->add_option("--col", query_col, "0-based cursor column")->required();
  query->add_option("--limit", query_limit, "max candidates (default 10)");

  auto* eval = app.add_subcommand("eval", "cross-validated MRR/Recall");
  std::string eval_corpus, eval_json;
  int eval_folds = 10;
  uint64_t eval_seed = 0;
  std::vector<std::string> eval_libraries;
  eval->add_option("--corpus", eval_corpus, "corpus directory")->required();
  eval->add_option("--folds", eval_folds, "fold count (default 10)");
  eval->add_option("--seed", eval_seed, "shuffle seed");
  eval->add_option("--libraries", eval_libraries,
                   "restrict to these libraries");
  eval->add_option("--json", eval_json, "also write the JSON report here");

  auto* serve = app.add_subcommand("serve", "completion loop on stdin/stdout");
  std::string serve_model;
  serve->add_option("--model", serve_model, "model file")->required();

  auto* analyze = app.add_subcommand("analyze", "per-file debug dumps");
  std::string analyze_file;
  bool analyze_graph = false, analyze_usages = false;
  analyze->add_option("--file", analyze_file, "source file")->required();
  analyze->add_flag("--emit-graph", analyze_graph,
                    "print the program-graph node table per scope");
  analyze->add_flag("--emit-usages", analyze_usages,
                    "print extracted usage records (JSONL)");

  CLI11_PARSE(app, argc, argv);

  try {
    fs::path wd = workdir;
    if (fetch->parsed()) return cmd_fetch(wd, manifest);
    if (train->parsed()) {
      return cmd_train(wd, train_corpus, train_out, train_emit_usages);
    }
    if (query->parsed()) {
      return cmd_query(wd, query_model, query_file, query_line, query_col,
                       query_limit);
    }
    if (eval->parsed()) {
      return cmd_eval(wd, eval_corpus, eval_folds, eval_seed, eval_libraries,
                      eval_json);
    }
    if (serve->parsed()) return cmd_serve(wd, serve_model);
    if (analyze->parsed()) {
      return cmd_analyze(wd, analyze_file, analyze_graph, analyze_usages);
    }
  } catch (const std::exception& e) {
    std::cerr << "apirec: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
