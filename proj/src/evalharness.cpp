#include "apirec/evalharness.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <cstdio>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "apirec/bmo.hpp"
#include "apirec/errors.hpp"

namespace apirec::evalharness {

using extractor::ObjectUsage;
using flowgraph::Definition;
using flowgraph::EventKind;
using flowgraph::GraphNode;
using nlohmann::json;
using pyast::SourceModule;

namespace {

std::string library_root(const std::string& type_key) {
  auto dot = type_key.find('.');
  return dot == std::string::npos ? type_key : type_key.substr(0, dot);
}

// The `.` token sits at the first non-space byte after the receiver.
size_t dot_position(const std::string& text, uint32_t recv_end) {
  size_t pos = recv_end;
  while (pos < text.size() &&
         std::isspace(static_cast<unsigned char>(text[pos]))) {
    ++pos;
  }
  return pos;  // text[pos] == '.' for every well-formed attribute call
}

}  // namespace

std::vector<EvalQuery> generate_queries(
    const std::vector<SourceModule>& modules,
    const flowgraph::BuildOptions& options) {
  std::vector<EvalQuery> queries;
  for (const SourceModule& module : modules) {
    pyast::AstNode ast;
    try {
      ast = pyast::parse_module(module);
    } catch (const SyntaxError&) {
      continue;  // no queries from files the analysis cannot read
    }
    extractor::ImportTable imports = extractor::resolve_imports(ast);
    auto patches = extractor::collect_patches(ast, imports);

    struct Site {
      size_t dot;
      EvalQuery query;
    };
    std::vector<Site> sites;
    for (const flowgraph::ScopeRef& scope : flowgraph::collect_scopes(ast)) {
      flowgraph::ProgramGraph graph =
          flowgraph::build_graph(*scope.body, imports, patches, options);
      flowgraph::ReachingDefs defs = flowgraph::reaching_definitions(graph);
      for (const GraphNode& node : graph.nodes) {
        if (node.event.kind != EventKind::MethodCall) continue;
        // Attribute the query to the receiver's most recent definition.
        const Definition* latest = nullptr;
        for (const Definition& d : defs.at(node.id)) {
          if (d.object != node.event.object) continue;
          if (!latest || d.def_node > latest->def_node) latest = &d;
        }
        if (!latest) continue;
        size_t dot = dot_position(module.text, node.recv_end_byte);
        if (dot >= module.text.size() || module.text[dot] != '.') continue;
        EvalQuery query;
        query.prefix = module.text.substr(0, dot + 1);
        query.expected_method = node.event.method;
        query.library = library_root(latest->type_key);
        query.project_id = module.project_id;
        query.path = module.path;
        sites.push_back(Site{dot, std::move(query)});
      }
    }
    std::sort(sites.begin(), sites.end(),
              [](const Site& a, const Site& b) { return a.dot < b.dot; });
    for (Site& site : sites) queries.push_back(std::move(site.query));
  }
  return queries;
}

FoldAssignment assign_folds(const std::vector<std::string>& project_ids,
                            int k, uint64_t seed) {
  if (k < 2) throw TooFewProjects("need at least 2 folds");
  if (project_ids.size() < static_cast<size_t>(k)) {
    throw TooFewProjects("need at least " + std::to_string(k) +
                         " projects for " + std::to_string(k) + " folds, got " +
                         std::to_string(project_ids.size()));
  }
  std::vector<std::string> shuffled = project_ids;
  // Hand-rolled Fisher-Yates: std::shuffle's draw sequence is not pinned by
  // the standard, and fold assignment must reproduce across toolchains.
  std::mt19937_64 rng(seed);
  for (size_t i = shuffled.size(); i > 1; --i) {
    size_t j = static_cast<size_t>(rng() % i);
    std::swap(shuffled[i - 1], shuffled[j]);
  }
  FoldAssignment folds;
  folds.k = k;
  for (size_t i = 0; i < shuffled.size(); ++i) {
    folds.fold_of[shuffled[i]] = static_cast<int>(i % static_cast<size_t>(k));
  }
  return folds;
}

double mrr(const std::vector<double>& reciprocal_ranks) {
  if (reciprocal_ranks.empty()) throw EmptyQuerySet("no queries");
  double sum = 0.0;
  for (double rr : reciprocal_ranks) sum += rr;
  return sum / static_cast<double>(reciprocal_ranks.size());
}

double recall(const std::vector<bool>& hits) {
  if (hits.empty()) throw EmptyQuerySet("no queries");
  size_t found = 0;
  for (bool hit : hits) found += hit ? 1 : 0;
  return static_cast<double>(found) / static_cast<double>(hits.size());
}

namespace {

MetricRow aggregate(const std::string& library,
                    const std::vector<const QueryOutcome*>& outcomes) {
  std::vector<double> rrs;
  std::vector<bool> hits;
  for (const QueryOutcome* o : outcomes) {
    rrs.push_back(o->rank > 0 ? 1.0 / o->rank : 0.0);
    hits.push_back(o->rank > 0);
  }
  MetricRow row;
  row.library = library;
  row.query_count = outcomes.size();
  row.mrr = mrr(rrs);
  row.recall = recall(hits);
  assert(row.mrr <= row.recall + 1e-12);
  return row;
}

}  // namespace

EvalReport run_cv(const corpus::IngestReport& corpus, int k, uint64_t seed,
                  const std::vector<std::string>& libraries,
                  const flowgraph::BuildOptions& options) {
  std::vector<std::string> project_ids;
  for (const corpus::IngestedProject& p : corpus.projects) {
    project_ids.push_back(p.record.project_id);
  }
  FoldAssignment folds = assign_folds(project_ids, k, seed);

  // Usages and queries are fold-independent; extract once, file-parallel,
  // merged back in input order.
  std::vector<SourceModule> all_modules;
  std::vector<std::string> owner;
  for (const corpus::IngestedProject& project : corpus.projects) {
    for (const SourceModule& module : project.modules) {
      all_modules.push_back(module);
      owner.push_back(project.record.project_id);
    }
  }
  extractor::CorpusUsages extracted =
      extractor::extract_many(all_modules, options);
  std::map<std::string, std::vector<ObjectUsage>> usages_by_project;
  for (size_t i = 0; i < all_modules.size(); ++i) {
    auto& slot = usages_by_project[owner[i]];
    slot.insert(slot.end(),
                std::make_move_iterator(extracted.per_module[i].begin()),
                std::make_move_iterator(extracted.per_module[i].end()));
  }

  std::map<std::string, std::vector<EvalQuery>> queries_by_project;
  for (const corpus::IngestedProject& project : corpus.projects) {
    std::vector<EvalQuery> queries =
        generate_queries(project.modules, options);
    if (!libraries.empty()) {
      std::erase_if(queries, [&](const EvalQuery& q) {
        return std::find(libraries.begin(), libraries.end(), q.library) ==
               libraries.end();
      });
    }
    queries_by_project[project.record.project_id] = std::move(queries);
  }

  EvalReport report;
  report.seed = seed;
  report.folds = k;
  report.corpus_fingerprint = corpus::corpus_fingerprint(corpus);

  for (int fold = 0; fold < k; ++fold) {
    std::vector<ObjectUsage> training;
    for (const corpus::IngestedProject& project : corpus.projects) {
      if (folds.fold_of.at(project.record.project_id) == fold) continue;
      const auto& usages = usages_by_project[project.record.project_id];
      training.insert(training.end(), usages.begin(), usages.end());
    }
    bmo::UsageIndex index = bmo::train(training);

    for (const corpus::IngestedProject& project : corpus.projects) {
      if (folds.fold_of.at(project.record.project_id) != fold) continue;
      for (const EvalQuery& query :
           queries_by_project[project.record.project_id]) {
        QueryOutcome outcome;
        outcome.project_id = query.project_id;
        outcome.path = query.path;
        outcome.library = query.library;
        outcome.expected_method = query.expected_method;
        outcome.fold = fold;
        outcome.rank = 0;
        try {
          SourceModule buffer{query.project_id, query.path, query.prefix};
          extractor::QueryContext context = extractor::build_query_at(
              buffer, query.prefix.size(), options);
          for (const bmo::Recommendation& rec :
               bmo::recommend(context, index)) {
            if (rec.method == query.expected_method) {
              outcome.rank = rec.rank;
              break;
            }
          }
        } catch (const Error&) {
          // unresolved receiver / unknown key / no answer: a miss
        }
        report.details.push_back(std::move(outcome));
      }
    }
  }

  std::vector<const QueryOutcome*> all;
  std::map<std::string, std::vector<const QueryOutcome*>> by_library;
  std::map<int, std::vector<const QueryOutcome*>> by_fold;
  for (const QueryOutcome& o : report.details) {
    all.push_back(&o);
    by_library[o.library].push_back(&o);
    by_fold[o.fold].push_back(&o);
  }
  if (!all.empty()) {
    report.overall = aggregate("overall", all);
    for (const auto& [library, outcomes] : by_library) {
      report.per_library.push_back(aggregate(library, outcomes));
    }
    for (const auto& [fold, outcomes] : by_fold) {
      MetricRow row = aggregate("", outcomes);
      report.per_fold.push_back(
          FoldRow{fold, row.query_count, row.mrr, row.recall});
    }
  } else {
    report.overall.library = "overall";
  }
  return report;
}

namespace {

std::string fixed3(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", value);
  return buf;
}

json row_to_json(const MetricRow& row) {
  return json{{"library", row.library},
              {"queries", row.query_count},
              {"mrr", row.mrr},
              {"recall", row.recall}};
}

}  // namespace

std::string report_to_json(const EvalReport& report) {
  json j;
  j["seed"] = report.seed;
  j["folds"] = report.folds;
  j["corpus_fingerprint"] = report.corpus_fingerprint;
  j["overall"] = row_to_json(report.overall);
  j["per_library"] = json::array();
  for (const MetricRow& row : report.per_library) {
    j["per_library"].push_back(row_to_json(row));
  }
  j["per_fold"] = json::array();
  for (const FoldRow& row : report.per_fold) {
    j["per_fold"].push_back(json{{"fold", row.fold},
                                 {"queries", row.query_count},
                                 {"mrr", row.mrr},
                                 {"recall", row.recall}});
  }
  return j.dump(2) + "\n";
}

std::string report_to_table(const EvalReport& report) {
  std::ostringstream out;
  out << "Library\tMRR\tRecall\n";
  for (const MetricRow& row : report.per_library) {
    out << row.library << "\t" << fixed3(row.mrr) << "\t"
        << fixed3(row.recall) << "\n";
  }
  out << "overall\t" << fixed3(report.overall.mrr) << "\t"
      << fixed3(report.overall.recall) << "\n";
  return out.str();
}

}  // namespace apirec::evalharness
