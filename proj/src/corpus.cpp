#include "apirec/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "apirec/errors.hpp"

namespace apirec::corpus {

namespace fs = std::filesystem;
using nlohmann::json;

uint64_t fnv1a64(std::string_view data) {
  uint64_t hash = 14695981039346656037ull;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

std::string hash_hex(std::string_view data) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(data)));
  return buf;
}

namespace {

constexpr uintmax_t kMaxFileBytes = 1 << 20;

const std::set<std::string>& junk_dirs() {
  static const std::set<std::string> dirs = {
      ".git",  ".hg",   ".svn",     "__pycache__", "node_modules",
      ".tox",  ".eggs", ".venv",    "venv",        "env",
      "build", "dist",  ".mypy_cache", "site-packages"};
  return dirs;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

void walk_project(const fs::path& root, IngestedProject& project,
                  std::vector<std::string>& diagnostics) {
  std::vector<fs::path> files;
  std::vector<fs::path> stack{root};
  while (!stack.empty()) {
    fs::path dir = stack.back();
    stack.pop_back();
    std::error_code ec;
    for (fs::directory_iterator it(dir, ec), end; it != end;
         it.increment(ec)) {
      if (ec) break;
      const fs::directory_entry& entry = *it;
      if (entry.is_symlink()) continue;
      if (entry.is_directory()) {
        if (!junk_dirs().count(entry.path().filename().string())) {
          stack.push_back(entry.path());
        }
      } else if (entry.is_regular_file() &&
                 entry.path().extension() == ".py") {
        std::error_code size_ec;
        uintmax_t size = entry.file_size(size_ec);
        if (size_ec) {
          diagnostics.push_back("unreadable: " + entry.path().string());
          continue;
        }
        if (size > kMaxFileBytes) {
          diagnostics.push_back("skipped (over 1 MiB): " +
                                entry.path().string());
          continue;
        }
        files.push_back(entry.path());
      }
    }
    if (ec) {
      diagnostics.push_back("walk error under " + dir.string() + ": " +
                            ec.message());
    }
  }
  std::sort(files.begin(), files.end());
  for (const fs::path& file : files) {
    pyast::SourceModule module;
    module.project_id = project.record.project_id;
    module.path = fs::relative(file, root).generic_string();
    module.text = read_file(file);
    project.modules.push_back(std::move(module));
  }
}

}  // namespace

IngestReport ingest(const std::vector<fs::path>& roots) {
  IngestReport report;
  for (const fs::path& root : roots) {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) {
      report.diagnostics.push_back("not a directory: " + root.string());
      continue;
    }
    IngestedProject project;
    project.record.project_id = project_id_for(root.generic_string());
    project.record.root = root;
    walk_project(root, project, report.diagnostics);
    if (project.modules.empty()) {
      report.diagnostics.push_back("no source files under " + root.string());
    }
    report.projects.push_back(std::move(project));
  }
  return report;
}

std::vector<fs::path> discover_projects(const fs::path& corpus_dir) {
  if (!fs::is_directory(corpus_dir)) {
    throw IoError("not a directory: " + corpus_dir.string());
  }
  std::vector<fs::path> children;
  bool has_loose_sources = false;
  for (const fs::directory_entry& entry :
       fs::directory_iterator(corpus_dir)) {
    if (entry.is_symlink()) continue;
    if (entry.is_directory()) {
      if (!junk_dirs().count(entry.path().filename().string())) {
        children.push_back(entry.path());
      }
    } else if (entry.path().extension() == ".py") {
      has_loose_sources = true;
    }
  }
  std::sort(children.begin(), children.end());
  if (children.empty() && has_loose_sources) return {corpus_dir};
  return children;
}

CorpusManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read manifest " + path.string());
  CorpusManifest manifest;
  std::set<std::string> seen;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw FormatError(std::string("manifest: ") + e.what(), line_no);
    }
    if (!j.is_object() || !j.contains("origin") ||
        !j["origin"].is_string()) {
      throw FormatError("manifest entry needs a string 'origin'", line_no);
    }
    ManifestEntry entry;
    entry.origin = j["origin"].get<std::string>();
    if (j.contains("ref")) entry.ref = j["ref"].get<std::string>();
    if (!seen.insert(entry.origin).second) {
      throw FormatError("duplicate origin " + entry.origin, line_no);
    }
    manifest.push_back(std::move(entry));
  }
  return manifest;
}

namespace {

std::string sh_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  out += "'";
  return out;
}

std::string clone_name(const std::string& origin) {
  std::string name = origin;
  while (!name.empty() && name.back() == '/') name.pop_back();
  auto slash = name.find_last_of('/');
  if (slash != std::string::npos) name = name.substr(slash + 1);
  if (name.size() > 4 && name.ends_with(".git")) {
    name = name.substr(0, name.size() - 4);
  }
  if (name.empty()) name = hash_hex(origin);
  return name;
}

bool run_command(const std::string& cmd) {
  int rc = std::system((cmd + " >/dev/null 2>&1").c_str());
  return rc == 0;
}

}  // namespace

FetchResult fetch(const CorpusManifest& manifest, const fs::path& dest) {
  FetchResult result;
  std::error_code ec;
  fs::create_directories(dest, ec);
  if (ec) throw IoError("cannot create " + dest.string());
  for (const ManifestEntry& entry : manifest) {
    fs::path target = dest / clone_name(entry.origin);
    ProjectRecord record;
    record.project_id = project_id_for(entry.origin);
    record.origin = entry.origin;
    record.root = target;
    if (fs::exists(target)) {
      result.diagnostics.push_back("reusing existing clone " +
                                   target.string());
      result.records.push_back(std::move(record));
      continue;
    }
    std::string base = "git clone --depth 1 ";
    if (!entry.ref.empty()) base += "--branch " + sh_quote(entry.ref) + " ";
    base += "-- " + sh_quote(entry.origin) + " " + sh_quote(target.string());
    bool ok = run_command(base);
    if (!ok && !entry.ref.empty()) {
      // The ref may be a commit; shallow branch clones cannot pin those.
      fs::remove_all(target, ec);
      ok = run_command("git clone -- " + sh_quote(entry.origin) + " " +
                       sh_quote(target.string())) &&
           run_command("git -C " + sh_quote(target.string()) +
                       " checkout --detach " + sh_quote(entry.ref));
    }
    if (ok) {
      result.records.push_back(std::move(record));
    } else {
      fs::remove_all(target, ec);
      result.diagnostics.push_back("fetch failed for " + entry.origin);
    }
  }
  return result;
}

std::string corpus_fingerprint(const IngestReport& corpus) {
  std::string acc;
  for (const IngestedProject& project : corpus.projects) {
    acc += project.record.root.filename().generic_string();
    acc += '\n';
    for (const pyast::SourceModule& module : project.modules) {
      acc += module.path;
      acc += ':';
      acc += hash_hex(module.text);
      acc += '\n';
    }
  }
  return hash_hex(acc);
}

namespace {

std::string iso8601_now() {
  std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

json span_to_json(const Span& span) {
  return json{{"start_line", span.start_line},
              {"start_col", span.start_col},
              {"end_line", span.end_line},
              {"end_col", span.end_col}};
}

Span span_from_json(const json& j) {
  Span span;
  span.start_line = j.value("start_line", 0);
  span.start_col = j.value("start_col", 0);
  span.end_line = j.value("end_line", 0);
  span.end_col = j.value("end_col", 0);
  return span;
}

std::map<std::string, int> counts_from_json(const json& j, size_t record) {
  if (!j.is_object()) throw FormatError("call counts must be an object", record);
  std::map<std::string, int> counts;
  for (const auto& [name, value] : j.items()) {
    if (!value.is_number_integer() || value.get<int>() <= 0) {
      throw FormatError("call count for '" + name + "' must be positive",
                        record);
    }
    counts[name] = value.get<int>();
  }
  return counts;
}

}  // namespace

void save_index(const bmo::UsageIndex& index, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  json header{{"format_version", kModelFormatVersion},
              {"created", iso8601_now()},
              {"corpus_fingerprint", index.corpus_fingerprint}};
  out << header.dump() << '\n';
  for (const auto& [type_key, vectors] : index.types()) {
    for (const bmo::TrainingVector& v : vectors) {
      json record{{"type_key", type_key},
                  {"own", v.vec.own},
                  {"ctx", v.vec.ctx},
                  {"provenance",
                   {{"project", v.prov.project},
                    {"path", v.prov.path},
                    {"object", v.prov.object},
                    {"span", span_to_json(v.prov.span)}}}};
      out << record.dump() << '\n';
    }
  }
  if (!out.flush()) throw IoError("failed writing " + path.string());
}

bmo::UsageIndex load_index(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError("missing header", 0);
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad header: ") + e.what(), 0);
  }
  if (!header.is_object() || !header.contains("format_version") ||
      !header["format_version"].is_number_integer()) {
    throw FormatError("header lacks format_version", 0);
  }
  if (header["format_version"].get<int>() != kModelFormatVersion) {
    throw FormatError("unsupported format_version " +
                          header["format_version"].dump(),
                      0);
  }
  bmo::UsageIndex index;
  index.corpus_fingerprint = header.value("corpus_fingerprint", "");
  size_t record_no = 0;
  while (std::getline(in, line)) {
    ++record_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      throw FormatError("blank record", record_no);
    }
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw FormatError(e.what(), record_no);
    }
    if (!j.is_object() || !j.contains("type_key") ||
        !j["type_key"].is_string()) {
      throw FormatError("record lacks type_key", record_no);
    }
    bmo::TrainingVector v;
    v.vec.own = counts_from_json(j.value("own", json::object()), record_no);
    v.vec.ctx = counts_from_json(j.value("ctx", json::object()), record_no);
    if (v.vec.own.empty()) {
      throw FormatError("training vector has no own calls", record_no);
    }
    if (j.contains("provenance") && j["provenance"].is_object()) {
      const json& p = j["provenance"];
      v.prov.project = p.value("project", "");
      v.prov.path = p.value("path", "");
      v.prov.object = p.value("object", "");
      if (p.contains("span") && p["span"].is_object()) {
        v.prov.span = span_from_json(p["span"]);
      }
    }
    index.add(j["type_key"].get<std::string>(), std::move(v));
  }
  return index;
}

}  // namespace apirec::corpus
