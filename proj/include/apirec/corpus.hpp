// Corpus ingestion (local trees or a manifest of repositories to clone) and
// model persistence.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "apirec/bmo.hpp"
#include "apirec/pyast.hpp"

namespace apirec::corpus {

struct ProjectRecord {
  std::string project_id;  // stable hash of origin URL or root path
  std::filesystem::path root;
  std::string origin;  // empty for local-only projects
  int stars = -1;      // unknown unless a manifest provides it
};

struct ManifestEntry {
  std::string origin;  // URL or local path usable by the VCS client
  std::string ref;     // optional branch/tag/commit
};

using CorpusManifest = std::vector<ManifestEntry>;

struct IngestedProject {
  ProjectRecord record;
  std::vector<pyast::SourceModule> modules;  // sorted by path
};

struct IngestReport {
  std::vector<IngestedProject> projects;
  std::vector<std::string> diagnostics;
};

// One project per root: recursive walk over `.py` files in sorted path
// order. Symlinks are not followed, files over 1 MiB and well-known junk
// directories (.git, __pycache__, virtualenvs, node_modules, build/dist,
// .tox, .eggs, site-packages) are skipped with a diagnostic. A missing root
// records an IoError diagnostic; partial results are returned.
IngestReport ingest(const std::vector<std::filesystem::path>& roots);

// Project roots inside a corpus directory: every non-junk child directory,
// sorted; when there are none but loose source files sit at the top level,
// the directory itself is the single project.
std::vector<std::filesystem::path> discover_projects(
    const std::filesystem::path& corpus_dir);

// Line-delimited JSON manifest: {"origin": ..., "ref"?: ...}. Entries must
// be unique by origin.
CorpusManifest load_manifest(const std::filesystem::path& path);

struct FetchResult {
  std::vector<ProjectRecord> records;
  std::vector<std::string> diagnostics;
};

// Shallow-clones each entry into dest/<name> with the system git client.
// Existing clones are reused; per-entry failures are recorded and the run
// continues.
FetchResult fetch(const CorpusManifest& manifest,
                  const std::filesystem::path& dest);

// Content hash over (project name, relative path, file hash) triples;
// identical trees fingerprint identically regardless of location.
std::string corpus_fingerprint(const IngestReport& corpus);

uint64_t fnv1a64(std::string_view data);
std::string hash_hex(std::string_view data);

inline std::string project_id_for(const std::string& origin_or_root) {
  return hash_hex(origin_or_root);
}

inline constexpr int kModelFormatVersion = 1;

// Versioned line-delimited JSON: a header record {format_version, created,
// corpus_fingerprint} followed by one record per training vector. Readers
// reject unknown versions. load(save(x)) answers every query exactly like x.
void save_index(const bmo::UsageIndex& index,
                const std::filesystem::path& path);
bmo::UsageIndex load_index(const std::filesystem::path& path);

}  // namespace apirec::corpus
