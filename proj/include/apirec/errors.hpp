// Error types raised across the pipeline. Analysis "non-answers"
// (UnresolvedReceiver, NoRecommendation) are part of normal control flow and
// are turned into empty responses at the CLI boundary; the rest are failures.
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace apirec {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed source file; corpus runs skip the file and keep going.
struct SyntaxError : Error {
  SyntaxError(std::string path_, int line_)
      : Error(path_ + ":" + std::to_string(line_) + ": syntax error"),
        path(std::move(path_)),
        line(line_) {}
  std::string path;
  int line;
};

// Completion receiver is not a tracked library object at the cursor.
struct UnresolvedReceiver : Error {
  using Error::Error;
};

// No training data for the requested type key.
struct UnknownTypeKey : Error {
  explicit UnknownTypeKey(const std::string& key)
      : Error("no training data for type key '" + key + "'"), type_key(key) {}
  std::string type_key;
};

// Every type key unknown, or every candidate method scored out.
struct NoRecommendation : Error {
  using Error::Error;
};

// Model file malformed or of an unsupported version; `record` is the
// 1-based line of the offending record (0 for the header).
struct FormatError : Error {
  FormatError(std::string msg, size_t record_)
      : Error("record " + std::to_string(record_) + ": " + std::move(msg)),
        record(record_) {}
  size_t record;
};

struct TooFewProjects : Error {
  using Error::Error;
};

struct EmptyQuerySet : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace apirec
