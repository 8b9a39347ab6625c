// Machine protocol for completion: one JSON request per line on stdin, one
// JSON response per line on stdout, in order. The loaded index is read-only
// and responses depend only on (model, request).
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "apirec/bmo.hpp"

namespace apirec::cli {

struct CompletionRequest {
  std::string source;  // full buffer text
  int line = 1;        // 1-based
  int col = 0;         // 0-based
  int limit = bmo::kRecommendationLimit;
};

struct CompletionResponse {
  bool ok = false;
  std::vector<bmo::Recommendation> candidates;  // ranks 1..n, n <= limit
  std::string diagnostic;                       // set when ok is false
};

// Throws apirec::Error on malformed JSON or missing fields.
CompletionRequest parse_request(const std::string& json_line);

std::string response_to_json(const CompletionResponse& response);

// Absence of an answer (unresolved receiver, unknown library, everything
// scored out) is a successful response with ok=false, not a failure.
CompletionResponse handle_request(const CompletionRequest& request,
                                  const bmo::UsageIndex& index);

// Request/response loop; malformed lines produce an error response and the
// loop keeps going. Returns the number of requests served.
size_t run_serve(std::istream& in, std::ostream& out,
                 const bmo::UsageIndex& index);

}  // namespace apirec::cli
