#include "apirec/completion.hpp"

#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "apirec/errors.hpp"
#include "apirec/extractor.hpp"

namespace apirec::cli {

using nlohmann::json;

CompletionRequest parse_request(const std::string& json_line) {
  json j;
  try {
    j = json::parse(json_line);
  } catch (const json::exception& e) {
    throw Error(std::string("malformed request: ") + e.what());
  }
  if (!j.is_object() || !j.contains("source") || !j["source"].is_string() ||
      !j.contains("line") || !j["line"].is_number_integer() ||
      !j.contains("col") || !j["col"].is_number_integer()) {
    throw Error("request needs string 'source' and integer 'line'/'col'");
  }
  CompletionRequest request;
  request.source = j["source"].get<std::string>();
  request.line = j["line"].get<int>();
  request.col = j["col"].get<int>();
  if (j.contains("limit")) {
    if (!j["limit"].is_number_integer() || j["limit"].get<int>() < 1) {
      throw Error("limit must be a positive integer");
    }
    request.limit = j["limit"].get<int>();
  }
  return request;
}

std::string response_to_json(const CompletionResponse& response) {
  json j;
  j["ok"] = response.ok;
  j["candidates"] = json::array();
  for (const bmo::Recommendation& rec : response.candidates) {
    j["candidates"].push_back(json{
        {"name", rec.method}, {"score", rec.score}, {"rank", rec.rank}});
  }
  if (!response.diagnostic.empty()) j["diagnostic"] = response.diagnostic;
  return j.dump();
}

CompletionResponse handle_request(const CompletionRequest& request,
                                  const bmo::UsageIndex& index) {
  CompletionResponse response;
  try {
    pyast::SourceModule buffer{"", "<buffer>", request.source};
    extractor::QueryContext query =
        extractor::build_query(buffer, request.line, request.col);
    response.candidates = bmo::recommend(query, index, request.limit);
    response.ok = true;
  } catch (const Error& e) {
    response.ok = false;
    response.diagnostic = e.what();
  }
  return response;
}

size_t run_serve(std::istream& in, std::ostream& out,
                 const bmo::UsageIndex& index) {
  size_t served = 0;
  std::string line;
  while (std::getline(in, line)) {
    CompletionResponse response;
    try {
      response = handle_request(parse_request(line), index);
    } catch (const Error& e) {
      response.ok = false;
      response.diagnostic = e.what();
    }
    out << response_to_json(response) << '\n' << std::flush;
    ++served;
  }
  return served;
}

}  // namespace apirec::cli
