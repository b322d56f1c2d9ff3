#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "lehmer/inflection.hpp"
#include "lehmer/mean_core.hpp"
#include "lehmer/search.hpp"
#include "lehmer/verify.hpp"

namespace lehmer_mean {

using json = nlohmann::ordered_json;

inline constexpr const char* kSchemaVersion = "1";

inline json to_json(const MeanSpec& spec) {
  json j;
  j["values"] = std::vector<double>(spec.values().begin(), spec.values().end());
  j["weights"] = std::vector<double>(spec.weights().begin(), spec.weights().end());
  return j;
}

inline MeanSpec spec_from_json(const json& j) {
  const auto values = j.at("values").get<std::vector<double>>();
  if (!j.contains("weights")) return make_spec(values);
  const auto weights = j.at("weights").get<std::vector<double>>();
  return make_spec(values, weights);
}

inline json to_json(const InflectionPoint& r) {
  json j;
  j["p_star"] = r.p_star;
  j["bracket"] = {r.bracket_lo, r.bracket_hi};
  j["residual"] = r.residual;
  j["direction"] = std::string(to_string(r.direction));
  j["merged"] = r.merged;
  j["precision"] = std::string(to_string(r.precision_used));
  return j;
}

inline json to_json(const InflectionReport& report) {
  json j;
  j["count"] = report.count();
  j["roots"] = json::array();
  for (const auto& r : report.roots) j["roots"].push_back(to_json(r));
  j["parity_ok"] = report.parity_ok;
  j["bound_j"] = report.bound_j;
  j["scan_range"] = {report.scan_lo, report.scan_hi};
  j["precision"] = std::string(to_string(report.precision_used));
  j["warnings"] = report.warnings;
  return j;
}

inline json to_json(const SearchHit& hit) {
  json j;
  j["trial_index"] = hit.trial_index;
  j["spec"] = to_json(hit.spec);
  j["report"] = to_json(hit.report);
  return j;
}

inline json to_json(const CheckResult& c) {
  json j;
  j["name"] = c.name;
  j["passed"] = c.passed;
  j["samples"] = c.samples;
  if (!c.passed) j["counterexample"] = c.detail;
  return j;
}

/// Top-level record emitted once per CLI invocation in JSON mode.
struct OutputRecord {
  std::string command;
  json inputs = json::object();
  json results = json::object();
  std::vector<std::string> diagnostics;
  /// Wall-clock stamp; only present when requested, so output stays reproducible.
  std::optional<std::string> timestamp;

  json to_json() const {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = command;
    j["inputs"] = inputs;
    j["results"] = results;
    j["diagnostics"] = diagnostics;
    if (timestamp) j["timestamp"] = *timestamp;
    return j;
  }

  static OutputRecord from_json(const json& j) {
    if (j.at("schema_version").get<std::string>() != kSchemaVersion)
      throw usage_error("unsupported schema version");
    OutputRecord r;
    r.command = j.at("command").get<std::string>();
    r.inputs = j.at("inputs");
    r.results = j.at("results");
    r.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
    if (j.contains("timestamp")) r.timestamp = j.at("timestamp").get<std::string>();
    return r;
  }

  std::string render() const { return to_json().dump(2) + "\n"; }
};

}  // namespace lehmer_mean
