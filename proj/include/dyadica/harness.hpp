#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dyadica/io.hpp"
#include "dyadica/norms.hpp"

namespace dyadica {

enum class Status { Pass, Fail, Vacuous, NonStrict };
const char* status_name(Status s) noexcept;

struct CheckResult {
  std::string name;
  Status status = Status::Pass;
  std::optional<double> constant;
  std::string witness;  // error code and message on failure
  Json details = Json::object();
};

struct Report {
  std::string name;
  std::string scenario_hash;
  Json geometry = Json::object();
  std::vector<CheckResult> checks;
  Json environment = Json::object();  // excluded from determinism comparisons

  bool any_fail() const;
  const CheckResult* find(const std::string& check) const;
  Json to_json(bool with_environment = true) const;
  std::string to_csv() const;
};

// Known check names in dependency order.
const std::vector<std::string>& all_checks();

// Validated scenario; `config` is the normalized JSON actually run.
struct Scenario {
  Json config;
};

Scenario parse_scenario(const Json& j);
Report run_scenario(const Scenario& scenario);

// Finite numbers as numbers, infinities as the strings "inf" / "-inf".
Json number_json(double v);

std::string fnv1a_hex(const std::string& text);

struct GridAxis {
  std::vector<std::string> paths;  // every path receives the same value
  std::vector<Json> values;
};

struct GeometrySummary {
  std::string key;
  std::size_t reports = 0;
  std::size_t failures = 0;
  std::map<std::string, double> max_constant;  // per check
};

struct SweepResult {
  std::vector<Report> reports;
  std::vector<GeometrySummary> summary;
  bool any_fail() const;
  Json summary_json() const;
};

// Sets a dotted path ("exponents.p") inside a JSON object.
void set_path(Json& j, const std::string& dotted, const Json& value);

SweepResult sweep(const Json& scenario_template, const std::vector<GridAxis>& grid, const std::vector<std::uint64_t>& seeds);
// {"template": {...}, "grid": {path: [values]} | [{"paths": [...], "values": [...]}], "seeds": [..] | {"start", "count"}}
SweepResult sweep_from_config(const Json& config);

}  // namespace dyadica
