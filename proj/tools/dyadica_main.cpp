// dyadica: command-line front end for the scenario harness.
#include <cmath>
#include <cstdint>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dyadica/dyadic.hpp"
#include "dyadica/error.hpp"
#include "dyadica/harness.hpp"
#include "dyadica/io.hpp"
#include "dyadica/space.hpp"

using namespace dyadica;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "json";
  bool relaxed_delta = false;

  // space source
  std::string space_file;
  std::string kind;
  std::optional<std::size_t> n, dim, branching, depth;
  std::optional<double> power;
  std::optional<std::uint64_t> space_seed;

  std::string kernel;  // file path or inline JSON
  std::string measures;  // "sigma,omega"
  std::string mu, sigma, omega;
  std::optional<double> p, gamma, delta, target_C;
  std::string q;
  std::optional<std::size_t> x0, systems, trials, starts;
};

void emit(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
  } else {
    write_text_file(o.out, text);
  }
}

Json json_arg(const std::string& value, const std::string& flag) {
  if (!value.empty() && (value.front() == '{' || value.front() == '[')) {
    try {
      return Json::parse(value);
    } catch (const Json::parse_error& e) {
      raise(Errc::ConfigError, flag + ": " + e.what());
    }
  }
  return read_json_file(value);
}

Json measure_arg(const std::string& value) {
  if (!value.empty() && (value.front() == '[' || value.front() == '{')) return Json::parse(value);
  return value;
}

// Scenario JSON from --config overlaid with explicit flags.
Json scenario_from(const Options& o, const std::vector<std::string>& checks) {
  Json j = o.config.empty() ? Json::object() : read_json_file(o.config);
  if (!j.is_object()) raise(Errc::ConfigError, o.config + ": expected an object");
  if (o.seed) j["seed"] = *o.seed;
  if (!o.space_file.empty()) {
    j["space"] = {{"file", o.space_file}};
  } else if (!o.kind.empty()) {
    Json s{{"generator", o.kind}};
    if (o.n) s["n"] = *o.n;
    if (o.dim) s["dim"] = *o.dim;
    if (o.power) s["power"] = *o.power;
    if (o.branching) s["branching"] = *o.branching;
    if (o.depth) s["depth"] = *o.depth;
    if (o.space_seed) s["seed"] = *o.space_seed;
    j["space"] = s;
  }
  if (!o.kernel.empty()) j["kernel"] = json_arg(o.kernel, "--kernel");
  if (!o.measures.empty()) {
    const auto comma = o.measures.find(',');
    if (comma == std::string::npos) raise(Errc::ConfigError, "--measures: expected sigma,omega");
    j["measures"]["sigma"] = o.measures.substr(0, comma);
    j["measures"]["omega"] = o.measures.substr(comma + 1);
  }
  if (!o.sigma.empty()) j["measures"]["sigma"] = measure_arg(o.sigma);
  if (!o.omega.empty()) j["measures"]["omega"] = measure_arg(o.omega);
  if (!o.mu.empty()) j["measures"]["mu"] = measure_arg(o.mu);
  if (o.p) j["exponents"]["p"] = *o.p;
  if (!o.q.empty()) j["exponents"]["q"] = o.q == "inf" ? Json("inf") : Json(std::stod(o.q));
  if (o.gamma) j["gamma"] = *o.gamma;
  if (o.delta) j["dyadic"]["delta"] = *o.delta;
  if (o.x0) j["dyadic"]["x0"] = *o.x0;
  if (o.systems) j["dyadic"]["systems"] = *o.systems;
  if (o.target_C) j["dyadic"]["target_C"] = *o.target_C;
  if (o.relaxed_delta) j["dyadic"]["strict"] = false;
  if (o.trials) j["trials"] = *o.trials;
  if (o.starts) j["budget"]["starts"] = *o.starts;
  if (!checks.empty()) j["checks"] = checks;
  return j;
}

int run_checks(const Options& o, const std::vector<std::string>& checks) {
  const Report r = run_scenario(parse_scenario(scenario_from(o, checks)));
  emit(o, o.format == "csv" ? r.to_csv() : r.to_json().dump(2));
  return r.any_fail() ? 1 : 0;
}

int gen_space(const Options& o) {
  if (o.kind.empty()) raise(Errc::ConfigError, "--kind: required");
  GeneratorParams gp;
  if (o.n) gp.n = *o.n;
  if (o.dim) gp.dim = *o.dim;
  if (o.power) gp.power = *o.power;
  if (o.branching) gp.branching = *o.branching;
  if (o.depth) gp.depth = *o.depth;
  GeneratedSpace g;
  try {
    g = generate_space(o.kind, gp, o.space_seed.value_or(o.seed.value_or(0)));
  } catch (const Error& e) {
    raise(Errc::ConfigError, std::string("--kind: ") + errc_name(e.code()) + ": " + e.witness());
  }
  emit(o, space_to_json(g.space, g.measures).dump(2));
  return 0;
}

int build_dyadic(const Options& o) {
  const Scenario sc = parse_scenario(scenario_from(o, {"dyadic"}));
  const Json& s = sc.config.at("space");
  std::shared_ptr<const QuasiMetricSpace> space;
  if (s.contains("file")) {
    space = std::make_shared<const QuasiMetricSpace>(load_space_file(s.at("file").get<std::string>()).space);
  } else if (s.contains("inline")) {
    space = std::make_shared<const QuasiMetricSpace>(parse_space(s.at("inline"), "$.space.inline").space);
  } else {
    GeneratorParams gp{s.at("n").get<std::size_t>(), s.at("dim").get<std::size_t>(), s.at("power").get<double>(),
                       s.at("branching").get<std::size_t>(), s.at("depth").get<std::size_t>()};
    space = std::make_shared<const QuasiMetricSpace>(
        generate_space(s.at("generator").get<std::string>(), gp, s.at("seed").get<std::uint64_t>()).space);
  }
  const Json& d = sc.config.at("dyadic");
  DyadicParams dp;
  dp.delta = d.at("delta").is_string() ? 1.0 / (96.0 * std::pow(space->a0(), 6)) : d.at("delta").get<double>();
  dp.x0 = d.at("x0").get<std::size_t>();
  dp.strict_mode = d.at("strict").get<bool>();
  if (d.contains("k_min")) dp.k_min = d.at("k_min").get<int>();
  if (d.contains("k_max")) dp.k_max = d.at("k_max").get<int>();
  std::optional<double> target;
  if (d.contains("target_C")) target = d.at("target_C").get<double>();
  try {
    const AdjacentFamily fam = build_adjacent_family(space, dp, target, d.at("systems").get<std::size_t>(),
                                                     sc.config.at("seed").get<std::uint64_t>());
    emit(o, family_to_json(fam).dump(2));
    return fam.complete ? 0 : 1;
  } catch (const Error& e) {
    if (e.code() == Errc::BadParams) raise(Errc::ConfigError, std::string("$.dyadic: ") + e.witness());
    throw;
  }
}

int sweep_cmd(const Options& o) {
  if (o.config.empty()) raise(Errc::ConfigError, "--config: required for sweep");
  const SweepResult r = sweep_from_config(read_json_file(o.config));
  if (o.format == "csv") {
    std::string text;
    for (const auto& rep : r.reports) {
      std::string csv = rep.to_csv();
      if (!text.empty()) csv = csv.substr(csv.find('\n') + 1);
      text += csv;
    }
    emit(o, text);
  } else {
    Json reports = Json::array();
    for (const auto& rep : r.reports) reports.push_back(rep.to_json());
    emit(o, Json{{"summary", r.summary_json()}, {"reports", reports}}.dump(2));
  }
  return r.any_fail() ? 1 : 0;
}

void add_space_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--space", o.space_file, "Space JSON file");
  cmd->add_option("--kind", o.kind, "Generator kind");
  cmd->add_option("--n", o.n, "Number of points");
  cmd->add_option("--dim", o.dim, "Euclidean dimension");
  cmd->add_option("--power", o.power, "Snowflake power");
  cmd->add_option("--branching", o.branching, "Tree branching");
  cmd->add_option("--depth", o.depth, "Tree depth");
  cmd->add_option("--space-seed", o.space_seed, "Generator seed");
}

void add_dyadic_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--delta", o.delta, "Dyadic parameter (default 1/(96 a0^6))");
  cmd->add_option("--x0", o.x0, "Reference point");
  cmd->add_option("--systems", o.systems, "Maximum number of adjacent systems");
  cmd->add_option("--target-C", o.target_C, "Target adjacency constant");
}

void add_analysis_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--kernel", o.kernel, "Kernel JSON file or inline object");
  cmd->add_option("--measures", o.measures, "sigma,omega measure names");
  cmd->add_option("--sigma", o.sigma, "Measure for sigma");
  cmd->add_option("--omega", o.omega, "Measure for omega");
  cmd->add_option("--p", o.p, "Exponent p");
  cmd->add_option("--q", o.q, "Exponent q (number or inf)");
  cmd->add_option("--trials", o.trials, "Random trials per property check");
  cmd->add_option("--budget", o.starts, "Random starts for norm estimation");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dyadic model operators and two-weight testing conditions on finite quasi-metric spaces"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config, "Scenario (or sweep) JSON file");
  app.add_option("--seed", o.seed, "Scenario seed");
  app.add_option("--out", o.out, "Output path (default stdout)");
  app.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  app.add_flag("--relaxed-delta", o.relaxed_delta, "Allow delta above the strict bound; passing checks report non-strict");

  auto* gen = app.add_subcommand("gen-space", "Generate a space and write it as JSON");
  add_space_flags(gen, o);
  auto* build = app.add_subcommand("build-dyadic", "Build an adjacent family and dump it");
  add_space_flags(build, o);
  add_dyadic_flags(build, o);
  auto* verify = app.add_subcommand("verify-dyadic", "Build and verify dyadic systems and the adjacency certificate");
  add_space_flags(verify, o);
  add_dyadic_flags(verify, o);

  struct CheckCmd {
    const char* name;
    const char* help;
    std::vector<std::string> checks;
  };
  const std::vector<CheckCmd> check_cmds = {
      {"kernel-check", "Verify kernel estimates on every system", {"kernel"}},
      {"operators-check", "Check dyadic model operators against the kernel operator", {"operators"}},
      {"theorem-b", "Strong-type testing characterization", {"theorem_b"}},
      {"weak-type", "Weak-type testing characterization", {"weak_type"}},
      {"theorem-a", "Fractional maximal operator characterization", {"theorem_a"}},
  };
  std::vector<std::pair<CLI::App*, const CheckCmd*>> runners;
  for (const auto& c : check_cmds) {
    auto* cmd = app.add_subcommand(c.name, c.help);
    add_space_flags(cmd, o);
    add_dyadic_flags(cmd, o);
    add_analysis_flags(cmd, o);
    if (std::string(c.name) == "theorem-a") {
      cmd->add_option("--mu", o.mu, "Measure for mu");
      cmd->add_option("--gamma", o.gamma, "Fractional parameter in [0,1)");
    }
    runners.emplace_back(cmd, &c);
  }
  auto* run = app.add_subcommand("run", "Run a scenario (all checks unless the config lists some)");
  add_space_flags(run, o);
  add_dyadic_flags(run, o);
  add_analysis_flags(run, o);
  run->add_option("--mu", o.mu, "Measure for mu");
  run->add_option("--gamma", o.gamma, "Fractional parameter in [0,1)");
  auto* sweep = app.add_subcommand("sweep", "Run a grid of scenarios from --config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen) return gen_space(o);
    if (*build) return build_dyadic(o);
    if (*verify) return run_checks(o, {"space", "dyadic"});
    for (const auto& [cmd, c] : runners)
      if (*cmd) return run_checks(o, c->checks);
    if (*run) return run_checks(o, {});
    if (*sweep) return sweep_cmd(o);
  } catch (const Error& e) {
    std::cerr << "dyadica: " << errc_name(e.code()) << ": " << e.witness() << '\n';
    return e.code() == Errc::ConfigError ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "dyadica: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
