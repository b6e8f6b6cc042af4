#include "dyadica/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "dyadica/error.hpp"

namespace dyadica {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string child(const std::string& path, const std::string& key) { return path + "." + key; }
std::string child(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

const Json& require(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) config_error(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) config_error(child(path, key), "missing");
  return *it;
}

double as_number(const Json& j, const std::string& path, bool allow_inf = false) {
  if (j.is_number()) return j.get<double>();
  if (allow_inf && j.is_string() && j.get<std::string>() == "inf") return kInf;
  config_error(path, allow_inf ? "expected a number or \"inf\"" : "expected a number");
}

Vec as_vector(const Json& j, const std::string& path, bool allow_inf = false) {
  if (!j.is_array()) config_error(path, "expected an array");
  Vec out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_number(j[i], child(path, i), allow_inf));
  return out;
}

std::vector<std::vector<double>> as_matrix(const Json& j, std::size_t n, const std::string& path) {
  if (!j.is_array() || j.size() != n) config_error(path, "expected " + std::to_string(n) + " rows");
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < n; ++i) {
    Vec row = as_vector(j[i], child(path, i));
    if (row.size() != n) config_error(child(path, i), "expected " + std::to_string(n) + " entries");
    out.push_back(std::move(row));
  }
  return out;
}

const PointMeasure& find_measure(const std::map<std::string, PointMeasure>& measures, const std::string& name,
                                 const std::string& path) {
  auto it = measures.find(name);
  if (it == measures.end()) config_error(path, "unknown measure \"" + name + "\"");
  return it->second;
}

}  // namespace

void config_error(const std::string& path, const std::string& message) {
  raise(Errc::ConfigError, path + ": " + message);
}

double get_number(const Json& j, const std::string& key, const std::string& path) {
  return as_number(require(j, key, path), child(path, key));
}

double get_number_or(const Json& j, const std::string& key, double fallback, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return as_number(j.at(key), child(path, key));
}

std::size_t get_count_or(const Json& j, const std::string& key, std::size_t fallback, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) config_error(child(path, key), "expected a nonnegative integer");
  return v.get<std::size_t>();
}

std::string get_string_or(const Json& j, const std::string& key, const std::string& fallback,
                          const std::string& path) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (!v.is_string()) config_error(child(path, key), "expected a string");
  return v.get<std::string>();
}

SpaceFile parse_space(const Json& j, const std::string& path) {
  if (!j.is_object()) config_error(path, "expected an object");
  const std::size_t n = get_count_or(j, "n", 0, path);
  if (n == 0) config_error(child(path, "n"), "must be a positive integer");
  const Json& metric = require(j, "metric", path);
  const std::string mpath = child(path, "metric");
  const std::string type = get_string_or(metric, "type", "", mpath);
  std::vector<std::vector<double>> table;
  if (type == "matrix") {
    table = as_matrix(require(metric, "values", mpath), n, child(mpath, "values"));
  } else if (type == "euclidean") {
    const Json& coords = require(metric, "coords", mpath);
    const std::string cpath = child(mpath, "coords");
    if (!coords.is_array() || coords.size() != n) config_error(cpath, "expected " + std::to_string(n) + " points");
    std::vector<Vec> pts;
    for (std::size_t i = 0; i < n; ++i) {
      pts.push_back(as_vector(coords[i], child(cpath, i)));
      if (pts.back().size() != pts.front().size()) config_error(child(cpath, i), "dimension differs");
    }
    const double power = get_number_or(metric, "power", 1.0, mpath);
    if (!(power > 0.0)) config_error(child(mpath, "power"), "must be positive");
    table.assign(n, Vec(n, 0.0));
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        double s = 0.0;
        for (std::size_t c = 0; c < pts[a].size(); ++c) s += (pts[a][c] - pts[b][c]) * (pts[a][c] - pts[b][c]);
        table[a][b] = std::pow(std::sqrt(s), power);
      }
  } else {
    config_error(child(mpath, "type"), "expected \"matrix\" or \"euclidean\"");
  }
  SpaceFile out;
  try {
    out.space = build_space(table);
  } catch (const Error& e) {
    config_error(mpath, std::string(errc_name(e.code())) + ": " + e.witness());
  }
  if (j.contains("measures")) {
    const Json& ms = j.at("measures");
    const std::string mspath = child(path, "measures");
    if (!ms.is_object()) config_error(mspath, "expected an object");
    for (auto it = ms.begin(); it != ms.end(); ++it) {
      const std::string p = child(mspath, it.key());
      Vec m = as_vector(it.value(), p);
      if (m.size() != n) config_error(p, "expected " + std::to_string(n) + " masses");
      for (std::size_t i = 0; i < n; ++i)
        if (!(m[i] >= 0.0) || !std::isfinite(m[i])) config_error(child(p, i), "mass must be finite and nonnegative");
      out.measures.emplace(it.key(), PointMeasure(std::move(m)));
    }
  }
  return out;
}

Json read_json_file(const std::string& file) {
  std::ifstream in(file);
  if (!in) raise(Errc::ConfigError, file + ": cannot open");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    raise(Errc::ConfigError, file + ": " + e.what());
  }
}

void write_text_file(const std::string& file, const std::string& text) {
  std::ofstream out(file);
  if (!out) raise(Errc::ConfigError, file + ": cannot write");
  out << text;
}

SpaceFile load_space_file(const std::string& file) { return parse_space(read_json_file(file), file); }

Json space_to_json(const QuasiMetricSpace& space, const std::map<std::string, PointMeasure>& measures) {
  const std::size_t n = space.size();
  Json values = Json::array();
  for (PointId x = 0; x < n; ++x) {
    Json row = Json::array();
    for (PointId y = 0; y < n; ++y) row.push_back(space.dist(x, y));
    values.push_back(std::move(row));
  }
  Json ms = Json::object();
  for (const auto& [name, m] : measures) ms[name] = m.masses();
  return Json{{"n", n}, {"metric", {{"type", "matrix"}, {"values", std::move(values)}}}, {"measures", std::move(ms)}};
}

Kernel parse_kernel(const Json& j, const QuasiMetricSpace& space, const std::map<std::string, PointMeasure>& measures,
                    const std::string& path) {
  if (!j.is_object()) config_error(path, "expected an object");
  const std::string type = get_string_or(j, "type", "", path);
  const std::size_t n = space.size();
  try {
    if (type == "frac_rho") {
      std::optional<double> diag;
      if (j.contains("diag")) diag = as_number(j.at("diag"), child(path, "diag"), true);
      return kernel_frac_rho(space, get_number(j, "alpha", path), get_number(j, "n", path), diag);
    }
    if (type == "ball_volume") {
      const std::string name = get_string_or(j, "measure", "mu", path);
      const PointMeasure& mu = find_measure(measures, name, child(path, "measure"));
      const std::string ball = get_string_or(j, "ball", "strict", path);
      if (ball != "strict" && ball != "closed") config_error(child(path, "ball"), "expected \"strict\" or \"closed\"");
      return kernel_ball_volume(space, mu, get_number(j, "gamma", path),
                                ball == "closed" ? BallConvention::Closed : BallConvention::Strict);
    }
    if (type == "shifted_distance") return kernel_shifted_distance(space, get_number(j, "gamma", path));
    if (type == "constant") return kernel_constant(n, get_number(j, "value", path));
    if (type == "matrix") {
      const auto off = as_matrix(require(j, "offdiag", path), n, child(path, "offdiag"));
      const Vec diag = as_vector(require(j, "diag", path), child(path, "diag"), true);
      if (diag.size() != n) config_error(child(path, "diag"), "expected " + std::to_string(n) + " entries");
      return kernel_matrix(off, diag);
    }
  } catch (const Error& e) {
    if (e.code() == Errc::ConfigError) throw;
    config_error(path, std::string(errc_name(e.code())) + ": " + e.witness());
  }
  config_error(child(path, "type"), "unknown kernel type \"" + type + "\"");
}

Json system_to_json(const DyadicSystem& system) {
  Json cubes = Json::array();
  for (const auto& g : system.generations())
    for (const auto& q : g.cubes) {
      Json c{{"k", q.id.k}, {"alpha", q.id.alpha}, {"center", q.center}, {"members", q.members}};
      c["parent"] = q.parent ? Json(*q.parent) : Json(nullptr);
      cubes.push_back(std::move(c));
    }
  return Json{{"delta", system.delta()},  {"x0", system.x0()},        {"k_min", system.k_min()},
              {"k_max", system.k_max()},  {"seed", system.seed()},    {"attempts", system.attempts()},
              {"strict", system.strict()}, {"cubes", std::move(cubes)}};
}

Json certificate_to_json(const AdjacentFamily& family) {
  Json out = Json::array();
  for (const auto& e : family.certificate) {
    Json entry{{"ball", {{"center", e.center}, {"radius", e.radius}}}, {"band", e.k}, {"ratio", e.ratio}};
    entry["system"] = e.system ? Json(*e.system) : Json(nullptr);
    entry["cube"] = Json::array({e.k, e.alpha});
    out.push_back(std::move(entry));
  }
  return out;
}

Json family_to_json(const AdjacentFamily& family) {
  Json systems = Json::array();
  for (const auto& s : family.systems) systems.push_back(system_to_json(*s));
  return Json{{"L", family.L()},
              {"target_C", family.target_C},
              {"observed_C", family.observed_C},
              {"complete", family.complete},
              {"systems", std::move(systems)},
              {"certificate", certificate_to_json(family)}};
}

}  // namespace dyadica
