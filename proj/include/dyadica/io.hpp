#pragma once

#include <map>
#include <string>

#include "json.hpp"

#include "dyadica/dyadic.hpp"
#include "dyadica/kernel.hpp"
#include "dyadica/space.hpp"

namespace dyadica {

using Json = nlohmann::json;

// Raises ConfigError with a JSON-pointer-like path prefix.
[[noreturn]] void config_error(const std::string& path, const std::string& message);

// Typed accessors that report the offending path.
double get_number(const Json& j, const std::string& key, const std::string& path);
double get_number_or(const Json& j, const std::string& key, double fallback, const std::string& path);
std::size_t get_count_or(const Json& j, const std::string& key, std::size_t fallback, const std::string& path);
std::string get_string_or(const Json& j, const std::string& key, const std::string& fallback, const std::string& path);

struct SpaceFile {
  QuasiMetricSpace space;
  std::map<std::string, PointMeasure> measures;
};

// {"n", "metric": {"type": "matrix", "values"} | {"type": "euclidean",
// "coords", "power"}, "measures": {name: [masses]}}
SpaceFile parse_space(const Json& j, const std::string& path = "$");
SpaceFile load_space_file(const std::string& file);
Json space_to_json(const QuasiMetricSpace& space, const std::map<std::string, PointMeasure>& measures);

Json read_json_file(const std::string& file);
void write_text_file(const std::string& file, const std::string& text);

// {"type": "frac_rho" | "ball_volume" | "shifted_distance" | "constant" |
// "matrix", ...}; diagonals may be given as the string "inf".
Kernel parse_kernel(const Json& j, const QuasiMetricSpace& space, const std::map<std::string, PointMeasure>& measures,
                    const std::string& path = "$.kernel");

Json system_to_json(const DyadicSystem& system);
Json certificate_to_json(const AdjacentFamily& family);
Json family_to_json(const AdjacentFamily& family);

}  // namespace dyadica
