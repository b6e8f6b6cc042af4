#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "dyadica/dyadic.hpp"
#include "dyadica/space.hpp"

namespace dyadica::testing {

inline std::vector<std::vector<double>> line_table(std::size_t n, double power = 1.0) {
  std::vector<std::vector<double>> t(n, std::vector<double>(n, 0.0));
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y) t[x][y] = std::pow(std::fabs(double(x) - double(y)), power);
  return t;
}

inline std::shared_ptr<const QuasiMetricSpace> line(std::size_t n, double power = 1.0) {
  return std::make_shared<const QuasiMetricSpace>(build_space(line_table(n, power)));
}

inline std::shared_ptr<const DyadicSystem> system_on(std::shared_ptr<const QuasiMetricSpace> space,
                                                     double delta = 1.0 / 96.0, std::uint64_t seed = 0) {
  DyadicParams p;
  p.delta = delta;
  return std::make_shared<const DyadicSystem>(build_system(std::move(space), p, seed));
}

inline bool rel_close(double a, double b, double rel) {
  return std::fabs(a - b) <= rel * std::max({1.0, std::fabs(a), std::fabs(b)});
}

}  // namespace dyadica::testing
