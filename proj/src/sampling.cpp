#include "dyadica/sampling.hpp"

#include <cmath>
#include <numbers>

namespace dyadica {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::size_t Rng::index(std::size_t n) {
  return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
}

double Rng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Rng Rng::split(std::uint64_t stream) { return Rng(bits() ^ splitmix64(stream + 0x5851f42d4c957f2dULL)); }

Vec random_nonneg_function(std::size_t n, Rng& rng) {
  Vec f(n, 0.0);
  switch (rng.index(4)) {
    case 0:
      for (auto& v : f) v = rng.uniform();
      break;
    case 1:
      for (auto& v : f)
        if (rng.uniform() < 0.3) v = rng.uniform(0.1, 1.0);
      break;
    case 2:
      for (auto& v : f)
        if (rng.uniform() < 0.5) v = 1.0;
      break;
    default:
      for (auto& v : f) v = std::exp(2.0 * rng.normal());
      break;
  }
  if (n > 0) {
    bool any = false;
    for (double v : f) any = any || v > 0.0;
    if (!any) f[rng.index(n)] = 1.0;
  }
  return f;
}

PointMeasure random_measure(std::size_t n, Rng& rng, const MeasureDraw& draw) {
  Vec m(n);
  for (auto& v : m) {
    const double keep = rng.uniform();
    const double level = rng.uniform(draw.log_low, draw.log_high);
    v = keep < draw.zero_fraction ? 0.0 : std::exp(level);
  }
  return PointMeasure(std::move(m));
}

}  // namespace dyadica
