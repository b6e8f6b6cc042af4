#pragma once

#include <cstdint>
#include <random>

#include "dyadica/space.hpp"

namespace dyadica {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Deterministic generator; draws avoid the implementation-defined standard
// distributions so that reports are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t bits() { return engine_(); }
  double uniform();                      // [0, 1)
  double uniform(double lo, double hi);  // [lo, hi)
  std::size_t index(std::size_t n);      // [0, n)
  double normal();
  Rng split(std::uint64_t stream);
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

// Nonnegative test function drawn from a mixture: dense, sparse, indicator,
// heavy-tailed.
Vec random_nonneg_function(std::size_t n, Rng& rng);

struct MeasureDraw {
  double log_low = -1.0;  // masses are exp(U(log_low, log_high))
  double log_high = 1.0;
  double zero_fraction = 0.0;
};

PointMeasure random_measure(std::size_t n, Rng& rng, const MeasureDraw& draw = {});

}  // namespace dyadica
