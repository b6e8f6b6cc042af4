#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dyadica/dyadic.hpp"
#include "dyadica/space.hpp"

namespace dyadica {

// Nonnegative kernel: finite off the diagonal, diagonal entries may be +inf.
class Kernel {
 public:
  Kernel() = default;
  Kernel(std::size_t n, std::vector<double> offdiag, Vec diag, std::string label = "matrix");

  std::size_t size() const noexcept { return n_; }
  double operator()(PointId x, PointId y) const noexcept { return x == y ? diag_[x] : off_[x * n_ + y]; }
  const Vec& diag() const noexcept { return diag_; }
  const std::string& label() const noexcept { return label_; }
  bool is_symmetric() const;

 private:
  std::size_t n_ = 0;
  std::vector<double> off_;
  Vec diag_;
  std::string label_;
};

Kernel kernel_matrix(const std::vector<std::vector<double>>& offdiag, const Vec& diag);
Kernel kernel_constant(std::size_t n, double value);

// d(x,y)^(alpha - n); diagonal +inf unless overridden.
Kernel kernel_frac_rho(const QuasiMetricSpace& space, double alpha, double n,
                       std::optional<double> diag_override = std::nullopt);

enum class BallConvention { Strict, Closed };

// mu(B(x, d(x,y)))^(gamma - 1); diagonal mu({x})^(gamma - 1), or +inf on a
// null point.
Kernel kernel_ball_volume(const QuasiMetricSpace& space, const PointMeasure& mu, double gamma,
                          BallConvention ball = BallConvention::Strict);
Kernel kernel_ball_volume_closed(const QuasiMetricSpace& space, const PointMeasure& mu, double gamma);

// (1 + d(x,y))^(gamma - 1) with diagonal 1; the integer-lattice potential.
Kernel kernel_shifted_distance(const QuasiMetricSpace& space, double gamma);

struct MonotonicityCertificate {
  double k2 = 1.0;
  double k1 = 1.0;
  double k1_first = 1.0;   // condition varying the first variable
  double k1_second = 1.0;  // condition varying the second variable
  std::array<PointId, 3> witness_first{};   // (x, x', y)
  std::array<PointId, 3> witness_second{};  // (x, y, y')
};

MonotonicityCertificate verify_monotonicity(const QuasiMetricSpace& space, const Kernel& kernel, double k2);

double separation_parameter(double a0, double delta);  // delta^2 / (5 a0^2)
double estimate_k2(double a0, double delta);           // 20 a0^4 / delta^2

struct PhiTable {
  double c = 0.0;
  std::vector<Vec> values;                  // [generation][alpha]
  std::vector<std::vector<char>> has_pairs; // separated pair set nonempty
  std::vector<std::vector<std::pair<PointId, PointId>>> argmax;
  int k_min = 0;

  double at(CubeId id) const { return values[static_cast<std::size_t>(id.k - k_min)][id.alpha]; }
  bool separated(CubeId id) const { return has_pairs[static_cast<std::size_t>(id.k - k_min)][id.alpha] != 0; }
};

PhiTable compute_phi(const DyadicSystem& system, const Kernel& kernel);

struct KernelEstimateReport {
  double C_K = 1.0;
  double observed_i = 0.0;
  double observed_ii = 0.0;
  std::size_t cubes_checked_iii = 0;
  bool vacuous = false;
  MonotonicityCertificate monotonicity;
  std::string witness_i;
  std::string witness_ii;
};

// Empirical constant for the upper bound of phi by the kernel on containing
// balls and the comparison of phi across nested cubes; the combinatorial
// clause is checked as a set identity and C_K is compared with k1^2.
KernelEstimateReport verify_kernel_estimates(const DyadicSystem& system, const Kernel& kernel, const PhiTable& phi);

}  // namespace dyadica
