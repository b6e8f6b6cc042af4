#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dyadica/dyadic.hpp"
#include "dyadica/kernel.hpp"

namespace dyadica {

// Product with the convention 0 * inf = 0.
inline double mul0(double a, double b) { return (a == 0.0 || b == 0.0) ? 0.0 : a * b; }

// T(f dsigma)(x) = sum_y K(x,y) f(y) sigma({y}).
Vec apply_T(const Kernel& kernel, const PointMeasure& sigma, const Vec& f);
// T*(g domega)(y) = sum_x K(x,y) g(x) omega({x}).
Vec apply_T_adjoint(const Kernel& kernel, const PointMeasure& omega, const Vec& g);

class DyadicOperator {
 public:
  const GeneralizedSystem& generalized() const { return gen_; }
  const DyadicSystem& system() const { return *gen_.base; }
  const PhiTable& phi() const { return phi_; }
  const PointMeasure& sigma() const { return sigma_; }
  const PointMeasure& omega() const { return omega_; }
  const Vec& kernel_diag() const { return diag_; }
  double C_K() const { return C_K_; }
  std::size_t size() const { return n_; }

  // Symmetric dyadic kernel: phi of the smallest common cube off the
  // diagonal, K(x,x) at joint atoms, 0 elsewhere on the diagonal.
  double k(PointId x, PointId y) const { return kk_[x * n_ + y]; }
  // Deepest generation index (0 = k_min) whose cube holds both points;
  // depth() for x == y.
  std::size_t common_level(PointId x, PointId y) const { return level_[x * n_ + y]; }

  // Kernel form of T^D(f dmu).
  Vec apply(const Vec& f, const PointMeasure& mu) const;
  Vec apply(const Vec& f) const { return apply(f, sigma_); }
  // Partition-sum form with shells Q^k(x) minus Q^{k+m}(x); generations past
  // the window read as the singleton {x}.
  Vec apply_partition(const Vec& f, const PointMeasure& mu, int m) const;

 private:
  friend DyadicOperator build_dyadic_operator(const GeneralizedSystem&, const Kernel&, const PhiTable&,
                                              const PointMeasure&, const PointMeasure&, std::optional<double>);
  GeneralizedSystem gen_;
  PhiTable phi_;
  PointMeasure sigma_;
  PointMeasure omega_;
  Vec diag_;
  double C_K_ = 1.0;
  std::size_t n_ = 0;
  std::vector<double> kk_;
  std::vector<std::size_t> level_;
};

// Materializes the dyadic kernel and checks it against the partition-sum
// form on every point mass. C_K is taken from the kernel estimates unless
// supplied.
DyadicOperator build_dyadic_operator(const GeneralizedSystem& gen, const Kernel& kernel, const PhiTable& phi,
                                     const PointMeasure& sigma, const PointMeasure& omega,
                                     std::optional<double> C_K = std::nullopt);

// Convenience: generalize, compute phi and C_K, build.
DyadicOperator make_dyadic_operator(std::shared_ptr<const DyadicSystem> system, const Kernel& kernel,
                                    const PointMeasure& sigma, const PointMeasure& omega);

Vec apply_T_dyadic_m(const DyadicOperator& op, int m, const Vec& f);

// Largest relative gap between the two forms over all point masses.
double form_agreement_gap(const DyadicOperator& op, const PointMeasure& mu);

struct SandwichReport {
  int m = 1;
  double empirical_C = 0.0;
  double C_K = 1.0;
  std::size_t trials = 0;
  bool vacuous = true;
};

SandwichReport check_sandwich_Tm(const DyadicOperator& op, int m, std::size_t trials, std::uint64_t seed);

struct EquivalenceReport {
  double C_lower_T = 0.0;
  double C_lower_Tstar = 0.0;
  double C_upper = 0.0;
  double bound_lower = 1.0;  // max C_K over the family
  double bound_upper = 3.0;  // 3 max C_K
  std::size_t trials = 0;
  bool vacuous = true;
};

EquivalenceReport check_pointwise_equivalence(const std::vector<const DyadicOperator*>& ops, const Kernel& kernel,
                                              const PointMeasure& sigma, const PointMeasure& omega,
                                              std::size_t trials, std::uint64_t seed);

struct DualityReport {
  double max_rel_gap = 0.0;
  std::size_t trials = 0;
};

DualityReport check_self_adjoint(const DyadicOperator& op, std::size_t trials, std::uint64_t seed);

struct PointCubeReport {
  std::size_t atoms_checked = 0;
  bool vacuous = true;
};

// Point-cube testing inequalities at every joint atom against the given
// strong and dual testing constants.
PointCubeReport check_point_cube_testing(const DyadicOperator& op, double p, double q, double strong_testing,
                                         double dual_testing);

}  // namespace dyadica
