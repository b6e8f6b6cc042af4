#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dyadica/dyadic.hpp"
#include "dyadica/norms.hpp"
#include "dyadica/space.hpp"

namespace dyadica {

struct MaximalParams {
  double gamma = 0.0;
  PointMeasure mu;
  double doubling_constant = 1.0;
};

// Validates 0 <= gamma < 1 and measures the doubling constant of mu.
MaximalParams make_maximal_params(const QuasiMetricSpace& space, const PointMeasure& mu, double gamma);

// sup over x and r of mu(B(x, 2r)) / mu(B(x, r)). Between consecutive
// distances from x the small ball is fixed and the large one grows, so r runs
// over the distances themselves. +inf if a null ball doubles to a charged one.
double doubling_constant(const QuasiMetricSpace& space, const PointMeasure& mu);

// sup over strict balls B containing x with mu(B) > 0 of
// mu(B)^(gamma - 1) sum_B |f| inside; inside defaults to mu.
Vec apply_M(const QuasiMetricSpace& space, const MaximalParams& params, const Vec& f,
            const std::optional<PointMeasure>& inside = std::nullopt);

// Same over the cubes of one system.
Vec apply_M_dyadic(const DyadicSystem& system, const MaximalParams& params, const Vec& f,
                   const std::optional<PointMeasure>& inside = std::nullopt);

// The argmax ball of apply_M per point, as (center, member count of the
// by_distance prefix); count 0 when no charged ball contains the point.
struct MaximalArgmax {
  Vec value;
  Vec mass;  // mu of the argmax ball
  std::vector<PointId> center;
  std::vector<std::size_t> prefix;
};
MaximalArgmax apply_M_argmax(const QuasiMetricSpace& space, const MaximalParams& params, const Vec& f,
                             const std::optional<PointMeasure>& inside = std::nullopt);

struct MaximalEquivalenceReport {
  double ratio_bound = 1.0;      // sup_Q (mu(B(Q)) / mu(Q))^(1 - gamma) over the family
  double cover_bound = 1.0;      // sup_B (mu(Q_B) / mu(B))^(1 - gamma), Q_B the best cube containing B
  double C_lower = 0.0;          // empirical sup of M^D f / M f
  double C_upper = 0.0;          // empirical sup of M f / sum_t M^{D_t} f
  double doubling_constant = 1.0;
  std::size_t trials = 0;
};

MaximalEquivalenceReport check_maximal_equivalence(const AdjacentFamily& family, const MaximalParams& params,
                                                   std::size_t trials, std::uint64_t seed);

struct DualWeight {
  Vec u;
  Vec v;
  PointMeasure v_measure;  // v dmu
  double identity_gap = 0.0;
};

DualWeight dual_weight(const PointMeasure& mu, const PointMeasure& sigma, double p);

struct MaximalTesting {
  double value = 0.0;
  std::optional<TestCube> argmax;
  std::size_t convention_hits = 0;
};

// sup_Q v(Q)^(-1/p) ||chi_Q M_gamma(chi_Q dv)||_{L^q_omega}; with a system the
// dyadic operator of that system is used inside instead of balls.
MaximalTesting testing_constant_maximal(const QuasiMetricSpace& space, const std::vector<TestCube>& cubes,
                                        const MaximalParams& params, const PointMeasure& v, const PointMeasure& omega,
                                        const Exponents& e, const DyadicSystem* dyadic = nullptr);

// f -> M_{mu,gamma}(f inside) as a sublinear positive operator from the
// domain measure; adjoint_at uses the argmax balls at f.
PositiveOperator maximal_operator(const QuasiMetricSpace& space, const MaximalParams& params,
                                  const PointMeasure& inside, const PointMeasure& domain, const PointMeasure& target);
PositiveOperator maximal_dyadic_operator(const DyadicSystem& system, const MaximalParams& params,
                                         const PointMeasure& inside, const PointMeasure& domain,
                                         const PointMeasure& target);

struct DyadicMaximalCheck {
  std::size_t system = 0;
  double norm_lb = 0.0;
  double testing = 0.0;
  double bound = 0.0;  // 4 2^(1/p) p' times testing, or 2 times testing for q = inf
};

struct TheoremAReport {
  bool absolutely_continuous = true;
  double N1 = 0.0;
  NormEstimate norm;
  double ratio = 1.0;
  std::optional<TestCube> argmax;
  double identity_gap = 0.0;
  std::vector<DyadicMaximalCheck> dyadic;
  // Necessity branch.
  PointSet violating_set;
  double lhs = 0.0;
  double rhs = 0.0;
};

TheoremAReport verdict_theorem_A(const AdjacentFamily& family, const MaximalParams& params, const PointMeasure& sigma,
                                 const PointMeasure& omega, const Exponents& e, const NormBudget& budget,
                                 std::uint64_t seed);

}  // namespace dyadica
