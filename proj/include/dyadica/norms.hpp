#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dyadica/dyadic.hpp"
#include "dyadica/kernel.hpp"
#include "dyadica/operators.hpp"

namespace dyadica {

double conjugate_exponent(double s);  // s / (s - 1), with inf <-> 1

struct Exponents {
  double p = 2.0;
  double q = 2.0;
  double p_conj() const { return conjugate_exponent(p); }
  double q_conj() const { return conjugate_exponent(q); }
};

// 1 < p <= q <= inf and p < inf; q = inf only where allow_q_inf is set.
Exponents make_exponents(double p, double q, bool allow_q_inf = false);

double lp_norm(const Vec& f, const PointMeasure& mu, double p);
// Exact: max over values v of g of v * omega({g >= v})^(1/q).
double weak_quasinorm(const Vec& g, const PointMeasure& omega, double q);

// Positive operator from functions on (X, domain measure) to functions on
// (X, target measure). adjoint_at(f, g) is the weighted adjoint of the
// linearization at f: y -> domain(y)^{-1} sum_x a_xy target(x) g(x), which for
// T is T*(g dw). matrix() returns the entries a_xy of a linear operator.
struct PositiveOperator {
  std::function<Vec(const Vec&)> apply;
  std::function<Vec(const Vec&, const Vec&)> adjoint_at;
  std::function<std::vector<double>()> matrix;
  bool linear = true;
};

PositiveOperator potential_operator(const Kernel& K, const PointMeasure& sigma, const PointMeasure& omega);
PositiveOperator potential_adjoint_operator(const Kernel& K, const PointMeasure& sigma, const PointMeasure& omega);
// The dyadic model is self-adjoint, so one wrapper serves both directions:
// from (X, domain) to (X, target) using domain as the integrating measure.
PositiveOperator dyadic_operator(const DyadicOperator& op, const PointMeasure& domain, const PointMeasure& target);

struct NormBudget {
  std::size_t starts = 6;
  std::size_t iterations = 60;
  std::size_t ascent_steps = 150;
  std::size_t refine = 4;  // best seeds refined by iteration and ascent
};

struct NormEstimate {
  double lower = 0.0;
  double estimate = 0.0;
  Vec witness;
  std::string method;
  std::optional<double> spectral;  // exact singular value bound, p = q = 2 linear only
  std::size_t evaluations = 0;
};

NormEstimate operator_norm_strong(const PositiveOperator& A, const PointMeasure& sigma, const PointMeasure& omega,
                                  const Exponents& e, const NormBudget& budget, const std::vector<Vec>& seeds,
                                  std::uint64_t seed);
NormEstimate operator_norm_weak(const PositiveOperator& A, const PointMeasure& sigma, const PointMeasure& omega,
                                const Exponents& e, const NormBudget& budget, const std::vector<Vec>& seeds,
                                std::uint64_t seed);

// Safeguarded fixed-point iteration from f0; returns the best ratio seen and
// leaves its argument in f0.
double fixed_point_iteration(const PositiveOperator& A, const PointMeasure& sigma, const PointMeasure& omega,
                             const Exponents& e, Vec& f0, std::size_t iterations);

// Objective values used by the optimizers, for witness replay.
double strong_ratio(const PositiveOperator& A, const PointMeasure& sigma, const PointMeasure& omega,
                    const Exponents& e, const Vec& f);
double weak_ratio(const PositiveOperator& A, const PointMeasure& sigma, const PointMeasure& omega,
                  const Exponents& e, const Vec& f);

struct TestCube {
  std::size_t system = 0;
  CubeId id;
  bool point = false;
  PointSet members;
};

std::string describe(const TestCube& c);
std::vector<TestCube> standard_cubes(const DyadicSystem& system, std::size_t system_index);
std::vector<TestCube> standard_cubes(const AdjacentFamily& family);
std::vector<TestCube> generalized_cubes(const GeneralizedSystem& gen, std::size_t system_index);
std::vector<Vec> indicator_seeds(const std::vector<TestCube>& cubes, std::size_t n);

struct TestingConstants {
  double strong = 0.0;
  double dual = 0.0;
  std::optional<TestCube> argmax_strong;
  std::optional<TestCube> argmax_dual;
  std::size_t convention_hits_strong = 0;
  std::size_t convention_hits_dual = 0;
  bool infinite = false;
  std::string infinite_cube;
};

// forward(f) = S(f dsigma); backward(g) = S*(g domega).
TestingConstants testing_constants(const std::function<Vec(const Vec&)>& forward,
                                   const std::function<Vec(const Vec&)>& backward,
                                   const std::vector<TestCube>& cubes, const PointMeasure& sigma,
                                   const PointMeasure& omega, const Exponents& e);

struct TheoremBReport {
  TestingConstants testing;
  NormEstimate norm;
  NormEstimate adjoint_norm;
  double norm_lb = 0.0;
  double testing_sum = 0.0;
  double ratio = 1.0;
};

TheoremBReport verdict_theorem_B(const Kernel& K, const PointMeasure& sigma, const PointMeasure& omega,
                                 const std::vector<TestCube>& cubes, const Exponents& e, const NormBudget& budget,
                                 std::uint64_t seed);

struct DyadicWeakCheck {
  std::size_t system = 0;
  double weak_lb = 0.0;
  double dual_testing = 0.0;
  double C_m = 2.0;
  double upper_bound = 0.0;  // 2 C_m^(q-1) times the dual testing constant
};

struct WeakTypeReport {
  TestingConstants testing;
  NormEstimate weak_norm;
  double ratio = 1.0;
  std::vector<DyadicWeakCheck> dyadic;
};

// Extremal functions of the dual testing ratios: chi_Q (S*(chi_Q domega))^(p'-1).
std::vector<Vec> dual_extremal_seeds(const std::function<Vec(const Vec&)>& backward,
                                     const std::vector<TestCube>& cubes, std::size_t n, const Exponents& e);

WeakTypeReport verdict_weak_type(const Kernel& K, const PointMeasure& sigma, const PointMeasure& omega,
                                 const std::vector<TestCube>& cubes, const std::vector<const DyadicOperator*>& ops,
                                 const Exponents& e, const NormBudget& budget, std::uint64_t seed);

}  // namespace dyadica
