#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dyadica/norms.hpp"
#include "dyadica/operators.hpp"

namespace dyadica {

struct ShellParams {
  double C_K = 1.0;
  int n = 2;          // smallest integer >= 2 with 2^(n-1) >= 2 C_K
  double C_m = 2.0;   // defaults to 2^(n-1)
};

ShellParams shell_params(double C_K, std::optional<double> C_m = std::nullopt);

struct LevelSetDecomposition {
  double rho = 0.0;
  Vec values;                  // T^D f
  PointSet omega_set;          // {x : T^D f(x) > rho}
  std::vector<TestCube> q_rho; // maximal generalized cubes with omega(Q \ Omega) = 0
};

// Scans the standard and point cubes of the operator's generalized system.
LevelSetDecomposition decompose_level_set(const DyadicOperator& op, const Vec& f, double rho);

struct PrincipleReport {
  std::size_t cubes = 0;
  std::size_t points = 0;
  double worst = 0.0;  // largest lhs / rho (first principle) or smallest (second)
  bool vacuous = true;
};

// max over x in Q of T^D(chi_{Q^c} f dsigma)(x) <= rho / 2 for Q in q_{rho/C}.
PrincipleReport check_max_principle_1(const DyadicOperator& op, const Vec& f, double rho, double C);
// T^D(chi_Q f dsigma)(x) > rho / 2 for Q in q_{rho/C_m} and x in Q with T^D f(x) > rho.
PrincipleReport check_max_principle_2(const DyadicOperator& op, const Vec& f, double rho, double C_m);

// Level grid used by the random trials: distinct values of T^D f scaled by 1/2, 1, 2.
std::vector<double> rho_grid(const Vec& values);

double sigma_average(const PointSet& members, const PointMeasure& sigma, const Vec& f);

struct PrincipalFamily {
  const DyadicSystem* system = nullptr;
  std::vector<CubeId> cubes;
  std::vector<std::optional<std::size_t>> parent;  // stopping parent, index into cubes
  Vec averages;
  // Pi(Q) per cube as [generation][alpha]; empty optional when sigma(Q) = 0.
  std::vector<std::vector<std::optional<std::size_t>>> pi;

  std::optional<std::size_t> owner(CubeId id) const {
    return pi[static_cast<std::size_t>(id.k - system->k_min())][id.alpha];
  }
};

// Both nesting invariants are checked before return.
PrincipalFamily build_principal_cubes(const DyadicSystem& system, const PointMeasure& sigma, const Vec& f);

struct MainLemmaReport {
  double worst_ratio = 0.0;  // max over x of lhs / (M^D_sigma f(x))^p
  std::size_t points = 0;
};

MainLemmaReport check_mainlemma(const DyadicSystem& system, const std::vector<PointSet>& collection,
                                const PointMeasure& sigma, const Vec& f, double p);
MainLemmaReport check_mainlemma(const PrincipalFamily& family, const PointMeasure& sigma, const Vec& f, double p);

struct UniversalMaximalReport {
  double worst_ratio = 0.0;  // ||M^D_w f|| / ||f|| in L^p_w
  double bound = 0.0;        // p'
  std::size_t trials = 0;
};

UniversalMaximalReport check_universal_maximal(const DyadicSystem& system, const PointMeasure& weight, double p,
                                               std::size_t trials, std::uint64_t seed);

}  // namespace dyadica
