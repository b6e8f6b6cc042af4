#include "dyadica/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dyadica/error.hpp"
#include "dyadica/policy.hpp"
#include "dyadica/sampling.hpp"

namespace dyadica {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool close_rel(double a, double b, double rel) {
  if (a == b) return true;
  if (!std::isfinite(a) || !std::isfinite(b)) return false;
  return std::fabs(a - b) <= rel * std::max(std::fabs(a), std::fabs(b));
}

// Violation of a <= C b, with slack; inf <= inf holds.
bool exceeds(double a, double C, double b) {
  if (a == kInf) return b != kInf;
  return a > C * b * (1.0 + policy::pointwise_bound_rel);
}

std::string fmt_point(const char* what, PointId x, double lhs, double rhs) {
  std::ostringstream os;
  os.precision(17);
  os << what << " at point " << x << ": " << lhs << " vs " << rhs;
  return os.str();
}

}  // namespace

Vec apply_T(const Kernel& K, const PointMeasure& sigma, const Vec& f) {
  const std::size_t n = K.size();
  Vec out(n, 0.0);
  for (PointId x = 0; x < n; ++x) {
    double s = 0.0;
    for (PointId y = 0; y < n; ++y) s += mul0(K(x, y), mul0(f[y], sigma[y]));
    out[x] = s;
  }
  return out;
}

Vec apply_T_adjoint(const Kernel& K, const PointMeasure& omega, const Vec& g) {
  const std::size_t n = K.size();
  Vec out(n, 0.0);
  for (PointId y = 0; y < n; ++y) {
    double s = 0.0;
    for (PointId x = 0; x < n; ++x) s += mul0(K(x, y), mul0(g[x], omega[x]));
    out[y] = s;
  }
  return out;
}

Vec DyadicOperator::apply(const Vec& f, const PointMeasure& mu) const {
  Vec out(n_, 0.0);
  for (PointId x = 0; x < n_; ++x) {
    double s = 0.0;
    for (PointId y = 0; y < n_; ++y) s += mul0(kk_[x * n_ + y], mul0(f[y], mu[y]));
    out[x] = s;
  }
  return out;
}

Vec DyadicOperator::apply_partition(const Vec& f, const PointMeasure& mu, int m) const {
  if (m < 1) raise(Errc::BadM, "m = " + std::to_string(m));
  const auto& sys = *gen_.base;
  const std::size_t depth = sys.generations().size();
  Vec out(n_, 0.0);
  for (PointId x = 0; x < n_; ++x) {
    double s = 0.0;
    for (std::size_t g = 0; g < depth; ++g) {
      const auto& gen = sys.generations()[g];
      const auto& q = gen.cubes[gen.cube_of[x]];
      double shell = 0.0;
      for (PointId y : q.members) {
        if (y == x) continue;
        if (level_[x * n_ + y] < g + static_cast<std::size_t>(m)) shell += mul0(f[y], mu[y]);
      }
      s += mul0(phi_.values[g][gen.cube_of[x]], shell);
    }
    if (gen_.is_joint[x]) s += mul0(diag_[x], mul0(f[x], mu[x]));
    out[x] = s;
  }
  return out;
}

DyadicOperator build_dyadic_operator(const GeneralizedSystem& gen, const Kernel& kernel, const PhiTable& phi,
                                     const PointMeasure& sigma, const PointMeasure& omega, std::optional<double> C_K) {
  const auto& sys = *gen.base;
  const std::size_t n = sys.space().size();
  if (kernel.size() != n) raise(Errc::BadParams, "kernel size does not match the space");
  DyadicOperator op;
  op.gen_ = gen;
  op.phi_ = phi;
  op.sigma_ = sigma;
  op.omega_ = omega;
  op.diag_ = kernel.diag();
  op.n_ = n;
  op.C_K_ = C_K ? *C_K : verify_kernel_estimates(sys, kernel, phi).C_K;
  op.kk_.assign(n * n, 0.0);
  op.level_.assign(n * n, sys.generations().size());
  for (PointId x = 0; x < n; ++x)
    for (PointId y = 0; y < n; ++y) {
      if (x == y) {
        op.kk_[x * n + x] = gen.is_joint[x] ? kernel(x, x) : 0.0;
        continue;
      }
      const auto& q = smallest_common_cube(sys, x, y);
      op.level_[x * n + y] = static_cast<std::size_t>(q.id.k - sys.k_min());
      op.kk_[x * n + y] = phi.at(q.id);
    }

  const PointMeasure unit = PointMeasure::counting(n);
  for (PointId y = 0; y < n; ++y) {
    Vec e(n, 0.0);
    e[y] = 1.0;
    const Vec a = op.apply(e, unit);
    const Vec b = op.apply_partition(e, unit, 1);
    for (PointId x = 0; x < n; ++x)
      if (!close_rel(a[x], b[x], policy::form_agreement_rel)) {
        std::ostringstream os;
        os.precision(17);
        os << "x=" << x << " y=" << y << " kernel form " << a[x] << " partition form " << b[x];
        raise(Errc::FormMismatch, os.str());
      }
  }
  return op;
}

DyadicOperator make_dyadic_operator(std::shared_ptr<const DyadicSystem> system, const Kernel& kernel,
                                    const PointMeasure& sigma, const PointMeasure& omega) {
  const PhiTable phi = compute_phi(*system, kernel);
  GeneralizedSystem gen = generalize(std::move(system), sigma, omega);
  return build_dyadic_operator(gen, kernel, phi, sigma, omega);
}

Vec apply_T_dyadic_m(const DyadicOperator& op, int m, const Vec& f) { return op.apply_partition(f, op.sigma(), m); }

double form_agreement_gap(const DyadicOperator& op, const PointMeasure& mu) {
  const std::size_t n = op.size();
  double gap = 0.0;
  for (PointId y = 0; y < n; ++y) {
    Vec e(n, 0.0);
    e[y] = 1.0;
    const Vec a = op.apply(e, mu);
    const Vec b = op.apply_partition(e, mu, 1);
    for (PointId x = 0; x < n; ++x) {
      if (a[x] == b[x]) continue;
      if (!std::isfinite(a[x]) || !std::isfinite(b[x])) return kInf;
      gap = std::max(gap, std::fabs(a[x] - b[x]) / std::max(std::fabs(a[x]), std::fabs(b[x])));
    }
  }
  return gap;
}

SandwichReport check_sandwich_Tm(const DyadicOperator& op, int m, std::size_t trials, std::uint64_t seed) {
  if (m < 1) raise(Errc::BadM, "m = " + std::to_string(m));
  SandwichReport rep;
  rep.m = m;
  rep.C_K = op.C_K();
  rep.trials = trials;
  Rng rng(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    const Vec f = random_nonneg_function(op.size(), rng);
    const Vec lo = op.apply_partition(f, op.sigma(), 1);
    const Vec hi = op.apply_partition(f, op.sigma(), m);
    for (PointId x = 0; x < op.size(); ++x) {
      if (lo[x] > hi[x]) raise(Errc::SandwichViolated, fmt_point("lower direction", x, lo[x], hi[x]));
      if (hi[x] == kInf) continue;
      if (lo[x] == 0.0) {
        if (hi[x] > 0.0) raise(Errc::SandwichViolated, fmt_point("upper direction, zero base", x, hi[x], 0.0));
        continue;
      }
      rep.vacuous = false;
      rep.empirical_C = std::max(rep.empirical_C, hi[x] / (m * lo[x]));
    }
  }
  if (rep.empirical_C > rep.C_K * (1.0 + policy::pointwise_bound_rel))
    raise(Errc::SandwichViolated, "empirical constant " + std::to_string(rep.empirical_C) + " exceeds C_K " +
                                      std::to_string(rep.C_K));
  return rep;
}

EquivalenceReport check_pointwise_equivalence(const std::vector<const DyadicOperator*>& ops, const Kernel& K,
                                              const PointMeasure& sigma, const PointMeasure& omega,
                                              std::size_t trials, std::uint64_t seed) {
  if (ops.empty()) raise(Errc::BadParams, "no dyadic operators");
  EquivalenceReport rep;
  rep.trials = trials;
  double CK = 1.0;
  for (const auto* op : ops) CK = std::max(CK, op->C_K());
  rep.bound_lower = CK;
  rep.bound_upper = 3.0 * CK;
  const std::size_t n = K.size();
  Rng rng(seed);
  auto ratio_update = [](double& C, double num, double den) {
    if (num == kInf || num == 0.0) return true;
    if (den == 0.0) return false;
    C = std::max(C, num / den);
    return true;
  };
  for (std::size_t t = 0; t < trials; ++t) {
    const Vec f = random_nonneg_function(n, rng);
    const Vec Tf = apply_T(K, sigma, f);
    Vec Tsf(n, 0.0);  // T*(f dsigma)
    for (PointId x = 0; x < n; ++x) {
      double s = 0.0;
      for (PointId y = 0; y < n; ++y) s += mul0(K(y, x), mul0(f[y], sigma[y]));
      Tsf[x] = s;
    }
    Vec sum(n, 0.0);
    for (const auto* op : ops) {
      const Vec D = op->apply(f, sigma);
      for (PointId x = 0; x < n; ++x) {
        sum[x] += D[x];
        if (exceeds(D[x], op->C_K(), Tf[x]))
          raise(Errc::EquivalenceViolated, fmt_point("dyadic above C_K T", x, D[x], Tf[x]));
        if (exceeds(D[x], op->C_K(), Tsf[x]))
          raise(Errc::EquivalenceViolated, fmt_point("dyadic above C_K T*", x, D[x], Tsf[x]));
        if (D[x] > 0.0) rep.vacuous = false;
        ratio_update(rep.C_lower_T, D[x], Tf[x]);
        ratio_update(rep.C_lower_Tstar, D[x], Tsf[x]);
      }
    }
    for (PointId x = 0; x < n; ++x) {
      if (!(omega[x] > 0.0)) continue;
      if (exceeds(Tf[x], rep.bound_upper, sum[x]))
        raise(Errc::EquivalenceViolated, fmt_point("T above 3 C_K sum of dyadic models", x, Tf[x], sum[x]));
      if (Tf[x] > 0.0) rep.vacuous = false;
      ratio_update(rep.C_upper, Tf[x], sum[x]);
    }
  }
  return rep;
}

DualityReport check_self_adjoint(const DyadicOperator& op, std::size_t trials, std::uint64_t seed) {
  DualityReport rep;
  rep.trials = trials;
  Rng rng(seed);
  const std::size_t n = op.size();
  for (std::size_t t = 0; t < trials; ++t) {
    const Vec g = random_nonneg_function(n, rng);
    const Vec h = random_nonneg_function(n, rng);
    const Vec Tg = op.apply(g, op.sigma());
    const Vec Th = op.apply(h, op.omega());
    double lhs = 0.0, rhs = 0.0;
    for (PointId x = 0; x < n; ++x) lhs += mul0(Tg[x], mul0(h[x], op.omega()[x]));
    for (PointId y = 0; y < n; ++y) rhs += mul0(g[y], mul0(Th[y], op.sigma()[y]));
    if (lhs == rhs) continue;
    if (!std::isfinite(lhs) || !std::isfinite(rhs))
      raise(Errc::DualityViolated, "pairings " + std::to_string(lhs) + " and " + std::to_string(rhs));
    const double gap = std::fabs(lhs - rhs) / std::max(std::fabs(lhs), std::fabs(rhs));
    rep.max_rel_gap = std::max(rep.max_rel_gap, gap);
    if (gap > policy::duality_rel)
      raise(Errc::DualityViolated, "trial " + std::to_string(t) + " relative gap " + std::to_string(gap));
  }
  return rep;
}

PointCubeReport check_point_cube_testing(const DyadicOperator& op, double p, double q, double strong, double dual) {
  PointCubeReport rep;
  const double pp = p / (p - 1.0), qq = q / (q - 1.0);
  for (PointId x : op.generalized().joint_atoms) {
    rep.vacuous = false;
    ++rep.atoms_checked;
    const double K = op.kernel_diag()[x];
    const double s = op.sigma()[x], w = op.omega()[x];
    if (!std::isfinite(K))
      raise(Errc::PointCubeViolated, "joint atom " + std::to_string(x) + " has infinite diagonal kernel");
    const double l1 = K * std::pow(w, 1.0 / q), r1 = strong * std::pow(s, 1.0 / p - 1.0);
    const double l2 = K * std::pow(s, 1.0 / pp), r2 = dual * std::pow(w, 1.0 / qq - 1.0);
    if (exceeds(l1, 1.0, r1)) raise(Errc::PointCubeViolated, fmt_point("strong point-cube bound", x, l1, r1));
    if (exceeds(l2, 1.0, r2)) raise(Errc::PointCubeViolated, fmt_point("dual point-cube bound", x, l2, r2));
  }
  return rep;
}

}  // namespace dyadica
