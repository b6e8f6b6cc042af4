#include "dyadica/maximal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "dyadica/error.hpp"
#include "dyadica/policy.hpp"
#include "dyadica/sampling.hpp"

namespace dyadica {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const PointMeasure& inside_or(const std::optional<PointMeasure>& inside, const MaximalParams& params) {
  return inside ? *inside : params.mu;
}

// Product with 0 * anything = 0, so null points never contribute.
double weighted(double f, double m) { return (f == 0.0 || m == 0.0) ? 0.0 : std::fabs(f) * m; }

struct DyadicArgmax {
  Vec value;
  Vec mass;
  std::vector<std::size_t> gen;
  std::vector<std::size_t> alpha;
  std::vector<char> found;
};

DyadicArgmax dyadic_argmax(const DyadicSystem& system, const MaximalParams& params, const Vec& f,
                           const PointMeasure& in) {
  const std::size_t n = system.space().size();
  DyadicArgmax out{Vec(n, 0.0), Vec(n, 0.0), std::vector<std::size_t>(n, 0), std::vector<std::size_t>(n, 0),
                   std::vector<char>(n, 0)};
  const auto& gens = system.generations();
  for (std::size_t g = 0; g < gens.size(); ++g)
    for (const auto& q : gens[g].cubes) {
      double mass = 0.0, integral = 0.0;
      for (PointId y : q.members) {
        mass += params.mu[y];
        integral += weighted(f[y], in[y]);
      }
      if (!(mass > 0.0)) continue;
      const double r = std::pow(mass, params.gamma - 1.0) * integral;
      for (PointId x : q.members)
        if (!out.found[x] || r > out.value[x]) {
          out.found[x] = 1;
          out.value[x] = r;
          out.mass[x] = mass;
          out.gen[x] = g;
          out.alpha[x] = q.id.alpha;
        }
    }
  return out;
}

bool exceeds(double a, double C, double b) { return a > C * b * (1.0 + policy::pointwise_bound_rel); }

std::string fmt_point(const char* what, PointId x, double lhs, double rhs) {
  std::ostringstream os;
  os.precision(17);
  os << what << " at point " << x << ": " << lhs << " vs " << rhs;
  return os.str();
}

}  // namespace

double doubling_constant(const QuasiMetricSpace& space, const PointMeasure& mu) {
  const std::size_t n = space.size();
  double C = 1.0;
  for (PointId x = 0; x < n; ++x) {
    const auto& ord = space.by_distance(x);
    Vec prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + mu[ord[i]];
    for (std::size_t i = 1; i < n; ++i) {
      const double r = space.dist(x, ord[i]);
      if (space.dist(x, ord[i - 1]) == r) continue;
      const double small = prefix[i];  // strict ball of radius r
      std::size_t j = i;
      while (j < n && space.dist(x, ord[j]) < 2.0 * r) ++j;
      const double big = prefix[j];
      if (!(small > 0.0)) {
        if (big > 0.0) return kInf;
        continue;
      }
      C = std::max(C, big / small);
    }
  }
  return C;
}

MaximalParams make_maximal_params(const QuasiMetricSpace& space, const PointMeasure& mu, double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) raise(Errc::BadExponents, "need 0 <= gamma < 1");
  if (mu.size() != space.size()) raise(Errc::BadParams, "measure size does not match the space");
  return {gamma, mu, doubling_constant(space, mu)};
}

MaximalArgmax apply_M_argmax(const QuasiMetricSpace& space, const MaximalParams& params, const Vec& f,
                             const std::optional<PointMeasure>& inside) {
  const PointMeasure& in = inside_or(inside, params);
  const std::size_t n = space.size();
  MaximalArgmax out{Vec(n, 0.0), Vec(n, 0.0), std::vector<PointId>(n, 0), std::vector<std::size_t>(n, 0)};
  Vec best(n), best_mass(n);
  std::vector<std::size_t> best_end(n);
  for (PointId c = 0; c < n; ++c) {
    const auto& ord = space.by_distance(c);
    // Balls centered at c are the prefixes of ord ending at a distance jump.
    Vec mass(n + 1, 0.0), integral(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      mass[i + 1] = mass[i] + params.mu[ord[i]];
      integral[i + 1] = integral[i] + weighted(f[ord[i]], in[ord[i]]);
    }
    // best[i]: best ball containing ord[i], scanning prefixes from the largest.
    double run = -1.0, run_mass = 0.0;
    std::size_t run_end = 0;
    std::size_t i = n;
    while (i > 0) {
      std::size_t start = i - 1;
      const double d = space.dist(c, ord[start]);
      while (start > 0 && space.dist(c, ord[start - 1]) == d) --start;
      if (mass[i] > 0.0) {
        const double r = std::pow(mass[i], params.gamma - 1.0) * integral[i];
        if (r >= run) {
          run = r;
          run_mass = mass[i];
          run_end = i;
        }
      }
      for (std::size_t t = start; t < i; ++t) {
        best[t] = run;
        best_mass[t] = run_mass;
        best_end[t] = run_end;
      }
      i = start;
    }
    for (std::size_t t = 0; t < n; ++t) {
      const PointId x = ord[t];
      if (best[t] < 0.0) continue;
      if (out.prefix[x] == 0 || best[t] > out.value[x]) {
        out.value[x] = best[t];
        out.mass[x] = best_mass[t];
        out.center[x] = c;
        out.prefix[x] = best_end[t];
      }
    }
  }
  return out;
}

Vec apply_M(const QuasiMetricSpace& space, const MaximalParams& params, const Vec& f,
            const std::optional<PointMeasure>& inside) {
  return apply_M_argmax(space, params, f, inside).value;
}

Vec apply_M_dyadic(const DyadicSystem& system, const MaximalParams& params, const Vec& f,
                   const std::optional<PointMeasure>& inside) {
  return dyadic_argmax(system, params, f, inside_or(inside, params)).value;
}

MaximalEquivalenceReport check_maximal_equivalence(const AdjacentFamily& family, const MaximalParams& params,
                                                   std::size_t trials, std::uint64_t seed) {
  if (family.systems.empty()) raise(Errc::BadParams, "empty family");
  if (!std::isfinite(params.doubling_constant)) raise(Errc::BadParams, "measure is not doubling");
  const QuasiMetricSpace& X = family.systems.front()->space();
  const std::size_t n = X.size();
  const double expo = 1.0 - params.gamma;
  MaximalEquivalenceReport rep;
  rep.trials = trials;
  rep.doubling_constant = params.doubling_constant;

  for (const auto& sys : family.systems)
    for (const auto& g : sys->generations())
      for (const auto& q : g.cubes) {
        const double mq = params.mu.of(q.members);
        if (!(mq > 0.0)) continue;
        rep.ratio_bound = std::max(rep.ratio_bound, std::pow(params.mu.of(q.ball_members) / mq, expo));
      }

  // For every charged ball, the lightest cube of the family containing it.
  for (PointId c = 0; c < n; ++c) {
    const auto& ord = X.by_distance(c);
    double mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mass += params.mu[ord[i]];
      if (i + 1 < n && X.dist(c, ord[i + 1]) == X.dist(c, ord[i])) continue;
      if (!(mass > 0.0)) continue;
      double lightest = kInf;
      for (const auto& sys : family.systems) {
        const auto& gens = sys->generations();
        for (std::size_t k = gens.size(); k-- > 0;) {
          const std::size_t a = gens[k].cube_of[c];
          bool inside = true;
          for (std::size_t t = 0; t <= i && inside; ++t) inside = gens[k].cube_of[ord[t]] == a;
          if (!inside) continue;
          lightest = std::min(lightest, params.mu.of(gens[k].cubes[a].members));
          break;
        }
      }
      rep.cover_bound = std::max(rep.cover_bound, std::pow(lightest / mass, expo));
    }
  }

  Rng rng(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    const Vec f = random_nonneg_function(n, rng);
    const Vec M = apply_M(X, params, f);
    Vec sum(n, 0.0);
    for (const auto& sys : family.systems) {
      const Vec D = apply_M_dyadic(*sys, params, f);
      for (PointId x = 0; x < n; ++x) {
        sum[x] += D[x];
        if (exceeds(D[x], rep.ratio_bound, M[x]))
          raise(Errc::EquivalenceViolated, fmt_point("dyadic maximal above ratio bound", x, D[x], M[x]));
        if (M[x] > 0.0) rep.C_lower = std::max(rep.C_lower, D[x] / M[x]);
      }
    }
    for (PointId x = 0; x < n; ++x) {
      if (exceeds(M[x], rep.cover_bound, sum[x]))
        raise(Errc::EquivalenceViolated, fmt_point("maximal above cover bound", x, M[x], sum[x]));
      if (sum[x] > 0.0) rep.C_upper = std::max(rep.C_upper, M[x] / sum[x]);
    }
  }
  return rep;
}

DualWeight dual_weight(const PointMeasure& mu, const PointMeasure& sigma, double p) {
  if (!(p > 1.0) || !std::isfinite(p)) raise(Errc::BadExponents, "need 1 < p < inf");
  const std::size_t n = mu.size();
  if (sigma.size() != n) raise(Errc::BadParams, "measure sizes differ");
  DualWeight w;
  w.u.assign(n, 0.0);
  w.v.assign(n, 0.0);
  Vec vm(n, 0.0);
  for (PointId x = 0; x < n; ++x) {
    if (!(sigma[x] > 0.0)) {
      if (mu[x] > 0.0) raise(Errc::NotAbsolutelyContinuous, "mu charges point " + std::to_string(x));
      continue;
    }
    w.u[x] = mu[x] / sigma[x];
    if (w.u[x] > 0.0) w.v[x] = std::pow(w.u[x], 1.0 / (p - 1.0));
    vm[x] = w.v[x] * mu[x];
    const double lhs = std::pow(w.v[x], p) * sigma[x];
    if (lhs != vm[x]) w.identity_gap = std::max(w.identity_gap, std::fabs(lhs - vm[x]) / std::max(lhs, vm[x]));
  }
  if (w.identity_gap > policy::dual_weight_rel)
    raise(Errc::PropertyViolation, "dual weight identity gap " + std::to_string(w.identity_gap));
  w.v_measure = PointMeasure(std::move(vm));
  return w;
}

MaximalTesting testing_constant_maximal(const QuasiMetricSpace& space, const std::vector<TestCube>& cubes,
                                        const MaximalParams& params, const PointMeasure& v, const PointMeasure& omega,
                                        const Exponents& e, const DyadicSystem* dyadic) {
  const std::size_t n = space.size();
  MaximalTesting out;
  for (const auto& c : cubes) {
    Vec chi(n, 0.0);
    for (PointId x : c.members) chi[x] = 1.0;
    const double den = lp_norm(chi, v, e.p);
    if (!(den > 0.0)) {
      ++out.convention_hits;
      continue;
    }
    const Vec M = dyadic ? apply_M_dyadic(*dyadic, params, chi, v) : apply_M(space, params, chi, v);
    Vec loc(n, 0.0);
    for (PointId x : c.members) loc[x] = M[x];
    const double val = lp_norm(loc, omega, e.q) / den;
    if (val == kInf) raise(Errc::Infinite, describe(c));
    if (!out.argmax || val > out.value) {
      out.value = val;
      out.argmax = c;
    }
  }
  return out;
}

PositiveOperator maximal_operator(const QuasiMetricSpace& space, const MaximalParams& params,
                                  const PointMeasure& inside, const PointMeasure& domain, const PointMeasure& target) {
  PositiveOperator A;
  A.linear = false;
  A.apply = [&space, &params, &inside](const Vec& f) { return apply_M(space, params, f, inside); };
  A.adjoint_at = [&space, &params, &inside, &domain, &target](const Vec& f, const Vec& g) {
    const std::size_t n = space.size();
    const MaximalArgmax am = apply_M_argmax(space, params, f, inside);
    Vec out(n, 0.0);
    for (PointId x = 0; x < n; ++x) {
      if (am.prefix[x] == 0 || !(target[x] > 0.0) || !(g[x] > 0.0)) continue;
      const double w = std::pow(am.mass[x], params.gamma - 1.0) * target[x] * g[x];
      const auto& ord = space.by_distance(am.center[x]);
      for (std::size_t t = 0; t < am.prefix[x]; ++t) out[ord[t]] += w * inside[ord[t]];
    }
    for (PointId y = 0; y < n; ++y) out[y] = domain[y] > 0.0 ? out[y] / domain[y] : 0.0;
    return out;
  };
  return A;
}

PositiveOperator maximal_dyadic_operator(const DyadicSystem& system, const MaximalParams& params,
                                         const PointMeasure& inside, const PointMeasure& domain,
                                         const PointMeasure& target) {
  PositiveOperator A;
  A.linear = false;
  A.apply = [&system, &params, &inside](const Vec& f) { return apply_M_dyadic(system, params, f, inside); };
  A.adjoint_at = [&system, &params, &inside, &domain, &target](const Vec& f, const Vec& g) {
    const std::size_t n = system.space().size();
    const DyadicArgmax am = dyadic_argmax(system, params, f, inside);
    Vec out(n, 0.0);
    for (PointId x = 0; x < n; ++x) {
      if (!am.found[x] || !(target[x] > 0.0) || !(g[x] > 0.0)) continue;
      const double w = std::pow(am.mass[x], params.gamma - 1.0) * target[x] * g[x];
      for (PointId y : system.generations()[am.gen[x]].cubes[am.alpha[x]].members) out[y] += w * inside[y];
    }
    for (PointId y = 0; y < n; ++y) out[y] = domain[y] > 0.0 ? out[y] / domain[y] : 0.0;
    return out;
  };
  return A;
}

TheoremAReport verdict_theorem_A(const AdjacentFamily& family, const MaximalParams& params, const PointMeasure& sigma,
                                 const PointMeasure& omega, const Exponents& e, const NormBudget& budget,
                                 std::uint64_t seed) {
  if (family.systems.empty()) raise(Errc::BadParams, "empty family");
  const QuasiMetricSpace& X = family.systems.front()->space();
  const std::size_t n = X.size();
  const PointMeasure& mu = params.mu;
  TheoremAReport rep;

  for (PointId x = 0; x < n; ++x)
    if (mu[x] > 0.0 && !(sigma[x] > 0.0)) rep.violating_set.push_back(x);
  if (!rep.violating_set.empty()) {
    rep.absolutely_continuous = false;
    if (!(omega.total() > 0.0)) raise(Errc::HypothesisViolated, "omega vanishes; the inequality holds trivially");
    Vec chi(n, 0.0);
    for (PointId x : rep.violating_set) chi[x] = 1.0;
    rep.lhs = lp_norm(apply_M(X, params, chi), omega, e.q);
    rep.rhs = lp_norm(chi, sigma, e.p);
    if (!(rep.lhs > 0.0) || rep.rhs != 0.0)
      raise(Errc::PropertyViolation, "violating set does not falsify the norm inequality");
    return rep;
  }

  const DualWeight dw = dual_weight(mu, sigma, e.p);
  rep.identity_gap = dw.identity_gap;
  const auto cubes = standard_cubes(family);
  const MaximalTesting t1 = testing_constant_maximal(X, cubes, params, dw.v_measure, omega, e);
  rep.N1 = t1.value;
  rep.argmax = t1.argmax;

  std::vector<Vec> seeds;
  std::map<PointSet, bool> seen;
  for (const auto& c : cubes) {
    if (!seen.emplace(c.members, true).second) continue;
    Vec f(n, 0.0), chi(n, 0.0);
    for (PointId x : c.members) {
      f[x] = dw.v[x];
      chi[x] = 1.0;
    }
    seeds.push_back(std::move(f));
    seeds.push_back(std::move(chi));
  }
  rep.norm = operator_norm_strong(maximal_operator(X, params, mu, sigma, omega), sigma, omega, e, budget, seeds, seed);
  if (rep.N1 > rep.norm.lower + policy::lower_bound_abs) {
    std::ostringstream os;
    os.precision(17);
    os << "testing constant " << rep.N1 << " exceeds norm lower bound " << rep.norm.lower;
    raise(Errc::LowerBoundViolated, os.str());
  }
  rep.ratio = rep.N1 == 0.0 ? (rep.norm.lower == 0.0 ? 1.0 : kInf) : rep.norm.lower / rep.N1;

  const double pp = e.p_conj();
  for (std::size_t t = 0; t < family.L(); ++t) {
    const DyadicSystem& sys = *family.systems[t];
    const auto sc = standard_cubes(sys, t);
    DyadicMaximalCheck chk;
    chk.system = t;
    chk.testing = testing_constant_maximal(X, sc, params, dw.v_measure, omega, e, &sys).value;
    chk.bound = e.q == kInf ? 2.0 * chk.testing : 4.0 * std::pow(2.0, 1.0 / e.p) * pp * chk.testing;
    const NormEstimate nd =
        operator_norm_strong(maximal_dyadic_operator(sys, params, dw.v_measure, dw.v_measure, omega), dw.v_measure,
                             omega, e, budget, indicator_seeds(sc, n), splitmix64(seed + t + 1));
    chk.norm_lb = nd.lower;
    if (chk.testing > nd.lower + policy::lower_bound_abs)
      raise(Errc::LowerBoundViolated, "dyadic testing above its norm lower bound in system " + std::to_string(t));
    if (chk.norm_lb > chk.bound * (1.0 + policy::pointwise_bound_rel) + policy::lower_bound_abs) {
      std::ostringstream os;
      os.precision(17);
      os << "system " << t << " dyadic maximal norm " << chk.norm_lb << " exceeds " << chk.bound;
      raise(Errc::BoundViolated, os.str());
    }
    rep.dyadic.push_back(chk);
  }
  return rep;
}

}  // namespace dyadica
