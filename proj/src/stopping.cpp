#include "dyadica/stopping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dyadica/error.hpp"
#include "dyadica/maximal.hpp"
#include "dyadica/policy.hpp"
#include "dyadica/sampling.hpp"

namespace dyadica {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::size_t gen_index(const DyadicSystem& s, CubeId id) { return static_cast<std::size_t>(id.k - s.k_min()); }

}  // namespace

ShellParams shell_params(double C_K, std::optional<double> C_m) {
  if (!(C_K >= 1.0) || !std::isfinite(C_K)) raise(Errc::BadParams, "C_K must be finite and at least 1");
  ShellParams s;
  s.C_K = C_K;
  s.n = 2;
  while (std::ldexp(1.0, s.n - 1) < 2.0 * C_K) ++s.n;
  s.C_m = C_m.value_or(std::ldexp(1.0, s.n - 1));
  if (!(s.C_m >= 2.0 * C_K)) raise(Errc::BadParams, "C_m must be at least 2 C_K");
  return s;
}

LevelSetDecomposition decompose_level_set(const DyadicOperator& op, const Vec& f, double rho) {
  const auto& sys = op.system();
  const auto& gen = op.generalized();
  const PointMeasure& omega = op.omega();
  const std::size_t n = op.size();
  LevelSetDecomposition d;
  d.rho = rho;
  d.values = op.apply(f, op.sigma());
  std::vector<char> in(n, 0);
  for (PointId x = 0; x < n; ++x)
    if (d.values[x] > rho) {
      in[x] = 1;
      d.omega_set.push_back(x);
    }

  // A cube qualifies when every omega-charged member lies in Omega; qualifying
  // cubes with a non-qualifying parent (or none) are maximal.
  const auto& gens = sys.generations();
  std::vector<std::vector<char>> ok(gens.size());
  for (std::size_t g = 0; g < gens.size(); ++g) {
    ok[g].assign(gens[g].cubes.size(), 0);
    for (const auto& q : gens[g].cubes) {
      bool good = true;
      for (PointId x : q.members) good = good && (in[x] || !(omega[x] > 0.0));
      ok[g][q.id.alpha] = good;
      if (good && (g == 0 || !ok[g - 1][*q.parent])) d.q_rho.push_back({0, q.id, false, q.members});
    }
  }
  const auto& leaf = gens.back();
  for (PointId x : gen.point_cubes)
    if (in[x] && !ok.back()[leaf.cube_of[x]]) d.q_rho.push_back({0, {sys.k_max() + 1, x}, true, {x}});

  // Disjointness and the measure identity as set identities of charged points.
  std::vector<char> covered(n, 0);
  for (const auto& c : d.q_rho)
    for (PointId x : c.members) {
      if (covered[x]) raise(Errc::PropertyViolation, "level-set cubes overlap at point " + std::to_string(x));
      covered[x] = 1;
    }
  for (PointId x = 0; x < n; ++x) {
    if (!(omega[x] > 0.0)) continue;
    if (bool(in[x]) != bool(covered[x]))
      raise(Errc::PropertyViolation, "charged point " + std::to_string(x) + " breaks the level-set measure identity");
  }
  for (std::size_t g = 0; g < gens.size(); ++g)
    for (const auto& q : gens[g].cubes) {
      bool inside = true;
      for (PointId x : q.members) inside = inside && in[x];
      bool held = true;
      for (PointId x : q.members) held = held && covered[x];
      if (inside && !held) raise(Errc::PropertyViolation, "cube " + to_string(q.id) + " in Omega is not covered");
    }
  return d;
}

std::vector<double> rho_grid(const Vec& values) {
  std::vector<double> out;
  for (double v : values)
    if (v > 0.0 && std::isfinite(v))
      for (double s : {0.5, 1.0, 2.0}) out.push_back(v * s);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

PrincipleReport check_max_principle_1(const DyadicOperator& op, const Vec& f, double rho, double C) {
  if (!(C >= 2.0 * op.C_K())) raise(Errc::BadParams, "C must be at least 2 C_K");
  if (!(rho > 0.0)) raise(Errc::BadParams, "rho must be positive");
  const auto d = decompose_level_set(op, f, rho / C);
  PrincipleReport rep;
  for (const auto& q : d.q_rho) {
    ++rep.cubes;
    Vec outside = f;
    for (PointId x : q.members) outside[x] = 0.0;
    const Vec v = op.apply(outside, op.sigma());
    for (PointId x : q.members) {
      ++rep.points;
      rep.vacuous = false;
      rep.worst = std::max(rep.worst, v[x] / rho);
      if (v[x] > 0.5 * rho * (1.0 + policy::pointwise_bound_rel))
        raise(Errc::PrincipleViolated, describe(q) + " point " + std::to_string(x) + ": " + num(v[x]) + " > rho/2 = " +
                                           num(0.5 * rho));
    }
  }
  return rep;
}

PrincipleReport check_max_principle_2(const DyadicOperator& op, const Vec& f, double rho, double C_m) {
  if (!(C_m >= 2.0 * op.C_K())) raise(Errc::BadParams, "C_m must be at least 2 C_K");
  if (!(rho > 0.0)) raise(Errc::BadParams, "rho must be positive");
  const auto d = decompose_level_set(op, f, rho / C_m);
  const Vec full = op.apply(f, op.sigma());
  PrincipleReport rep;
  rep.worst = std::numeric_limits<double>::infinity();
  for (const auto& q : d.q_rho) {
    ++rep.cubes;
    Vec local(f.size(), 0.0);
    for (PointId x : q.members) local[x] = f[x];
    const Vec v = op.apply(local, op.sigma());
    for (PointId x : q.members) {
      if (!(full[x] > rho)) continue;
      ++rep.points;
      rep.vacuous = false;
      rep.worst = std::min(rep.worst, v[x] / rho);
      if (!(v[x] > 0.5 * rho))
        raise(Errc::PrincipleViolated, describe(q) + " point " + std::to_string(x) + ": " + num(v[x]) +
                                           " <= rho/2 = " + num(0.5 * rho));
    }
  }
  if (rep.vacuous) rep.worst = 0.0;
  return rep;
}

double sigma_average(const PointSet& members, const PointMeasure& sigma, const Vec& f) {
  double s = 0.0, m = 0.0;
  for (PointId x : members) {
    m += sigma[x];
    if (sigma[x] > 0.0 && f[x] != 0.0) s += f[x] * sigma[x];
  }
  return s / m;
}

PrincipalFamily build_principal_cubes(const DyadicSystem& system, const PointMeasure& sigma, const Vec& f) {
  for (double v : f)
    if (!(v >= 0.0) || !std::isfinite(v)) raise(Errc::BadParams, "f must be finite and nonnegative");
  PrincipalFamily fam;
  fam.system = &system;
  const auto& gens = system.generations();
  fam.pi.resize(gens.size());
  std::vector<Vec> avg(gens.size());
  for (std::size_t g = 0; g < gens.size(); ++g) {
    fam.pi[g].assign(gens[g].cubes.size(), std::nullopt);
    avg[g].assign(gens[g].cubes.size(), 0.0);
    for (const auto& q : gens[g].cubes)
      if (sigma.of(q.members) > 0.0) avg[g][q.id.alpha] = sigma_average(q.members, sigma, f);
  }
  auto charged = [&](CubeId id) { return sigma.of(system.cube(id).members) > 0.0; };

  std::vector<std::size_t> work;
  for (const auto& q : gens.front().cubes) {
    if (!charged(q.id)) continue;
    fam.cubes.push_back(q.id);
    fam.parent.push_back(std::nullopt);
    fam.averages.push_back(avg[0][q.id.alpha]);
    fam.pi[0][q.id.alpha] = fam.cubes.size() - 1;
    work.push_back(fam.cubes.size() - 1);
  }
  while (!work.empty()) {
    const std::size_t pi = work.back();
    work.pop_back();
    const CubeId P = fam.cubes[pi];
    const auto& pc = system.cube(P);
    const double aP = fam.averages[pi];
    std::vector<CubeId> stack;
    for (std::size_t ch : pc.children) stack.push_back({P.k + 1, ch});
    while (!stack.empty()) {
      const CubeId R = stack.back();
      stack.pop_back();
      if (!charged(R)) continue;
      const auto& rc = system.cube(R);
      const double aR = avg[gen_index(system, R)][R.alpha];
      if (rc.members != pc.members && aR > 2.0 * aP) {
        fam.cubes.push_back(R);
        fam.parent.push_back(pi);
        fam.averages.push_back(aR);
        fam.pi[gen_index(system, R)][R.alpha] = fam.cubes.size() - 1;
        work.push_back(fam.cubes.size() - 1);
        continue;
      }
      fam.pi[gen_index(system, R)][R.alpha] = pi;
      for (std::size_t ch : rc.children) stack.push_back({R.k + 1, ch});
    }
  }

  // Nested principal cubes more than double their averages.
  for (std::size_t a = 0; a < fam.cubes.size(); ++a)
    for (std::size_t b = 0; b < fam.cubes.size(); ++b) {
      const auto& A = system.cube(fam.cubes[a]).members;
      const auto& B = system.cube(fam.cubes[b]).members;
      if (a == b || A.size() >= B.size() || !is_subset(A, B)) continue;
      if (!(fam.averages[a] > 2.0 * fam.averages[b]))
        raise(Errc::PropertyViolation, "principal " + to_string(fam.cubes[a]) + " inside " + to_string(fam.cubes[b]) +
                                           " does not double the average");
    }
  // Every charged cube is controlled by its principal cube.
  for (std::size_t g = 0; g < gens.size(); ++g)
    for (const auto& q : gens[g].cubes) {
      if (!charged(q.id)) continue;
      const auto owner = fam.pi[g][q.id.alpha];
      if (!owner) raise(Errc::PropertyViolation, "cube " + to_string(q.id) + " has no principal cube");
      if (!is_subset(q.members, system.cube(fam.cubes[*owner]).members))
        raise(Errc::PropertyViolation, "cube " + to_string(q.id) + " escapes its principal cube");
      if (!(avg[g][q.id.alpha] <= 2.0 * fam.averages[*owner]))
        raise(Errc::PropertyViolation, "cube " + to_string(q.id) + " average exceeds twice its principal average");
    }
  return fam;
}

MainLemmaReport check_mainlemma(const DyadicSystem& system, const std::vector<PointSet>& collection,
                                const PointMeasure& sigma, const Vec& f, double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) raise(Errc::BadExponents, "need 1 <= p < inf");
  const std::size_t n = system.space().size();
  Vec avg(collection.size());
  for (std::size_t i = 0; i < collection.size(); ++i) {
    if (!(sigma.of(collection[i]) > 0.0)) raise(Errc::HypothesisViolated, "collection member " + std::to_string(i) + " has no mass");
    avg[i] = sigma_average(collection[i], sigma, f);
  }
  for (std::size_t a = 0; a < collection.size(); ++a)
    for (std::size_t b = 0; b < collection.size(); ++b) {
      if (a == b) continue;
      if (collection[a] == collection[b])
        raise(Errc::HypothesisViolated, "members " + std::to_string(a) + " and " + std::to_string(b) + " coincide");
      if (collection[a].size() < collection[b].size() && is_subset(collection[a], collection[b]) &&
          !(avg[a] > 2.0 * avg[b]))
        raise(Errc::HypothesisViolated, "member " + std::to_string(a) + " inside " + std::to_string(b) +
                                            " does not double the average");
    }

  MaximalParams mp{0.0, sigma, 1.0};
  const Vec M = apply_M_dyadic(system, mp, f);
  Vec lhs(n, 0.0);
  for (std::size_t i = 0; i < collection.size(); ++i)
    for (PointId x : collection[i]) lhs[x] += std::pow(avg[i], p);
  MainLemmaReport rep;
  rep.points = n;
  for (PointId x = 0; x < n; ++x) {
    const double rhs = std::pow(M[x], p);
    if (lhs[x] > 2.0 * rhs * (1.0 + policy::pointwise_bound_rel))
      raise(Errc::BoundViolated, "point " + std::to_string(x) + ": " + num(lhs[x]) + " > 2 (M f)^p = " + num(2.0 * rhs));
    if (rhs > 0.0) rep.worst_ratio = std::max(rep.worst_ratio, lhs[x] / rhs);
  }
  return rep;
}

MainLemmaReport check_mainlemma(const PrincipalFamily& family, const PointMeasure& sigma, const Vec& f, double p) {
  std::vector<PointSet> sets;
  for (CubeId id : family.cubes) sets.push_back(family.system->cube(id).members);
  return check_mainlemma(*family.system, sets, sigma, f, p);
}

UniversalMaximalReport check_universal_maximal(const DyadicSystem& system, const PointMeasure& weight, double p,
                                               std::size_t trials, std::uint64_t seed) {
  if (!(p > 1.0) || !std::isfinite(p)) raise(Errc::BadExponents, "need 1 < p < inf");
  UniversalMaximalReport rep;
  rep.bound = p / (p - 1.0);
  rep.trials = trials;
  const MaximalParams mp{0.0, weight, 1.0};
  Rng rng(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    const Vec f = random_nonneg_function(system.space().size(), rng);
    const double rhs = lp_norm(f, weight, p);
    const double lhs = lp_norm(apply_M_dyadic(system, mp, f), weight, p);
    if (lhs > rep.bound * rhs * (1.0 + policy::pointwise_bound_rel))
      raise(Errc::BoundViolated, "trial " + std::to_string(t) + ": " + num(lhs) + " > p' " + num(rhs));
    if (rhs > 0.0) rep.worst_ratio = std::max(rep.worst_ratio, lhs / rhs);
  }
  return rep;
}

}  // namespace dyadica
