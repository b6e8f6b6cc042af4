// Acceptance suite: one PASS/FAIL line per criterion. Every instance has
// N <= 64 points and a strict delta = 1 / (96 a0^6).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dyadica/dyadic.hpp"
#include "dyadica/error.hpp"
#include "dyadica/kernel.hpp"
#include "dyadica/maximal.hpp"
#include "dyadica/norms.hpp"
#include "dyadica/operators.hpp"
#include "dyadica/policy.hpp"
#include "dyadica/sampling.hpp"
#include "dyadica/space.hpp"
#include "dyadica/stopping.hpp"

using namespace dyadica;

namespace {

constexpr std::size_t kTrials = 100;
constexpr std::size_t kSweep = 50;
constexpr std::size_t kLMax = 16;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects the first few violations; anything recorded fails the criterion.
struct Ledger {
  std::size_t violations = 0;
  std::string first;
  void fail(const std::string& what) {
    if (violations++ == 0) first = what;
  }
  Outcome outcome(const std::string& summary) const {
    if (violations == 0) return {true, summary};
    return {false, std::to_string(violations) + " violation(s), first: " + first};
  }
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

DyadicParams strict_params(const QuasiMetricSpace& s) {
  DyadicParams p;
  p.delta = 1.0 / (96.0 * std::pow(s.a0(), 6));
  return p;
}

// Criterion 1 geometry: lines, random Euclidean points and snowflakes.
GeneratedSpace certificate_space(std::uint64_t i) {
  GeneratorParams g;
  switch (i % 3) {
    case 0:
      g.n = 8 + (i * 7) % 57;
      return generate_space("integer_segment_counting", g, i);
    case 1:
      g.n = 8 + (i * 5) % 41;
      g.dim = 1 + i % 3;
      return generate_space("euclidean_random_points", g, i);
    default:
      g.n = 6 + (i * 3) % 27;
      g.power = std::array{0.5, 0.75, 1.5, 2.0}[i % 4];
      return generate_space("snowflake_power", g, i);
  }
}

// Space, adjacent family and measures shared by criteria 2-10.
struct Instance {
  std::string label;
  std::shared_ptr<const QuasiMetricSpace> space;
  AdjacentFamily family;
  PointMeasure mu, sigma, omega;
  Exponents e;
  std::uint64_t seed = 0;
};

std::vector<Instance> build_instances() {
  struct Shape {
    const char* kind;
    std::size_t n;
    double power;
  };
  const std::vector<Shape> shapes{
      {"integer_segment_counting", 16, 1.0}, {"integer_segment_counting", 24, 1.0},
      {"euclidean_random_points", 16, 1.0},  {"euclidean_random_points", 20, 1.0},
      {"snowflake_power", 12, 0.5},          {"snowflake_power", 12, 1.5},
      {"integer_segment_counting", 64, 1.0}, {"euclidean_random_points", 48, 1.0},
      {"snowflake_power", 32, 2.0},
  };
  const std::vector<Exponents> exps{{2.0, 2.0}, {1.5, 3.0}, {3.0, 4.0}};
  std::vector<Instance> out;
  std::uint64_t seed = 1000;
  for (const auto& sh : shapes)
    for (int rep = 0; rep < 2; ++rep, ++seed) {
      GeneratorParams g;
      g.n = sh.n;
      g.power = sh.power;
      Instance in;
      in.seed = seed;
      auto gs = generate_space(sh.kind, g, seed);
      in.space = std::make_shared<const QuasiMetricSpace>(std::move(gs.space));
      in.label = std::string(sh.kind) + "/n=" + std::to_string(sh.n) + "/seed=" + std::to_string(seed);
      in.family = build_adjacent_family(in.space, strict_params(*in.space), std::nullopt, kLMax, seed);
      Rng rng(seed);
      const std::size_t n = in.space->size();
      in.mu = rep == 0 ? PointMeasure::counting(n) : random_measure(n, rng);
      in.sigma = random_measure(n, rng, {-1.0, 1.0, 0.2});
      in.omega = random_measure(n, rng, {-1.0, 1.0, 0.2});
      in.e = exps[out.size() % exps.size()];
      out.push_back(std::move(in));
    }
  return out;
}

struct Operators {
  Kernel kernel;
  std::vector<DyadicOperator> ops;
  std::vector<const DyadicOperator*> ptrs() const {
    std::vector<const DyadicOperator*> p;
    for (const auto& o : ops) p.push_back(&o);
    return p;
  }
};

Operators operators_for(const Instance& in, double gamma = 0.5) {
  Operators o{kernel_ball_volume(*in.space, in.mu, gamma), {}};
  for (const auto& s : in.family.systems) o.ops.push_back(make_dyadic_operator(s, o.kernel, in.sigma, in.omega));
  return o;
}

// Runs f per instance; library errors become violations naming the instance.
void each(const std::vector<Instance>& suite, Ledger& led, const std::function<void(const Instance&)>& f) {
  for (const auto& in : suite) try {
      f(in);
    } catch (const Error& err) {
      led.fail(in.label + ": " + errc_name(err.code()) + ": " + err.witness());
    }
}

Outcome criterion_1() {
  Ledger led;
  std::size_t systems = 0, max_L = 0;
  double worst = 0.0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const auto g = certificate_space(i);
    const std::string label = g.kind + "/n=" + std::to_string(g.space.size()) + "/seed=" + std::to_string(i);
    try {
      auto sp = std::make_shared<const QuasiMetricSpace>(g.space);
      const DyadicParams p = strict_params(*sp);
      const AdjacentFamily fam = build_adjacent_family(sp, p, std::nullopt, kLMax, i);
      for (const auto& s : fam.systems) {
        ++systems;
        if (auto v = verify_system(*s)) led.fail(label + ": " + v->which + " " + v->witness);
        if (auto v = check_separation_clause(*s)) led.fail(label + ": separation " + *v);
      }
      if (!fam.complete) led.fail(label + ": certificate incomplete with L = " + std::to_string(fam.L()));
      if (auto v = verify_certificate(fam)) led.fail(label + ": certificate replay " + *v);
      const double bound = default_adjacency_constant(sp->a0(), p.delta);
      if (fam.observed_C > bound) led.fail(label + ": observed_C " + fmt(fam.observed_C) + " > " + fmt(bound));
      worst = std::max(worst, fam.observed_C / bound);
      max_L = std::max(max_L, fam.L());
    } catch (const Error& err) {
      led.fail(label + ": " + errc_name(err.code()) + ": " + err.witness());
    }
  }
  return led.outcome("100 spaces, " + std::to_string(systems) + " systems, max L = " + std::to_string(max_L) +
                     ", max observed_C / (8 a0^3 / delta^2) = " + fmt(worst));
}

Outcome criterion_2(const std::vector<Instance>& suite) {
  Ledger led;
  std::size_t checked = 0;
  double worst = 0.0;
  each(suite, led, [&](const Instance& in) {
    for (double gamma : {0.25, 0.5, 0.75}) {
      const Kernel K = kernel_ball_volume(*in.space, in.mu, gamma);
      for (const auto& s : in.family.systems) {
        const auto rep = verify_kernel_estimates(*s, K, compute_phi(*s, K));
        if (rep.vacuous) continue;
        ++checked;
        const double k2 = estimate_k2(in.space->a0(), s->delta());
        if (rep.monotonicity.k2 != k2) led.fail(in.label + ": k2 " + fmt(rep.monotonicity.k2) + " != " + fmt(k2));
        const double k1sq = rep.monotonicity.k1 * rep.monotonicity.k1;
        worst = std::max(worst, rep.C_K / k1sq);
        if (rep.C_K > k1sq)
          led.fail(in.label + " gamma=" + fmt(gamma) + ": C_K " + fmt(rep.C_K) + " > k1^2 " + fmt(k1sq));
      }
    }
  });
  return led.outcome(std::to_string(checked) + " (system, gamma) pairs, max C_K / k1^2 = " + fmt(worst));
}

Outcome criterion_3(const std::vector<Instance>& suite) {
  Ledger led;
  double up = 0.0;
  each(suite, led, [&](const Instance& in) {
    const Operators o = operators_for(in);
    for (const auto& op : o.ops)
      for (int m : {1, 2, 3}) {
        const auto rep = check_sandwich_Tm(op, m, kTrials, in.seed + m);
        if (rep.empirical_C > op.C_K() * m * (1.0 + policy::pointwise_bound_rel))
          led.fail(in.label + ": T_" + std::to_string(m) + " constant " + fmt(rep.empirical_C));
      }
    const auto eq = check_pointwise_equivalence(o.ptrs(), o.kernel, in.sigma, in.omega, kTrials, in.seed);
    if (eq.C_lower_T > eq.bound_lower * (1.0 + policy::pointwise_bound_rel))
      led.fail(in.label + ": T^D <= C T with C " + fmt(eq.C_lower_T));
    if (eq.C_lower_Tstar > eq.bound_lower * (1.0 + policy::pointwise_bound_rel))
      led.fail(in.label + ": T^D <= C T* with C " + fmt(eq.C_lower_Tstar));
    if (eq.C_upper > eq.bound_upper * (1.0 + policy::pointwise_bound_rel))
      led.fail(in.label + ": T <= 3 C_K sum T^D with C " + fmt(eq.C_upper));
    up = std::max(up, eq.C_upper / eq.bound_upper);
  });
  return led.outcome(std::to_string(suite.size()) + " instances, max C_upper / (3 C_K) = " + fmt(up));
}

Outcome criterion_4(const std::vector<Instance>& suite) {
  Ledger led;
  double gap = 0.0;
  each(suite, led, [&](const Instance& in) {
    for (const auto& op : operators_for(in).ops) {
      const double g = check_self_adjoint(op, kTrials, in.seed).max_rel_gap;
      gap = std::max(gap, g);
      if (g > policy::duality_rel) led.fail(in.label + ": pairing gap " + fmt(g));
    }
  });
  return led.outcome("max relative pairing gap " + fmt(gap));
}

Outcome criterion_5(const std::vector<Instance>& suite) {
  Ledger led;
  std::size_t trials = 0, proper = 0;
  double worst1 = 0.0, worst2 = INFINITY;
  each(suite, led, [&](const Instance& in) {
    const Operators o = operators_for(in);
    Rng rng(in.seed);
    for (const auto& op : o.ops)
      for (std::size_t t = 0; t < kTrials; ++t) {
        const Vec f = random_nonneg_function(in.space->size(), rng);
        const auto grid = rho_grid(op.apply(f));
        if (grid.empty()) continue;
        // Odd trials put rho / C on the jump values, where the stopping cubes
        // are proper; the plain grid mostly yields the whole space.
        const double C = 2.0 * op.C_K();
        const double rho = grid[rng.index(grid.size())] * (t % 2 ? C : 1.0);
        ++trials;
        const auto r1 = check_max_principle_1(op, f, rho, C);
        if (r1.worst > 0.0) ++proper;
        const auto r2 = check_max_principle_2(op, f, rho, shell_params(op.C_K()).C_m);
        worst1 = std::max(worst1, r1.worst);
        if (!r2.vacuous) worst2 = std::min(worst2, r2.worst);
        if (r1.worst > 0.5) led.fail(in.label + ": first principle at " + fmt(r1.worst) + " rho");
        if (!r2.vacuous && !(r2.worst > 0.5)) led.fail(in.label + ": second principle at " + fmt(r2.worst) + " rho");
      }
  });
  return led.outcome(std::to_string(trials) + " (f, rho) trials, " + std::to_string(proper) +
                     " with outside mass, first max " + fmt(worst1) + " rho, second min " +
                     fmt(worst2) + " rho");
}

// Max of a per-draw ratio over two re-seeded sweeps of kSweep measure draws.
template <class Ratio>
std::pair<double, double> sweep_pair(Ratio&& ratio) {
  double a = 0.0, b = 0.0;
  for (std::size_t i = 0; i < kSweep; ++i) {
    a = std::max(a, ratio(std::uint64_t{i}));
    b = std::max(b, ratio(std::uint64_t{5000 + i}));
  }
  return {a, b};
}

void check_stability(Ledger& led, const std::string& what, std::pair<double, double> r) {
  if (!std::isfinite(r.first) || !std::isfinite(r.second)) {
    led.fail(what + ": sweep ratio not finite");
    return;
  }
  const double rel = std::fabs(r.first - r.second) / std::max(r.first, r.second);
  if (rel > policy::sweep_stability_rel)
    led.fail(what + ": sweep maxima " + fmt(r.first) + " and " + fmt(r.second) + " differ by " + fmt(rel));
}

struct SweepGeometry {
  std::shared_ptr<const QuasiMetricSpace> space;
  AdjacentFamily family;
  std::vector<TestCube> cubes;
  Kernel kernel;
};

SweepGeometry sweep_geometry() {
  GeneratorParams g;
  g.n = 16;
  auto sp = std::make_shared<const QuasiMetricSpace>(generate_space("integer_segment_counting", g, 0).space);
  AdjacentFamily fam = build_adjacent_family(sp, strict_params(*sp), std::nullopt, kLMax, 0);
  auto cubes = standard_cubes(fam);
  Kernel K = kernel_ball_volume(*sp, PointMeasure::counting(16), 0.5);
  return {sp, std::move(fam), std::move(cubes), std::move(K)};
}

std::pair<PointMeasure, PointMeasure> draw_pair(std::size_t n, std::uint64_t seed) {
  Rng rng(splitmix64(seed));
  PointMeasure a = random_measure(n, rng, {-2.0, 2.0, 0.1});
  PointMeasure b = random_measure(n, rng, {-2.0, 2.0, 0.1});
  return {std::move(a), std::move(b)};
}

Outcome criterion_6(const std::vector<Instance>& suite, const SweepGeometry& geo) {
  Ledger led;
  double worst = 0.0;
  const NormBudget budget{};
  each(suite, led, [&](const Instance& in) {
    const Kernel K = kernel_ball_volume(*in.space, in.mu, 0.5);
    const auto b = verdict_theorem_B(K, in.sigma, in.omega, standard_cubes(in.family), in.e, budget, in.seed);
    const double t = std::max(b.testing.strong, b.testing.dual);
    if (t > b.norm_lb + policy::lower_bound_abs) led.fail(in.label + ": testing " + fmt(t) + " > " + fmt(b.norm_lb));
    worst = std::max(worst, b.ratio);
  });
  const auto r = sweep_pair([&](std::uint64_t s) {
    const auto [sigma, omega] = draw_pair(16, s);
    const auto b = verdict_theorem_B(geo.kernel, sigma, omega, geo.cubes, {2.0, 2.0}, budget, s);
    const double t = std::max(b.testing.strong, b.testing.dual);
    if (t > b.norm_lb + policy::lower_bound_abs) led.fail("sweep draw " + std::to_string(s) + ": testing above norm");
    return b.ratio;
  });
  check_stability(led, "strong type", r);
  return led.outcome("instance max ratio " + fmt(worst) + ", sweep maxima " + fmt(r.first) + " / " + fmt(r.second));
}

// Upper bound on the weak norm from the level-set side: for each set E of
// omega-atoms, sup_f min_E Tf / |f|_2 = min over probability l on E of
// |sum_x l(x) K(x, .)|_{L^2_sigma}; any feasible l bounds it from above.
// Exhaustive over subsets, so only for p = q = 2 and at most 16 atoms.
double weak_norm_upper(const Kernel& K, const PointMeasure& sigma, const PointMeasure& omega) {
  std::vector<PointId> atoms = omega.atoms();
  if (atoms.size() > 16) return INFINITY;
  const std::size_t m = atoms.size(), n = sigma.size();
  double best = 0.0;
  for (std::size_t mask = 1; mask < (std::size_t{1} << m); ++mask) {
    std::vector<PointId> E;
    double mass = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      if (mask >> i & 1) {
        E.push_back(atoms[i]);
        mass += omega[atoms[i]];
      }
    const std::size_t k = E.size();
    std::vector<double> G(k * k, 0.0);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j)
        for (PointId y = 0; y < n; ++y) G[i * k + j] += K(E[i], y) * K(E[j], y) * sigma[y];
    std::vector<double> l(k, 1.0 / double(k)), grad(k);
    double value = INFINITY;
    for (int it = 0; it < 400; ++it) {
      double quad = 0.0, top = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        grad[i] = 0.0;
        for (std::size_t j = 0; j < k; ++j) grad[i] += G[i * k + j] * l[j];
        quad += l[i] * grad[i];
        top = std::max(top, grad[i]);
      }
      value = std::min(value, quad);
      double total = 0.0;
      for (std::size_t i = 0; i < k; ++i) total += l[i] *= std::exp(-2.0 * grad[i] / top);
      for (double& x : l) x /= total;
    }
    best = std::max(best, std::sqrt(mass * value));
  }
  return best;
}

Outcome criterion_7(const std::vector<Instance>& suite, const SweepGeometry& geo) {
  Ledger led;
  std::size_t paired = 0;  // violations of the pairing bound dual <= q' weak
  double worst = 0.0;
  const NormBudget budget{};
  each(suite, led, [&](const Instance& in) {
    const Operators o = operators_for(in);
    const auto w = verdict_weak_type(o.kernel, in.sigma, in.omega, standard_cubes(in.family), o.ptrs(), in.e, budget,
                                     in.seed);
    if (w.testing.dual > w.weak_norm.lower + policy::lower_bound_abs) {
      std::string why = in.label + ": dual testing " + fmt(w.testing.dual) + " > weak norm lower bound " +
                        fmt(w.weak_norm.lower);
      if (led.violations == 0 && in.e.p == 2.0 && in.e.q == 2.0) {
        const double upper = weak_norm_upper(o.kernel, in.sigma, in.omega);
        why += ", independent upper bound on the weak norm " + fmt(upper);
      }
      led.fail(why);
    }
    if (w.testing.dual > in.e.q_conj() * w.weak_norm.lower + policy::lower_bound_abs) ++paired;
    for (const auto& d : w.dyadic)
      if (d.weak_lb > d.upper_bound * (1.0 + policy::pointwise_bound_rel) + policy::lower_bound_abs)
        led.fail(in.label + ": dyadic weak norm above its bound");
    worst = std::max(worst, w.ratio);
  });
  const auto r = sweep_pair([&](std::uint64_t s) {
    const auto [sigma, omega] = draw_pair(16, s);
    const auto w = verdict_weak_type(geo.kernel, sigma, omega, geo.cubes, {}, {2.0, 2.0}, budget, s);
    if (w.testing.dual > w.weak_norm.lower + policy::lower_bound_abs)
      led.fail("sweep draw " + std::to_string(s) + ": dual testing above weak norm");
    if (w.testing.dual > 2.0 * w.weak_norm.lower + policy::lower_bound_abs) ++paired;
    return w.ratio;
  });
  check_stability(led, "weak type", r);
  Outcome out = led.outcome("instance max ratio " + fmt(worst) + ", sweep maxima " + fmt(r.first) + " / " + fmt(r.second));
  out.detail += "; dual <= q' weak violated " + std::to_string(paired) + " time(s), sweep maxima " + fmt(r.first) +
                " / " + fmt(r.second);
  return out;
}

Outcome criterion_8(const std::vector<Instance>& suite) {
  Ledger led;
  double lemma = 0.0, universal = 0.0;
  std::size_t builds = 0;
  each(suite, led, [&](const Instance& in) {
    Rng rng(in.seed);
    const auto& sys = *in.family.systems[0];
    for (std::size_t t = 0; t < kTrials; ++t) {
      const Vec f = random_nonneg_function(in.space->size(), rng);
      // Both nesting invariants are asserted inside the build.
      const PrincipalFamily pf = build_principal_cubes(sys, in.sigma, f);
      ++builds;
      const auto ml = check_mainlemma(pf, in.sigma, f, in.e.p);
      lemma = std::max(lemma, ml.worst_ratio);
      if (ml.worst_ratio > 2.0) led.fail(in.label + ": main lemma ratio " + fmt(ml.worst_ratio));
    }
    for (double p : {1.5, 2.0, 4.0}) {
      const auto u = check_universal_maximal(sys, in.sigma, p, kTrials, in.seed);
      universal = std::max(universal, u.worst_ratio / u.bound);
      if (u.worst_ratio > u.bound) led.fail(in.label + ": universal maximal " + fmt(u.worst_ratio));
    }
  });
  return led.outcome(std::to_string(builds) + " principal builds, max lemma ratio " + fmt(lemma) +
                     " (bound 2), max universal ratio / p' " + fmt(universal));
}

Outcome criterion_9(const std::vector<Instance>& suite, const SweepGeometry& geo) {
  Ledger led;
  const NormBudget budget{};
  double gap = 0.0;
  each(suite, led, [&](const Instance& in) {
    // sigma charges every mu-atom here so the sufficiency branch runs.
    Rng rng(in.seed + 77);
    const PointMeasure sigma = random_measure(in.space->size(), rng);
    const auto params = make_maximal_params(*in.space, in.mu, 0.25);
    const auto a = verdict_theorem_A(in.family, params, sigma, in.omega, in.e, budget, in.seed);
    if (!a.absolutely_continuous) led.fail(in.label + ": unexpected necessity branch");
    if (a.N1 > a.norm.lower + policy::lower_bound_abs)
      led.fail(in.label + ": N1 " + fmt(a.N1) + " > N_lb " + fmt(a.norm.lower));
    gap = std::max(gap, dual_weight(in.mu, sigma, in.e.p).identity_gap);
    gap = std::max(gap, a.identity_gap);
  });
  if (gap > policy::dual_weight_rel) led.fail("dual weight identity gap " + fmt(gap));

  const auto params = make_maximal_params(*geo.space, PointMeasure::counting(16), 0.25);
  const auto r = sweep_pair([&](std::uint64_t s) {
    auto [sigma, omega] = draw_pair(16, s);
    const auto a = verdict_theorem_A(geo.family, params, sigma, omega, {2.0, 2.0}, budget, s);
    if (a.N1 > a.norm.lower + policy::lower_bound_abs) led.fail("sweep draw " + std::to_string(s) + ": N1 above N_lb");
    return a.ratio;
  });
  check_stability(led, "maximal", r);

  std::size_t triggered = 0;
  for (std::uint64_t i = 0; i < 10; ++i) {
    const Instance& in = suite[i % suite.size()];
    Rng rng(i);
    Vec s = random_measure(in.space->size(), rng).masses();
    const PointId hole = rng.index(in.space->size());
    s[hole] = 0.0;
    const auto a = verdict_theorem_A(in.family, make_maximal_params(*in.space, in.mu, 0.25), PointMeasure(s), in.omega,
                                     in.e, budget, i);
    const bool ok = !a.absolutely_continuous && !a.violating_set.empty() && a.lhs > 0.0 && a.rhs == 0.0;
    if (ok) ++triggered;
    else led.fail(in.label + ": necessity branch did not trigger at point " + std::to_string(hole));
  }
  return led.outcome("necessity triggered " + std::to_string(triggered) + "/10, sweep maxima " + fmt(r.first) + " / " +
                     fmt(r.second) + ", identity gap " + fmt(gap));
}

Outcome criterion_10(const std::vector<Instance>& suite) {
  Ledger led;
  double form = 0.0;
  std::size_t picks = 0;
  each(suite, led, [&](const Instance& in) {
    for (const auto& op : operators_for(in).ops) {
      const double g = form_agreement_gap(op, in.sigma);
      form = std::max(form, g);
      if (g > policy::form_agreement_rel) led.fail(in.label + ": form gap " + fmt(g));
    }
    // maximal_cubes against the pairwise containment scan.
    const auto& sys = *in.family.systems[0];
    const auto all = sys.all_cubes();
    Rng rng(in.seed);
    for (int t = 0; t < 50; ++t, ++picks) {
      std::vector<CubeRef> pick;
      for (const auto& id : all)
        if (rng.uniform() < 0.25) pick.push_back({&sys, id});
      rng.shuffle(pick);
      std::set<CubeId> expected, got;
      for (const auto& c : pick) {
        const auto& q = sys.cube(c.id).members;
        const bool dominated = std::any_of(pick.begin(), pick.end(), [&](const CubeRef& r) {
          const auto& m = sys.cube(r.id).members;
          return r.id.k < c.id.k && std::includes(m.begin(), m.end(), q.begin(), q.end());
        });
        if (!dominated) expected.insert(c.id);
      }
      for (const auto& c : maximal_cubes(pick)) got.insert(c.id);
      if (got != expected) led.fail(in.label + ": maximal_cubes differs from brute force");
    }
  });

  // Closed forms: one point, and a diagonal kernel on two points.
  const NormBudget budget{};
  try {
    const PointMeasure s1({4.0}), w1({9.0});
    const Kernel K1 = kernel_constant(1, 1.0);
    const double v = operator_norm_strong(potential_operator(K1, s1, w1), s1, w1, {2.0, 2.0}, budget, {}, 1).lower;
    if (std::fabs(v - 6.0) > 6.0 * policy::witness_replay_rel) led.fail("1-point norm " + fmt(v) + " != 6");
    for (auto [p, q] : {std::pair{1.5, 3.0}, {3.0, 5.0}}) {
      const double closed = std::pow(4.0, 1.0 - 1.0 / p) * std::pow(9.0, 1.0 / q);
      const double got = operator_norm_strong(potential_operator(K1, s1, w1), s1, w1, {p, q}, budget, {}, 2).lower;
      if (std::fabs(got - closed) > closed * policy::witness_replay_rel) led.fail("1-point (p, q) norm " + fmt(got));
    }
    const PointMeasure s2({2.0, 0.5}), w2({1.0, 3.0});
    const Kernel D = kernel_matrix({{0, 0}, {0, 0}}, {1.5, 0.7});
    const double closed = std::max(1.5 * std::sqrt(2.0), 0.7 * std::sqrt(1.5));
    const double got = operator_norm_strong(potential_operator(D, s2, w2), s2, w2, {2.0, 2.0}, budget, {}, 3).lower;
    if (std::fabs(got - closed) > closed * policy::witness_replay_rel) led.fail("2-point norm " + fmt(got));
  } catch (const Error& err) {
    led.fail(std::string("closed forms: ") + errc_name(err.code()) + ": " + err.witness());
  }
  return led.outcome("max form gap " + fmt(form) + ", " + std::to_string(picks) + " maximal_cubes picks, closed forms exact");
}

}  // namespace

int main() {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  const auto suite = build_instances();
  const auto geo = sweep_geometry();
  const std::vector<std::function<Outcome()>> criteria{
      [] { return criterion_1(); },
      [&] { return criterion_2(suite); },
      [&] { return criterion_3(suite); },
      [&] { return criterion_4(suite); },
      [&] { return criterion_5(suite); },
      [&] { return criterion_6(suite, geo); },
      [&] { return criterion_7(suite, geo); },
      [&] { return criterion_8(suite); },
      [&] { return criterion_9(suite, geo); },
      [&] { return criterion_10(suite); },
  };
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = clock::now();
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("uncaught: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(clock::now() - t0).count();
    std::printf("criterion %2zu: %s  (%.1fs) %s\n", i + 1, o.pass ? "PASS" : "FAIL", secs, o.detail.c_str());
    std::fflush(stdout);
    all = all && o.pass;
  }
  const double total = std::chrono::duration<double>(clock::now() - start).count();
  std::printf("total runtime %.1fs (target < 300s)\n", total);
  return all ? 0 : 1;
}
