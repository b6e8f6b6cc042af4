#include "dyadica/norms.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "dyadica/error.hpp"
#include "dyadica/policy.hpp"
#include "dyadica/sampling.hpp"
#include "dyadica/stopping.hpp"

namespace dyadica {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double ratio_or_convention(double num, double den) {
  if (den == 0.0) return num == 0.0 ? 1.0 : kInf;
  return num / den;
}

Vec indicator(const PointSet& members, std::size_t n) {
  Vec f(n, 0.0);
  for (PointId x : members) f[x] = 1.0;
  return f;
}

Vec pow_vec(const Vec& v, double s) {
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] > 0.0 ? std::pow(v[i], s) : 0.0;
  return out;
}

// Vanishes off the support of sigma and has unit L^p_sigma norm; false if
// nothing is left.
bool normalize(Vec& f, const PointMeasure& sigma, double p) {
  for (std::size_t i = 0; i < f.size(); ++i)
    if (!(sigma[i] > 0.0) || !(f[i] > 0.0) || !std::isfinite(f[i])) f[i] = 0.0;
  const double nrm = lp_norm(f, sigma, p);
  if (!(nrm > 0.0) || !std::isfinite(nrm)) return false;
  for (auto& v : f) v /= nrm;
  return true;
}

void check_positive(const PositiveOperator& A, std::size_t n, Rng& rng) {
  for (int t = 0; t < 2; ++t) {
    const Vec f = random_nonneg_function(n, rng);
    Vec g = f;
    const Vec extra = random_nonneg_function(n, rng);
    for (std::size_t i = 0; i < n; ++i) g[i] += extra[i];
    const Vec Af = A.apply(f), Ag = A.apply(g);
    for (std::size_t x = 0; x < n; ++x) {
      if (Af[x] < 0.0 || std::isnan(Af[x]))
        raise(Errc::NonPositiveOperator, "negative value at point " + std::to_string(x));
      if (Af[x] > Ag[x] * (1.0 + policy::linearity_rel) + 1e-300)
        raise(Errc::NonPositiveOperator, "order not preserved at point " + std::to_string(x));
    }
  }
}

using Objective = std::function<double(const Vec&)>;

struct Candidate {
  Vec f;
  double value = 0.0;
  std::string method;
};

void require_finite(double v, const std::string& method) {
  if (v == kInf) raise(Errc::Infinite, "objective is infinite on a " + method + " start");
}

// Multiplicative hill climb on the support, occasionally reviving zero
// coordinates.
void ascend(Candidate& c, const Objective& obj, std::size_t steps, Rng& rng, std::size_t& evals) {
  const std::size_t n = c.f.size();
  if (n == 0) return;
  double eta = 0.5;
  for (std::size_t s = 0; s < steps; ++s) {
    Vec g = c.f;
    double top = 0.0;
    for (double v : g) top = std::max(top, v);
    if (!(top > 0.0)) return;
    const std::size_t moves = 1 + rng.index(std::min<std::size_t>(n, 3));
    for (std::size_t m = 0; m < moves; ++m) {
      const std::size_t i = rng.index(n);
      if (g[i] > 0.0)
        g[i] *= std::exp(eta * rng.normal());
      else if (rng.uniform() < 0.25)
        g[i] = top * rng.uniform(0.01, 1.0);
    }
    const double v = obj(g);
    ++evals;
    if (v > c.value) {
      require_finite(v, "ascent");
      c.value = v;
      c.f = std::move(g);
      eta = std::min(2.0, eta * 1.2);
    } else {
      eta = std::max(1e-3, eta * 0.7);
    }
  }
}

// Shared driver: seeds, point masses and random starts are evaluated; the
// best few and every random start are refined by `step` and by ascent.
NormEstimate optimize(const PositiveOperator& A, const PointMeasure& sigma, const Objective& obj,
                      const std::function<bool(Vec&)>& step, const NormBudget& budget, const std::vector<Vec>& seeds,
                      std::uint64_t seed, std::vector<Candidate> extra) {
  const std::size_t n = sigma.size();
  Rng rng(seed);
  check_positive(A, n, rng);
  NormEstimate est;
  std::vector<Candidate> pool = std::move(extra);
  for (const auto& s : seeds) pool.push_back({s, 0.0, "seed"});
  for (PointId x = 0; x < n; ++x)
    if (sigma[x] > 0.0) {
      Vec e(n, 0.0);
      e[x] = 1.0;
      pool.push_back({e, 0.0, "point-mass"});
    }
  const std::size_t fixed = pool.size();
  for (std::size_t s = 0; s < budget.starts; ++s) pool.push_back({random_nonneg_function(n, rng), 0.0, "random"});

  for (auto& c : pool) {
    if (c.f.size() != n) raise(Errc::BadParams, "seed function has wrong size");
    c.value = obj(c.f);
    ++est.evaluations;
    require_finite(c.value, c.method);
  }
  std::vector<std::size_t> order(fixed);
  for (std::size_t i = 0; i < fixed; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pool[a].value > pool[b].value; });
  order.resize(std::min(order.size(), budget.refine));
  for (std::size_t i = fixed; i < pool.size(); ++i) order.push_back(i);

  for (std::size_t i : order) {
    Candidate c = pool[i];
    Vec f = c.f;
    for (std::size_t it = 0; it < budget.iterations; ++it) {
      if (!step(f)) break;
      const double v = obj(f);
      ++est.evaluations;
      if (!(v > c.value * (1.0 + 1e-15))) {
        if (v > c.value) c = {f, v, "fixed-point"};
        break;
      }
      require_finite(v, "fixed-point");
      c = {f, v, "fixed-point"};
    }
    const double before = c.value;
    ascend(c, obj, budget.ascent_steps, rng, est.evaluations);
    if (c.value > before) c.method = "ascent";
    pool.push_back(std::move(c));
  }

  if (pool.empty()) return est;
  const Candidate* best = &pool.front();
  for (const auto& c : pool)
    if (c.value > best->value) best = &c;
  est.lower = best->value;
  est.estimate = best->value;
  est.witness = best->f;
  est.method = best->method;
  return est;
}

}  // namespace

double conjugate_exponent(double s) {
  if (s == kInf) return 1.0;
  if (s == 1.0) return kInf;
  return s / (s - 1.0);
}

Exponents make_exponents(double p, double q, bool allow_q_inf) {
  if (!(p > 1.0) || !std::isfinite(p)) raise(Errc::BadExponents, "need 1 < p < inf");
  if (!(q >= p)) raise(Errc::BadExponents, "need p <= q");
  if (q == kInf && !allow_q_inf) raise(Errc::BadExponents, "q = inf is only allowed for the maximal operator");
  return {p, q};
}

double lp_norm(const Vec& f, const PointMeasure& mu, double p) {
  if (p == kInf) {
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
      if (mu[i] > 0.0) m = std::max(m, std::fabs(f[i]));
    return m;
  }
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double a = std::fabs(f[i]);
    if (a == 0.0 || !(mu[i] > 0.0)) continue;
    s += std::pow(a, p) * mu[i];
  }
  return std::pow(s, 1.0 / p);
}

double weak_quasinorm(const Vec& g, const PointMeasure& omega, double q) {
  if (q == kInf) raise(Errc::BadExponents, "weak norm needs finite q");
  std::vector<std::pair<double, double>> vals;  // (value, omega mass)
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g[i] > 0.0 && omega[i] > 0.0) vals.emplace_back(g[i], omega[i]);
  std::sort(vals.begin(), vals.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  double best = 0.0, mass = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    mass += vals[i].second;
    if (i + 1 < vals.size() && vals[i + 1].first == vals[i].first) continue;
    if (vals[i].first == kInf) return kInf;
    best = std::max(best, vals[i].first * std::pow(mass, 1.0 / q));
  }
  return best;
}

PositiveOperator potential_operator(const Kernel& K, const PointMeasure& sigma, const PointMeasure& omega) {
  PositiveOperator A;
  A.apply = [&K, &sigma](const Vec& f) { return apply_T(K, sigma, f); };
  A.adjoint_at = [&K, &omega](const Vec&, const Vec& g) { return apply_T_adjoint(K, omega, g); };
  A.matrix = [&K, &sigma]() {
    const std::size_t n = K.size();
    std::vector<double> a(n * n);
    for (PointId x = 0; x < n; ++x)
      for (PointId y = 0; y < n; ++y) a[x * n + y] = mul0(K(x, y), sigma[y]);
    return a;
  };
  return A;
}

PositiveOperator potential_adjoint_operator(const Kernel& K, const PointMeasure& sigma, const PointMeasure& omega) {
  PositiveOperator A;
  A.apply = [&K, &omega](const Vec& g) { return apply_T_adjoint(K, omega, g); };
  A.adjoint_at = [&K, &sigma](const Vec&, const Vec& h) { return apply_T(K, sigma, h); };
  A.matrix = [&K, &omega]() {
    const std::size_t n = K.size();
    std::vector<double> a(n * n);
    for (PointId y = 0; y < n; ++y)
      for (PointId x = 0; x < n; ++x) a[y * n + x] = mul0(K(x, y), omega[x]);
    return a;
  };
  return A;
}

PositiveOperator dyadic_operator(const DyadicOperator& op, const PointMeasure& domain, const PointMeasure& target) {
  PositiveOperator A;
  A.apply = [&op, &domain](const Vec& f) { return op.apply(f, domain); };
  A.adjoint_at = [&op, &target](const Vec&, const Vec& g) { return op.apply(g, target); };
  A.matrix = [&op, &domain]() {
    const std::size_t n = op.size();
    std::vector<double> a(n * n);
    for (PointId x = 0; x < n; ++x)
      for (PointId y = 0; y < n; ++y) a[x * n + y] = mul0(op.k(x, y), domain[y]);
    return a;
  };
  return A;
}

double strong_ratio(const PositiveOperator& A, const PointMeasure& sigma, const PointMeasure& omega,
                    const Exponents& e, const Vec& f) {
  const double den = lp_norm(f, sigma, e.p);
  if (!(den > 0.0)) return 0.0;
  return lp_norm(A.apply(f), omega, e.q) / den;
}

double weak_ratio(const PositiveOperator& A, const PointMeasure& sigma, const PointMeasure& omega,
                  const Exponents& e, const Vec& f) {
  const double den = lp_norm(f, sigma, e.p);
  if (!(den > 0.0)) return 0.0;
  return weak_quasinorm(A.apply(f), omega, e.q) / den;
}

namespace {

// One step of f <- psi_{p'}(A^T psi_q(A f)), expressed through adjoint_at.
bool strong_step(const PositiveOperator& A, const PointMeasure& sigma, const PointMeasure& omega, const Exponents& e,
                 Vec& f) {
  const Vec Af = A.apply(f);
  Vec g(Af.size(), 0.0);
  if (e.q == kInf) {
    std::size_t arg = Af.size();
    for (std::size_t x = 0; x < Af.size(); ++x)
      if (omega[x] > 0.0 && (arg == Af.size() || Af[x] > Af[arg])) arg = x;
    if (arg == Af.size()) return false;
    g[arg] = 1.0 / omega[arg];
  } else {
    g = pow_vec(Af, e.q - 1.0);
  }
  f = pow_vec(A.adjoint_at(f, g), 1.0 / (e.p - 1.0));
  return normalize(f, sigma, e.p);
}

// Pairs the operator with the indicator of the optimal level set.
bool weak_step(const PositiveOperator& A, const PointMeasure& sigma, const PointMeasure& omega, const Exponents& e,
               Vec& f) {
  const Vec Af = A.apply(f);
  std::vector<std::size_t> idx;
  for (std::size_t x = 0; x < Af.size(); ++x)
    if (Af[x] > 0.0 && omega[x] > 0.0) idx.push_back(x);
  if (idx.empty()) return false;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return Af[a] > Af[b]; });
  double best = -1.0, mass = 0.0, level = 0.0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    mass += omega[idx[i]];
    if (i + 1 < idx.size() && Af[idx[i + 1]] == Af[idx[i]]) continue;
    const double v = Af[idx[i]] * std::pow(mass, 1.0 / e.q);
    if (v > best) {
      best = v;
      level = Af[idx[i]];
    }
  }
  Vec chi(Af.size(), 0.0);
  for (std::size_t x : idx)
    if (Af[x] >= level) chi[x] = 1.0;
  f = pow_vec(A.adjoint_at(f, chi), 1.0 / (e.p - 1.0));
  return normalize(f, sigma, e.p);
}

// The ratio at a fixed level set E is omega(E)^(1/q) min_E Af / |f|, a max-min
// problem; multiplicative weights on E move the pairing toward the points
// where Af is smallest. Tries the few best prefixes of the sorted witness.
double refine_level_sets(const PositiveOperator& A, const PointMeasure& sigma, const PointMeasure& omega,
                         const Exponents& e, Vec& f, std::size_t iterations) {
  const Vec Af0 = A.apply(f);
  std::vector<std::size_t> idx;
  for (std::size_t x = 0; x < Af0.size(); ++x)
    if (Af0[x] > 0.0 && omega[x] > 0.0) idx.push_back(x);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return Af0[a] > Af0[b]; });
  std::vector<std::pair<double, std::size_t>> prefixes;  // (value, length)
  double mass = 0.0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    mass += omega[idx[i]];
    prefixes.emplace_back(Af0[idx[i]] * std::pow(mass, 1.0 / e.q), i + 1);
  }
  std::sort(prefixes.begin(), prefixes.end(), std::greater<>());
  if (prefixes.size() > 3) prefixes.resize(3);

  double best = weak_ratio(A, sigma, omega, e, f);
  const std::size_t per = prefixes.empty() ? 0 : iterations / prefixes.size();
  for (const auto& [unused, len] : prefixes) {
    Vec g(f.size(), 0.0);
    for (std::size_t i = 0; i < len; ++i) g[idx[i]] = 1.0;
    Vec h = f;
    for (std::size_t it = 0; it < per; ++it) {
      h = pow_vec(A.adjoint_at(h, g), 1.0 / (e.p - 1.0));
      if (!normalize(h, sigma, e.p)) break;
      const double v = weak_ratio(A, sigma, omega, e, h);
      if (v > best) {
        best = v;
        f = h;
      }
      const Vec Ah = A.apply(h);
      double lo = kInf;
      for (std::size_t i = 0; i < len; ++i) lo = std::min(lo, Ah[idx[i]]);
      if (!(lo > 0.0) || !std::isfinite(lo)) break;
      double total = 0.0;
      for (std::size_t i = 0; i < len; ++i) total += g[idx[i]] *= std::sqrt(lo / Ah[idx[i]]);
      for (std::size_t i = 0; i < len; ++i) g[idx[i]] /= total;
    }
  }
  return best;
}

std::optional<std::pair<double, Vec>> spectral_bound(const PositiveOperator& A, const PointMeasure& sigma,
                                                     const PointMeasure& omega) {
  if (!A.linear || !A.matrix) return std::nullopt;
  const std::size_t n = sigma.size();
  const std::vector<double> a = A.matrix();
  std::vector<std::size_t> rows, cols;
  for (std::size_t i = 0; i < n; ++i) {
    if (omega[i] > 0.0) rows.push_back(i);
    if (sigma[i] > 0.0) cols.push_back(i);
  }
  if (rows.empty() || cols.empty()) return std::make_pair(0.0, Vec(n, 0.0));
  Eigen::MatrixXd B(rows.size(), cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const double v = a[rows[r] * n + cols[c]];
      if (!std::isfinite(v)) return std::nullopt;
      B(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          std::sqrt(omega[rows[r]]) * v / std::sqrt(sigma[cols[c]]);
    }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(B, Eigen::ComputeThinV);
  Vec f(n, 0.0);
  const auto v = svd.matrixV().col(0);
  for (std::size_t c = 0; c < cols.size(); ++c)
    f[cols[c]] = std::fabs(v(static_cast<Eigen::Index>(c))) / std::sqrt(sigma[cols[c]]);
  return std::make_pair(svd.singularValues()(0), f);
}

}  // namespace

double fixed_point_iteration(const PositiveOperator& A, const PointMeasure& sigma, const PointMeasure& omega,
                             const Exponents& e, Vec& f0, std::size_t iterations) {
  Vec f = f0;
  if (!normalize(f, sigma, e.p)) return 0.0;
  double best = strong_ratio(A, sigma, omega, e, f);
  f0 = f;
  for (std::size_t it = 0; it < iterations; ++it) {
    if (!strong_step(A, sigma, omega, e, f)) break;
    const double v = strong_ratio(A, sigma, omega, e, f);
    if (v > best) {
      best = v;
      f0 = f;
    }
  }
  return best;
}

NormEstimate operator_norm_strong(const PositiveOperator& A, const PointMeasure& sigma, const PointMeasure& omega,
                                  const Exponents& e, const NormBudget& budget, const std::vector<Vec>& seeds,
                                  std::uint64_t seed) {
  if (e.q == kInf && A.linear) raise(Errc::BadExponents, "q = inf is only allowed for the maximal operator");
  const Objective obj = [&](const Vec& f) { return strong_ratio(A, sigma, omega, e, f); };
  const auto step = [&](Vec& f) { return strong_step(A, sigma, omega, e, f); };
  std::vector<Candidate> extra;
  std::optional<double> spectral;
  if (e.p == 2.0 && e.q == 2.0)
    if (auto sb = spectral_bound(A, sigma, omega)) {
      spectral = sb->first;
      extra.push_back({sb->second, 0.0, "singular-vector"});
    }
  NormEstimate est = optimize(A, sigma, obj, step, budget, seeds, seed, std::move(extra));
  est.spectral = spectral;
  return est;
}

NormEstimate operator_norm_weak(const PositiveOperator& A, const PointMeasure& sigma, const PointMeasure& omega,
                                const Exponents& e, const NormBudget& budget, const std::vector<Vec>& seeds,
                                std::uint64_t seed) {
  if (e.q == kInf) raise(Errc::BadExponents, "weak norm needs finite q");
  const Objective obj = [&](const Vec& f) { return weak_ratio(A, sigma, omega, e, f); };
  const auto step = [&](Vec& f) { return weak_step(A, sigma, omega, e, f); };
  NormEstimate est = optimize(A, sigma, obj, step, budget, seeds, seed, {});
  if (!est.witness.empty()) {
    Vec f = est.witness;
    const double v = refine_level_sets(A, sigma, omega, e, f, budget.iterations * 3);
    est.evaluations += budget.iterations * 3;
    if (v > est.lower) {
      est.lower = est.estimate = v;
      est.witness = std::move(f);
      est.method += "+level-set";
    }
  }
  return est;
}

std::string describe(const TestCube& c) {
  if (c.point) return "system " + std::to_string(c.system) + " point cube {" + std::to_string(c.id.alpha) + "}";
  return "system " + std::to_string(c.system) + " cube " + to_string(c.id);
}

std::vector<TestCube> standard_cubes(const DyadicSystem& system, std::size_t system_index) {
  std::vector<TestCube> out;
  for (const auto& g : system.generations())
    for (const auto& q : g.cubes) out.push_back({system_index, q.id, false, q.members});
  return out;
}

std::vector<TestCube> standard_cubes(const AdjacentFamily& family) {
  std::vector<TestCube> out;
  for (std::size_t t = 0; t < family.L(); ++t) {
    auto part = standard_cubes(*family.systems[t], t);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

std::vector<TestCube> generalized_cubes(const GeneralizedSystem& gen, std::size_t system_index) {
  auto out = standard_cubes(*gen.base, system_index);
  for (PointId x : gen.point_cubes) out.push_back({system_index, {gen.base->k_max() + 1, x}, true, {x}});
  return out;
}

std::vector<Vec> indicator_seeds(const std::vector<TestCube>& cubes, std::size_t n) {
  std::map<PointSet, bool> seen;
  std::vector<Vec> out;
  for (const auto& c : cubes)
    if (seen.emplace(c.members, true).second) out.push_back(indicator(c.members, n));
  return out;
}

TestingConstants testing_constants(const std::function<Vec(const Vec&)>& forward,
                                   const std::function<Vec(const Vec&)>& backward,
                                   const std::vector<TestCube>& cubes, const PointMeasure& sigma,
                                   const PointMeasure& omega, const Exponents& e) {
  const std::size_t n = sigma.size();
  TestingConstants tc;
  const double pp = e.p_conj(), qq = e.q_conj();
  auto localized = [n](const Vec& v, const PointSet& members) {
    Vec out(n, 0.0);
    for (PointId x : members) out[x] = v[x];
    return out;
  };
  auto mark_infinite = [&](const TestCube& c) {
    if (!tc.infinite) tc.infinite_cube = describe(c);
    tc.infinite = true;
  };
  for (const auto& c : cubes) {
    const Vec chi = indicator(c.members, n);
    const double s = lp_norm(chi, sigma, e.p);
    if (!(s > 0.0)) {
      ++tc.convention_hits_strong;
    } else {
      const double v = lp_norm(localized(forward(chi), c.members), omega, e.q) / s;
      if (v == kInf) mark_infinite(c);
      if (!tc.argmax_strong || v > tc.strong) {
        tc.strong = v;
        tc.argmax_strong = c;
      }
    }
    const double w = lp_norm(chi, omega, qq);
    if (!(w > 0.0)) {
      ++tc.convention_hits_dual;
    } else {
      const double v = lp_norm(localized(backward(chi), c.members), sigma, pp) / w;
      if (v == kInf) mark_infinite(c);
      if (!tc.argmax_dual || v > tc.dual) {
        tc.dual = v;
        tc.argmax_dual = c;
      }
    }
  }
  return tc;
}

namespace {

void check_lower(double testing, const NormEstimate& norm, double factor, const char* what) {
  if (testing > factor * norm.lower * (1.0 + policy::pointwise_bound_rel) + policy::lower_bound_abs) {
    std::ostringstream os;
    os.precision(17);
    os << what << " testing constant " << testing << " exceeds " << factor << " times the norm lower bound "
       << norm.lower;
    raise(Errc::LowerBoundViolated, os.str());
  }
}

}  // namespace

TheoremBReport verdict_theorem_B(const Kernel& K, const PointMeasure& sigma, const PointMeasure& omega,
                                 const std::vector<TestCube>& cubes, const Exponents& e, const NormBudget& budget,
                                 std::uint64_t seed) {
  if (e.q == kInf) raise(Errc::BadExponents, "potential operators need q < inf");
  TheoremBReport rep;
  const auto forward = [&](const Vec& f) { return apply_T(K, sigma, f); };
  const auto backward = [&](const Vec& g) { return apply_T_adjoint(K, omega, g); };
  rep.testing = testing_constants(forward, backward, cubes, sigma, omega, e);
  if (rep.testing.infinite) raise(Errc::InfiniteTesting, rep.testing.infinite_cube);

  const auto seeds = indicator_seeds(cubes, K.size());
  rep.norm = operator_norm_strong(potential_operator(K, sigma, omega), sigma, omega, e, budget, seeds, seed);
  const Exponents dual{e.q_conj(), e.p_conj()};
  rep.adjoint_norm = operator_norm_strong(potential_adjoint_operator(K, sigma, omega), omega, sigma, dual, budget,
                                          seeds, splitmix64(seed));
  check_lower(rep.testing.strong, rep.norm, 1.0, "strong");
  check_lower(rep.testing.dual, rep.adjoint_norm, 1.0, "dual");
  rep.norm_lb = std::max(rep.norm.lower, rep.adjoint_norm.lower);
  rep.testing_sum = rep.testing.strong + rep.testing.dual;
  rep.ratio = ratio_or_convention(rep.norm_lb, rep.testing_sum);
  return rep;
}

std::vector<Vec> dual_extremal_seeds(const std::function<Vec(const Vec&)>& backward,
                                     const std::vector<TestCube>& cubes, std::size_t n, const Exponents& e) {
  std::map<PointSet, bool> seen;
  std::vector<Vec> out;
  const double s = e.p_conj() - 1.0;
  for (const auto& c : cubes) {
    if (!seen.emplace(c.members, true).second) continue;
    const Vec b = backward(indicator(c.members, n));
    Vec f(n, 0.0);
    for (PointId x : c.members) f[x] = b[x] > 0.0 ? std::pow(b[x], s) : 0.0;
    out.push_back(std::move(f));
  }
  return out;
}

WeakTypeReport verdict_weak_type(const Kernel& K, const PointMeasure& sigma, const PointMeasure& omega,
                                 const std::vector<TestCube>& cubes, const std::vector<const DyadicOperator*>& ops,
                                 const Exponents& e, const NormBudget& budget, std::uint64_t seed) {
  if (e.q == kInf) raise(Errc::BadExponents, "weak type needs q < inf");
  const std::size_t n = K.size();
  WeakTypeReport rep;
  const auto forward = [&](const Vec& f) { return apply_T(K, sigma, f); };
  const auto backward = [&](const Vec& g) { return apply_T_adjoint(K, omega, g); };
  rep.testing = testing_constants(forward, backward, cubes, sigma, omega, e);
  if (!std::isfinite(rep.testing.dual)) raise(Errc::InfiniteTesting, rep.testing.infinite_cube);

  auto seeds = indicator_seeds(cubes, n);
  for (auto& s : dual_extremal_seeds(backward, cubes, n, e)) seeds.push_back(std::move(s));
  rep.weak_norm = operator_norm_weak(potential_operator(K, sigma, omega), sigma, omega, e, budget, seeds, seed);
  // Pairing Tf with chi_Q over the level structure costs the factor q'.
  check_lower(rep.testing.dual, rep.weak_norm, e.q_conj(), "dual");
  rep.ratio = ratio_or_convention(rep.weak_norm.lower, rep.testing.dual);

  for (std::size_t t = 0; t < ops.size(); ++t) {
    const DyadicOperator& op = *ops[t];
    const auto gcubes = generalized_cubes(op.generalized(), t);
    const auto fwd = [&](const Vec& f) { return op.apply(f, sigma); };
    const auto bwd = [&](const Vec& g) { return op.apply(g, omega); };
    const TestingConstants tc = testing_constants(fwd, bwd, gcubes, sigma, omega, e);
    if (!std::isfinite(tc.dual)) raise(Errc::InfiniteTesting, tc.infinite_cube);
    auto dseeds = indicator_seeds(gcubes, n);
    for (auto& s : dual_extremal_seeds(bwd, gcubes, n, e)) dseeds.push_back(std::move(s));
    DyadicWeakCheck chk;
    chk.system = t;
    chk.dual_testing = tc.dual;
    chk.C_m = shell_params(op.C_K()).C_m;
    chk.upper_bound = 2.0 * std::pow(chk.C_m, e.q - 1.0) * tc.dual;
    const NormEstimate w =
        operator_norm_weak(dyadic_operator(op, sigma, omega), sigma, omega, e, budget, dseeds, splitmix64(seed + t + 1));
    chk.weak_lb = w.lower;
    check_lower(tc.dual, w, e.q_conj(), "dyadic dual");
    if (chk.weak_lb > chk.upper_bound * (1.0 + policy::pointwise_bound_rel) + policy::lower_bound_abs) {
      std::ostringstream os;
      os.precision(17);
      os << "system " << t << " weak norm lower bound " << chk.weak_lb << " exceeds " << chk.upper_bound;
      raise(Errc::BoundViolated, os.str());
    }
    rep.dyadic.push_back(chk);
  }
  return rep;
}

}  // namespace dyadica
