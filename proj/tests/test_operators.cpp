#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dyadica/error.hpp"
#include "dyadica/kernel.hpp"
#include "dyadica/operators.hpp"
#include "dyadica/sampling.hpp"
#include "support.hpp"

using namespace dyadica;
using namespace dyadica::testing;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool member(const PointSet& s, PointId x) { return std::binary_search(s.begin(), s.end(), x); }

// Shell sums over Q^k(x) minus Q^{k+m}(x), read straight from the cube
// memberships; generations past the window are the singleton {x}.
Vec shell_oracle(const DyadicOperator& op, const Vec& f, const PointMeasure& mu, int m) {
  const auto& s = op.system();
  const std::size_t n = op.size();
  Vec out(n, 0.0);
  for (PointId x = 0; x < n; ++x) {
    for (int k = s.k_min(); k <= s.k_max(); ++k) {
      const auto& q = s.containing(k, x);
      const PointSet inner = k + m <= s.k_max() ? s.containing(k + m, x).members : PointSet{x};
      double shell = 0.0;
      for (PointId y : q.members)
        if (!member(inner, y) && f[y] != 0.0 && mu[y] != 0.0) shell += f[y] * mu[y];
      if (shell != 0.0) out[x] += op.phi().at(q.id) * shell;
    }
    if (op.generalized().is_joint[x] && f[x] != 0.0 && mu[x] != 0.0) out[x] += op.kernel_diag()[x] * f[x] * mu[x];
  }
  return out;
}

void check_close(const Vec& a, const Vec& b, double rel) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(rel_close(a[i], b[i], rel));
}

}  // namespace

TEST_CASE("potential operator and adjoint") {
  const auto one = build_space({{0}});
  CHECK(apply_T(kernel_constant(1, 1.0), PointMeasure({4.0}), {1.0})[0] == 4.0);
  CHECK(apply_T(kernel_constant(3, 2.0), PointMeasure::counting(3), {0, 0, 0}) == Vec{0, 0, 0});

  const auto s = line(4);
  const Vec closed = apply_T(kernel_ball_volume_closed(*s, PointMeasure::counting(4), 0.5), PointMeasure::counting(4), {1, 0, 0, 0});
  check_close(closed, {1.0, std::pow(3.0, -0.5), 0.5, 0.5}, 1e-15);
  const Vec shifted = apply_T(kernel_shifted_distance(*s, 0.5), PointMeasure::counting(4), {1, 0, 0, 0});
  for (int x = 0; x < 4; ++x) CHECK(shifted[x] == doctest::Approx(std::pow(1.0 + x, -0.5)));

  const Kernel asym = kernel_matrix({{0, 2}, {3, 0}}, {1, 1});
  CHECK(apply_T_adjoint(asym, PointMeasure::counting(2), {1, 0})[1] == 2.0);
  CHECK(apply_T(asym, PointMeasure::counting(2), {1, 0})[1] == 3.0);

  const Kernel frac = kernel_frac_rho(*s, 1.0, 2.0);
  const Vec t = apply_T(frac, PointMeasure({0, 1, 1, 1}), {5, 1, 0, 0});
  CHECK(std::isfinite(t[0]));  // infinite diagonal against a null atom
  CHECK(t[1] == kInf);
}

TEST_CASE("dyadic kernel form agrees with shell sums") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto g = generate_space(seed % 2 ? "euclidean_random_points" : "integer_segment_counting", {16, 2, 1.0, 2, 3}, seed);
    auto sp = std::make_shared<const QuasiMetricSpace>(g.space);
    Rng rng(seed);
    const PointMeasure sigma = random_measure(16, rng, {-1, 1, 0.25});
    const PointMeasure omega = random_measure(16, rng, {-1, 1, 0.25});
    const auto op = make_dyadic_operator(system_on(sp, 1.0 / 96.0, seed), kernel_ball_volume(*sp, PointMeasure::counting(16), 0.5), sigma, omega);
    CHECK(form_agreement_gap(op, sigma) <= 1e-12);
    for (int trial = 0; trial < 20; ++trial) {
      const Vec f = random_nonneg_function(16, rng);
      check_close(op.apply(f, sigma), shell_oracle(op, f, sigma, 1), 1e-12);
      for (int m : {1, 2, 3, 4, 6}) check_close(apply_T_dyadic_m(op, m, f), shell_oracle(op, f, sigma, m), 1e-12);
    }
    for (PointId x = 0; x < 16; ++x) {
      CHECK(op.k(x, x) == (op.generalized().is_joint[x] ? op.kernel_diag()[x] : 0.0));
      for (PointId y = 0; y < 16; ++y) {
        CHECK(op.k(x, y) == op.k(y, x));
        if (x != y) CHECK(op.k(x, y) == op.phi().at(smallest_common_cube(op.system(), x, y).id));
      }
    }
  }
}

TEST_CASE("point masses through the dyadic operator") {
  const auto sp = line(8);
  const auto c = PointMeasure::counting(8);
  const auto op = make_dyadic_operator(system_on(sp), kernel_shifted_distance(*sp, 0.5), c, c);
  Vec e(8, 0.0);
  e[3] = 1.0;
  const Vec t = op.apply(e, c);
  for (PointId x = 0; x < 8; ++x)
    CHECK(t[x] == (x == 3 ? 1.0 : op.phi().at(smallest_common_cube(op.system(), x, 3).id)));

  Vec sm(8, 0.0);
  sm[3] = 1.0;
  const auto lonely = make_dyadic_operator(system_on(sp), kernel_shifted_distance(*sp, 0.5), PointMeasure(sm), PointMeasure::zero(8));
  CHECK(lonely.apply(e)[3] == 0.0);
  CHECK_THROWS_AS(apply_T_dyadic_m(op, 0, e), Error);
}

TEST_CASE("sandwich between the dyadic operator and its m variants") {
  const auto sp = line(16);
  const auto c = PointMeasure::counting(16);
  const auto op = make_dyadic_operator(system_on(sp), kernel_ball_volume_closed(*sp, c, 0.5), c, c);
  CHECK(check_sandwich_Tm(op, 1, 50, 1).empirical_C == 1.0);
  for (int m : {2, 3}) {
    const auto rep = check_sandwich_Tm(op, m, 100, 2);
    CHECK(rep.empirical_C <= op.C_K());
  }
  const auto flat = make_dyadic_operator(system_on(sp), kernel_constant(16, 1.0), c, c);
  CHECK(check_sandwich_Tm(flat, 3, 50, 3).empirical_C <= 1.0);

  Rng rng(9);
  for (int m : {1, 2, 3})
    for (int trial = 0; trial < 100; ++trial) {
      const Vec f = random_nonneg_function(16, rng);
      const Vec a = op.apply(f), b = apply_T_dyadic_m(op, m, f);
      for (PointId x = 0; x < 16; ++x) {
        CHECK(a[x] <= b[x] * (1.0 + 1e-12));
        CHECK(b[x] <= op.C_K() * m * a[x] * (1.0 + 1e-12));
      }
    }
}

TEST_CASE("pointwise equivalence with the kernel operator") {
  const auto sp = line(16);
  const auto c = PointMeasure::counting(16);
  const Kernel K = kernel_ball_volume_closed(*sp, c, 0.5);
  const auto fam = build_adjacent_family(sp, {}, std::nullopt, 16, 0);
  std::vector<DyadicOperator> ops;
  for (const auto& s : fam.systems) ops.push_back(make_dyadic_operator(s, K, c, c));
  std::vector<const DyadicOperator*> ptrs;
  double ck = 1.0;
  for (const auto& o : ops) {
    ptrs.push_back(&o);
    ck = std::max(ck, o.C_K());
  }
  const auto rep = check_pointwise_equivalence(ptrs, K, c, c, 100, 4);
  CHECK(rep.C_upper <= 3.0 * ck);
  CHECK(rep.C_lower_T <= ck);

  // Upper direction replayed by hand at every omega-positive point.
  Rng rng(10);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec f = random_nonneg_function(16, rng);
    const Vec t = apply_T(K, c, f);
    Vec sum(16, 0.0);
    for (const auto& o : ops) {
      const Vec d = o.apply(f);
      for (PointId x = 0; x < 16; ++x) sum[x] += d[x];
    }
    for (PointId x = 0; x < 16; ++x) CHECK(t[x] <= 3.0 * ck * sum[x] * (1.0 + 1e-12));
  }

  const auto one = std::make_shared<const QuasiMetricSpace>(build_space({{0}}));
  const Kernel K1 = kernel_constant(1, 2.0);
  const auto op1 = make_dyadic_operator(system_on(one), K1, PointMeasure({3.0}), PointMeasure({5.0}));
  CHECK(op1.apply({1.0})[0] == apply_T(K1, PointMeasure({3.0}), {1.0})[0]);
  const auto rep1 = check_pointwise_equivalence({&op1}, K1, PointMeasure({3.0}), PointMeasure({5.0}), 20, 5);
  CHECK(rep1.C_upper == doctest::Approx(1.0));
  CHECK(rep1.C_lower_T == doctest::Approx(1.0));
}

TEST_CASE("self-adjointness of the dyadic model") {
  const auto sp = line(16);
  Rng rng(21);
  const PointMeasure sigma = random_measure(16, rng), omega = random_measure(16, rng);
  const auto op = make_dyadic_operator(system_on(sp), kernel_shifted_distance(*sp, 0.5), sigma, omega);
  CHECK(check_self_adjoint(op, 100, 3).max_rel_gap <= 1e-10);
  // Point masses: both pairings equal k(x, y) sigma(x) omega(y).
  for (PointId x = 0; x < 16; x += 5)
    for (PointId y = 0; y < 16; y += 3) {
      Vec g(16, 0.0), h(16, 0.0);
      g[x] = 1.0;
      h[y] = 1.0;
      const double lhs = op.apply(g, sigma)[y] * omega[y];
      const double rhs = op.apply(h, omega)[x] * sigma[x];
      CHECK(rel_close(lhs, op.k(x, y) * sigma[x] * omega[y], 1e-15));
      CHECK(rel_close(lhs, rhs, 1e-15));
    }
}

TEST_CASE("point-cube testing") {
  const auto one = std::make_shared<const QuasiMetricSpace>(build_space({{0}}));
  const auto c = PointMeasure::counting(1);
  const auto op = make_dyadic_operator(system_on(one), kernel_constant(1, 1.0), c, c);
  CHECK(check_point_cube_testing(op, 2.0, 2.0, 1.0, 1.0).atoms_checked == 1);
  CHECK_THROWS_AS(check_point_cube_testing(op, 2.0, 2.0, 0.5, 1.0), Error);

  const auto none = make_dyadic_operator(system_on(one), kernel_constant(1, 1.0), c, PointMeasure::zero(1));
  CHECK(check_point_cube_testing(none, 2.0, 2.0, 0.0, 0.0).vacuous);

  const auto sp = line(3);
  const auto cc = PointMeasure::counting(3);
  const auto inf_diag = make_dyadic_operator(system_on(sp), kernel_frac_rho(*sp, 1.0, 2.0), cc, cc);
  try {
    check_point_cube_testing(inf_diag, 2.0, 2.0, kInf, kInf);
    FAIL("expected PointCubeViolated");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::PointCubeViolated);
  }
}
