#include "doctest.h"

#include <cmath>
#include <limits>

#include "dyadica/error.hpp"
#include "dyadica/kernel.hpp"
#include "dyadica/space.hpp"
#include "support.hpp"

using namespace dyadica;
using namespace dyadica::testing;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Direct max over separated pairs of the containing ball.
double phi_oracle(const DyadicSystem& s, const Kernel& K, CubeId id) {
  const auto& X = s.space();
  const double thr = s.delta() * s.delta() / (5.0 * X.a0() * X.a0()) * 4.0 * X.a0() * X.a0() * std::pow(s.delta(), id.k);
  double best = 0.0;
  for (PointId x : s.cube(id).ball_members)
    for (PointId y : s.cube(id).ball_members)
      if (x != y && X.dist(x, y) >= thr) best = std::max(best, K(x, y));
  return best;
}

double k1_oracle(const QuasiMetricSpace& X, const Kernel& K, double k2) {
  double k1 = 1.0;
  for (PointId x = 0; x < X.size(); ++x)
    for (PointId y = 0; y < X.size(); ++y) {
      if (x == y) continue;
      for (PointId z = 0; z < X.size(); ++z) {
        if (X.dist(z, y) <= k2 * X.dist(x, y) && K(x, y) > 0) k1 = std::max(k1, K(x, y) / K(z, y));
        if (X.dist(x, z) <= k2 * X.dist(x, y) && K(x, y) > 0) k1 = std::max(k1, K(x, y) / K(x, z));
      }
    }
  return k1;
}

}  // namespace

TEST_CASE("fractional kernel") {
  const auto s = line(4);
  const Kernel K = kernel_frac_rho(*s, 1.0, 2.0);
  CHECK(K(0, 2) == 0.5);
  CHECK(K(1, 1) == kInf);
  CHECK(kernel_frac_rho(*s, 1.0, 2.0, 1.0)(3, 3) == 1.0);
  CHECK_THROWS_AS(kernel_frac_rho(*s, 2.0, 2.0), Error);
}

TEST_CASE("ball-volume kernels on the integer segment") {
  const auto s = line(8);
  const auto mu = PointMeasure::counting(8);
  const Kernel closed = kernel_ball_volume_closed(*s, mu, 0.5);
  CHECK(closed(0, 1) == doctest::Approx(std::pow(2.0, -0.5)));
  CHECK(closed(4, 4) == 1.0);
  const Kernel strict = kernel_ball_volume(*s, mu, 0.5);
  CHECK(strict(0, 1) == 1.0);
  CHECK(strict(3, 5) == doctest::Approx(std::pow(3.0, -0.5)));
  CHECK_THROWS_AS(kernel_ball_volume(*s, mu, 1.0), Error);
  try {
    kernel_ball_volume(*line(3), PointMeasure({0.0, 1.0, 1.0}), 0.5);
    FAIL("expected EmptyBallMass");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EmptyBallMass);
  }
  const Kernel shifted = kernel_shifted_distance(*s, 0.5);
  CHECK(shifted(2, 5) == doctest::Approx(0.5));
  CHECK(shifted.is_symmetric());
}

TEST_CASE("monotonicity constants") {
  const auto s = line(16);
  const Kernel shifted = kernel_shifted_distance(*s, 0.5);
  const auto cert = verify_monotonicity(*s, shifted, 2.0);
  CHECK(cert.k1 <= std::sqrt(2.0));
  CHECK(cert.k1 == doctest::Approx(k1_oracle(*s, shifted, 2.0)).epsilon(1e-14));
  CHECK(verify_monotonicity(*s, kernel_constant(16, 1.0), 50.0).k1 == 1.0);

  const Kernel closed = kernel_ball_volume_closed(*s, PointMeasure::counting(16), 0.5);
  CHECK(verify_monotonicity(*s, closed, 3.0).k1 == doctest::Approx(k1_oracle(*s, closed, 3.0)).epsilon(1e-14));

  std::vector<std::vector<double>> off(3, std::vector<double>(3, 1.0));
  off[2][1] = 0.0;
  off[1][2] = 0.0;
  try {
    verify_monotonicity(*line(3), kernel_matrix(off, {1, 1, 1}), 2.0);
    FAIL("expected Unbounded");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::Unbounded);
  }
}

TEST_CASE("phi matches the direct pair scan") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto g = generate_space(seed % 2 ? "euclidean_random_points" : "integer_segment_counting", {14, 2, 1.0, 2, 3}, seed);
    auto sp = std::make_shared<const QuasiMetricSpace>(g.space);
    const auto sys = system_on(sp, 1.0 / 96.0, seed);
    const Kernel K = kernel_ball_volume(*sp, PointMeasure::counting(sp->size()), 0.25 + 0.1 * double(seed));
    const PhiTable phi = compute_phi(*sys, K);
    for (const auto& id : sys->all_cubes()) {
      CHECK(phi.at(id) == phi_oracle(*sys, K, id));
      if (sys->cube(id).ball_members.size() == 1) CHECK(phi.at(id) == 0.0);
    }
  }
}

TEST_CASE("phi on the two-point space") {
  auto sp = std::make_shared<const QuasiMetricSpace>(build_space({{0, 1}, {1, 0}}));
  const auto sys = system_on(sp);
  const Kernel K = kernel_ball_volume_closed(*sp, PointMeasure::counting(2), 0.5);
  const PhiTable phi = compute_phi(*sys, K);
  const CubeId top = sys->all_cubes().front();
  REQUIRE(sys->cube(top).members.size() == 2);
  REQUIRE(phi.c * sys->ball_radius(top.k) <= 1.0);
  CHECK(phi.at(top) == doctest::Approx(std::pow(2.0, -0.5)));
}

TEST_CASE("kernel estimates") {
  const auto sys = system_on(line(16));
  const auto c = kernel_constant(16, 1.0);
  CHECK(verify_kernel_estimates(*sys, c, compute_phi(*sys, c)).C_K == 1.0);

  for (double gamma : {0.25, 0.5, 0.75}) {
    const Kernel K = kernel_ball_volume_closed(sys->space(), PointMeasure::counting(16), gamma);
    const PhiTable phi = compute_phi(*sys, K);
    const auto rep = verify_kernel_estimates(*sys, K, phi);
    CHECK(rep.C_K <= rep.monotonicity.k1 * rep.monotonicity.k1);
    // (i) replayed directly.
    for (const auto& id : sys->all_cubes())
      for (PointId x : sys->cube(id).ball_members)
        for (PointId y : sys->cube(id).ball_members)
          if (std::isfinite(K(x, y))) CHECK(phi.at(id) <= rep.C_K * K(x, y) * (1.0 + 1e-15));
  }

  DyadicParams leaves;
  leaves.k_min = 1;
  leaves.k_max = 1;
  const auto only_leaves = std::make_shared<const DyadicSystem>(build_system(line(16), leaves, 0));
  const Kernel K = kernel_shifted_distance(only_leaves->space(), 0.5);
  CHECK(verify_kernel_estimates(*only_leaves, K, compute_phi(*only_leaves, K)).vacuous);
}
