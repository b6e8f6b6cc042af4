#include "doctest.h"

#include <algorithm>
#include <set>

#include "dyadica/dyadic.hpp"
#include "dyadica/error.hpp"
#include "dyadica/sampling.hpp"
#include "support.hpp"

using namespace dyadica;
using namespace dyadica::testing;

namespace {

bool contains_all(const PointSet& big, const PointSet& small) { return std::includes(big.begin(), big.end(), small.begin(), small.end()); }

PointSet all_points(std::size_t n) {
  PointSet s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = i;
  return s;
}

}  // namespace

TEST_CASE("parameter validation") {
  DyadicParams p;
  p.delta = 0.5;
  CHECK_THROWS_AS(build_system(*line(4), p, 0), Error);
  p.strict_mode = false;
  CHECK_NOTHROW(build_system(*line(4), p, 0));
  p.delta = 1.0 / 96.0;
  p.x0 = 9;
  CHECK_THROWS_AS(build_system(*line(4), p, 0), Error);
}

TEST_CASE("one-point space has one cube per generation") {
  const auto s = system_on(std::make_shared<const QuasiMetricSpace>(build_space({{0}})));
  for (const auto& g : s->generations()) {
    REQUIRE(g.cubes.size() == 1);
    CHECK(g.cubes[0].members == PointSet{0});
  }
  CHECK_FALSE(verify_system(*s).has_value());
}

TEST_CASE("window and extreme generations on the 16-point line") {
  const auto s = system_on(line(16));
  CHECK(s->k_min() == -2);
  CHECK(s->k_max() == 1);
  CHECK(s->generation(-2).cubes.size() == 1);
  CHECK(s->generation(-2).cubes[0].members == all_points(16));
  for (const auto& q : s->generation(1).cubes) CHECK(q.members.size() == 1);
  CHECK(containing_cube(*s, s->k_min(), 5).members == all_points(16));
  CHECK(containing_cube(*s, 1, 5).members == PointSet{5});
}

TEST_CASE("smallest common cube") {
  const auto s = system_on(line(16));
  for (auto [x, y] : {std::pair<PointId, PointId>{0, 15}, {0, 1}, {4, 9}}) {
    const auto& q = smallest_common_cube(*s, x, y);
    CHECK(std::binary_search(q.members.begin(), q.members.end(), x));
    CHECK(std::binary_search(q.members.begin(), q.members.end(), y));
    if (q.id.k < s->k_max()) {
      const auto& below = s->containing(q.id.k + 1, x).members;
      CHECK_FALSE(std::binary_search(below.begin(), below.end(), y));
    }
  }
  CHECK(smallest_common_cube(*s, 0, 15).members == all_points(16));
  CHECK(smallest_common_cube(*s, 0, 1).id.k <= 0);
  CHECK_THROWS_AS(smallest_common_cube(*s, 3, 3), Error);
}

TEST_CASE("systems satisfy the structural properties and separation clause") {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const auto g = generate_space(seed % 3 == 0   ? "integer_segment_counting"
                                  : seed % 3 == 1 ? "euclidean_random_points"
                                                  : "snowflake_power",
                                  {20, 2, 0.75, 2, 3}, seed);
    auto sp = std::make_shared<const QuasiMetricSpace>(g.space);
    DyadicParams p;
    p.delta = 1.0 / (96.0 * std::pow(sp->a0(), 6));
    const DyadicSystem s = build_system(sp, p, seed);
    const auto v = verify_system(s);
    CHECK_MESSAGE(!v, (v ? v->which + " " + v->witness : ""));
    CHECK_FALSE(check_separation_clause(s).has_value());
    // Nested partitions, replayed directly.
    for (const auto& gen : s.generations()) {
      PointSet seen;
      for (const auto& q : gen.cubes) seen.insert(seen.end(), q.members.begin(), q.members.end());
      std::sort(seen.begin(), seen.end());
      CHECK(seen == all_points(sp->size()));
      if (gen.k > s.k_min())
        for (const auto& q : gen.cubes) CHECK(contains_all(s.cube({gen.k - 1, *q.parent}).members, q.members));
    }
  }
}

TEST_CASE("maximal cubes match the pairwise containment oracle") {
  const auto s = system_on(line(16));
  const auto all = s->all_cubes();
  CHECK(maximal_cubes({{s.get(), all.front()}, {s.get(), all.back()}}).size() == 1);
  std::vector<CubeRef> singles;
  for (std::size_t a = 0; a < s->generation(1).cubes.size(); ++a) singles.push_back({s.get(), {1, a}});
  CHECK(maximal_cubes(singles) == singles);

  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<CubeRef> pick;
    for (const auto& id : all)
      if (rng.uniform() < 0.3) pick.push_back({s.get(), id});
    rng.shuffle(pick);
    std::set<CubeId> expected;
    for (const auto& c : pick) {
      const auto& q = s->cube(c.id);
      bool dominated = false;
      for (const auto& r : pick)
        if (r.id.k < c.id.k && contains_all(s->cube(r.id).members, q.members)) dominated = true;
      if (!dominated) expected.insert(c.id);
    }
    std::set<CubeId> got;
    for (const auto& c : maximal_cubes(pick)) CHECK(got.insert(c.id).second);
    CHECK(got == expected);
  }
}

TEST_CASE("maximal cubes reject mixed systems") {
  const auto a = system_on(line(8), 1.0 / 96.0, 1);
  const auto b = system_on(line(8), 1.0 / 96.0, 2);
  CHECK_THROWS_AS(maximal_cubes({{a.get(), a->all_cubes()[0]}, {b.get(), b->all_cubes()[0]}}), Error);
}

TEST_CASE("cube charging both measures") {
  const auto s = system_on(line(16));
  const auto c = PointMeasure::counting(16);
  CHECK(find_cube_with_positive_masses(*s, c, c, {5}).members == all_points(16));
  Vec sm(16, 0.0), om(16, 0.0);
  sm[0] = 1.0;
  om[15] = 1.0;
  CHECK(find_cube_with_positive_masses(*s, PointMeasure(sm), PointMeasure(om), {15}).members == all_points(16));
  CHECK_THROWS_AS(find_cube_with_positive_masses(*s, c, PointMeasure(om), {3}), Error);
}

TEST_CASE("adjacent family certificates") {
  SUBCASE("one-point space") {
    const auto fam = build_adjacent_family(std::make_shared<const QuasiMetricSpace>(build_space({{0}})), {}, std::nullopt, 8, 0);
    CHECK(fam.L() == 1);
    CHECK(fam.complete);
  }
  SUBCASE("two-point space is covered by one system") {
    const auto fam =
        build_adjacent_family(std::make_shared<const QuasiMetricSpace>(build_space({{0, 1}, {1, 0}})), {}, std::nullopt, 8, 0);
    CHECK(fam.L() == 1);
  }
  SUBCASE("16-point line") {
    const auto fam = build_adjacent_family(line(16), {}, std::nullopt, 16, 0);
    CHECK(fam.complete);
    CHECK(fam.observed_C <= default_adjacency_constant(1.0, 1.0 / 96.0));
    CHECK(default_adjacency_constant(1.0, 1.0 / 96.0) == doctest::Approx(73728.0));
    CHECK_FALSE(verify_certificate(fam).has_value());
    // Every entry replays: the ball lies in the cube and the diameter ratio is as recorded.
    for (const auto& e : fam.certificate) {
      REQUIRE(e.system.has_value());
      const auto& q = fam.systems[*e.system]->cube({e.k, e.alpha});
      CHECK(contains_all(q.members, ball(fam.systems[0]->space(), e.center, e.radius).members));
      CHECK(q.diameter / e.radius <= fam.observed_C);
    }
  }
}

TEST_CASE("expanding cube chains") {
  const auto fam = build_adjacent_family(line(16), {}, std::nullopt, 16, 0);
  const auto& sp = fam.systems[0]->space();
  const double c0 = fam.target_C;
  CHECK(expanding_cube_chain(fam, 3, 100.0).size() == 1);
  for (PointId x : {0, 8, 15}) {
    const auto chain = expanding_cube_chain(fam, x, 1.5);
    REQUIRE_FALSE(chain.empty());
    CHECK(contains_all(fam.systems[chain[0].system]->cube(chain[0].id).members, ball(sp, x, 1.5).members));
    for (std::size_t i = 0; i < chain.size(); ++i) {
      const auto& q = fam.systems[chain[i].system]->cube(chain[i].id).members;
      const double r = 1.5 * std::pow(c0, static_cast<double>(i));
      CHECK(contains_all(q, ball(sp, x, r).members));
      CHECK(contains_all(ball(sp, x, r * c0).members, q));
      if (i > 0) CHECK(contains_all(q, fam.systems[chain[i - 1].system]->cube(chain[i - 1].id).members));
    }
    CHECK(fam.systems[chain.back().system]->cube(chain.back().id).members == all_points(16));
  }
}

TEST_CASE("generalized cubes") {
  const auto base = system_on(line(16));
  const auto c = PointMeasure::counting(16);
  CHECK(generalize(base, c, c).point_cubes.empty());
  CHECK(generalize(base, c, c).joint_atoms.size() == 16);
  Vec sm(16, 0.0);
  sm[4] = 1.0;
  CHECK(generalize(base, PointMeasure(sm), PointMeasure::zero(16)).joint_atoms.empty());

  DyadicParams shallow;
  shallow.k_min = -2;
  shallow.k_max = -2;
  const auto top_only = std::make_shared<const DyadicSystem>(build_system(line(16), shallow, 0));
  Vec om(16, 0.0);
  om[4] = 3.0;
  const auto gen = generalize(top_only, PointMeasure(sm), PointMeasure(om));
  CHECK(gen.point_cubes == PointSet{4});
}
