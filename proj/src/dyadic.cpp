#include "dyadica/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "dyadica/error.hpp"
#include "dyadica/sampling.hpp"

namespace dyadica {

namespace {

constexpr std::size_t kMaxAttempts = 8;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string set_str(const PointSet& s) {
  std::ostringstream os;
  os << "{";
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << "}";
  return os.str();
}

void validate_params(const QuasiMetricSpace& space, const DyadicParams& p) {
  if (!(p.delta > 0.0 && p.delta < 1.0)) raise(Errc::BadParams, "delta must lie in (0,1)");
  if (p.x0 >= space.size()) raise(Errc::BadParams, "x0 is not a point of the space");
  if (p.strict_mode) {
    const double a = space.a0();
    if (96.0 * std::pow(a, 6) * p.delta > 1.0)
      raise(Errc::BadParams, "strict mode requires 96 a0^6 delta <= 1");
  }
  if (p.k_min && p.k_max && *p.k_min > *p.k_max) raise(Errc::BadParams, "k_min > k_max");
}

}  // namespace

double inner_ball_constant(double a0) { return 1.0 / (12.0 * std::pow(a0, 4)); }
double outer_ball_constant(double a0) { return 4.0 * a0 * a0; }
double default_adjacency_constant(double a0, double delta) { return 8.0 * a0 * a0 * a0 / (delta * delta); }

std::string to_string(const CubeId& id) {
  return "(" + std::to_string(id.k) + "," + std::to_string(id.alpha) + ")";
}

Window default_window(const QuasiMetricSpace& space, double delta) {
  if (space.size() <= 1) return {0, 0};
  const double c1 = inner_ball_constant(space.a0());
  const double C1 = outer_ball_constant(space.a0());
  const double diam = space.diameter();
  int k = 0;
  if (c1 * std::pow(delta, k) > diam) {
    while (c1 * std::pow(delta, k + 1) > diam) ++k;
  } else {
    while (!(c1 * std::pow(delta, k) > diam)) --k;
  }
  Window w;
  w.k_min = k;
  int m = k;
  while (!(C1 * std::pow(delta, m) < space.min_distance())) ++m;
  w.k_max = m;
  return w;
}

double DyadicSystem::scale(int k) const { return std::pow(params_.delta, k); }

const Generation& DyadicSystem::generation(int k) const {
  if (!in_window(k)) raise(Errc::OutOfRange, "generation " + std::to_string(k));
  return gens_[static_cast<std::size_t>(k - window_.k_min)];
}

const DyadicCube& DyadicSystem::cube(CubeId id) const {
  const auto& g = generation(id.k);
  if (id.alpha >= g.cubes.size()) raise(Errc::OutOfRange, "cube " + to_string(id));
  return g.cubes[id.alpha];
}

const DyadicCube& DyadicSystem::containing(int k, PointId x) const {
  const auto& g = generation(k);
  if (x >= space_->size()) raise(Errc::OutOfRange, "point " + std::to_string(x));
  return g.cubes[g.cube_of[x]];
}

std::size_t DyadicSystem::cube_count() const {
  std::size_t c = 0;
  for (const auto& g : gens_) c += g.cubes.size();
  return c;
}

std::vector<CubeId> DyadicSystem::all_cubes() const {
  std::vector<CubeId> ids;
  for (const auto& g : gens_)
    for (const auto& q : g.cubes) ids.push_back(q.id);
  return ids;
}

DyadicSystem construct_system(std::shared_ptr<const QuasiMetricSpace> space, const DyadicParams& params,
                              std::uint64_t seed, std::size_t attempt) {
  const QuasiMetricSpace& X = *space;
  const std::size_t n = X.size();
  DyadicSystem sys;
  sys.space_ = space;
  sys.params_ = params;
  sys.seed_ = seed;
  sys.attempts_ = attempt + 1;
  Window w = default_window(X, params.delta);
  if (params.k_min) w.k_min = *params.k_min;
  if (params.k_max) w.k_max = *params.k_max;
  if (w.k_min > w.k_max) raise(Errc::BadParams, "empty generation window");
  sys.window_ = w;

  Rng rng(seed ^ splitmix64(attempt));
  std::vector<std::size_t> rank(n);
  std::iota(rank.begin(), rank.end(), std::size_t{0});
  rng.shuffle(rank);
  std::vector<PointId> sweep(n);
  for (PointId x = 0; x < n; ++x) sweep[rank[x]] = x;

  // Nested greedy nets: generation k keeps all centers of generation k-1.
  const std::size_t depth = static_cast<std::size_t>(w.depth());
  std::vector<std::vector<PointId>> centers(depth);
  std::vector<char> is_center(n, 0);
  is_center[params.x0] = 1;
  std::vector<PointId> current{params.x0};
  for (std::size_t g = 0; g < depth; ++g) {
    const double s = sys.scale(w.k_min + static_cast<int>(g));
    for (PointId p : sweep) {
      if (is_center[p]) continue;
      bool separated = true;
      for (PointId c : current)
        if (X.dist(p, c) < s) {
          separated = false;
          break;
        }
      if (separated) {
        current.push_back(p);
        is_center[p] = 1;
      }
    }
    centers[g] = current;
    std::sort(centers[g].begin(), centers[g].end());
  }

  auto nearest = [&](PointId p, const std::vector<PointId>& cs) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < cs.size(); ++i) {
      const double di = X.dist(p, cs[i]), db = X.dist(p, cs[best]);
      if (di < db || (di == db && rank[cs[i]] < rank[cs[best]])) best = i;
    }
    return best;
  };

  sys.gens_.resize(depth);
  for (std::size_t g = 0; g < depth; ++g) {
    auto& gen = sys.gens_[g];
    gen.k = w.k_min + static_cast<int>(g);
    gen.scale = sys.scale(gen.k);
    gen.cube_of.assign(n, 0);
    gen.cubes.resize(centers[g].size());
    for (std::size_t a = 0; a < centers[g].size(); ++a) {
      gen.cubes[a].id = {gen.k, a};
      gen.cubes[a].center = centers[g][a];
    }
  }

  // Leaf generation: each point joins its nearest center.
  {
    auto& leaf = sys.gens_.back();
    for (PointId p = 0; p < n; ++p) {
      const std::size_t a = nearest(p, centers.back());
      leaf.cube_of[p] = a;
      leaf.cubes[a].members.push_back(p);
    }
  }
  // Coarser generations: each child center picks its nearest coarser center
  // (itself when it is one); cubes are unions of children.
  for (std::size_t g = depth - 1; g-- > 0;) {
    auto& up = sys.gens_[g];
    auto& down = sys.gens_[g + 1];
    for (std::size_t b = 0; b < down.cubes.size(); ++b) {
      const PointId z = down.cubes[b].center;
      std::size_t a;
      auto it = std::lower_bound(centers[g].begin(), centers[g].end(), z);
      if (it != centers[g].end() && *it == z)
        a = static_cast<std::size_t>(it - centers[g].begin());
      else
        a = nearest(z, centers[g]);
      down.cubes[b].parent = a;
      up.cubes[a].children.push_back(b);
      for (PointId p : down.cubes[b].members) {
        up.cubes[a].members.push_back(p);
        up.cube_of[p] = a;
      }
    }
    for (auto& q : up.cubes) std::sort(q.members.begin(), q.members.end());
  }

  for (auto& gen : sys.gens_) {
    const double r = sys.C1() * gen.scale;
    for (auto& q : gen.cubes) {
      for (PointId y = 0; y < n; ++y)
        if (X.dist(y, q.center) < r) q.ball_members.push_back(y);
      double d = 0.0;
      for (std::size_t i = 0; i < q.members.size(); ++i)
        for (std::size_t j = i + 1; j < q.members.size(); ++j) d = std::max(d, X.dist(q.members[i], q.members[j]));
      q.diameter = d;
    }
  }
  return sys;
}

std::optional<Violation> verify_system(const DyadicSystem& sys) {
  const QuasiMetricSpace& X = sys.space();
  const std::size_t n = X.size();
  for (const auto& gen : sys.generations()) {
    std::vector<int> seen(n, 0);
    bool has_x0 = false;
    for (const auto& q : gen.cubes) {
      if (q.members.empty()) return Violation{"2.1", "empty cube " + to_string(q.id)};
      for (PointId p : q.members) {
        ++seen[p];
        if (gen.cube_of[p] != q.id.alpha) return Violation{"2.1", "lookup mismatch at point " + std::to_string(p)};
      }
      has_x0 = has_x0 || q.center == sys.x0();

      const double s = gen.scale;
      const Ball inner = ball(X, q.center, sys.c1() * s);
      const Ball outer = ball(X, q.center, sys.C1() * s);
      if (!is_subset(inner.members, q.members))
        return Violation{"2.3", "inner ball not inside cube " + to_string(q.id) + " " + set_str(q.members)};
      if (!is_subset(q.members, outer.members))
        return Violation{"2.3", "cube " + to_string(q.id) + " leaves its containing ball"};
      if (outer.members != q.ball_members) return Violation{"2.3", "stale containing ball for " + to_string(q.id)};

      if (gen.k > sys.k_min()) {
        if (!q.parent) return Violation{"2.2", "missing parent for " + to_string(q.id)};
        const auto& par = sys.cube({gen.k - 1, *q.parent});
        if (!is_subset(q.members, par.members))
          return Violation{"2.2", "cube " + to_string(q.id) + " not inside parent " + to_string(par.id)};
        if (!is_subset(q.ball_members, par.ball_members))
          return Violation{"2.4", "containing ball of " + to_string(q.id) + " not inside that of " + to_string(par.id)};
      }
    }
    for (PointId p = 0; p < n; ++p)
      if (seen[p] != 1)
        return Violation{"2.1", "point " + std::to_string(p) + " covered " + std::to_string(seen[p]) +
                                    " times in generation " + std::to_string(gen.k)};
    if (!has_x0) return Violation{"2.5", "no cube centered at x0 in generation " + std::to_string(gen.k)};
  }
  return std::nullopt;
}

DyadicSystem build_system(std::shared_ptr<const QuasiMetricSpace> space, const DyadicParams& params,
                          std::uint64_t tie_break_seed) {
  validate_params(*space, params);
  Violation last;
  for (std::size_t attempt = 0; attempt < kMaxAttempts; ++attempt) {
    DyadicSystem sys = construct_system(space, params, tie_break_seed, attempt);
    auto v = verify_system(sys);
    if (!v) return sys;
    last = *v;
  }
  raise(Errc::PropertyViolation, last.which + ": " + last.witness);
}

DyadicSystem build_system(const QuasiMetricSpace& space, const DyadicParams& params, std::uint64_t tie_break_seed) {
  return build_system(std::make_shared<const QuasiMetricSpace>(space), params, tie_break_seed);
}

std::optional<std::string> check_separation_clause(const DyadicSystem& sys) {
  const QuasiMetricSpace& X = sys.space();
  for (int k = sys.k_min(); k < sys.k_max(); ++k) {
    const double s = sys.scale(k);
    const auto& next = sys.generation(k + 1);
    for (PointId x = 0; x < X.size(); ++x)
      for (PointId y = 0; y < X.size(); ++y)
        if (X.dist(x, y) >= s && next.cube_of[x] == next.cube_of[y])
          return "d(" + std::to_string(x) + "," + std::to_string(y) + ") >= delta^" + std::to_string(k) +
                 " but both lie in one generation " + std::to_string(k + 1) + " cube";
  }
  return std::nullopt;
}

const DyadicCube& containing_cube(const DyadicSystem& system, int k, PointId x) { return system.containing(k, x); }

const DyadicCube& smallest_common_cube(const DyadicSystem& system, PointId x, PointId y) {
  if (x == y) raise(Errc::SamePoint, std::to_string(x));
  for (int k = system.k_max(); k >= system.k_min(); --k) {
    const auto& g = system.generation(k);
    if (g.cube_of[x] == g.cube_of[y]) return g.cubes[g.cube_of[x]];
  }
  raise(Errc::NotCovered, "points " + std::to_string(x) + " and " + std::to_string(y) + " share no cube");
}

std::vector<CubeRef> maximal_cubes(const std::vector<CubeRef>& collection) {
  if (collection.empty()) return {};
  const DyadicSystem* sys = collection.front().system;
  std::set<CubeId> in;
  for (const auto& c : collection) {
    if (c.system != sys) raise(Errc::MixedSystems, "collection spans several systems");
    sys->cube(c.id);
    in.insert(c.id);
  }
  std::vector<CubeRef> out;
  std::set<CubeId> emitted;
  for (const auto& c : collection) {
    if (emitted.count(c.id)) continue;
    bool maximal = true;
    CubeId cur = c.id;
    while (cur.k > sys->k_min()) {
      const auto& q = sys->cube(cur);
      cur = {cur.k - 1, *q.parent};
      if (in.count(cur)) {
        maximal = false;
        break;
      }
    }
    if (maximal) {
      out.push_back(c);
      emitted.insert(c.id);
    }
  }
  return out;
}

const DyadicCube& find_cube_with_positive_masses(const DyadicSystem& system, const PointMeasure& sigma,
                                                 const PointMeasure& omega, const PointSet& A) {
  if (!(sigma.total() > 0.0)) raise(Errc::Unsatisfiable, "sigma vanishes identically");
  if (!(omega.of(A) > 0.0)) raise(Errc::Unsatisfiable, "omega(A) = 0");
  for (const auto& g : system.generations())
    for (const auto& q : g.cubes) {
      PointSet inter;
      std::set_intersection(q.members.begin(), q.members.end(), A.begin(), A.end(), std::back_inserter(inter));
      if (sigma.of(q.members) > 0.0 && omega.of(inter) > 0.0) return q;
    }
  raise(Errc::Unsatisfiable, "no cube charges both measures");
}

std::vector<double> band_radii(const QuasiMetricSpace& space, PointId x, double lo, double hi) {
  std::vector<double> radii;
  const double first = std::nextafter(lo, kInf);
  if (first > hi) return radii;
  radii.push_back(first);
  for (PointId y : space.by_distance(x)) {
    const double d = space.dist(x, y);
    if (d > lo && d < hi) {
      const double r = std::nextafter(d, kInf);
      if (r != radii.back()) radii.push_back(r);
    }
  }
  return radii;
}

namespace {

// Prefix of the distance order from x: the strict ball B(x, r).
std::size_t ball_prefix(const QuasiMetricSpace& X, PointId x, double r) {
  const auto& ord = X.by_distance(x);
  std::size_t m = 0;
  while (m < ord.size() && X.dist(x, ord[m]) < r) ++m;
  return m;
}

bool ball_in_cube(const QuasiMetricSpace& X, const Generation& g, PointId x, std::size_t prefix) {
  const auto& ord = X.by_distance(x);
  const std::size_t a = g.cube_of[x];
  for (std::size_t i = 0; i < prefix; ++i)
    if (g.cube_of[ord[i]] != a) return false;
  return true;
}

}  // namespace

AdjacentFamily build_adjacent_family(std::shared_ptr<const QuasiMetricSpace> space, const DyadicParams& params,
                                     std::optional<double> target_C, std::size_t L_max, std::uint64_t seed) {
  validate_params(*space, params);
  if (L_max == 0) raise(Errc::BadParams, "L_max must be positive");
  const QuasiMetricSpace& X = *space;
  AdjacentFamily fam;
  fam.target_C = target_C.value_or(default_adjacency_constant(X.a0(), params.delta));

  std::vector<std::size_t> prefix;
  std::size_t uncovered = 0;
  for (std::size_t t = 0; t < L_max; ++t) {
    auto sys = std::make_shared<const DyadicSystem>(build_system(space, params, splitmix64(seed + t)));
    if (t == 0) {
      for (PointId x = 0; x < X.size(); ++x)
        for (int k = sys->k_min(); k <= sys->k_max(); ++k)
          for (double r : band_radii(X, x, sys->scale(k + 2), sys->scale(k + 1))) {
            fam.certificate.push_back({x, r, k, std::nullopt, 0, 0.0});
            prefix.push_back(ball_prefix(X, x, r));
          }
      uncovered = fam.certificate.size();
    }
    fam.systems.push_back(sys);
    for (std::size_t e = 0; e < fam.certificate.size(); ++e) {
      auto& entry = fam.certificate[e];
      const auto& g = sys->generation(entry.k);
      if (!ball_in_cube(X, g, entry.center, prefix[e])) continue;
      const auto& q = g.cubes[g.cube_of[entry.center]];
      if (!(q.diameter <= fam.target_C * entry.radius)) continue;
      const double ratio = q.diameter / entry.radius;
      if (!entry.system) {
        --uncovered;
      } else if (ratio >= entry.ratio) {
        continue;
      }
      entry.system = t;
      entry.alpha = q.id.alpha;
      entry.ratio = ratio;
    }
    if (uncovered == 0) break;
  }
  fam.complete = uncovered == 0;
  fam.observed_C = 0.0;
  for (const auto& e : fam.certificate)
    if (e.system) fam.observed_C = std::max(fam.observed_C, e.ratio);
  if (!fam.complete) {
    std::ostringstream os;
    os << uncovered << " balls uncovered after " << fam.L() << " systems; first:";
    for (const auto& e : fam.certificate)
      if (!e.system) {
        os << " B(" << e.center << ", " << e.radius << ") band " << e.k;
        break;
      }
    raise(Errc::CoverageIncomplete, os.str());
  }
  return fam;
}

std::optional<std::string> verify_certificate(const AdjacentFamily& family) {
  if (family.systems.empty()) return "family has no systems";
  const QuasiMetricSpace& X = family.systems.front()->space();
  for (const auto& e : family.certificate) {
    if (!e.system) return "uncovered ball at point " + std::to_string(e.center);
    const auto& sys = *family.systems.at(*e.system);
    const auto& q = sys.cube({e.k, e.alpha});
    if (!(sys.scale(e.k + 2) < e.radius && e.radius <= sys.scale(e.k + 1)))
      return "radius outside its band at point " + std::to_string(e.center);
    const Ball b = ball(X, e.center, e.radius);
    if (!is_subset(b.members, q.members)) return "ball at point " + std::to_string(e.center) + " escapes its witness";
    if (!(q.diameter <= family.target_C * e.radius)) return "witness too large at point " + std::to_string(e.center);
    if (q.diameter / e.radius > family.observed_C) return "observed constant understated";
  }
  return std::nullopt;
}

std::vector<ChainLink> expanding_cube_chain(const AdjacentFamily& family, PointId center, double radius) {
  if (family.systems.empty()) raise(Errc::CoverageIncomplete, "empty family");
  if (!(radius > 0.0)) raise(Errc::NonPositiveRadius, std::to_string(radius));
  const QuasiMetricSpace& X = family.systems.front()->space();
  const double c0 = family.target_C;
  const auto& ref = *family.systems.front();
  const double delta = ref.delta();
  std::vector<ChainLink> chain;
  double r = radius;
  for (int step = 0; step < 256; ++step) {
    int k = static_cast<int>(std::floor(std::log(r) / std::log(delta))) - 1;
    while (!(r <= ref.scale(k + 1))) --k;
    while (!(ref.scale(k + 2) < r)) ++k;
    k = std::clamp(k, ref.k_min(), ref.k_max());
    const std::size_t pre = ball_prefix(X, center, r);
    std::optional<ChainLink> best;
    double best_diam = kInf;
    for (std::size_t t = 0; t < family.systems.size(); ++t) {
      const auto& g = family.systems[t]->generation(k);
      const auto& q = g.cubes[g.cube_of[center]];
      if (!ball_in_cube(X, g, center, pre)) continue;
      if (q.diameter < best_diam) {
        best_diam = q.diameter;
        best = ChainLink{t, q.id, r};
      }
    }
    if (!best)
      raise(Errc::CoverageIncomplete,
            "no cube contains B(" + std::to_string(center) + ", " + std::to_string(r) + ")");
    chain.push_back(*best);
    if (family.systems[best->system]->cube(best->id).members.size() == X.size()) return chain;
    r *= c0;
  }
  raise(Errc::CoverageIncomplete, "chain did not reach the whole space");
}

GeneralizedSystem generalize(std::shared_ptr<const DyadicSystem> system, const PointMeasure& sigma,
                             const PointMeasure& omega) {
  GeneralizedSystem g;
  const std::size_t n = system->space().size();
  g.is_joint.assign(n, 0);
  const auto& leaf = system->generation(system->k_max());
  for (PointId x = 0; x < n; ++x) {
    if (!(sigma[x] > 0.0 && omega[x] > 0.0)) continue;
    g.is_joint[x] = 1;
    g.joint_atoms.push_back(x);
    if (leaf.cubes[leaf.cube_of[x]].members.size() != 1) g.point_cubes.push_back(x);
  }
  g.base = std::move(system);
  return g;
}

}  // namespace dyadica
