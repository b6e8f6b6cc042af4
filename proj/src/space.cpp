#include "dyadica/space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "dyadica/error.hpp"
#include "dyadica/sampling.hpp"

namespace dyadica {

namespace {

std::string pair_msg(std::size_t x, std::size_t y) {
  std::ostringstream os;
  os << "(" << x << ", " << y << ")";
  return os.str();
}

}  // namespace

QuasiMetricSpace build_space(const std::vector<std::vector<double>>& table) {
  const std::size_t n = table.size();
  if (n == 0) raise(Errc::BadParams, "empty distance table");
  for (std::size_t x = 0; x < n; ++x)
    if (table[x].size() != n) raise(Errc::BadParams, "row " + std::to_string(x) + " has wrong length");

  QuasiMetricSpace s;
  s.n_ = n;
  s.d_.assign(n * n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      const double v = table[x][y];
      if (!std::isfinite(v) || v < 0.0) raise(Errc::NegativeDistance, pair_msg(x, y));
      if (x == y && v != 0.0) raise(Errc::BadParams, "nonzero diagonal at " + pair_msg(x, y));
      if (x != y && v == 0.0) raise(Errc::ZeroOffDiagonal, pair_msg(x, y));
      if (table[y][x] != v) raise(Errc::NonSymmetric, pair_msg(x, y));
      s.d_[x * n + y] = v;
    }
  }

  s.diam_ = 0.0;
  s.min_dist_ = n > 1 ? std::numeric_limits<double>::infinity() : 0.0;
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = x + 1; y < n; ++y) {
      s.diam_ = std::max(s.diam_, s.dist(x, y));
      s.min_dist_ = std::min(s.min_dist_, s.dist(x, y));
    }

  s.order_.resize(n);
  for (std::size_t x = 0; x < n; ++x) {
    auto& ord = s.order_[x];
    ord.resize(n);
    std::iota(ord.begin(), ord.end(), PointId{0});
    std::stable_sort(ord.begin(), ord.end(),
                     [&](PointId a, PointId b) { return s.dist(x, a) < s.dist(x, b); });
  }
  s.a0_ = quasi_triangle_constant(s);
  return s;
}

double quasi_triangle_constant(const QuasiMetricSpace& space) {
  const std::size_t n = space.size();
  double a = 1.0;
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = x + 1; y < n; ++y) {
      const double dxy = space.dist(x, y);
      for (std::size_t z = 0; z < n; ++z) {
        if (z == x || z == y) continue;
        a = std::max(a, dxy / (space.dist(x, z) + space.dist(z, y)));
      }
    }
  return a;
}

PointMeasure::PointMeasure(Vec masses) : m_(std::move(masses)) {
  for (std::size_t x = 0; x < m_.size(); ++x)
    if (!std::isfinite(m_[x]) || m_[x] < 0.0)
      raise(Errc::BadParams, "mass at point " + std::to_string(x) + " is not a finite nonnegative number");
}

PointMeasure PointMeasure::counting(std::size_t n) { return PointMeasure(Vec(n, 1.0)); }
PointMeasure PointMeasure::zero(std::size_t n) { return PointMeasure(Vec(n, 0.0)); }

double PointMeasure::total() const {
  double s = 0.0;
  for (double v : m_) s += v;
  return s;
}

double PointMeasure::of(std::span<const PointId> set) const {
  double s = 0.0;
  for (PointId x : set) s += m_[x];
  return s;
}

PointSet PointMeasure::atoms() const {
  PointSet a;
  for (PointId x = 0; x < m_.size(); ++x)
    if (m_[x] > 0.0) a.push_back(x);
  return a;
}

PointMeasure PointMeasure::scaled(double s) const {
  Vec m = m_;
  for (auto& v : m) v *= s;
  return PointMeasure(std::move(m));
}

Ball ball(const QuasiMetricSpace& space, PointId x, double r) {
  if (!(r > 0.0)) raise(Errc::NonPositiveRadius, "radius " + std::to_string(r));
  if (x >= space.size()) raise(Errc::OutOfRange, "center " + std::to_string(x));
  Ball b{x, r, {}};
  for (PointId y = 0; y < space.size(); ++y)
    if (space.dist(y, x) < r) b.members.push_back(y);
  return b;
}

PointSet closed_ball_members(const QuasiMetricSpace& space, PointId x, double r) {
  PointSet m;
  for (PointId y = 0; y < space.size(); ++y)
    if (space.dist(y, x) <= r) m.push_back(y);
  return m;
}

bool is_subset(std::span<const PointId> a, std::span<const PointId> b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

std::vector<PointId> greedy_half_cover(const QuasiMetricSpace& space, const Ball& b) {
  const double half = b.radius / 2.0;  // may underflow to 0; a center still covers itself
  const auto& m = b.members;
  std::vector<char> covered(m.size(), 0);
  std::size_t left = m.size();
  std::vector<PointId> centers;
  while (left > 0) {
    std::size_t best = 0, best_gain = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      std::size_t gain = 0;
      for (std::size_t j = 0; j < m.size(); ++j)
        if (!covered[j] && (j == i || space.dist(m[j], m[i]) < half)) ++gain;
      if (gain > best_gain) {
        best_gain = gain;
        best = i;
      }
    }
    centers.push_back(m[best]);
    for (std::size_t j = 0; j < m.size(); ++j)
      if (!covered[j] && (j == best || space.dist(m[j], m[best]) < half)) {
        covered[j] = 1;
        --left;
      }
  }
  return centers;
}

DoublingEstimate estimate_geometric_doubling(const QuasiMetricSpace& space) {
  DoublingEstimate est;
  est.a1_upper = space.size() > 0 ? 1 : 0;
  for (PointId x = 0; x < space.size(); ++x) {
    std::vector<double> radii;
    for (PointId y : space.by_distance(x)) {
      const double r = std::nextafter(space.dist(x, y), std::numeric_limits<double>::infinity());
      if (radii.empty() || radii.back() != r) radii.push_back(r);
    }
    for (double r : radii) {
      const Ball b = ball(space, x, r);
      BallCover cover{x, r, greedy_half_cover(space, b)};
      est.a1_upper = std::max(est.a1_upper, cover.cover_centers.size());
      est.covers.push_back(std::move(cover));
    }
  }
  return est;
}

namespace {

GeneratedSpace line_like(std::string kind, std::size_t n, double power) {
  std::vector<std::vector<double>> t(n, std::vector<double>(n, 0.0));
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y) {
      const double d = std::fabs(static_cast<double>(x) - static_cast<double>(y));
      t[x][y] = power == 1.0 ? d : std::pow(d, power);
    }
  GeneratedSpace g{std::move(kind), build_space(t), {}};
  g.measures.emplace("counting", PointMeasure::counting(n));
  return g;
}

}  // namespace

GeneratedSpace generate_space(std::string_view kind, const GeneratorParams& params, std::uint64_t seed) {
  if (kind == "integer_segment_counting") {
    if (params.n < 1 || params.n > 4096) raise(Errc::BadParams, "n must be in [1, 4096]");
    return line_like(std::string(kind), params.n, 1.0);
  }
  if (kind == "snowflake_power") {
    if (params.n < 1 || params.n > 4096) raise(Errc::BadParams, "n must be in [1, 4096]");
    if (!(params.power > 0.0) || !std::isfinite(params.power)) raise(Errc::BadParams, "power must be positive");
    return line_like(std::string(kind), params.n, params.power);
  }
  if (kind == "euclidean_random_points") {
    if (params.n < 1 || params.n > 4096) raise(Errc::BadParams, "n must be in [1, 4096]");
    if (params.dim < 1 || params.dim > 16) raise(Errc::BadParams, "dim must be in [1, 16]");
    if (!(params.power > 0.0)) raise(Errc::BadParams, "power must be positive");
    Rng rng(seed);
    std::vector<Vec> pts(params.n, Vec(params.dim));
    for (auto& p : pts)
      for (auto& c : p) c = rng.uniform();
    std::vector<std::vector<double>> t(params.n, std::vector<double>(params.n, 0.0));
    for (std::size_t x = 0; x < params.n; ++x)
      for (std::size_t y = x + 1; y < params.n; ++y) {
        double s = 0.0;
        for (std::size_t i = 0; i < params.dim; ++i) s += (pts[x][i] - pts[y][i]) * (pts[x][i] - pts[y][i]);
        const double d = std::sqrt(s);
        t[x][y] = t[y][x] = params.power == 1.0 ? d : std::pow(d, params.power);
      }
    GeneratedSpace g{std::string(kind), build_space(t), {}};
    g.measures.emplace("counting", PointMeasure::counting(params.n));
    Rng mrng = rng.split(1);
    g.measures.emplace("random", random_measure(params.n, mrng));
    return g;
  }
  if (kind == "ultrametric_tree") {
    // Leaves of a complete tree; distance 2^h where h is the height of the
    // lowest common ancestor.
    if (params.branching < 2 || params.depth < 1) raise(Errc::BadParams, "branching >= 2 and depth >= 1 required");
    std::size_t n = 1;
    for (std::size_t i = 0; i < params.depth; ++i) {
      n *= params.branching;
      if (n > 4096) raise(Errc::BadParams, "tree has more than 4096 leaves");
    }
    std::vector<std::vector<double>> t(n, std::vector<double>(n, 0.0));
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y) {
        if (x == y) continue;
        std::size_t a = x, b = y, h = 0;
        while (a != b) {
          a /= params.branching;
          b /= params.branching;
          ++h;
        }
        t[x][y] = std::ldexp(1.0, static_cast<int>(h));
      }
    GeneratedSpace g{std::string(kind), build_space(t), {}};
    g.measures.emplace("counting", PointMeasure::counting(n));
    Rng rng(seed);
    g.measures.emplace("random", random_measure(n, rng));
    return g;
  }
  raise(Errc::UnknownKind, std::string(kind));
}

}  // namespace dyadica
