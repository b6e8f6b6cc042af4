#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dyadica {

using PointId = std::size_t;
using Vec = std::vector<double>;
using PointSet = std::vector<PointId>;  // always sorted ascending

// Finite quasi-metric space with a dense distance table.
class QuasiMetricSpace {
 public:
  QuasiMetricSpace() = default;

  std::size_t size() const noexcept { return n_; }
  double dist(PointId x, PointId y) const noexcept { return d_[x * n_ + y]; }
  double a0() const noexcept { return a0_; }
  double diameter() const noexcept { return diam_; }
  // Smallest distance between distinct points; 0 for a one-point space.
  double min_distance() const noexcept { return min_dist_; }
  // All points ordered by (distance from x, id); x itself comes first.
  const std::vector<PointId>& by_distance(PointId x) const { return order_[x]; }

 private:
  friend QuasiMetricSpace build_space(const std::vector<std::vector<double>>& table);

  std::size_t n_ = 0;
  std::vector<double> d_;
  double a0_ = 1.0;
  double diam_ = 0.0;
  double min_dist_ = 0.0;
  std::vector<std::vector<PointId>> order_;
};

// Validates the table and computes a0 by brute force over all triples.
QuasiMetricSpace build_space(const std::vector<std::vector<double>>& table);

// Smallest a with d(x,y) <= a (d(x,z) + d(z,y)) for all triples, floored at 1.
double quasi_triangle_constant(const QuasiMetricSpace& space);

class PointMeasure {
 public:
  PointMeasure() = default;
  explicit PointMeasure(Vec masses);
  static PointMeasure counting(std::size_t n);
  static PointMeasure zero(std::size_t n);

  std::size_t size() const noexcept { return m_.size(); }
  double operator[](PointId x) const noexcept { return m_[x]; }
  const Vec& masses() const noexcept { return m_; }
  bool is_atom(PointId x) const noexcept { return m_[x] > 0.0; }
  double total() const;
  double of(std::span<const PointId> set) const;
  PointSet atoms() const;
  PointMeasure scaled(double s) const;

 private:
  Vec m_;
};

struct Ball {
  PointId center = 0;
  double radius = 0.0;
  PointSet members;
};

// Strict ball {y : d(y, x) < r}.
Ball ball(const QuasiMetricSpace& space, PointId x, double r);
// Closed ball {y : d(y, x) <= r}; used by the closed-ball kernel variant.
PointSet closed_ball_members(const QuasiMetricSpace& space, PointId x, double r);
bool is_subset(std::span<const PointId> a, std::span<const PointId> b);

struct BallCover {
  PointId center = 0;
  double radius = 0.0;
  std::vector<PointId> cover_centers;
};

struct DoublingEstimate {
  std::size_t a1_upper = 1;
  std::string method = "greedy-cover";
  std::vector<BallCover> covers;  // one entry per ball examined, for replay
};

// Greedy max-coverage cover of ball members by strict balls of half radius
// centered at members.
std::vector<PointId> greedy_half_cover(const QuasiMetricSpace& space, const Ball& b);

// Upper bound on the geometric doubling constant. For each center only the
// radii just above each distance from it matter: those are the smallest
// radii realizing each member set, hence the hardest to cover.
DoublingEstimate estimate_geometric_doubling(const QuasiMetricSpace& space);

struct GeneratorParams {
  std::size_t n = 16;
  std::size_t dim = 2;
  double power = 1.0;
  std::size_t branching = 2;
  std::size_t depth = 3;
};

struct GeneratedSpace {
  std::string kind;
  QuasiMetricSpace space;
  std::map<std::string, PointMeasure> measures;
};

// kind: integer_segment_counting | euclidean_random_points | snowflake_power |
// ultrametric_tree
GeneratedSpace generate_space(std::string_view kind, const GeneratorParams& params,
                              std::uint64_t seed);

}  // namespace dyadica
