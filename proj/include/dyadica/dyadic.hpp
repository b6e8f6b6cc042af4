#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dyadica/space.hpp"

namespace dyadica {

struct DyadicParams {
  double delta = 1.0 / 96.0;
  PointId x0 = 0;
  std::optional<int> k_min;  // default: largest k with c1 delta^k > diam X
  std::optional<int> k_max;  // default: smallest k with C1 delta^k < min distance
  bool strict_mode = true;   // requires 96 a0^6 delta <= 1
};

// Inner and outer ball constants of a system, as functions of a0.
double inner_ball_constant(double a0);  // 1 / (12 a0^4)
double outer_ball_constant(double a0);  // 4 a0^2

struct Window {
  int k_min = 0;
  int k_max = 0;
  int depth() const { return k_max - k_min + 1; }
};

Window default_window(const QuasiMetricSpace& space, double delta);

struct CubeId {
  int k = 0;
  std::size_t alpha = 0;
  friend auto operator<=>(const CubeId&, const CubeId&) = default;
};

std::string to_string(const CubeId& id);

struct DyadicCube {
  CubeId id;
  PointId center = 0;
  PointSet members;
  std::optional<std::size_t> parent;  // index in generation k - 1
  std::vector<std::size_t> children;  // indices in generation k + 1
  PointSet ball_members;              // containing ball B(Q) intersected with X
  double diameter = 0.0;
};

struct Generation {
  int k = 0;
  double scale = 1.0;  // delta^k
  std::vector<DyadicCube> cubes;
  std::vector<std::size_t> cube_of;  // point -> index of its cube
};

class DyadicSystem {
 public:
  const QuasiMetricSpace& space() const { return *space_; }
  const std::shared_ptr<const QuasiMetricSpace>& space_ptr() const { return space_; }
  const DyadicParams& params() const { return params_; }
  double delta() const { return params_.delta; }
  PointId x0() const { return params_.x0; }
  int k_min() const { return window_.k_min; }
  int k_max() const { return window_.k_max; }
  const Window& window() const { return window_; }
  bool strict() const { return params_.strict_mode; }
  double c1() const { return inner_ball_constant(space_->a0()); }
  double C1() const { return outer_ball_constant(space_->a0()); }
  double scale(int k) const;
  // Radius C1 delta^k of the containing ball of every generation-k cube.
  double ball_radius(int k) const { return C1() * scale(k); }
  std::uint64_t seed() const { return seed_; }
  std::size_t attempts() const { return attempts_; }

  bool in_window(int k) const { return k >= window_.k_min && k <= window_.k_max; }
  const Generation& generation(int k) const;
  const std::vector<Generation>& generations() const { return gens_; }
  const DyadicCube& cube(CubeId id) const;
  const DyadicCube& containing(int k, PointId x) const;
  std::size_t cube_count() const;
  // Top-down, index ascending within a generation.
  std::vector<CubeId> all_cubes() const;
  const DyadicCube& top() const { return gens_.front().cubes.front(); }

 private:
  friend DyadicSystem construct_system(std::shared_ptr<const QuasiMetricSpace>, const DyadicParams&,
                                       std::uint64_t, std::size_t);
  std::shared_ptr<const QuasiMetricSpace> space_;
  DyadicParams params_;
  Window window_;
  std::uint64_t seed_ = 0;
  std::size_t attempts_ = 1;
  std::vector<Generation> gens_;
};

struct Violation {
  std::string which;    // "2.1" .. "2.5"
  std::string witness;
};

// Checks nested partition, containment balls, ball monotonicity and the fixed
// center. Set identities only, no tolerance.
std::optional<Violation> verify_system(const DyadicSystem& system);

DyadicSystem build_system(std::shared_ptr<const QuasiMetricSpace> space, const DyadicParams& params,
                          std::uint64_t tie_break_seed);
DyadicSystem build_system(const QuasiMetricSpace& space, const DyadicParams& params,
                          std::uint64_t tie_break_seed);

// Separation clause: d(x,y) >= delta^k implies y is not in Q^{k+1}(x).
// Returns the first counterexample, if any.
std::optional<std::string> check_separation_clause(const DyadicSystem& system);

const DyadicCube& containing_cube(const DyadicSystem& system, int k, PointId x);
const DyadicCube& smallest_common_cube(const DyadicSystem& system, PointId x, PointId y);

struct CubeRef {
  const DyadicSystem* system = nullptr;
  CubeId id;
  friend bool operator==(const CubeRef&, const CubeRef&) = default;
};

// Maximal elements by index: Q is maximal if every collection member meeting
// it has generation >= that of Q (ties broken towards the first listed).
std::vector<CubeRef> maximal_cubes(const std::vector<CubeRef>& collection);

const DyadicCube& find_cube_with_positive_masses(const DyadicSystem& system, const PointMeasure& sigma,
                                                 const PointMeasure& omega, const PointSet& A);

struct CoverageEntry {
  PointId center = 0;
  double radius = 0.0;
  int k = 0;                          // level band: delta^{k+2} < r <= delta^{k+1}
  std::optional<std::size_t> system;  // witness system index
  std::size_t alpha = 0;              // witness cube index in generation k
  double ratio = 0.0;                 // diam(Q) / r
};

struct AdjacentFamily {
  std::vector<std::shared_ptr<const DyadicSystem>> systems;
  std::vector<CoverageEntry> certificate;
  double target_C = 0.0;
  double observed_C = 0.0;
  bool complete = false;
  std::size_t L() const { return systems.size(); }
};

double default_adjacency_constant(double a0, double delta);  // 8 a0^3 / delta^2

// Relevant radii inside a level band: the smallest radius realizing each
// distinct strict-ball member set with center x.
std::vector<double> band_radii(const QuasiMetricSpace& space, PointId x, double lo, double hi);

AdjacentFamily build_adjacent_family(std::shared_ptr<const QuasiMetricSpace> space, const DyadicParams& params,
                                     std::optional<double> target_C, std::size_t L_max, std::uint64_t seed);

// Replays every certificate entry against the stored systems.
std::optional<std::string> verify_certificate(const AdjacentFamily& family);

struct ChainLink {
  std::size_t system = 0;
  CubeId id;
  double radius = 0.0;  // radius of the ball this cube was chosen for
};

// Chain Q_1 in Q_2 in ... with c0^{i-1} B in Q_i in c0^i B, c0 = target_C of
// the family, ending at a cube equal to X.
std::vector<ChainLink> expanding_cube_chain(const AdjacentFamily& family, PointId center, double radius);

struct GeneralizedSystem {
  std::shared_ptr<const DyadicSystem> base;
  PointSet joint_atoms;         // atoms of both sigma and omega
  PointSet point_cubes;         // joint atoms whose singleton is not a standard cube
  std::vector<char> is_joint;   // point -> joint atom flag
};

GeneralizedSystem generalize(std::shared_ptr<const DyadicSystem> system, const PointMeasure& sigma,
                             const PointMeasure& omega);

}  // namespace dyadica
