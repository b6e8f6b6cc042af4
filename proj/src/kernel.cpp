#include "dyadica/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dyadica/error.hpp"

namespace dyadica {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string triple(PointId a, PointId b, PointId c) {
  std::ostringstream os;
  os << "(" << a << ", " << b << ", " << c << ")";
  return os.str();
}

}  // namespace

Kernel::Kernel(std::size_t n, std::vector<double> offdiag, Vec diag, std::string label)
    : n_(n), off_(std::move(offdiag)), diag_(std::move(diag)), label_(std::move(label)) {
  if (off_.size() != n * n || diag_.size() != n) raise(Errc::BadParams, "kernel table has wrong shape");
  for (std::size_t x = 0; x < n; ++x) {
    if (std::isnan(diag_[x]) || diag_[x] < 0.0) raise(Errc::BadParams, "negative diagonal at " + std::to_string(x));
    for (std::size_t y = 0; y < n; ++y) {
      if (x == y) {
        off_[x * n + y] = 0.0;
        continue;
      }
      const double v = off_[x * n + y];
      if (!std::isfinite(v) || v < 0.0)
        raise(Errc::BadParams, "off-diagonal entry (" + std::to_string(x) + ", " + std::to_string(y) +
                                   ") must be finite and nonnegative");
    }
  }
}

bool Kernel::is_symmetric() const {
  for (std::size_t x = 0; x < n_; ++x)
    for (std::size_t y = x + 1; y < n_; ++y)
      if (off_[x * n_ + y] != off_[y * n_ + x]) return false;
  return true;
}

Kernel kernel_matrix(const std::vector<std::vector<double>>& offdiag, const Vec& diag) {
  const std::size_t n = diag.size();
  if (offdiag.size() != n) raise(Errc::BadParams, "kernel table has wrong shape");
  std::vector<double> off(n * n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    if (offdiag[x].size() != n) raise(Errc::BadParams, "kernel row " + std::to_string(x) + " has wrong length");
    for (std::size_t y = 0; y < n; ++y) off[x * n + y] = x == y ? 0.0 : offdiag[x][y];
  }
  return Kernel(n, std::move(off), diag, "matrix");
}

Kernel kernel_constant(std::size_t n, double value) {
  return Kernel(n, std::vector<double>(n * n, value), Vec(n, value), "constant");
}

Kernel kernel_frac_rho(const QuasiMetricSpace& space, double alpha, double n, std::optional<double> diag_override) {
  if (!(alpha > 0.0 && alpha < n)) raise(Errc::BadExponents, "need 0 < alpha < n");
  const std::size_t N = space.size();
  std::vector<double> off(N * N, 0.0);
  for (PointId x = 0; x < N; ++x)
    for (PointId y = 0; y < N; ++y)
      if (x != y) off[x * N + y] = std::pow(space.dist(x, y), alpha - n);
  return Kernel(N, std::move(off), Vec(N, diag_override.value_or(kInf)), "frac_rho");
}

Kernel kernel_ball_volume(const QuasiMetricSpace& space, const PointMeasure& mu, double gamma, BallConvention ball) {
  if (!(gamma > 0.0 && gamma < 1.0)) raise(Errc::BadExponents, "need 0 < gamma < 1");
  const std::size_t N = space.size();
  if (mu.size() != N) raise(Errc::BadParams, "measure size does not match the space");
  std::vector<double> off(N * N, 0.0);
  for (PointId x = 0; x < N; ++x) {
    // Masses of balls around x accumulate along the distance order.
    const auto& ord = space.by_distance(x);
    std::size_t i = 0;
    double below = 0.0;  // mass of {z : d(z,x) < current distance}
    while (i < ord.size()) {
      const double d = space.dist(x, ord[i]);
      std::size_t j = i;
      double level = 0.0;
      while (j < ord.size() && space.dist(x, ord[j]) == d) level += mu[ord[j++]];
      const double mass = ball == BallConvention::Strict ? below : below + level;
      for (std::size_t t = i; t < j; ++t) {
        const PointId y = ord[t];
        if (y == x) continue;
        if (!(mass > 0.0))
          raise(Errc::EmptyBallMass, "ball around " + std::to_string(x) + " of radius d(" + std::to_string(x) + ", " +
                                         std::to_string(y) + ") has no mass");
        off[x * N + y] = std::pow(mass, gamma - 1.0);
      }
      below += level;
      i = j;
    }
  }
  Vec diag(N);
  for (PointId x = 0; x < N; ++x) diag[x] = mu[x] > 0.0 ? std::pow(mu[x], gamma - 1.0) : kInf;
  return Kernel(N, std::move(off), std::move(diag),
                ball == BallConvention::Strict ? "ball_volume_strict" : "ball_volume_closed");
}

Kernel kernel_ball_volume_closed(const QuasiMetricSpace& space, const PointMeasure& mu, double gamma) {
  return kernel_ball_volume(space, mu, gamma, BallConvention::Closed);
}

Kernel kernel_shifted_distance(const QuasiMetricSpace& space, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) raise(Errc::BadExponents, "need 0 < gamma < 1");
  const std::size_t N = space.size();
  std::vector<double> off(N * N, 0.0);
  for (PointId x = 0; x < N; ++x)
    for (PointId y = 0; y < N; ++y)
      if (x != y) off[x * N + y] = std::pow(1.0 + space.dist(x, y), gamma - 1.0);
  return Kernel(N, std::move(off), Vec(N, 1.0), "shifted_distance");
}

MonotonicityCertificate verify_monotonicity(const QuasiMetricSpace& space, const Kernel& K, double k2) {
  if (!(k2 > 1.0)) raise(Errc::BadParams, "k2 must exceed 1");
  const std::size_t N = space.size();
  MonotonicityCertificate cert;
  cert.k2 = k2;
  auto ratio = [](double num, double den) {
    if (num == 0.0) return 0.0;
    if (den == kInf) return 0.0;
    if (den == 0.0) return kInf;
    return num / den;
  };
  for (PointId x = 0; x < N; ++x)
    for (PointId y = 0; y < N; ++y) {
      if (x == y) continue;
      const double kxy = K(x, y);
      const double reach = k2 * space.dist(x, y);
      for (PointId z = 0; z < N; ++z) {
        if (space.dist(z, y) <= reach) {
          const double r = ratio(kxy, K(z, y));
          if (r == kInf) raise(Errc::Unbounded, "first variable at " + triple(x, z, y));
          if (r > cert.k1_first) {
            cert.k1_first = r;
            cert.witness_first = {x, z, y};
          }
        }
        if (space.dist(x, z) <= reach) {
          const double r = ratio(kxy, K(x, z));
          if (r == kInf) raise(Errc::Unbounded, "second variable at " + triple(x, y, z));
          if (r > cert.k1_second) {
            cert.k1_second = r;
            cert.witness_second = {x, y, z};
          }
        }
      }
    }
  cert.k1 = std::max(cert.k1_first, cert.k1_second);
  return cert;
}

double separation_parameter(double a0, double delta) { return delta * delta / (5.0 * a0 * a0); }
double estimate_k2(double a0, double delta) { return 20.0 * std::pow(a0, 4) / (delta * delta); }

PhiTable compute_phi(const DyadicSystem& system, const Kernel& K) {
  const QuasiMetricSpace& X = system.space();
  PhiTable phi;
  phi.c = separation_parameter(X.a0(), system.delta());
  phi.k_min = system.k_min();
  for (const auto& g : system.generations()) {
    const double threshold = phi.c * system.ball_radius(g.k);
    Vec vals(g.cubes.size(), 0.0);
    std::vector<char> pairs(g.cubes.size(), 0);
    std::vector<std::pair<PointId, PointId>> arg(g.cubes.size(), {0, 0});
    for (std::size_t a = 0; a < g.cubes.size(); ++a) {
      const auto& B = g.cubes[a].ball_members;
      for (PointId x : B)
        for (PointId y : B) {
          if (x == y || !(X.dist(x, y) >= threshold)) continue;
          if (!pairs[a] || K(x, y) > vals[a]) {
            vals[a] = K(x, y);
            arg[a] = {x, y};
          }
          pairs[a] = 1;
        }
    }
    phi.values.push_back(std::move(vals));
    phi.has_pairs.push_back(std::move(pairs));
    phi.argmax.push_back(std::move(arg));
  }
  return phi;
}

KernelEstimateReport verify_kernel_estimates(const DyadicSystem& system, const Kernel& K, const PhiTable& phi) {
  const QuasiMetricSpace& X = system.space();
  KernelEstimateReport rep;
  bool any_pairs = false;

  for (const auto& g : system.generations())
    for (const auto& q : g.cubes) {
      const double f = phi.at(q.id);
      if (!std::isfinite(f)) raise(Errc::EstimateViolated, "phi infinite on cube " + to_string(q.id));
      any_pairs = any_pairs || phi.separated(q.id);
      if (!(f > 0.0)) continue;
      for (PointId x : q.ball_members)
        for (PointId y : q.ball_members) {
          const double k = K(x, y);
          if (k == kInf) continue;
          if (!(k > 0.0))
            raise(Errc::EstimateViolated, "phi of " + to_string(q.id) + " positive but K(" + std::to_string(x) + ", " +
                                              std::to_string(y) + ") = 0");
          if (f / k > rep.observed_i) {
            rep.observed_i = f / k;
            rep.witness_i = "cube " + to_string(q.id) + " pair (" + std::to_string(x) + ", " + std::to_string(y) + ")";
          }
        }
    }

  // Nested comparison: every cube against all of its descendants (itself
  // included) with a nonempty separated set.
  for (const auto& g : system.generations())
    for (const auto& q : g.cubes) {
      const double f = phi.at(q.id);
      std::vector<CubeId> stack{q.id};
      while (!stack.empty()) {
        const CubeId p = stack.back();
        stack.pop_back();
        const auto& pc = system.cube(p);
        for (std::size_t ch : pc.children) stack.push_back({p.k + 1, ch});
        if (!phi.separated(p)) continue;
        const double fp = phi.at(p);
        if (!(f > 0.0)) continue;
        if (!(fp > 0.0))
          raise(Errc::EstimateViolated, "phi of " + to_string(p) + " vanishes below " + to_string(q.id));
        if (f / fp > rep.observed_ii) {
          rep.observed_ii = f / fp;
          rep.witness_ii = "cube " + to_string(q.id) + " over " + to_string(p);
        }
      }
    }

  for (const auto& g : system.generations()) {
    if (g.k == system.k_max()) break;
    for (const auto& q : g.cubes) {
      if (phi.separated(q.id)) continue;
      ++rep.cubes_checked_iii;
      for (std::size_t ch : q.children)
        if (system.cube({g.k + 1, ch}).members != q.members)
          raise(Errc::EstimateViolated, "cube " + to_string(q.id) + " has no separated pair but splits");
    }
  }

  rep.vacuous = !any_pairs;
  rep.C_K = std::max({1.0, rep.observed_i, rep.observed_ii});
  try {
    rep.monotonicity = verify_monotonicity(X, K, estimate_k2(X.a0(), system.delta()));
  } catch (const Error& e) {
    raise(Errc::EstimateViolated, std::string("monotonicity fails: ") + e.what());
  }
  const double k1 = rep.monotonicity.k1;
  if (!(rep.C_K <= k1 * k1))
    raise(Errc::EstimateViolated, "C_K = " + std::to_string(rep.C_K) + " exceeds k1^2 = " + std::to_string(k1 * k1));
  return rep;
}

}  // namespace dyadica
