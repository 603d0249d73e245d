#pragma once

// Polar sampling of the closed unit disc, finite-difference Wirtinger
// estimates, sup norms and the dilation modulus of continuity.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "expr.hpp"

namespace discalg {

/// Polar grid {r_j e^{i theta_k}} with r_j = j/(n_r-1), theta_k = 2 pi k/n_theta,
/// plus the centre once. Point 0 is the centre; the last n_theta points form
/// the boundary ring r = 1.
struct DiscGrid {
  int n_r = 0;
  int n_theta = 0;
  double scale = 1.0; // radius of the sampled disc
  std::vector<cplx> points;
  std::vector<double> radii; // nominal radius of each point, in [0, scale]

  std::size_t size() const { return points.size(); }
  bool is_boundary(std::size_t k) const { return k + static_cast<std::size_t>(n_theta) >= points.size(); }
  bool is_interior(std::size_t k) const { return !is_boundary(k); }

  /// Largest distance between neighbouring samples: max of radial and boundary arc spacing.
  double spacing() const {
    return scale * std::max(1.0 / (n_r - 1), 2.0 * std::numbers::pi / n_theta);
  }
};

inline DiscGrid make_grid(int n_r, int n_theta, double scale = 1.0) {
  if (n_r < 2) throw std::invalid_argument("radial count must be >= 2, got " + std::to_string(n_r));
  if (n_theta < 8) throw std::invalid_argument("angular count must be >= 8, got " + std::to_string(n_theta));
  if (!(scale > 0.0)) throw std::invalid_argument("grid scale must be positive");
  DiscGrid g{n_r, n_theta, scale, {}, {}};
  const std::size_t count = static_cast<std::size_t>(n_r - 1) * n_theta + 1;
  g.points.reserve(count);
  g.radii.reserve(count);
  g.points.emplace_back(0.0, 0.0);
  g.radii.push_back(0.0);
  for (int j = 1; j < n_r; ++j) {
    const double r = j == n_r - 1 ? scale : scale * j / (n_r - 1);
    for (int k = 0; k < n_theta; ++k) {
      const double theta = 2.0 * std::numbers::pi * k / n_theta;
      g.points.push_back(std::polar(r, theta));
      g.radii.push_back(r);
    }
  }
  return g;
}

/// The nested refinement: twice the radial intervals and twice the angles.
inline DiscGrid refine(const DiscGrid& g) { return make_grid(2 * (g.n_r - 1) + 1, 2 * g.n_theta, g.scale); }

/// Trapezoid weights for r dr dtheta, normalised to sum 1. The centre gets the
/// area of its disc of radius dr/2.
inline std::vector<double> quadrature_weights(const DiscGrid& g) {
  const double dr = 1.0 / (g.n_r - 1), dtheta = 2.0 * std::numbers::pi / g.n_theta;
  std::vector<double> w(g.size());
  double total = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double r = g.radii[k] / g.scale;
    w[k] = k == 0 ? std::numbers::pi * dr * dr / 4.0 : r * dr * dtheta * (g.is_boundary(k) ? 0.5 : 1.0);
    total += w[k];
  }
  for (double& x : w) x /= total;
  return w;
}

struct SupNorm {
  double value = 0.0;
  double spacing = 0.0;
};

inline SupNorm sup_norm(const Program& p, const DiscGrid& g) {
  double m = 0.0;
  for (const cplx& z : g.points) m = std::max(m, std::abs(p(z)));
  return {m, g.spacing()};
}

inline SupNorm sup_norm(const Expr& e, const DiscGrid& g) { return sup_norm(Program(e), g); }

struct WirtingerEstimate {
  cplx dz;
  cplx dzbar;
};

inline constexpr double default_fd_step = 1e-5;

/// Central differences in x and y, combined into the Wirtinger pair.
inline WirtingerEstimate fd_wirtinger(const Program& p, cplx z, double step = default_fd_step) {
  if (!(step > 0.0) || std::abs(z) + step >= 1.0)
    throw std::domain_error("finite-difference stencil leaves the open unit disc");
  const cplx dx = (p(z + cplx{step, 0.0}) - p(z - cplx{step, 0.0})) / (2.0 * step);
  const cplx dy = (p(z + cplx{0.0, step}) - p(z - cplx{0.0, step})) / (2.0 * step);
  const cplx i{0.0, 1.0};
  return {(dx - i * dy) / 2.0, (dx + i * dy) / 2.0};
}

inline WirtingerEstimate fd_wirtinger(const Expr& e, cplx z, double step = default_fd_step) {
  return fd_wirtinger(Program(e), z, step);
}

struct ModulusEntry {
  double epsilon;
  double delta;
  bool certified; // false: no tabulated delta works, delta is the smallest one
};

/// delta(epsilon) restricted to the dilation family z -> (1-delta) z.
struct ContinuityModulus {
  static constexpr int levels = 20;
  double safety = 0.1;
  int n_r = 0;
  int n_theta = 0;
  std::vector<double> deltas;    // 2^-1 ... 2^-20
  std::vector<double> deviation; // max_z |f((1-delta) z) - f(z)| per delta
  std::vector<ModulusEntry> table;

  /// Largest tabulated delta whose deviation is below epsilon (1 - safety).
  std::optional<double> delta_for(double epsilon) const {
    for (std::size_t k = 0; k < deltas.size(); ++k)
      if (deviation[k] < epsilon * (1.0 - safety)) return deltas[k];
    return std::nullopt;
  }

  /// Grid maximum of |f((1-delta) z) - f(z)| for a tabulated delta.
  double deviation_at(double delta) const {
    for (std::size_t k = 0; k < deltas.size(); ++k)
      if (deltas[k] == delta) return deviation[k];
    throw std::out_of_range("delta is not tabulated");
  }
};

inline ContinuityModulus continuity_modulus(const Program& f, const DiscGrid& g, const std::vector<double>& epsilons) {
  ContinuityModulus m;
  m.n_r = g.n_r;
  m.n_theta = g.n_theta;
  std::vector<cplx> base(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) base[k] = f(g.points[k]);
  double delta = 1.0;
  for (int level = 1; level <= ContinuityModulus::levels; ++level) {
    delta *= 0.5;
    double dev = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k)
      dev = std::max(dev, std::abs(f((1.0 - delta) * g.points[k]) - base[k]));
    m.deltas.push_back(delta);
    m.deviation.push_back(dev);
  }
  for (double eps : epsilons) {
    if (!(eps > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (auto d = m.delta_for(eps))
      m.table.push_back({eps, *d, true});
    else
      m.table.push_back({eps, m.deltas.back(), false});
  }
  return m;
}

inline ContinuityModulus continuity_modulus(const Expr& f, const DiscGrid& g, const std::vector<double>& epsilons) {
  return continuity_modulus(Program(f), g, epsilons);
}

} // namespace discalg
