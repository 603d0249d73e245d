#pragma once

// Numerical checks of the two hypotheses on a perturbed harmonic function
// f = h + R: the critical set of d f/d zbar is (nearly) null, and
// |Laplacian R| <= C |d f/d zbar|^2 / sup|f| on the open disc.

#include <cmath>
#include <limits>
#include <stdexcept>

#include "expr.hpp"
#include "grid.hpp"

namespace discalg {

/// The pair (h, R) with f = h + R, its symbolic derivatives and the constants
/// M = sup|f| (grid estimate) and delta0 = (1/C - 1) M.
struct DiscFunction {
  Expr h, R, f;
  Expr dz_f, dzbar_f, dzdzbar_f;
  Expr lap_R, lap_h;
  Program f_p, dz_f_p, dzbar_f_p, dzdzbar_f_p, lap_R_p, lap_h_p;
  double C = 0.5;
  SupNorm norm;
  double delta0 = 1.0;

  double M() const { return norm.value; }
  /// w-radius of the polydisc on which psi_r is plurisubharmonic.
  double rho() const { return M() + 2.0 * delta0; }
};

inline DiscFunction build(const Expr& h, const Expr& R, double C, const DiscGrid& g) {
  if (!(C > 0.0 && C < 1.0)) throw std::invalid_argument("constant C must lie in (0, 1)");
  const Expr f = h + R;
  const Expr dzbar_f = wirtinger_dzbar(f);
  const Expr dz_f = wirtinger_dz(f);
  const Expr dzdzbar_f = wirtinger_dz(dzbar_f);
  const Expr lap_R = laplacian(R);
  const Expr lap_h = laplacian(h);
  DiscFunction d{h, R, f, dz_f, dzbar_f, dzdzbar_f, lap_R, lap_h,
                 Program(f), Program(dz_f), Program(dzbar_f), Program(dzdzbar_f), Program(lap_R), Program(lap_h),
                 C, {}, 1.0};
  d.norm = sup_norm(d.f_p, g);
  d.delta0 = d.M() > 0.0 ? (1.0 / C - 1.0) * d.M() : 1.0;
  return d;
}

inline DiscFunction build(std::string_view h, std::string_view R, double C, const DiscGrid& g) {
  return build(parse(h), parse(R), C, g);
}

struct ConditionA {
  double near_critical_fraction = 0.0;
  double tau = 1e-8;
  double threshold = 0.01;
  bool pass = false;
};

struct ConditionB {
  double max_ratio = 0.0;
  double minimal_C = 0.0;
  double C = 0.0;
  cplx worst_point{};
  bool pass = false;
};

struct HypothesisReport {
  double harmonicity_residual = 0.0;
  double harmonicity_threshold = 1e-9;
  bool harmonic = false;
  ConditionA condition_a;
  ConditionB condition_b;
  int n_r = 0;
  int n_theta = 0;
  double spacing = 0.0;
  double M = 0.0;
  double delta0 = 0.0;

  bool pass() const { return harmonic && condition_a.pass && condition_b.pass; }
};

inline constexpr double default_tau = 1e-8;
inline constexpr double near_critical_threshold = 0.01;
inline constexpr double harmonicity_threshold = 1e-9;
inline constexpr double critical_guard = 1e-14;

namespace detail {

// Area weight of a polar sample, proportional to its radius.
template <class Pred>
double weighted_fraction(const DiscGrid& g, Pred&& pred) {
  double hit = 0.0, total = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    total += g.radii[k];
    if (pred(k)) hit += g.radii[k];
  }
  return total > 0.0 ? hit / total : 0.0;
}

} // namespace detail

/// Evidence for a null critical set, not a proof: the area-weighted share of
/// samples where |d f/d zbar| <= tau must stay under 1%.
inline ConditionA check_condition_a(const DiscFunction& d, const DiscGrid& g, double tau = default_tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  ConditionA a;
  a.tau = tau;
  a.near_critical_fraction =
      detail::weighted_fraction(g, [&](std::size_t k) { return std::abs(d.dzbar_f_p(g.points[k])) <= tau; });
  a.pass = a.near_critical_fraction <= a.threshold;
  return a;
}

/// Pointwise bound as stated with the constant C.
inline bool bound_with_C(double lap_R, double dzbar_f, double M, double C) {
  return lap_R <= C * dzbar_f * dzbar_f / M;
}

/// The same bound rewritten with delta0 in the denominator.
inline bool bound_with_delta0(double lap_R, double dzbar_f, double M, double delta0) {
  return lap_R <= dzbar_f * dzbar_f / (M + delta0);
}

/// Ratio |Laplacian R| M / |d f/d zbar|^2 at a point; +inf where the derivative
/// vanishes but the Laplacian does not.
inline double bound_ratio(double lap_R, double dzbar_f, double M) {
  if (lap_R == 0.0) return 0.0;
  if (dzbar_f <= critical_guard) return std::numeric_limits<double>::infinity();
  return lap_R * M / (dzbar_f * dzbar_f);
}

/// Interior points only; the bound is not required on the boundary circle.
inline ConditionB check_condition_b(const DiscFunction& d, const DiscGrid& g) {
  if (!(d.M() > 0.0)) throw std::invalid_argument("condition (b) needs sup|h+R| > 0");
  ConditionB b;
  b.C = d.C;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!g.is_interior(k)) continue;
    const cplx z = g.points[k];
    const double ratio = bound_ratio(std::abs(d.lap_R_p(z)), std::abs(d.dzbar_f_p(z)), d.M());
    if (ratio > b.max_ratio) {
      b.max_ratio = ratio;
      b.worst_point = z;
    }
  }
  b.minimal_C = b.max_ratio;
  b.pass = b.max_ratio <= d.C;
  return b;
}

/// max |Laplacian h| over interior points.
inline double check_harmonicity(const DiscFunction& d, const DiscGrid& g) {
  double m = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k)
    if (g.is_interior(k)) m = std::max(m, std::abs(d.lap_h_p(g.points[k])));
  return m;
}

inline HypothesisReport check_hypotheses(const DiscFunction& d, const DiscGrid& g, double tau = default_tau) {
  HypothesisReport rep;
  rep.harmonicity_residual = check_harmonicity(d, g);
  rep.harmonic = rep.harmonicity_residual <= rep.harmonicity_threshold;
  rep.condition_a = check_condition_a(d, g, tau);
  rep.condition_b = check_condition_b(d, g);
  rep.n_r = g.n_r;
  rep.n_theta = g.n_theta;
  rep.spacing = g.spacing();
  rep.M = d.M();
  rep.delta0 = d.delta0;
  return rep;
}

} // namespace discalg
