#pragma once

// Levi form of psi_r(z, w) = |w - f(rz)|^2 and plurisubharmonicity
// certificates on the polydisc D(0; 1/r) x D(0; M + 2 delta0).

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>

#include "grid.hpp"
#include "hypotheses.hpp"

namespace discalg {

/// psi_r for a fixed dilation r. r = 1 is accepted (the undilated function);
/// certification requires r < 1.
class PsiFunction {
public:
  PsiFunction(const DiscFunction& base, double r) : base_(&base), r_(r) {
    if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("dilation r must lie in (0, 1]");
  }

  const DiscFunction& base() const { return *base_; }
  double r() const { return r_; }
  double z_radius() const { return 1.0 / r_; }

  double operator()(cplx z, cplx w) const { return std::norm(w - base_->f_p(r_ * z)); }

private:
  const DiscFunction* base_;
  double r_;
};

struct Polydisc {
  double z_radius;
  double w_radius;
};

inline Polydisc polydisc(const PsiFunction& psi) { return {psi.z_radius(), psi.base().rho()}; }

/// Values of f and its Wirtinger derivatives at the dilated point rz.
struct Jet {
  cplx f, fz, fzbar, fzzbar;
};

inline Jet jet_at(const PsiFunction& psi, cplx z) {
  const double slack = 1.0 + 1e-12;
  if (std::abs(z) > psi.z_radius() * slack) throw std::domain_error("z lies outside the disc of radius 1/r");
  const DiscFunction& d = psi.base();
  const cplx u = psi.r() * z;
  return {d.f_p(u), d.dz_f_p(u), d.dzbar_f_p(u), d.dzdzbar_f_p(u)};
}

/// Hermitian 2x2 Levi matrix [[zz, zw], [conj(zw), 1]].
struct LeviMatrix {
  double zz;
  cplx zw;
  double ww = 1.0;

  double form(cplx v1, cplx v2) const {
    return zz * std::norm(v1) + 2.0 * (zw * v1 * std::conj(v2)).real() + ww * std::norm(v2);
  }

  double min_eigenvalue() const {
    const double mean = 0.5 * (zz + ww);
    const double half = 0.5 * (zz - ww);
    return mean - std::hypot(half, std::abs(zw));
  }
};

// With the dilation chain rule:
//   psi_{z zbar} = 2 Re(r^2 f_{z zbar} conj(f - w)) + r^2 |f_z|^2 + r^2 |f_zbar|^2
//   psi_{z wbar} = -r f_z,   psi_{w wbar} = 1
inline LeviMatrix levi_matrix(const Jet& j, double r, cplx w) {
  const double r2 = r * r;
  const double zz = 2.0 * r2 * (j.fzzbar * std::conj(j.f - w)).real() + r2 * std::norm(j.fz) + r2 * std::norm(j.fzbar);
  return {zz, -r * j.fz, 1.0};
}

inline LeviMatrix levi_matrix(const PsiFunction& psi, cplx z, cplx w) { return levi_matrix(jet_at(psi, z), psi.r(), w); }

inline double levi_form(const PsiFunction& psi, cplx z, cplx w, cplx v1, cplx v2) {
  return levi_matrix(psi, z, w).form(v1, v2);
}

/// Lower bound (2 Re(conj(f - w) f_{z zbar}) + |f_zbar|^2) |V1|^2, applied to f(r .).
inline double lemma_lower_bound(const Jet& j, double r, cplx w, cplx v1) {
  const double r2 = r * r;
  return (2.0 * r2 * (std::conj(j.f - w) * j.fzzbar).real() + r2 * std::norm(j.fzbar)) * std::norm(v1);
}

/// The square |r f_z V1 - V2|^2 left over after the lower bound.
inline double completed_square(const Jet& j, double r, cplx v1, cplx v2) { return std::norm(r * j.fz * v1 - v2); }

struct LemmaCheck {
  bool pass = true;
  int samples = 0;
  double min_gap = std::numeric_limits<double>::infinity();
  double max_identity_error = 0.0; // relative
  explicit operator bool() const { return pass; }
};

inline constexpr double lemma_tolerance = 1e-9;

/// Random (z, w, V) over the polydisc and the unit bidisc: the Levi form
/// dominates the lower bound and the gap is exactly the completed square.
template <class Rng>
LemmaCheck verify_lemma_bound(const PsiFunction& psi, int samples, Rng& rng) {
  if (samples < 1) throw std::invalid_argument("samples must be >= 1");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto in_disc = [&](double radius) {
    return std::polar(radius * std::sqrt(unit(rng)), 2.0 * std::numbers::pi * unit(rng));
  };
  const Polydisc box = polydisc(psi);
  LemmaCheck out;
  out.samples = samples;
  for (int s = 0; s < samples; ++s) {
    const cplx z = in_disc(box.z_radius);
    const cplx w = in_disc(box.w_radius);
    const cplx v1 = in_disc(1.0);
    const cplx v2 = in_disc(1.0);
    const Jet j = jet_at(psi, z);
    const LeviMatrix L = levi_matrix(j, psi.r(), w);
    const double lhs = L.form(v1, v2);
    const double rhs = lemma_lower_bound(j, psi.r(), w, v1);
    const double gap = lhs - rhs;
    const double square = completed_square(j, psi.r(), v1, v2);
    const double scale = 1.0 + std::abs(L.zz) * std::norm(v1) + 2.0 * std::abs(L.zw) * std::abs(v1) * std::abs(v2) +
                         std::norm(v2);
    const double err = std::abs(gap - square) / scale;
    out.min_gap = std::min(out.min_gap, gap);
    out.max_identity_error = std::max(out.max_identity_error, err);
    if (gap < -lemma_tolerance || err > lemma_tolerance) out.pass = false;
  }
  return out;
}

struct LeviGridParams {
  int z_n_r = 32;
  int z_n_theta = 128;
  int w_radii = 8;
  int w_angles = 32;
};

struct LeviReport {
  double r = 0.0;
  Polydisc box{};
  LeviGridParams grid;
  std::size_t points = 0;
  double min_eigenvalue = std::numeric_limits<double>::infinity();
  cplx argmin_z{}, argmin_w{};
  double tolerance = lemma_tolerance;
  bool pass = false;
  // share of grid points where |f_zbar|^2 >= 2 |f - w| |f_{z zbar}|
  double sufficient_fraction = 0.0;
  std::optional<ConditionB> condition_b;
};

/// Smallest Levi eigenvalue over a z-grid on D(0; 1/r) times concentric
/// w-circles out to rho; passes iff it is >= -tolerance.
inline LeviReport certify_psh(const PsiFunction& psi, const LeviGridParams& params = {},
                              std::optional<ConditionB> condition_b = std::nullopt) {
  if (!(psi.r() < 1.0)) throw std::invalid_argument("certification needs r < 1");
  LeviReport rep;
  rep.r = psi.r();
  rep.box = polydisc(psi);
  rep.grid = params;
  rep.condition_b = condition_b;
  const DiscGrid zg = make_grid(params.z_n_r, params.z_n_theta, rep.box.z_radius);
  const DiscGrid wg = make_grid(params.w_radii + 1, params.w_angles, rep.box.w_radius);
  std::size_t sufficient = 0;
  for (const cplx& z : zg.points) {
    const Jet j = jet_at(psi, z);
    for (const cplx& w : wg.points) {
      const double lam = levi_matrix(j, psi.r(), w).min_eigenvalue();
      if (lam < rep.min_eigenvalue) {
        rep.min_eigenvalue = lam;
        rep.argmin_z = z;
        rep.argmin_w = w;
      }
      if (std::norm(j.fzbar) >= 2.0 * std::abs(j.f - w) * std::abs(j.fzzbar)) ++sufficient;
      ++rep.points;
    }
  }
  rep.sufficient_fraction = rep.points ? static_cast<double>(sufficient) / rep.points : 0.0;
  rep.pass = rep.min_eigenvalue >= -rep.tolerance;
  return rep;
}

} // namespace discalg
