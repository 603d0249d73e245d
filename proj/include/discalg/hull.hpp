#pragma once

// Polynomial-convexity probe for the graph of f over the closed disc.
//
// For p = (z0, w0) off the graph, eps_p^2 = psi_1(p). With r = 1 - delta(eps_p/3)
// taken from the dilation modulus, the plurisubharmonic function psi_r
// separates p from the graph:
//   psi_r(p) > 4 eps_p^2 / 9   and   psi_r < eps_p^2 / 9 on the graph,
// so p is outside the psh hull of the graph, which equals its polynomial hull.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <vector>

#include "grid.hpp"
#include "hypotheses.hpp"
#include "levi.hpp"

namespace discalg {

enum class Verdict { excluded, on_graph, inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
  case Verdict::excluded: return "excluded";
  case Verdict::on_graph: return "on-graph";
  case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

inline constexpr double graph_tolerance = 1e-10;

struct HullProbeResult {
  cplx z0{}, w0{};
  double psi1 = 0.0;
  double eps = 0.0;
  double r = 0.0;
  double lhs = 0.0;     // psi_r(p)
  double rhs_sup = 0.0; // max of psi_r over the sampled graph
  Verdict verdict = Verdict::inconclusive;
  bool outside_box = false;     // |z0| > 1 or |w0| > M + 2 delta0: excluded without separation
  bool modulus_failed = false;  // no tabulated delta certifies eps/3
  bool psh_failed = false;      // downgraded because psi_r failed certification
};

namespace detail {

inline double graph_deviation_sq(const DiscFunction& d, const DiscGrid& g, double r) {
  double m = 0.0;
  for (const cplx& z : g.points) m = std::max(m, std::norm(d.f_p(z) - d.f_p(r * z)));
  return m;
}

inline HullProbeResult probe_impl(const DiscFunction& d, const ContinuityModulus& mod, cplx z0, cplx w0,
                                  const std::function<double(double)>& rhs_for_r) {
  HullProbeResult res;
  res.z0 = z0;
  res.w0 = w0;
  if (std::abs(z0) > 1.0 || std::abs(w0) > d.rho()) {
    res.outside_box = true;
    res.verdict = Verdict::excluded;
    return res;
  }
  res.psi1 = std::norm(w0 - d.f_p(z0));
  res.eps = std::sqrt(res.psi1);
  if (res.psi1 <= graph_tolerance) {
    res.verdict = Verdict::on_graph;
    return res;
  }
  const auto delta = mod.delta_for(res.eps / 3.0);
  if (!delta) {
    res.modulus_failed = true;
    res.verdict = Verdict::inconclusive;
    return res;
  }
  res.r = 1.0 - *delta;
  res.lhs = std::norm(w0 - d.f_p(res.r * z0));
  res.rhs_sup = rhs_for_r(res.r);
  const double tol = 1e-12 * (1.0 + res.psi1);
  const bool separated = res.lhs > 4.0 * res.psi1 / 9.0 - tol && res.rhs_sup < res.psi1 / 9.0 + tol;
  res.verdict = separated ? Verdict::excluded : Verdict::inconclusive;
  return res;
}

} // namespace detail

inline HullProbeResult probe(const DiscFunction& d, const ContinuityModulus& mod, cplx z0, cplx w0,
                             const DiscGrid& g) {
  return detail::probe_impl(d, mod, z0, w0, [&](double r) { return detail::graph_deviation_sq(d, g, r); });
}

struct HullQuery {
  cplx z0, w0;
};

struct LatticeParams {
  int z_side = 16;   // z0 on the cell centres of a z_side x z_side square over [-1,1]^2, kept if |z0| <= 1
  int w_radii = 8;   // w0 on w_radii circles out to M + 2 delta0 ...
  int w_angles = 16; // ... with w_angles points each
  double tube = 0.05;
};

/// Default query set: a lattice over the closed disc times D(0; M + 2 delta0)
/// with a tube |w0 - f(z0)| < tube around the graph removed.
inline std::vector<HullQuery> default_lattice(const DiscFunction& d, const LatticeParams& lp = {}) {
  std::vector<HullQuery> q;
  const double rho = d.rho();
  for (int a = 0; a < lp.z_side; ++a) {
    for (int b = 0; b < lp.z_side; ++b) {
      const cplx z0{-1.0 + (2.0 * a + 1.0) / lp.z_side, -1.0 + (2.0 * b + 1.0) / lp.z_side};
      if (std::abs(z0) > 1.0) continue;
      const cplx fz = d.f_p(z0);
      for (int j = 1; j <= lp.w_radii; ++j) {
        for (int k = 0; k < lp.w_angles; ++k) {
          const cplx w0 = std::polar(rho * j / lp.w_radii, 2.0 * std::numbers::pi * k / lp.w_angles);
          if (std::abs(w0 - fz) < lp.tube) continue;
          q.push_back({z0, w0});
        }
      }
    }
  }
  return q;
}

struct SweepOptions {
  // Certify psi_r at every distinct r(p) used and downgrade exclusions whose
  // psi_r fails; empty means the separation inequalities alone decide.
  std::optional<LeviGridParams> certify;
};

struct SweepSummary {
  std::size_t queries = 0;
  std::size_t excluded = 0;
  std::size_t on_graph = 0;
  std::size_t inconclusive = 0;
  std::size_t outside_box = 0;
  std::size_t modulus_failed = 0;
  std::size_t psh_failed = 0;
  std::vector<double> radii;                 // distinct r(p), ascending
  std::vector<LeviReport> certificates;      // one per radius when certification is on

  /// Off-graph queries whose modulus lookup succeeded.
  std::size_t decidable() const { return queries - on_graph - modulus_failed; }
  double excluded_fraction() const {
    const std::size_t n = decidable();
    return n ? static_cast<double>(excluded) / n : 1.0;
  }
};

inline SweepSummary sweep(const DiscFunction& d, const ContinuityModulus& mod, const std::vector<HullQuery>& queries,
                          const DiscGrid& g, const SweepOptions& opts = {}) {
  SweepSummary s;
  std::map<double, double> rhs_cache;
  auto rhs = [&](double r) {
    auto it = rhs_cache.find(r);
    if (it == rhs_cache.end()) it = rhs_cache.emplace(r, detail::graph_deviation_sq(d, g, r)).first;
    return it->second;
  };
  std::vector<HullProbeResult> results;
  results.reserve(queries.size());
  for (const HullQuery& q : queries) results.push_back(detail::probe_impl(d, mod, q.z0, q.w0, rhs));

  for (const auto& res : results)
    if (res.r > 0.0) s.radii.push_back(res.r);
  std::sort(s.radii.begin(), s.radii.end());
  s.radii.erase(std::unique(s.radii.begin(), s.radii.end()), s.radii.end());

  std::map<double, bool> psh_ok;
  if (opts.certify) {
    for (double r : s.radii) {
      s.certificates.push_back(certify_psh(PsiFunction(d, r), *opts.certify));
      psh_ok[r] = s.certificates.back().pass;
    }
  }

  s.queries = results.size();
  for (auto& res : results) {
    if (opts.certify && res.verdict == Verdict::excluded && !res.outside_box && !psh_ok[res.r]) {
      res.verdict = Verdict::inconclusive;
      res.psh_failed = true;
    }
    switch (res.verdict) {
    case Verdict::excluded: ++s.excluded; break;
    case Verdict::on_graph: ++s.on_graph; break;
    case Verdict::inconclusive: ++s.inconclusive; break;
    }
    s.outside_box += res.outside_box;
    s.modulus_failed += res.modulus_failed;
    s.psh_failed += res.psh_failed;
  }
  return s;
}

} // namespace discalg
