#pragma once

// Finite-degree truncations of the uniform algebra generated by z and f:
// sup-norm fits of targets by polynomials in (z, f) on a disc grid.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "grid.hpp"
#include "hypotheses.hpp"

namespace discalg {

/// Monomials z^a f^b with a + b <= degree, ordered by total degree, then by
/// increasing power of f. Lower-degree bases are column prefixes.
struct GeneratorBasis {
  int degree = 0;
  std::vector<std::pair<int, int>> monomials; // (a, b)
  Eigen::MatrixXcd matrix;                    // columns scaled to unit max modulus
  Eigen::VectorXd scale;                      // matrix.col(c) = raw column c / scale(c)
  Eigen::VectorXd weights;                    // area quadrature weight of each row, summing to 1

  static std::size_t columns_for(int degree) { return static_cast<std::size_t>(degree + 1) * (degree + 2) / 2; }
};

inline GeneratorBasis build_basis(const DiscFunction& d, int degree, const DiscGrid& g) {
  if (degree < 0) throw std::invalid_argument("degree must be >= 0");
  GeneratorBasis b;
  b.degree = degree;
  for (int t = 0; t <= degree; ++t)
    for (int fb = 0; fb <= t; ++fb) b.monomials.emplace_back(t - fb, fb);

  const auto n = static_cast<Eigen::Index>(g.size());
  const auto k = static_cast<Eigen::Index>(b.monomials.size());
  Eigen::MatrixXcd zp(n, degree + 1), fp(n, degree + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const cplx z = g.points[static_cast<std::size_t>(i)];
    const cplx f = d.f_p(z);
    zp(i, 0) = fp(i, 0) = 1.0;
    for (int p = 1; p <= degree; ++p) {
      zp(i, p) = zp(i, p - 1) * z;
      fp(i, p) = fp(i, p - 1) * f;
    }
  }
  const std::vector<double> w = quadrature_weights(g);
  b.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), n);
  b.matrix.resize(n, k);
  b.scale.resize(k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const auto [a, fb] = b.monomials[static_cast<std::size_t>(c)];
    b.matrix.col(c) = zp.col(a).cwiseProduct(fp.col(fb));
    const double s = b.matrix.col(c).cwiseAbs().maxCoeff();
    b.scale(c) = s > 0.0 ? s : 1.0;
    b.matrix.col(c) /= b.scale(c);
  }
  return b;
}

enum class FitMethod { least_squares, lawson };

inline const char* to_string(FitMethod m) { return m == FitMethod::lawson ? "lawson" : "least-squares"; }

inline FitMethod parse_method(std::string_view s) {
  if (s == "lawson") return FitMethod::lawson;
  if (s == "least-squares" || s == "ls") return FitMethod::least_squares;
  throw std::invalid_argument("unknown fit method '" + std::string(s) + "'");
}

struct FitEntry {
  int degree = 0;
  Eigen::VectorXcd coefficients; // in the unscaled monomial basis
  double sup_error = 0.0;
  double ls_error = 0.0; // area-weighted root mean square residual
  Eigen::Index rank = 0;
  std::vector<int> dependent_columns;
  int iterations = 0;
};

struct LawsonOptions {
  int max_iterations = 30;
  double weight_tolerance = 1e-10;
};

inline constexpr double rank_threshold = 1e-10;

namespace detail {

struct Solve {
  Eigen::VectorXcd coef;
  Eigen::Index rank;
  std::vector<int> dependent;
};

inline Solve least_squares(const Eigen::MatrixXcd& a, const Eigen::VectorXcd& y) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr;
  qr.setThreshold(rank_threshold);
  qr.compute(a);
  // Basic solution on the first rank() pivots. QR::solve uses its own pivot
  // count, which ignores the threshold set above.
  const Eigen::Index rank = qr.rank();
  Eigen::VectorXcd qty = y;
  qty.applyOnTheLeft(qr.householderQ().adjoint());
  Eigen::VectorXcd head = qr.matrixR().topLeftCorner(rank, rank).template triangularView<Eigen::Upper>().solve(
      qty.head(rank));
  Solve s{Eigen::VectorXcd::Zero(a.cols()), rank, {}};
  const auto& perm = qr.colsPermutation().indices();
  for (Eigen::Index c = 0; c < rank; ++c) s.coef(perm(c)) = head(c);
  for (Eigen::Index c = s.rank; c < a.cols(); ++c) s.dependent.push_back(perm(c));
  std::sort(s.dependent.begin(), s.dependent.end());
  return s;
}

} // namespace detail

/// Fit the target samples with the first columns_for(degree) basis columns.
/// Least squares is weighted by area so that refining the grid converges to
/// the L2 fit on the disc; Lawson starts from the same weights.
inline FitEntry fit(const GeneratorBasis& basis, int degree, const Eigen::VectorXcd& target, FitMethod method,
                    const LawsonOptions& opts = {}) {
  if (degree < 0 || degree > basis.degree) throw std::invalid_argument("degree exceeds the basis");
  const auto k = static_cast<Eigen::Index>(GeneratorBasis::columns_for(degree));
  const Eigen::Index n = basis.matrix.rows();
  if (n < 2 * k) throw std::invalid_argument("grid has fewer than twice as many points as basis columns");
  if (target.size() != n) throw std::invalid_argument("target sample count does not match the grid");
  const auto a = basis.matrix.leftCols(k);

  auto weighted_solve = [&](const Eigen::VectorXd& w) {
    const Eigen::VectorXcd sw = w.cwiseSqrt().cast<cplx>();
    return detail::least_squares(sw.asDiagonal() * a, sw.cwiseProduct(target));
  };
  detail::Solve best = weighted_solve(basis.weights);
  Eigen::VectorXd res = (a * best.coef - target).cwiseAbs();
  double best_sup = res.maxCoeff();
  int iterations = 0;

  if (method == FitMethod::lawson) {
    Eigen::VectorXd w = basis.weights;
    for (int it = 1; it <= opts.max_iterations; ++it) {
      Eigen::VectorXd next = w.cwiseProduct(res);
      const double total = next.sum();
      if (!(total > 0.0)) break; // exact fit
      next /= total;
      const double change = (next - w).cwiseAbs().maxCoeff();
      w = next;
      iterations = it;
      detail::Solve s = weighted_solve(w);
      res = (a * s.coef - target).cwiseAbs();
      const double sup = res.maxCoeff();
      if (sup < best_sup) {
        best_sup = sup;
        best = std::move(s);
      }
      if (change < opts.weight_tolerance) break;
    }
  }

  FitEntry e;
  e.degree = degree;
  e.rank = best.rank;
  e.dependent_columns = best.dependent;
  e.iterations = iterations;
  const Eigen::VectorXd final_res = (a * best.coef - target).cwiseAbs();
  e.sup_error = final_res.maxCoeff();
  e.ls_error = std::sqrt(final_res.cwiseAbs2().dot(basis.weights));
  e.coefficients = best.coef.cwiseQuotient(basis.scale.head(k).cast<cplx>());
  return e;
}

inline Eigen::VectorXcd sample(const Expr& e, const DiscGrid& g) {
  const Program p(e);
  Eigen::VectorXcd v(static_cast<Eigen::Index>(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i) v(static_cast<Eigen::Index>(i)) = p(g.points[i]);
  return v;
}

inline FitEntry fit(const GeneratorBasis& basis, const Expr& target, const DiscGrid& g, FitMethod method) {
  return fit(basis, basis.degree, sample(target, g), method);
}

struct ApproxResult {
  std::string target;
  FitMethod method = FitMethod::least_squares;
  std::vector<FitEntry> curve; // degrees 0..d_max

  /// Least-squares residuals never grow on nested bases.
  bool ls_monotone(double slack = 1e-12) const {
    for (std::size_t k = 1; k < curve.size(); ++k)
      if (curve[k].ls_error > curve[k - 1].ls_error + slack) return false;
    return true;
  }
  bool sup_monotone(double slack = 1e-12) const {
    for (std::size_t k = 1; k < curve.size(); ++k)
      if (curve[k].sup_error > curve[k - 1].sup_error + slack) return false;
    return true;
  }
};

inline ApproxResult density_curve(const DiscFunction& d, const Expr& target, int d_max, const DiscGrid& g,
                                  FitMethod method) {
  if (d_max < 1) throw std::invalid_argument("maximum degree must be >= 1");
  const GeneratorBasis basis = build_basis(d, d_max, g);
  const Eigen::VectorXcd y = sample(target, g);
  ApproxResult out{to_string(target), method, {}};
  for (int deg = 0; deg <= d_max; ++deg) out.curve.push_back(fit(basis, deg, y, method));
  return out;
}

struct WermerDiagnostic {
  double fraction = 0.0; // area-weighted share of samples with |d f/d zbar| > tau
  double tau = default_tau;
};

inline WermerDiagnostic wermer_set(const DiscFunction& d, const DiscGrid& g, double tau = default_tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  return {detail::weighted_fraction(g, [&](std::size_t k) { return std::abs(d.dzbar_f_p(g.points[k])) > tau; }), tau};
}

} // namespace discalg
