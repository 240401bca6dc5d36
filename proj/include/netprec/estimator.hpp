#pragma once

#include <cmath>
#include <cstddef>
#include <exception>
#include <string>
#include <vector>

#include "netprec/errors.hpp"
#include "netprec/gaussian.hpp"
#include "netprec/linalg.hpp"
#include "netprec/matrix.hpp"
#include "netprec/parallel.hpp"
#include "netprec/structure.hpp"

namespace netprec {

// Mean-centered sample covariance with divisor n-1.
inline DenseMatrix sample_covariance(const DenseMatrix& x) {
  const std::size_t n = x.rows(), p = x.cols();
  if (n < 2) throw TooFewRows("sample covariance needs at least two rows");
  std::vector<double> mean(p, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double* row = x.row(k);
    for (std::size_t j = 0; j < p; ++j) mean[j] += row[j];
  }
  for (std::size_t j = 0; j < p; ++j) mean[j] /= static_cast<double>(n);

  DenseMatrix s(p, p);
  std::vector<double> centered(p);
  for (std::size_t k = 0; k < n; ++k) {
    const double* row = x.row(k);
    for (std::size_t j = 0; j < p; ++j) centered[j] = row[j] - mean[j];
    for (std::size_t a = 0; a < p; ++a) {
      const double ca = centered[a];
      double* srow = s.row(a);
      for (std::size_t b = a; b < p; ++b) srow[b] += ca * centered[b];
    }
  }
  const double inv = 1.0 / static_cast<double>(n - 1);
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = a; b < p; ++b) {
      s(a, b) *= inv;
      s(b, a) = s(a, b);
    }
  return s;
}

namespace detail {

// Coefficients on one column's support: the solution of S_i w = f_i, where
// f_i is the indicator of the column's own position. Solved through the
// Cholesky factor, never by forming the inverse.
inline std::vector<double> solve_support_system(const DenseMatrix& s_sub, std::size_t pivot,
                                                std::size_t column) {
  CholeskyFactor f;
  try {
    f = cholesky(s_sub);
  } catch (const NotPositiveDefinite& e) {
    throw SubmatrixNotPD(column, "support covariance of column " + std::to_string(column) +
                                     " is not positive definite (support size " +
                                     std::to_string(s_sub.rows()) +
                                     " may reach the sample size): " + e.what());
  }
  std::vector<double> rhs(s_sub.rows(), 0.0);
  rhs[pivot] = 1.0;
  return solve_spd(f, rhs);
}

}  // namespace detail

struct ColumnEstimate {
  std::vector<double> w_i1;  // coefficients on the support, length s_i
  std::vector<double> w_i;   // scattered to full length p
};

// Closed-form estimate of column i of the precision matrix given the known
// structure: w_i1 = (B_i^T S B_i)^{-1} f_i, scattered back to length p.
inline ColumnEstimate estimate_column(const DenseMatrix& s, const GraphStructure& g,
                                      std::size_t i) {
  const SelectionMap map = selection(g, i);
  if (s.rows() != g.p() || s.cols() != g.p())
    throw DimensionMismatch("covariance dimension does not match structure");
  const DenseMatrix sub = extract_submatrix(s, map);
  std::vector<double> w_i1 = detail::solve_support_system(sub, map.pivot, i);
  std::vector<double> w_i = scatter_column(w_i1, map, g.p());
  return ColumnEstimate{std::move(w_i1), std::move(w_i)};
}

struct PrecisionEstimate {
  DenseMatrix omega_hat;
  GraphStructure structure;
  bool symmetrized = false;
  // Condition estimate (largest over smallest eigenvalue) of each column's
  // support covariance, from power iteration on the matrix and its factor.
  std::vector<double> per_column_condition;
};

// Assembles all p columns independently. The column-wise estimator is not
// symmetric in finite samples; symmetrization to (W + W^T)/2 is opt-in so the
// raw object stays available. Columns may be computed in parallel; outputs
// land in disjoint locations, so the result is identical to the sequential
// order. On failure the smallest failing column index is reported regardless
// of thread schedule.
inline PrecisionEstimate estimate_precision(const DenseMatrix& s, const GraphStructure& g,
                                            bool symmetrize_result = false,
                                            unsigned threads = 1) {
  const std::size_t p = g.p();
  if (s.rows() != p || s.cols() != p)
    throw DimensionMismatch("covariance dimension does not match structure");
  PrecisionEstimate est{DenseMatrix(p, p), g, false, std::vector<double>(p, 0.0)};

  // Per-column errors are captured by index and the smallest index rethrown,
  // matching what a sequential sweep would report.
  std::vector<std::exception_ptr> column_error(p);
  parallel_for(p, threads, [&](std::size_t i) {
    try {
      const SelectionMap map = selection(g, i);
      const DenseMatrix sub = extract_submatrix(s, map);
      CholeskyFactor f;
      try {
        f = cholesky(sub);
      } catch (const NotPositiveDefinite& e) {
        throw SubmatrixNotPD(i, "support covariance of column " + std::to_string(i) +
                                    " is not positive definite: " + e.what());
      }
      std::vector<double> rhs(sub.rows(), 0.0);
      rhs[map.pivot] = 1.0;
      const std::vector<double> w_i1 = solve_spd(f, rhs);
      for (std::size_t k = 0; k < map.support.size(); ++k)
        est.omega_hat(map.support[k], i) = w_i1[k];

      const EigenRange range = spd_eigen_range(sub, f);
      est.per_column_condition[i] = range.max_eig / range.min_eig;
    } catch (...) {
      column_error[i] = std::current_exception();
    }
  });
  for (std::size_t i = 0; i < p; ++i)
    if (column_error[i]) std::rethrow_exception(column_error[i]);

  if (symmetrize_result) {
    est.omega_hat = symmetrize(est.omega_hat);
    est.symmetrized = true;
  }
  return est;
}

// Variance of m^T O Y Y^T O g_pivot for Y ~ N(0, O^{-1}):
// omega_pp * m^T O m + (m^T O g_pivot)^2.
inline double variance_h(const DenseMatrix& omega_i, const std::vector<double>& m,
                         std::size_t pivot) {
  if (!omega_i.square()) throw DimensionMismatch("variance_h requires a square matrix");
  const std::size_t k = omega_i.rows();
  if (m.size() != k) throw DimensionMismatch("variance_h: m length does not match matrix");
  if (pivot >= k) throw IndexOutOfRange("variance_h: pivot out of range");
  bool all_zero = true;
  for (double v : m)
    if (v != 0.0) {
      all_zero = false;
      break;
    }
  if (all_zero) throw NonPositive("variance_h: m must be nonzero");

  const std::vector<double> om = multiply(omega_i, m);
  const double m_om = dot(m, om);
  double m_og = 0.0;
  for (std::size_t a = 0; a < k; ++a) m_og += m[a] * omega_i(a, pivot);
  return omega_i(pivot, pivot) * m_om + m_og * m_og;
}

struct InferenceResult {
  double estimate;   // m^T w_i1
  double h_hat;      // plug-in asymptotic variance
  double std_error;  // sqrt(h_hat / n)
  double z;          // sqrt(n) (estimate - null) / sqrt(h_hat)
  double ci_low;
  double ci_high;
  double level;
};

namespace detail {

// Shared inference arithmetic on an already-extracted support covariance.
// This is the one place the support inverse is formed explicitly: the
// plug-in variance needs the whole of it.
inline InferenceResult infer_from_submatrix(const DenseMatrix& s_sub, std::size_t pivot,
                                            std::size_t column, const std::vector<double>& m,
                                            double null_value, double level, std::size_t n) {
  if (!(level > 0.0 && level < 1.0))
    throw InvalidLevel("confidence level must lie strictly inside (0,1)");
  if (m.size() != s_sub.rows())
    throw DimensionMismatch("m length does not match the column support size");
  DenseMatrix omega_i;
  try {
    omega_i = invert_spd(s_sub);
  } catch (const NotPositiveDefinite& e) {
    throw SubmatrixNotPD(column, "support covariance of column " + std::to_string(column) +
                                     " is not positive definite: " + e.what());
  }
  double estimate = 0.0;
  for (std::size_t a = 0; a < m.size(); ++a) estimate += m[a] * omega_i(a, pivot);
  const double h_hat = variance_h(omega_i, m, pivot);
  const double root_n = std::sqrt(static_cast<double>(n));
  const double se = std::sqrt(h_hat) / root_n;
  const double q = normal_two_sided_quantile(level);
  return InferenceResult{estimate, h_hat,          se, root_n * (estimate - null_value) / std::sqrt(h_hat),
                         estimate - q * se, estimate + q * se, level};
}

}  // namespace detail

// Asymptotic-normality inference for the linear functional m^T w_i1, with the
// plug-in variance evaluated at the inverted support covariance.
inline InferenceResult infer_linear(const DenseMatrix& s, const GraphStructure& g, std::size_t i,
                                    const std::vector<double>& m, double null_value, double level,
                                    std::size_t n) {
  const SelectionMap map = selection(g, i);
  if (s.rows() != g.p() || s.cols() != g.p())
    throw DimensionMismatch("covariance dimension does not match structure");
  const DenseMatrix sub = extract_submatrix(s, map);
  return detail::infer_from_submatrix(sub, map.pivot, i, m, null_value, level, n);
}

// Residual of the exact representation identity
//   (S^{-1} - O) g = -O W O g - O W (S^{-1} - O) g,   W = S - Sigma,
// for the basis vector at `pivot`. Algebraically zero whenever s_inv and
// omega are exact inverses of S and Sigma, so the return value measures
// rounding only.
inline double representation_residual(const DenseMatrix& s_inv, const DenseMatrix& omega,
                                      const DenseMatrix& w_mat, std::size_t pivot) {
  const std::size_t k = s_inv.rows();
  if (!s_inv.square() || !omega.square() || !w_mat.square() || omega.rows() != k ||
      w_mat.rows() != k)
    throw DimensionMismatch("representation_residual requires square matrices of equal dim");
  if (pivot >= k) throw IndexOutOfRange("representation_residual: pivot out of range");

  std::vector<double> g(k, 0.0);
  g[pivot] = 1.0;
  std::vector<double> diff_g(k);  // (S^{-1} - O) g
  for (std::size_t a = 0; a < k; ++a) diff_g[a] = s_inv(a, pivot) - omega(a, pivot);

  const std::vector<double> og = multiply(omega, g);
  const std::vector<double> wog = multiply(w_mat, og);
  const std::vector<double> owog = multiply(omega, wog);

  const std::vector<double> wdg = multiply(w_mat, diff_g);
  const std::vector<double> owdg = multiply(omega, wdg);

  double sup = 0.0;
  for (std::size_t a = 0; a < k; ++a)
    sup = std::max(sup, std::abs(diff_g[a] + owog[a] + owdg[a]));
  return sup;
}

}  // namespace netprec
