#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "netprec/errors.hpp"
#include "netprec/matrix.hpp"

namespace netprec {

// Relative tolerance of the elementwise symmetry check applied before a
// Cholesky factorization.
inline constexpr double kSymmetryTolFactor = 1e-10;

// Lower-triangular factor L with A = L L^T, diagonal strictly positive.
struct CholeskyFactor {
  DenseMatrix lower;
  std::size_t dim = 0;
};

// Cholesky factorization of a symmetric positive definite matrix.
//
// The input must be symmetric to within 1e-10 of its sup-norm; it is then
// replaced by (a + a^T)/2 so rounding-level asymmetry cannot leak into the
// factor. A pivot at or below `pivot_tol` raises NotPositiveDefinite; the
// default tolerance is 1e-12 times the largest diagonal entry. Near-singular
// inputs fail loudly instead of being regularized.
inline CholeskyFactor cholesky(const DenseMatrix& a, double pivot_tol = -1.0) {
  if (!a.square()) throw NotSquare("cholesky requires a square matrix");
  const std::size_t n = a.rows();
  if (n == 0) throw EmptyMatrix("cholesky requires a non-empty matrix");

  const double sym_tol = kSymmetryTolFactor * max_abs(a);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(a(i, j) - a(j, i)) > sym_tol)
        throw NotSymmetric("matrix is not symmetric at (" + std::to_string(i) + "," +
                           std::to_string(j) + ")");

  if (pivot_tol < 0.0) {
    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, a(i, i));
    pivot_tol = 1e-12 * max_diag;
  }

  CholeskyFactor f{DenseMatrix(n, n), n};
  DenseMatrix& l = f.lower;
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > pivot_tol))
      throw NotPositiveDefinite("pivot " + std::to_string(diag) + " at column " +
                                std::to_string(j) + " is not positive");
    l(j, j) = std::sqrt(diag);
    const double inv_ljj = 1.0 / l(j, j);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = 0.5 * (a(i, j) + a(j, i));
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s * inv_ljj;
    }
  }
  return f;
}

// Solves A x = b through the factor (forward then backward substitution).
inline std::vector<double> solve_spd(const CholeskyFactor& factor, const std::vector<double>& b) {
  const std::size_t n = factor.dim;
  if (b.size() != n) throw DimensionMismatch("solve_spd: rhs length does not match factor dim");
  const DenseMatrix& l = factor.lower;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * x[k];
    x[i] = s / l(i, i);
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double s = x[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x[k];
    x[ii] = s / l(ii, ii);
  }
  return x;
}

// Multi-RHS version: solves A X = B column by column.
inline DenseMatrix solve_spd(const CholeskyFactor& factor, const DenseMatrix& b) {
  if (b.rows() != factor.dim)
    throw DimensionMismatch("solve_spd: rhs rows do not match factor dim");
  DenseMatrix x(b.rows(), b.cols());
  std::vector<double> col(b.rows());
  for (std::size_t j = 0; j < b.cols(); ++j) {
    for (std::size_t i = 0; i < b.rows(); ++i) col[i] = b(i, j);
    std::vector<double> sol = solve_spd(factor, col);
    for (std::size_t i = 0; i < b.rows(); ++i) x(i, j) = sol[i];
  }
  return x;
}

// A^{-1} for symmetric positive definite A; the result is exactly symmetric.
inline DenseMatrix invert_spd(const DenseMatrix& a) {
  CholeskyFactor f = cholesky(a);
  DenseMatrix inv = solve_spd(f, DenseMatrix::identity(a.rows()));
  return symmetrize(inv);
}

inline double log_det(const CholeskyFactor& factor) {
  double s = 0.0;
  for (std::size_t i = 0; i < factor.dim; ++i) s += std::log(factor.lower(i, i));
  return 2.0 * s;
}

// Largest eigenvalue of a symmetric positive semidefinite operator by power
// iteration with the deterministic all-ones start vector. `apply` maps an
// input vector of length dim to an output vector of the same length.
template <typename Apply>
double power_iteration(Apply&& apply, std::size_t dim, double rel_tol = 1e-10,
                       std::size_t max_iter = 10000) {
  if (dim == 0) throw EmptyMatrix("power iteration on empty operator");
  std::vector<double> v(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
  std::vector<double> w(dim);
  double lambda = 0.0;
  for (std::size_t it = 0; it < max_iter; ++it) {
    apply(v.data(), w.data());
    double rayleigh = 0.0, norm_sq = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      rayleigh += v[i] * w[i];
      norm_sq += w[i] * w[i];
    }
    const double norm = std::sqrt(norm_sq);
    if (norm == 0.0) return 0.0;
    for (std::size_t i = 0; i < dim; ++i) v[i] = w[i] / norm;
    if (it > 0 && std::abs(rayleigh - lambda) <= rel_tol * std::abs(rayleigh)) return rayleigh;
    lambda = rayleigh;
  }
  return lambda;
}

// Largest singular value: power iteration on a^T a, never materialized.
inline double spectral_norm(const DenseMatrix& a) {
  if (a.empty()) throw EmptyMatrix("spectral norm of an empty matrix");
  std::vector<double> tmp(a.rows());
  const double lambda = power_iteration(
      [&](const double* in, double* out) {
        for (std::size_t i = 0; i < a.rows(); ++i) {
          const double* arow = a.row(i);
          double acc = 0.0;
          for (std::size_t j = 0; j < a.cols(); ++j) acc += arow[j] * in[j];
          tmp[i] = acc;
        }
        for (std::size_t j = 0; j < a.cols(); ++j) out[j] = 0.0;
        for (std::size_t i = 0; i < a.rows(); ++i) {
          const double* arow = a.row(i);
          const double ti = tmp[i];
          for (std::size_t j = 0; j < a.cols(); ++j) out[j] += arow[j] * ti;
        }
      },
      a.cols());
  return std::sqrt(std::max(lambda, 0.0));
}

struct MatrixNorms {
  double l1;        // max column absolute sum
  double linf;      // max row absolute sum
  double sup;       // max |a_ij|
  double spectral;  // largest singular value
};

inline MatrixNorms norms(const DenseMatrix& a) {
  if (a.empty()) throw EmptyMatrix("norms of an empty matrix");
  MatrixNorms out{0.0, 0.0, 0.0, 0.0};
  std::vector<double> col_sum(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double row_sum = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double v = std::abs(a(i, j));
      row_sum += v;
      col_sum[j] += v;
      out.sup = std::max(out.sup, v);
    }
    out.linf = std::max(out.linf, row_sum);
  }
  for (double c : col_sum) out.l1 = std::max(out.l1, c);
  out.spectral = spectral_norm(a);
  return out;
}

// Smallest and largest eigenvalue estimates of a symmetric positive definite
// matrix, via power iteration on A and inverse iteration through its factor.
struct EigenRange {
  double min_eig;
  double max_eig;
};

inline EigenRange spd_eigen_range(const DenseMatrix& a, const CholeskyFactor& factor,
                                  double rel_tol = 1e-8) {
  const std::size_t n = a.rows();
  const double lambda_max = power_iteration(
      [&](const double* in, double* out) {
        for (std::size_t i = 0; i < n; ++i) {
          const double* arow = a.row(i);
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += arow[j] * in[j];
          out[i] = acc;
        }
      },
      n, rel_tol);
  std::vector<double> buf(n);
  const double inv_lambda_min = power_iteration(
      [&](const double* in, double* out) {
        buf.assign(in, in + n);
        std::vector<double> sol = solve_spd(factor, buf);
        for (std::size_t i = 0; i < n; ++i) out[i] = sol[i];
      },
      n, rel_tol);
  return EigenRange{1.0 / inv_lambda_min, lambda_max};
}

}  // namespace netprec
