#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "netprec/errors.hpp"
#include "netprec/estimator.hpp"
#include "netprec/linalg.hpp"
#include "netprec/matrix.hpp"
#include "netprec/parallel.hpp"
#include "netprec/rng.hpp"

namespace netprec {

struct TigerConfig {
  std::size_t n_lambda = 5;
  std::size_t k_folds = 5;
  double cd_tol = 1e-7;          // relative objective change per sweep
  std::size_t cd_max_iter = 10000;
  std::uint64_t seed = 0;        // fold shuffling only

  void validate() const {
    if (n_lambda < 2) throw ConfigError("n_lambda must be at least 2");
    if (k_folds < 2) throw ConfigError("k_folds must be at least 2");
    if (!(cd_tol > 0.0)) throw ConfigError("cd_tol must be positive");
  }
};

struct NormalizedData {
  DenseMatrix z;                   // columns centered, unit sample variance
  std::vector<double> gamma_diag;  // original sample variances
};

// Centers each column and scales to unit sample variance (divisor n-1),
// recording the original variances.
inline NormalizedData normalize(const DenseMatrix& x) {
  const std::size_t n = x.rows(), p = x.cols();
  if (n < 2) throw TooFewRows("normalize needs at least two rows");
  NormalizedData out{DenseMatrix(n, p), std::vector<double>(p, 0.0)};
  for (std::size_t j = 0; j < p; ++j) {
    double mean = 0.0;
    for (std::size_t k = 0; k < n; ++k) mean += x(k, j);
    mean /= static_cast<double>(n);
    double var = 0.0, m2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double c = x(k, j) - mean;
      var += c * c;
      m2 += x(k, j) * x(k, j);
    }
    var /= static_cast<double>(n - 1);
    m2 /= static_cast<double>(n);
    // A column whose variance is at rounding level relative to its magnitude
    // carries no usable variation.
    if (var <= 1e-24 * std::max(1.0, m2))
      throw ZeroVarianceColumn(j, "column " + std::to_string(j) + " has zero sample variance");
    const double inv_sd = 1.0 / std::sqrt(var);
    for (std::size_t k = 0; k < n; ++k) out.z(k, j) = (x(k, j) - mean) * inv_sd;
    out.gamma_diag[j] = var;
  }
  return out;
}

struct SqrtLassoResult {
  std::vector<double> beta;
  double sigma = 0.0;        // ||residual||_2 / sqrt(n) at the solution
  std::size_t sweeps = 0;
  bool converged = true;     // false after cd_max_iter without convergence
};

// SQRT-LASSO:  min_beta ||y - X beta||_2 / sqrt(n) + lambda ||beta||_1.
//
// Solved by the scaled-lasso alternation: fix sigma = ||r||/sqrt(n), run one
// cyclic coordinate-descent sweep of the lasso with effective penalty
// lambda * sigma, repeat. The joint objective is convex, so the fixed point
// is the global minimum. Coordinates cycle in fixed ascending order.
inline SqrtLassoResult sqrt_lasso(const DenseMatrix& design, const std::vector<double>& response,
                                  double lambda, const TigerConfig& cfg) {
  if (!(lambda > 0.0)) throw ConfigError("sqrt_lasso requires lambda > 0");
  const std::size_t n = design.rows(), q = design.cols();
  if (response.size() != n)
    throw DimensionMismatch("sqrt_lasso: response length does not match design rows");
  const double root_n = std::sqrt(static_cast<double>(n));

  // Column-major copy of the design; coordinate descent walks columns.
  std::vector<double> cols(n * q);
  std::vector<double> col_sq(q);  // ||X_j||^2 / n
  for (std::size_t j = 0; j < q; ++j) {
    double sq = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double v = design(k, j);
      cols[j * n + k] = v;
      sq += v * v;
    }
    col_sq[j] = sq / static_cast<double>(n);
  }

  std::vector<double> r = response;
  std::vector<double> beta(q, 0.0);
  double rss = dot(r, r);
  const double sigma0 = std::sqrt(rss) / root_n;
  // Residual this far below the response scale means interpolation: tau^{-2}
  // would be meaningless and the penalty path is undefined.
  const double degenerate_floor = 1e-6 * sigma0;
  if (sigma0 == 0.0)
    throw DegenerateResidual("sqrt_lasso: response has zero norm");

  double l1 = 0.0;
  double objective = sigma0;
  SqrtLassoResult out;
  for (std::size_t sweep = 0; sweep < cfg.cd_max_iter; ++sweep) {
    const double sigma = std::sqrt(std::max(rss, 0.0)) / root_n;
    if (sigma <= degenerate_floor)
      throw DegenerateResidual("sqrt_lasso: residual collapsed to zero (exact interpolation)");
    const double mu = lambda * sigma;

    for (std::size_t j = 0; j < q; ++j) {
      if (col_sq[j] == 0.0) continue;  // constant-zero predictor stays out
      const double* xj = cols.data() + j * n;
      double corr = 0.0;
      for (std::size_t k = 0; k < n; ++k) corr += xj[k] * r[k];
      const double zj = corr / static_cast<double>(n) + col_sq[j] * beta[j];
      double bj = 0.0;
      if (zj > mu)
        bj = (zj - mu) / col_sq[j];
      else if (zj < -mu)
        bj = (zj + mu) / col_sq[j];
      const double delta = beta[j] - bj;
      if (delta != 0.0) {
        for (std::size_t k = 0; k < n; ++k) r[k] += xj[k] * delta;
        beta[j] = bj;
      }
    }

    rss = dot(r, r);
    l1 = 0.0;
    for (double b : beta) l1 += std::abs(b);
    const double new_objective = std::sqrt(std::max(rss, 0.0)) / root_n + lambda * l1;
    out.sweeps = sweep + 1;
    if (std::abs(objective - new_objective) <= cfg.cd_tol * std::max(objective, 1e-300)) {
      objective = new_objective;
      out.converged = true;
      break;
    }
    objective = new_objective;
    out.converged = false;
  }

  out.sigma = std::sqrt(std::max(rss, 0.0)) / root_n;
  if (out.sigma <= degenerate_floor)
    throw DegenerateResidual("sqrt_lasso: residual collapsed to zero (exact interpolation)");
  out.beta = std::move(beta);
  return out;
}

struct TigerColumn {
  std::vector<double> omega_col;  // column j of the precision estimate, length p
  double tau = 0.0;
  bool converged = true;
};

// One TIGER column: regress the normalized column j on the remaining
// columns with SQRT-LASSO, then map back to the original scale through the
// sample variances:
//   omega_jj     = tau_j^{-2} gamma_jj^{-1}
//   omega_kj     = -tau_j^{-2} gamma_jj^{-1/2} gamma_kk^{-1/2} beta_jk.
inline TigerColumn tiger_column(const DenseMatrix& z, const std::vector<double>& gamma_diag,
                                std::size_t j, double lambda, const TigerConfig& cfg) {
  const std::size_t n = z.rows(), p = z.cols();
  if (j >= p) throw IndexOutOfRange("tiger_column: column out of range");
  if (gamma_diag.size() != p)
    throw DimensionMismatch("tiger_column: gamma_diag length does not match data");

  DenseMatrix design(n, p > 0 ? p - 1 : 0);
  std::vector<double> response(n);
  for (std::size_t k = 0; k < n; ++k) {
    response[k] = z(k, j);
    std::size_t c = 0;
    for (std::size_t col = 0; col < p; ++col) {
      if (col == j) continue;
      design(k, c++) = z(k, col);
    }
  }

  TigerColumn out;
  out.omega_col.assign(p, 0.0);
  if (p == 1) {
    // No predictors: the residual is the standardized column itself.
    double rss = dot(response, response);
    out.tau = std::sqrt(rss / static_cast<double>(n));
    if (out.tau == 0.0) throw DegenerateResidual("tiger_column: zero residual");
    out.omega_col[j] = 1.0 / (out.tau * out.tau * gamma_diag[j]);
    return out;
  }

  const SqrtLassoResult fit = sqrt_lasso(design, response, lambda, cfg);
  out.tau = fit.sigma;
  out.converged = fit.converged;
  if (out.tau == 0.0) throw DegenerateResidual("tiger_column: zero residual");

  const double inv_tau_sq = 1.0 / (out.tau * out.tau);
  const double inv_sqrt_gjj = 1.0 / std::sqrt(gamma_diag[j]);
  out.omega_col[j] = inv_tau_sq / gamma_diag[j];
  std::size_t c = 0;
  for (std::size_t k = 0; k < p; ++k) {
    if (k == j) continue;
    out.omega_col[k] =
        -inv_tau_sq * inv_sqrt_gjj * fit.beta[c] / std::sqrt(gamma_diag[k]);
    ++c;
  }
  return out;
}

// Equally spaced penalty grid on [pi sqrt(log p / n) / 4, pi sqrt(log p / n)],
// endpoints inclusive, ascending.
inline std::vector<double> lambda_grid(std::size_t p, std::size_t n, std::size_t n_lambda) {
  if (p < 2 || n < 2) throw InvalidSize("lambda_grid requires p >= 2 and n >= 2");
  if (n_lambda < 2) throw InvalidSize("lambda_grid requires at least 2 values");
  const double hi =
      std::numbers::pi * std::sqrt(std::log(static_cast<double>(p)) / static_cast<double>(n));
  const double lo = hi / 4.0;
  std::vector<double> grid(n_lambda);
  for (std::size_t k = 0; k < n_lambda; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(n_lambda - 1);
    grid[k] = lo + t * (hi - lo);
  }
  return grid;
}

struct TigerFit {
  DenseMatrix omega_hat;
  double chosen_lambda = 0.0;
  std::vector<std::pair<double, double>> cv_losses;  // (lambda, mean held-out loss)
  std::vector<double> per_column_tau;
  bool all_converged = true;
};

// Smallest lambda attaining the minimum mean loss; all-infinite losses mean
// every fold fit degenerated at every lambda.
inline std::size_t select_lambda(const std::vector<double>& mean_losses) {
  std::size_t best = mean_losses.size();
  double best_loss = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < mean_losses.size(); ++k) {
    if (mean_losses[k] < best_loss) {
      best_loss = mean_losses[k];
      best = k;
    }
  }
  if (best == mean_losses.size())
    throw AllFoldsDegenerate("every lambda produced an infinite held-out loss");
  return best;
}

namespace detail {

// Full TIGER fit of already-normalized data at one penalty value. Columns are
// independent; they may run on a worker pool and land in disjoint output
// columns.
inline TigerFit fit_tiger_normalized(const NormalizedData& nd, double lambda,
                                     const TigerConfig& cfg, unsigned threads) {
  const std::size_t p = nd.z.cols();
  TigerFit fit;
  fit.omega_hat = DenseMatrix(p, p);
  fit.per_column_tau.assign(p, 0.0);
  fit.chosen_lambda = lambda;
  std::vector<std::exception_ptr> column_error(p);
  std::vector<char> converged(p, 1);
  parallel_for(p, threads, [&](std::size_t j) {
    try {
      const TigerColumn col = tiger_column(nd.z, nd.gamma_diag, j, lambda, cfg);
      for (std::size_t k = 0; k < p; ++k) fit.omega_hat(k, j) = col.omega_col[k];
      fit.per_column_tau[j] = col.tau;
      converged[j] = col.converged ? 1 : 0;
    } catch (...) {
      column_error[j] = std::current_exception();
    }
  });
  for (std::size_t j = 0; j < p; ++j)
    if (column_error[j]) std::rethrow_exception(column_error[j]);
  for (std::size_t j = 0; j < p; ++j)
    if (!converged[j]) fit.all_converged = false;
  return fit;
}

inline TigerFit fit_tiger_at(const DenseMatrix& x, double lambda, const TigerConfig& cfg,
                             unsigned threads) {
  return fit_tiger_normalized(normalize(x), lambda, cfg, threads);
}

// Gaussian likelihood loss tr(S O) - log det O of a symmetrized estimate on
// held-out data; +inf when the symmetrized estimate is not positive definite.
inline double holdout_loss(const DenseMatrix& s_test, const DenseMatrix& omega) {
  const DenseMatrix sym = symmetrize(omega);
  double logdet;
  try {
    logdet = log_det(cholesky(sym));
  } catch (const NotPositiveDefinite&) {
    return std::numeric_limits<double>::infinity();
  }
  double trace = 0.0;
  for (std::size_t i = 0; i < sym.rows(); ++i)
    for (std::size_t j = 0; j < sym.cols(); ++j) trace += s_test(i, j) * sym(i, j);
  return trace - logdet;
}

inline DenseMatrix take_rows(const DenseMatrix& x, const std::vector<std::size_t>& rows) {
  DenseMatrix out(rows.size(), x.cols());
  for (std::size_t k = 0; k < rows.size(); ++k)
    for (std::size_t j = 0; j < x.cols(); ++j) out(k, j) = x(rows[k], j);
  return out;
}

}  // namespace detail

// K-fold cross-validated TIGER. Folds come from a seeded shuffle followed by
// a contiguous split; for each lambda the estimate is fit on the training
// folds and scored by Gaussian likelihood loss on the held-out fold. The
// winning lambda (smallest among minimizers) is refit on the full data.
inline TigerFit cross_validate(const DenseMatrix& x, const TigerConfig& cfg,
                               unsigned threads = 1) {
  cfg.validate();
  const std::size_t n = x.rows(), p = x.cols();
  if (n < 2 * cfg.k_folds)
    throw ConfigError("cross_validate needs n >= 2 * k_folds so every fold has two rows");

  const std::vector<double> grid = lambda_grid(p, n, cfg.n_lambda);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  CounterRng rng(cfg.seed);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.next_below(n - i));
    std::swap(order[i], order[j]);
  }

  std::vector<double> mean_losses(grid.size(), 0.0);
  for (std::size_t fold = 0; fold < cfg.k_folds; ++fold) {
    const std::size_t lo = fold * n / cfg.k_folds;
    const std::size_t hi = (fold + 1) * n / cfg.k_folds;
    std::vector<std::size_t> test_rows(order.begin() + lo, order.begin() + hi);
    std::vector<std::size_t> train_rows;
    train_rows.reserve(n - test_rows.size());
    train_rows.insert(train_rows.end(), order.begin(), order.begin() + lo);
    train_rows.insert(train_rows.end(), order.begin() + hi, order.end());

    const DenseMatrix train = detail::take_rows(x, train_rows);
    const DenseMatrix test = detail::take_rows(x, test_rows);
    const DenseMatrix s_test = sample_covariance(test);

    // A fold whose fit fails outright (degenerate residual, unusable column)
    // scores +inf at that lambda, same as a non-PD estimate.
    bool fold_usable = true;
    NormalizedData nd_train;
    try {
      nd_train = normalize(train);
    } catch (const NumericalError&) {
      fold_usable = false;
    }
    for (std::size_t k = 0; k < grid.size(); ++k) {
      double loss = std::numeric_limits<double>::infinity();
      if (fold_usable) {
        try {
          const TigerFit fit = detail::fit_tiger_normalized(nd_train, grid[k], cfg, threads);
          loss = detail::holdout_loss(s_test, fit.omega_hat);
        } catch (const NumericalError&) {
          loss = std::numeric_limits<double>::infinity();
        }
      }
      mean_losses[k] += loss / static_cast<double>(cfg.k_folds);
    }
  }

  const std::size_t best = select_lambda(mean_losses);
  TigerFit fit = detail::fit_tiger_at(x, grid[best], cfg, threads);
  fit.cv_losses.clear();
  for (std::size_t k = 0; k < grid.size(); ++k) fit.cv_losses.emplace_back(grid[k], mean_losses[k]);
  fit.chosen_lambda = grid[best];
  return fit;
}

}  // namespace netprec
