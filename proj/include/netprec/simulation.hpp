#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "netprec/errors.hpp"
#include "netprec/estimator.hpp"
#include "netprec/linalg.hpp"
#include "netprec/matrix.hpp"
#include "netprec/parallel.hpp"
#include "netprec/rng.hpp"
#include "netprec/structure.hpp"
#include "netprec/tiger.hpp"

namespace netprec {

namespace detail {

// Lower Cholesky factor of a symmetric banded SPD matrix, kept in band
// storage: band(i, d) = L(i, i-d) for d = 0..bw. Same pivots as the dense
// factorization, just skipping structural zeros, so factoring a banded
// precision matrix costs O(p bw^2) instead of O(p^3).
class BandedCholesky {
public:
  BandedCholesky() = default;

  BandedCholesky(const DenseMatrix& a, std::size_t bandwidth, double pivot_tol = -1.0)
      : n_(a.rows()), bw_(bandwidth), band_(a.rows() * (bandwidth + 1), 0.0) {
    if (!a.square()) throw NotSquare("banded factorization requires a square matrix");
    if (pivot_tol < 0.0) {
      double max_diag = 0.0;
      for (std::size_t i = 0; i < n_; ++i) max_diag = std::max(max_diag, a(i, i));
      pivot_tol = 1e-12 * max_diag;
    }
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t jlo = i > bw_ ? i - bw_ : 0;
      for (std::size_t j = jlo; j <= i; ++j) {
        double s = a(i, j);
        for (std::size_t k = jlo; k < j; ++k) s -= at(i, k) * at(j, k);
        if (j < i) {
          set(i, j, s / at(j, j));
        } else {
          if (!(s > pivot_tol))
            throw NotPositiveDefinite("banded pivot " + std::to_string(s) + " at column " +
                                      std::to_string(j) + " is not positive");
          set(i, i, std::sqrt(s));
        }
      }
    }
  }

  std::size_t dim() const { return n_; }
  std::size_t bandwidth() const { return bw_; }

  double at(std::size_t i, std::size_t j) const {  // L(i, j), j in [i-bw, i]
    return band_[i * (bw_ + 1) + (i - j)];
  }

  // L y = b
  void solve_lower(const double* b, double* y) const {
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t klo = i > bw_ ? i - bw_ : 0;
      double s = b[i];
      for (std::size_t k = klo; k < i; ++k) s -= at(i, k) * y[k];
      y[i] = s / at(i, i);
    }
  }

  // L^T x = y
  void solve_upper(const double* y, double* x) const {
    for (std::size_t ii = n_; ii-- > 0;) {
      const std::size_t khi = std::min(n_ - 1, ii + bw_);
      double s = y[ii];
      for (std::size_t k = ii + 1; k <= khi; ++k) s -= at(k, ii) * x[k];
      x[ii] = s / at(ii, ii);
    }
  }

  void solve(const double* b, double* x, std::vector<double>& scratch) const {
    scratch.resize(n_);
    solve_lower(b, scratch.data());
    solve_upper(scratch.data(), x);
  }

private:
  void set(std::size_t i, std::size_t j, double v) { band_[i * (bw_ + 1) + (i - j)] = v; }

  std::size_t n_ = 0;
  std::size_t bw_ = 0;
  std::vector<double> band_;
};

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? std::numeric_limits<double>::quiet_NaN() : s / static_cast<double>(v.size());
}

inline double sample_sd(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// Stream tags keeping data draws, fold shuffles, and normality replications
// on disjoint seed streams.
inline constexpr std::uint64_t kDataStream = 0x01;
inline constexpr std::uint64_t kTigerStream = 0x02;
inline constexpr std::uint64_t kNormalityStream = 0x03;

}  // namespace detail

// Draws N(0, Sigma) rows for Sigma given through its banded precision matrix:
// a row is x = L^{-T} u with Omega = L L^T and u standard normal, so
// cov(x) = (L L^T)^{-1} = Sigma exactly, at O(p bw) per row. This is what
// makes the p/n = 10 study scenarios affordable.
class BandedPrecisionSampler {
public:
  BandedPrecisionSampler(const DenseMatrix& omega, std::size_t bandwidth)
      : chol_(omega, bandwidth) {}

  DenseMatrix sample(std::size_t n, std::uint64_t seed) const {
    const std::size_t p = chol_.dim();
    DenseMatrix x(n, p);
    CounterRng rng(seed);
    std::vector<double> u(p);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t j = 0; j < p; ++j) u[j] = rng.next_normal();
      chol_.solve_upper(u.data(), x.row(k));
    }
    return x;
  }

  const detail::BandedCholesky& factor() const { return chol_; }

private:
  detail::BandedCholesky chol_;
};

// The simulation design: banded precision matrix omega_ij = rho^|i-j| for
// |i-j| < s0, its inverse, the implied structure, and the eigenvalue range of
// omega as the witness that the spectrum is bounded away from zero.
struct GroundTruth {
  std::size_t p = 0;
  std::size_t s0 = 0;
  double rho = 0.6;
  DenseMatrix omega;
  DenseMatrix sigma;
  GraphStructure structure{0, {}};
  double min_eig = 0.0;  // smallest eigenvalue of omega (inverse iteration)
  double max_eig = 0.0;  // largest eigenvalue of omega (power iteration)
};

inline GroundTruth make_ground_truth(std::size_t p, std::size_t s0, double rho = 0.6) {
  if (s0 < 1 || s0 > p) throw ConfigError("make_ground_truth requires 1 <= s0 <= p");
  if (!(std::abs(rho) < 1.0)) throw ConfigError("make_ground_truth requires |rho| < 1");

  GroundTruth gt;
  gt.p = p;
  gt.s0 = s0;
  gt.rho = rho;

  std::vector<double> rho_pow(s0, 1.0);
  for (std::size_t d = 1; d < s0; ++d) rho_pow[d] = rho_pow[d - 1] * rho;

  gt.omega = DenseMatrix(p, p);
  for (std::size_t i = 0; i < p; ++i) {
    gt.omega(i, i) = 1.0;
    for (std::size_t d = 1; d < s0 && i + d < p; ++d) {
      gt.omega(i, i + d) = rho_pow[d];
      gt.omega(i + d, i) = rho_pow[d];
    }
  }

  // Structure is the nonzero pattern of omega (rho = 0 collapses the band to
  // the diagonal).
  std::vector<std::vector<std::size_t>> supports(p);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j)
      if (j == i || gt.omega(i, j) != 0.0) supports[i].push_back(j);
  gt.structure = GraphStructure(p, std::move(supports));

  // The banded construction is not positive definite for every (rho, s0);
  // the factorization failure propagates rather than being patched.
  const std::size_t bw = s0 - 1;
  const detail::BandedCholesky chol(gt.omega, bw);

  // Sigma = Omega^{-1}, column by column through the banded factor.
  gt.sigma = DenseMatrix(p, p);
  std::vector<double> e(p, 0.0), col(p), scratch(p);
  for (std::size_t j = 0; j < p; ++j) {
    e[j] = 1.0;
    chol.solve(e.data(), col.data(), scratch);
    e[j] = 0.0;
    for (std::size_t i = 0; i < p; ++i) gt.sigma(i, j) = col[i];
  }
  gt.sigma = symmetrize(gt.sigma);

  gt.max_eig = power_iteration(
      [&](const double* in, double* out) {
        for (std::size_t i = 0; i < p; ++i) {
          const std::size_t lo = i > bw ? i - bw : 0;
          const std::size_t hi = std::min(p - 1, i + bw);
          double acc = 0.0;
          for (std::size_t j = lo; j <= hi; ++j) acc += gt.omega(i, j) * in[j];
          out[i] = acc;
        }
      },
      p, 1e-8);
  std::vector<double> buf(p);
  gt.min_eig = 1.0 / power_iteration(
                         [&](const double* in, double* out) { chol.solve(in, out, buf); }, p,
                         1e-8);
  return gt;
}

// Generic dense sampler: rows are x = L u with L = chol(sigma) and u standard
// normal from the counter-based stream. Factorization errors propagate even
// for n = 0.
inline DenseMatrix sample_mvn(const DenseMatrix& sigma, std::size_t n, std::uint64_t seed) {
  const CholeskyFactor f = cholesky(sigma);
  const std::size_t p = sigma.rows();
  DenseMatrix x(n, p);
  CounterRng rng(seed);
  std::vector<double> u(p);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < p; ++j) u[j] = rng.next_normal();
    double* row = x.row(k);
    for (std::size_t i = 0; i < p; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j <= i; ++j) acc += f.lower(i, j) * u[j];
      row[i] = acc;
    }
  }
  return x;
}

struct BiasMetrics {
  double rel_bias;
  double abs_bias;
};

// Mean componentwise relative and absolute error against the true nonzero
// components.
inline BiasMetrics bias_metrics(const std::vector<double>& w_hat,
                                const std::vector<double>& w_true) {
  if (w_hat.size() != w_true.size())
    throw LengthMismatch("bias_metrics: estimate and truth lengths differ");
  if (w_true.empty()) throw LengthMismatch("bias_metrics: empty vectors");
  double rel = 0.0, abs = 0.0;
  for (std::size_t k = 0; k < w_true.size(); ++k) {
    if (w_true[k] == 0.0)
      throw ZeroTrueComponent("bias_metrics: true component " + std::to_string(k) + " is zero");
    const double d = std::abs(w_hat[k] - w_true[k]);
    rel += d / std::abs(w_true[k]);
    abs += d;
  }
  const double inv = 1.0 / static_cast<double>(w_true.size());
  return BiasMetrics{rel * inv, abs * inv};
}

enum class Method { kProposed, kTiger };

inline const char* method_name(Method m) {
  return m == Method::kProposed ? "proposed" : "tiger";
}

inline Method parse_method(const std::string& name) {
  if (name == "proposed") return Method::kProposed;
  if (name == "tiger") return Method::kTiger;
  throw ConfigError("unknown method '" + name + "' (expected 'proposed' or 'tiger')");
}

struct StudyConfig {
  std::vector<std::size_t> n_list{100, 300, 500};
  std::vector<double> ratio_list{0.1, 0.5, 1.0, 5.0, 10.0};
  std::size_t s0 = 4;
  double rho = 0.6;
  std::size_t replications = 300;
  std::uint64_t seed = 42;
  std::vector<Method> methods{Method::kProposed};
  TigerConfig tiger;
  unsigned threads = 1;

  static std::size_t dimension_for(std::size_t n, double ratio) {
    return static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
  }

  void validate() const {
    if (replications < 2) throw ConfigError("a study needs at least 2 replications");
    if (n_list.empty()) throw ConfigError("n_list must not be empty");
    if (ratio_list.empty()) throw ConfigError("ratio_list must not be empty");
    if (s0 < 1) throw ConfigError("s0 must be at least 1");
    if (!(std::abs(rho) < 1.0)) throw ConfigError("|rho| must be below 1");
    if (methods.empty()) throw ConfigError("at least one method is required");
    const bool with_tiger =
        std::find(methods.begin(), methods.end(), Method::kTiger) != methods.end();
    if (with_tiger) tiger.validate();
    for (std::size_t n : n_list) {
      if (n < 2) throw ConfigError("every n must be at least 2");
      for (double ratio : ratio_list) {
        if (!(ratio > 0.0)) throw ConfigError("ratios must be positive");
        const std::size_t p = dimension_for(n, ratio);
        if (p < s0)
          throw ConfigError("scenario n=" + std::to_string(n) + " ratio=" +
                            std::to_string(ratio) + " implies p=" + std::to_string(p) +
                            " below s0=" + std::to_string(s0));
        if (with_tiger && p < 2)
          throw ConfigError("tiger needs p >= 2 in every scenario");
        if (with_tiger && n < 2 * tiger.k_folds)
          throw ConfigError("tiger cross-validation needs n >= 2 * k_folds");
      }
    }
  }
};

struct StudyRow {
  std::size_t n;
  double ratio;
  Method method;
  double rel_bias_mean;
  double rel_bias_sd;
  double abs_bias_mean;
  double abs_bias_sd;
  std::size_t failures;
  std::vector<double> component_means;  // componentwise mean of the estimates
  std::vector<double> component_sds;
};

struct StudyResult {
  std::size_t s0 = 0;
  std::vector<StudyRow> rows;
};

// Monte Carlo study of first-column estimation accuracy. Replications run on
// a worker pool; every replication derives its own seed from (master seed, n,
// ratio, replication), results land in index-addressed buffers, and the
// reduction walks them in replication order, so the output is bit-identical
// for any thread count. When both methods run they see the same datasets
// (paired design); only the fold shuffle of TIGER uses a method-tagged
// stream. Replications whose estimation fails numerically are excluded and
// counted.
inline StudyResult run_study(const StudyConfig& cfg) {
  cfg.validate();
  StudyResult result;
  result.s0 = cfg.s0;

  for (std::size_t n : cfg.n_list) {
    for (double ratio : cfg.ratio_list) {
      const std::size_t p = StudyConfig::dimension_for(n, ratio);
      const GroundTruth gt = make_ground_truth(p, cfg.s0, cfg.rho);
      const BandedPrecisionSampler sampler(gt.omega, cfg.s0 - 1);

      const SelectionMap map = selection(gt.structure, 0);
      const std::size_t s_first = map.support.size();
      std::vector<double> true_w(s_first);
      for (std::size_t k = 0; k < s_first; ++k) true_w[k] = gt.omega(map.support[k], 0);

      const std::size_t r_total = cfg.replications;
      const std::size_t n_methods = cfg.methods.size();
      std::vector<std::vector<char>> ok(n_methods, std::vector<char>(r_total, 0));
      std::vector<std::vector<double>> rel(n_methods, std::vector<double>(r_total, 0.0));
      std::vector<std::vector<double>> abs(n_methods, std::vector<double>(r_total, 0.0));
      std::vector<std::vector<std::vector<double>>> comps(
          n_methods, std::vector<std::vector<double>>(r_total));

      std::uint64_t scenario_seed = seed_combine(cfg.seed, static_cast<std::uint64_t>(n));
      scenario_seed = seed_combine(scenario_seed, ratio);

      parallel_for(r_total, cfg.threads, [&](std::size_t r) {
        const std::uint64_t data_seed = seed_combine(
            seed_combine(scenario_seed, detail::kDataStream), static_cast<std::uint64_t>(r));
        const DenseMatrix x = sampler.sample(n, data_seed);

        // Support-restricted data; its sample covariance is exactly the
        // support submatrix of the full sample covariance.
        DenseMatrix x_sub(n, s_first);
        for (std::size_t k = 0; k < n; ++k)
          for (std::size_t c = 0; c < s_first; ++c) x_sub(k, c) = x(k, map.support[c]);

        for (std::size_t mi = 0; mi < n_methods; ++mi) {
          try {
            std::vector<double> w_hat(s_first);
            if (cfg.methods[mi] == Method::kProposed) {
              const DenseMatrix s_sub = sample_covariance(x_sub);
              w_hat = detail::solve_support_system(s_sub, map.pivot, 0);
            } else {
              TigerConfig tcfg = cfg.tiger;
              tcfg.seed = seed_combine(seed_combine(scenario_seed, detail::kTigerStream),
                                       static_cast<std::uint64_t>(r));
              const TigerFit fit = cross_validate(x, tcfg, 1);
              for (std::size_t k = 0; k < s_first; ++k)
                w_hat[k] = fit.omega_hat(map.support[k], 0);
            }
            const BiasMetrics metrics = bias_metrics(w_hat, true_w);
            rel[mi][r] = metrics.rel_bias;
            abs[mi][r] = metrics.abs_bias;
            comps[mi][r] = std::move(w_hat);
            ok[mi][r] = 1;
          } catch (const NumericalError&) {
            ok[mi][r] = 0;
          }
        }
      });

      for (std::size_t mi = 0; mi < n_methods; ++mi) {
        StudyRow row;
        row.n = n;
        row.ratio = ratio;
        row.method = cfg.methods[mi];
        std::vector<double> rel_ok, abs_ok;
        std::vector<std::vector<double>> comp_ok(s_first);
        for (std::size_t r = 0; r < r_total; ++r) {
          if (!ok[mi][r]) continue;
          rel_ok.push_back(rel[mi][r]);
          abs_ok.push_back(abs[mi][r]);
          for (std::size_t k = 0; k < s_first; ++k) comp_ok[k].push_back(comps[mi][r][k]);
        }
        row.failures = r_total - rel_ok.size();
        row.rel_bias_mean = detail::mean_of(rel_ok);
        row.rel_bias_sd = detail::sample_sd(rel_ok, row.rel_bias_mean);
        row.abs_bias_mean = detail::mean_of(abs_ok);
        row.abs_bias_sd = detail::sample_sd(abs_ok, row.abs_bias_mean);
        row.component_means.resize(s_first);
        row.component_sds.resize(s_first);
        for (std::size_t k = 0; k < s_first; ++k) {
          row.component_means[k] = detail::mean_of(comp_ok[k]);
          row.component_sds[k] = detail::sample_sd(comp_ok[k], row.component_means[k]);
        }
        result.rows.push_back(std::move(row));
      }
    }
  }
  return result;
}

struct NormalityResult {
  std::vector<double> z_samples;
  double mean;
  double variance;
  double coverage95;  // CI coverage of the true functional at `level`
};

// Sampling distribution check for the studentized linear functional: per
// replication the z statistic is computed against the true w_i1 with the
// plug-in variance, along with whether the confidence interval covers the
// truth.
inline NormalityResult normality_study(const GroundTruth& gt, std::size_t n,
                                       const std::vector<double>& m, std::size_t i,
                                       std::size_t replications, std::uint64_t seed,
                                       double level = 0.95, unsigned threads = 1) {
  const SelectionMap map = selection(gt.structure, i);
  if (m.size() != map.support.size())
    throw DimensionMismatch("normality_study: m length does not match column support size");
  if (n < 2) throw TooFewRows("normality_study needs n >= 2");

  std::vector<double> true_w(map.support.size());
  for (std::size_t k = 0; k < map.support.size(); ++k) true_w[k] = gt.omega(map.support[k], i);
  const double target = dot(m, true_w);

  NormalityResult out;
  out.z_samples.assign(replications, 0.0);
  std::vector<char> covered(replications, 0);
  if (replications == 0) {
    out.mean = out.variance = out.coverage95 = std::numeric_limits<double>::quiet_NaN();
    return out;
  }

  const BandedPrecisionSampler sampler(gt.omega, gt.s0 - 1);
  const std::size_t s_i = map.support.size();
  std::vector<std::exception_ptr> rep_error(replications);
  parallel_for(replications, threads, [&](std::size_t r) {
    try {
      const std::uint64_t data_seed = seed_combine(
          seed_combine(seed, detail::kNormalityStream), static_cast<std::uint64_t>(r));
      const DenseMatrix x = sampler.sample(n, data_seed);
      DenseMatrix x_sub(n, s_i);
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t c = 0; c < s_i; ++c) x_sub(k, c) = x(k, map.support[c]);
      const DenseMatrix s_sub = sample_covariance(x_sub);
      const InferenceResult inf =
          detail::infer_from_submatrix(s_sub, map.pivot, i, m, target, level, n);
      out.z_samples[r] = inf.z;
      covered[r] = (inf.ci_low <= target && target <= inf.ci_high) ? 1 : 0;
    } catch (...) {
      rep_error[r] = std::current_exception();
    }
  });
  for (std::size_t r = 0; r < replications; ++r)
    if (rep_error[r]) std::rethrow_exception(rep_error[r]);

  out.mean = detail::mean_of(out.z_samples);
  out.variance = detail::sample_sd(out.z_samples, out.mean);
  out.variance *= out.variance;
  std::size_t hits = 0;
  for (char c : covered) hits += c;
  out.coverage95 = static_cast<double>(hits) / static_cast<double>(replications);
  return out;
}

}  // namespace netprec
