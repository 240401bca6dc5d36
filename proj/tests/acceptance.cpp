// Acceptance suite: end-to-end checks of the estimator, the distributional
// theory it relies on, and the Monte Carlo reproductions. Each criterion
// prints one PASS/FAIL line; the process exits nonzero if any fail.
//
// Usage: acceptance <path-to-cli> [criterion numbers...]

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "netprec/netprec.hpp"
#include "test_util.hpp"

using namespace netprec;
namespace fs = std::filesystem;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }

  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---- criterion 1: population exactness on random banded precision matrices

Check criterion_exactness() {
  Check c;
  std::mt19937 gen(101);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t p = 2 + gen() % 49;                     // p <= 50
    const std::size_t s0 = 1 + gen() % std::min<std::size_t>(8, p);
    const DenseMatrix omega = test_util::random_banded_precision(gen, p, s0);
    const DenseMatrix sigma = test_util::gauss_jordan_inverse(omega);
    const GraphStructure g = test_util::band_structure(p, s0);
    const PrecisionEstimate est = estimate_precision(sigma, g);
    worst = std::max(worst, max_abs_diff(est.omega_hat, omega));
  }
  c.expect(worst <= 1e-9, "max elementwise error " + fmt(worst) + " > 1e-9");
  c.note("max error " + fmt(worst) + " over 100 instances");
  return c;
}

// ---- criterion 2: exact representation identity

Check criterion_representation() {
  Check c;
  std::mt19937 gen(102);
  double worst_rel = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t dim = 2 + gen() % 29;  // dims 2..30
    const DenseMatrix a = test_util::random_spd(gen, dim);
    const DenseMatrix b = test_util::random_spd(gen, dim);
    const DenseMatrix omega = invert_spd(a);
    const DenseMatrix s_inv = invert_spd(b);
    DenseMatrix w(dim, dim);
    for (std::size_t k = 0; k < dim * dim; ++k) w.data()[k] = b.data()[k] - a.data()[k];
    const double scale = norms(omega).sup;
    for (std::size_t pivot = 0; pivot < dim; ++pivot) {
      const double res = representation_residual(s_inv, omega, w, pivot);
      worst_rel = std::max(worst_rel, res / scale);
    }
  }
  c.expect(worst_rel <= 1e-10, "relative residual " + fmt(worst_rel) + " > 1e-10");
  c.note("max relative residual " + fmt(worst_rel));
  return c;
}

// ---- criterion 3: closed-form variance vs Monte Carlo

Check criterion_variance() {
  Check c;
  std::mt19937 gen(103);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    const std::size_t s = 2 + gen() % 5;  // s_i <= 6
    const DenseMatrix omega = test_util::random_spd(gen, s, 0.7);
    const DenseMatrix sigma = test_util::gauss_jordan_inverse(omega);
    const CholeskyFactor l = cholesky(sigma);
    std::vector<double> m(s);
    for (double& v : m) v = normal(gen);
    const std::size_t pivot = gen() % s;

    const std::vector<double> a = multiply(omega, m);
    std::vector<double> gvec(s, 0.0);
    gvec[pivot] = 1.0;
    const std::vector<double> b = multiply(omega, gvec);

    const std::size_t draws = 1000000;
    double sum = 0.0, sum_sq = 0.0;
    std::vector<double> u(s), y(s);
    for (std::size_t d = 0; d < draws; ++d) {
      for (double& v : u) v = normal(gen);
      for (std::size_t i = 0; i < s; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j <= i; ++j) acc += l.lower(i, j) * u[j];
        y[i] = acc;
      }
      const double v = dot(a, y) * dot(b, y);
      sum += v;
      sum_sq += v * v;
    }
    const double mean = sum / draws;
    const double mc = (sum_sq - draws * mean * mean) / (draws - 1);
    const double h = variance_h(omega, m, pivot);
    worst = std::max(worst, std::abs(mc - h) / h);
  }
  c.expect(worst <= 0.02, "relative deviation " + fmt(worst) + " > 2%");
  c.note("max relative deviation " + fmt(worst) + " over 20 instances");
  return c;
}

// ---- criterion 4: inverse perturbation inequality on sampled covariances

Check criterion_perturbation() {
  Check c;
  std::mt19937 gen(104);
  int evaluated = 0;
  double worst_margin = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const DenseMatrix sigma = test_util::random_spd(gen, 5, 0.3);
    const DenseMatrix x = sample_mvn(sigma, 200, 40000 + rep);
    const DenseMatrix s = sample_covariance(x);
    const DenseMatrix sigma_inv = invert_spd(sigma);
    DenseMatrix w(5, 5);
    for (std::size_t k = 0; k < 25; ++k) w.data()[k] = s.data()[k] - sigma.data()[k];
    const double t = norms(multiply(sigma_inv, w)).spectral;
    if (t >= 1.0) continue;
    ++evaluated;
    const DenseMatrix s_inv = invert_spd(s);
    DenseMatrix diff(5, 5);
    for (std::size_t k = 0; k < 25; ++k) diff.data()[k] = s_inv.data()[k] - sigma_inv.data()[k];
    const double lhs = norms(diff).spectral;
    const double rhs = norms(sigma_inv).spectral * t / (1.0 - t);
    worst_margin = std::max(worst_margin, lhs / rhs);
    if (lhs > rhs * (1.0 + 1e-6)) {
      c.expect(false, "inequality violated: lhs " + fmt(lhs) + " rhs " + fmt(rhs));
      return c;
    }
  }
  c.expect(evaluated >= 150, "only " + std::to_string(evaluated) + " pairs satisfied the norm condition");
  c.note(std::to_string(evaluated) + " pairs, worst lhs/rhs " + fmt(worst_margin));
  return c;
}

// ---- criteria 5-7: Monte Carlo table reproductions

Check criterion_table1() {
  Check c;
  StudyConfig cfg;
  cfg.n_list = {500};
  cfg.ratio_list = {0.1};
  cfg.s0 = 4;
  cfg.replications = 300;
  cfg.seed = 42;
  cfg.threads = default_thread_count();
  const StudyResult result = run_study(cfg);
  const StudyRow& row = result.rows.at(0);
  c.expect(row.failures == 0, "unexpected failures");
  c.expect(row.rel_bias_mean >= 0.07 && row.rel_bias_mean <= 0.11,
           "RelBias " + fmt(row.rel_bias_mean) + " outside [0.07, 0.11]");
  c.expect(row.abs_bias_mean >= 0.03 && row.abs_bias_mean <= 0.05,
           "AbsBias " + fmt(row.abs_bias_mean) + " outside [0.03, 0.05]");
  const double expected[4] = {1.02, 0.61, 0.37, 0.22};
  for (int k = 0; k < 4; ++k)
    c.expect(std::abs(row.component_means[k] - expected[k]) <= 0.03,
             "component " + std::to_string(k + 1) + " mean " + fmt(row.component_means[k]) +
                 " not within 0.03 of " + fmt(expected[k]));
  c.note("RelBias " + fmt(row.rel_bias_mean) + ", AbsBias " + fmt(row.abs_bias_mean));
  return c;
}

Check criterion_table2() {
  Check c;
  StudyConfig cfg;
  cfg.n_list = {100};
  cfg.ratio_list = {0.1};
  cfg.s0 = 6;
  cfg.replications = 300;
  cfg.seed = 42;
  cfg.threads = default_thread_count();
  const StudyResult result = run_study(cfg);
  const StudyRow& row = result.rows.at(0);
  c.expect(row.rel_bias_mean >= 0.33 && row.rel_bias_mean <= 0.50,
           "RelBias " + fmt(row.rel_bias_mean) + " outside [0.33, 0.50]");
  c.note("RelBias " + fmt(row.rel_bias_mean));
  return c;
}

Check criterion_table3() {
  Check c;
  StudyConfig cfg;
  cfg.n_list = {100};
  cfg.ratio_list = {0.1};
  cfg.s0 = 4;
  cfg.replications = 100;
  cfg.seed = 42;
  cfg.methods = {Method::kProposed, Method::kTiger};
  cfg.threads = default_thread_count();
  const StudyResult result = run_study(cfg);
  const StudyRow& proposed = result.rows.at(0);
  const StudyRow& tiger = result.rows.at(1);
  c.expect(proposed.rel_bias_mean >= 0.18 && proposed.rel_bias_mean <= 0.30,
           "proposed RelBias " + fmt(proposed.rel_bias_mean) + " outside [0.18, 0.30]");
  c.expect(tiger.rel_bias_mean >= 0.55 && tiger.rel_bias_mean <= 0.78,
           "tiger RelBias " + fmt(tiger.rel_bias_mean) + " outside [0.55, 0.78]");
  c.expect(proposed.rel_bias_mean < tiger.rel_bias_mean,
           "proposed does not beat tiger");
  c.note("proposed " + fmt(proposed.rel_bias_mean) + " vs tiger " + fmt(tiger.rel_bias_mean));
  return c;
}

// ---- criterion 8: asymptotic normality and coverage

Check criterion_normality() {
  Check c;
  const GroundTruth gt = make_ground_truth(50, 4);
  const SelectionMap map = selection(gt.structure, 1);
  std::vector<double> m(map.support.size(), 0.0);
  m[map.pivot] = 1.0;  // f_i
  const NormalityResult res =
      normality_study(gt, 500, m, 1, 2000, 42, 0.95, default_thread_count());
  c.expect(std::abs(res.mean) < 0.1, "z mean " + fmt(res.mean) + " not within 0.1 of 0");
  c.expect(std::abs(res.variance - 1.0) < 0.15,
           "z variance " + fmt(res.variance) + " not within 0.15 of 1");
  c.expect(res.coverage95 >= 0.93 && res.coverage95 <= 0.97,
           "coverage " + fmt(res.coverage95) + " outside [0.93, 0.97]");
  c.note("mean " + fmt(res.mean) + ", var " + fmt(res.variance) + ", coverage " +
         fmt(res.coverage95));
  return c;
}

// ---- criterion 9: error halves when n quadruples

Check criterion_rate_trend() {
  Check c;
  const GroundTruth gt = make_ground_truth(50, 4);
  const BandedPrecisionSampler sampler(gt.omega, 3);
  const SelectionMap map = selection(gt.structure, 0);
  std::vector<double> true_w(map.support.size());
  for (std::size_t k = 0; k < true_w.size(); ++k) true_w[k] = gt.omega(map.support[k], 0);

  std::vector<double> medians;
  for (std::size_t n : {100u, 400u, 1600u}) {
    std::vector<double> errors(100);
    parallel_for(100, default_thread_count(), [&](std::size_t seed) {
      const DenseMatrix x = sampler.sample(n, seed_combine(424242, seed));
      DenseMatrix x_sub(n, map.support.size());
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t col = 0; col < map.support.size(); ++col)
          x_sub(k, col) = x(k, map.support[col]);
      const DenseMatrix s_sub = sample_covariance(x_sub);
      const CholeskyFactor f = cholesky(s_sub);
      std::vector<double> rhs(map.support.size(), 0.0);
      rhs[map.pivot] = 1.0;
      const std::vector<double> w = solve_spd(f, rhs);
      double err = 0.0;
      for (std::size_t k = 0; k < w.size(); ++k)
        err += (w[k] - true_w[k]) * (w[k] - true_w[k]);
      errors[seed] = std::sqrt(err);
    });
    medians.push_back(median_of(errors));
  }
  const double f1 = medians[0] / medians[1];
  const double f2 = medians[1] / medians[2];
  c.expect(f1 >= 1.6 && f1 <= 2.6, "factor 100->400 " + fmt(f1) + " outside [1.6, 2.6]");
  c.expect(f2 >= 1.6 && f2 <= 2.6, "factor 400->1600 " + fmt(f2) + " outside [1.6, 2.6]");
  c.note("shrink factors " + fmt(f1) + ", " + fmt(f2));
  return c;
}

// ---- criterion 10: CLI determinism

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "<unreadable:" + path.string() + ">";
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

Check criterion_determinism(const std::string& cli) {
  Check c;
  if (cli.empty()) {
    c.expect(false, "no CLI path given");
    return c;
  }
  const fs::path dir =
      fs::temp_directory_path() / ("netprec_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string a = (dir / "a").string();
  const std::string b = (dir / "b").string();
  const std::string common =
      " simulate --n-list 100 --ratio-list 0.5 --s0 4 --reps 5 --seed 7 --out ";
  const int ra = std::system((cli + common + a + " --threads 1 > /dev/null").c_str());
  const int rb = std::system((cli + common + b + " --threads 4 > /dev/null").c_str());
  c.expect(WIFEXITED(ra) && WEXITSTATUS(ra) == 0, "first run failed");
  c.expect(WIFEXITED(rb) && WEXITSTATUS(rb) == 0, "second run failed");
  if (c.ok) {
    c.expect(slurp(a + ".csv") == slurp(b + ".csv"), "CSV outputs differ");
    c.expect(slurp(a + ".txt") == slurp(b + ".txt"), "table outputs differ");
  }
  fs::remove_all(dir);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  std::set<int> wanted;
  for (int i = 2; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  struct Criterion {
    int number;
    const char* name;
    std::function<Check()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "population exactness on random banded precision matrices",
       criterion_exactness},
      {2, "exact representation identity", criterion_representation},
      {3, "closed-form variance matches a 1e6-draw Monte Carlo", criterion_variance},
      {4, "inverse perturbation inequality on sampled covariances",
       criterion_perturbation},
      {5, "accuracy study, n=500 p/n=0.1 s0=4 (300 reps)", criterion_table1},
      {6, "accuracy study, n=100 p/n=0.1 s0=6 (300 reps)", criterion_table2},
      {7, "paired comparison against TIGER, n=100 p/n=0.1 s0=4 (100 reps)",
       criterion_table3},
      {8, "asymptotic normality and CI coverage", criterion_normality},
      {9, "first-column error rate trend over n = 100/400/1600", criterion_rate_trend},
      {10, "CLI determinism across runs and thread counts",
       [&cli]() { return criterion_determinism(cli); }},
  };

  int failures = 0;
  for (const Criterion& crit : criteria) {
    if (!wanted.empty() && !wanted.count(crit.number)) continue;
    const auto start = std::chrono::steady_clock::now();
    Check result;
    try {
      result = crit.run();
    } catch (const std::exception& e) {
      result.ok = false;
      result.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s  criterion %2d: %s (%s) [%.1fs]\n", result.ok ? "PASS" : "FAIL",
                crit.number, crit.name, result.detail.c_str(), secs);
    std::fflush(stdout);
    if (!result.ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
