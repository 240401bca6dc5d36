// Command-line front end: estimate a precision matrix from data files, run
// the Monte Carlo study, compare the structure-aware estimator against
// TIGER, and run the asymptotic-normality study.
//
// Exit codes: 0 success, 2 usage/config/I-O error, 3 numerical failure.

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "netprec/netprec.hpp"

namespace {

using nlohmann::json;

std::string sidecar_path(const std::string& out) { return out + ".json"; }

int run_estimate(const std::string& data_path, const std::string& method,
                 const std::string& structure_path, bool symmetrize_flag,
                 const std::string& out_path, std::uint64_t seed, unsigned threads,
                 std::size_t k_folds, std::size_t n_lambda) {
  const netprec::DenseMatrix x = netprec::read_csv_matrix(data_path);
  json meta;
  meta["method"] = method;
  meta["symmetrize"] = symmetrize_flag;
  meta["n"] = x.rows();
  meta["p"] = x.cols();

  netprec::DenseMatrix omega;
  if (method == "proposed") {
    if (structure_path.empty())
      throw netprec::ConfigError("--method proposed requires --structure");
    const netprec::GraphStructure g = netprec::read_structure(structure_path, x.cols());
    const netprec::DenseMatrix s = netprec::sample_covariance(x);
    const netprec::PrecisionEstimate est =
        netprec::estimate_precision(s, g, symmetrize_flag, threads);
    omega = est.omega_hat;
    meta["per_column_condition"] = est.per_column_condition;
  } else if (method == "tiger") {
    netprec::TigerConfig cfg;
    cfg.k_folds = k_folds;
    cfg.n_lambda = n_lambda;
    cfg.seed = seed;
    const netprec::TigerFit fit = netprec::cross_validate(x, cfg, threads);
    omega = symmetrize_flag ? netprec::symmetrize(fit.omega_hat) : fit.omega_hat;
    meta["chosen_lambda"] = fit.chosen_lambda;
    json losses = json::array();
    for (const auto& [lambda, loss] : fit.cv_losses) losses.push_back({lambda, loss});
    meta["cv_losses"] = losses;
    meta["per_column_tau"] = fit.per_column_tau;
    meta["all_converged"] = fit.all_converged;
  } else {
    throw netprec::ConfigError("unknown --method '" + method + "'");
  }

  netprec::write_csv_matrix(out_path, omega);
  netprec::atomic_write(sidecar_path(out_path), meta.dump(2) + "\n");
  std::printf("wrote %s and %s\n", out_path.c_str(), sidecar_path(out_path).c_str());
  return 0;
}

netprec::StudyConfig build_study_config(const std::vector<std::size_t>& n_list,
                                        const std::vector<double>& ratio_list, std::size_t s0,
                                        double rho, std::size_t reps, std::uint64_t seed,
                                        const std::vector<std::string>& method_names,
                                        unsigned threads, std::size_t k_folds,
                                        std::size_t n_lambda) {
  netprec::StudyConfig cfg;
  if (!n_list.empty()) cfg.n_list = n_list;
  if (!ratio_list.empty()) cfg.ratio_list = ratio_list;
  cfg.s0 = s0;
  cfg.rho = rho;
  cfg.replications = reps;
  cfg.seed = seed;
  cfg.threads = threads;
  cfg.tiger.k_folds = k_folds;
  cfg.tiger.n_lambda = n_lambda;
  cfg.methods.clear();
  for (const std::string& name : method_names)
    cfg.methods.push_back(netprec::parse_method(name));
  return cfg;
}

int run_simulate(const netprec::StudyConfig& cfg, const std::string& out_prefix, bool compare) {
  if (compare) {
    const bool has_tiger = std::find(cfg.methods.begin(), cfg.methods.end(),
                                     netprec::Method::kTiger) != cfg.methods.end();
    const bool has_proposed = std::find(cfg.methods.begin(), cfg.methods.end(),
                                        netprec::Method::kProposed) != cfg.methods.end();
    if (!has_tiger || !has_proposed)
      throw netprec::ConfigError("compare requires --methods to include proposed and tiger");
  }
  const netprec::StudyResult result = netprec::run_study(cfg);
  const std::string table =
      compare ? netprec::comparison_table(result) : netprec::study_to_table(result);
  netprec::atomic_write(out_prefix + ".csv", netprec::study_to_csv(result));
  netprec::atomic_write(out_prefix + ".txt", table);
  std::fputs(table.c_str(), stdout);
  std::printf("wrote %s.csv and %s.txt\n", out_prefix.c_str(), out_prefix.c_str());
  return 0;
}

int run_normality(std::size_t n, double ratio, std::size_t s0, double rho, std::size_t column,
                  const std::vector<double>& m_in, double level, std::size_t reps,
                  std::uint64_t seed, unsigned threads, const std::string& out_path) {
  const auto p = netprec::StudyConfig::dimension_for(n, ratio);
  if (p < s0) throw netprec::ConfigError("ratio implies p below s0");
  const netprec::GroundTruth gt = netprec::make_ground_truth(p, s0, rho);
  const netprec::SelectionMap map = netprec::selection(gt.structure, column);

  std::vector<double> m = m_in;
  if (m.empty()) {
    m.assign(map.support.size(), 0.0);
    m[map.pivot] = 1.0;  // f_i: the column's own position within its support
  }
  const netprec::NormalityResult res =
      netprec::normality_study(gt, n, m, column, reps, seed, level, threads);

  std::string z_csv;
  for (double z : res.z_samples) {
    z_csv += netprec::format_double(z);
    z_csv.push_back('\n');
  }
  netprec::atomic_write(out_path, z_csv);
  if (reps == 0) {
    std::printf("mean n/a  variance n/a  coverage95 n/a\n");
  } else {
    std::printf("mean %.3f  variance %.3f  coverage95 %.3f\n", res.mean, res.variance,
                res.coverage95);
  }
  std::printf("wrote %s\n", out_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Precision-matrix estimation with a known graphical structure"};
  app.require_subcommand(1);

  std::uint64_t seed = 42;
  unsigned threads = netprec::default_thread_count();
  app.add_option("--seed", seed, "Master seed for all randomness")->capture_default_str();
  app.add_option("--threads", threads, "Worker pool size")->capture_default_str();

  // estimate
  auto* est = app.add_subcommand("estimate", "Estimate a precision matrix from a data CSV");
  std::string data_path, structure_path, out_path, method = "proposed";
  bool symmetrize_flag = false;
  std::size_t k_folds = 5, n_lambda = 5;
  est->add_option("--data", data_path, "Data CSV, n rows x p columns, no header")->required();
  est->add_option("--method", method, "proposed|tiger")->capture_default_str();
  est->add_option("--structure", structure_path,
                  "Known structure: dense 0/1 CSV or 'i,j' edge list (proposed only)");
  est->add_flag("--symmetrize", symmetrize_flag, "Write (W + W^T)/2 instead of the raw columns");
  est->add_option("--out", out_path, "Output CSV for the estimate")->required();
  est->add_option("--k-folds", k_folds, "CV folds (tiger)")->capture_default_str();
  est->add_option("--n-lambda", n_lambda, "Penalty grid size (tiger)")->capture_default_str();

  // simulate / compare share options
  std::vector<std::size_t> n_list;
  std::vector<double> ratio_list;
  std::size_t s0 = 4, reps = 300;
  double rho = 0.6;
  std::vector<std::string> methods{"proposed"};
  std::string out_prefix = "study";
  auto add_study_options = [&](CLI::App* cmd) {
    cmd->add_option("--n-list", n_list, "Sample sizes (default 100,300,500)")->delimiter(',');
    cmd->add_option("--ratio-list", ratio_list, "p/n ratios (default 0.1,0.5,1,5,10)")
        ->delimiter(',');
    cmd->add_option("--s0", s0, "Nonzeros per column of the true precision matrix")
        ->capture_default_str();
    cmd->add_option("--rho", rho, "Band decay of the true precision matrix")
        ->capture_default_str();
    cmd->add_option("--reps", reps, "Monte Carlo replications")->capture_default_str();
    cmd->add_option("--out", out_prefix, "Output prefix for .csv and .txt")
        ->capture_default_str();
    cmd->add_option("--k-folds", k_folds, "CV folds (tiger)")->capture_default_str();
    cmd->add_option("--n-lambda", n_lambda, "Penalty grid size (tiger)")->capture_default_str();
  };
  auto* sim = app.add_subcommand("simulate", "Monte Carlo accuracy study on synthetic data");
  add_study_options(sim);
  sim->add_option("--methods", methods, "Estimators to run (proposed,tiger)")->delimiter(',');

  auto* cmp = app.add_subcommand("compare", "Paired comparison of proposed vs tiger");
  add_study_options(cmp);
  std::vector<std::string> cmp_methods{"proposed", "tiger"};
  cmp->add_option("--methods", cmp_methods, "Estimators to compare")->delimiter(',');

  // normality
  auto* nrm = app.add_subcommand("normality", "Sampling distribution of the z statistic");
  std::size_t nrm_n = 500, nrm_reps = 2000, nrm_column = 0;
  double nrm_ratio = 0.1, level = 0.95;
  std::vector<double> m_values;
  std::string nrm_out = "zsamples.csv";
  nrm->add_option("--n-list", nrm_n, "Sample size (first value used)")->delimiter(',');
  nrm->add_option("--ratio-list", nrm_ratio, "p/n ratio (first value used)")->delimiter(',');
  nrm->add_option("--s0", s0, "Nonzeros per column")->capture_default_str();
  nrm->add_option("--rho", rho, "Band decay")->capture_default_str();
  nrm->add_option("--column", nrm_column, "Column whose functional is studied")
      ->capture_default_str();
  nrm->add_option("--m", m_values, "Functional weights on the column support (default f_i)")
      ->delimiter(',');
  nrm->add_option("--level", level, "Confidence level for the coverage check")
      ->capture_default_str();
  nrm->add_option("--reps", nrm_reps, "Replications")->capture_default_str();
  nrm->add_option("--out", nrm_out, "Output CSV of z samples")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }

  try {
    if (app.got_subcommand(est))
      return run_estimate(data_path, method, structure_path, symmetrize_flag, out_path, seed,
                          threads, k_folds, n_lambda);
    if (app.got_subcommand(sim) || app.got_subcommand(cmp)) {
      const bool compare = app.got_subcommand(cmp);
      const netprec::StudyConfig cfg =
          build_study_config(n_list, ratio_list, s0, rho, reps, seed,
                             compare ? cmp_methods : methods, threads, k_folds, n_lambda);
      return run_simulate(cfg, out_prefix, compare);
    }
    if (app.got_subcommand(nrm))
      return run_normality(nrm_n, nrm_ratio, s0, rho, nrm_column, m_values, level, nrm_reps,
                           seed, threads, nrm_out);
  } catch (const netprec::NumericalError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const netprec::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
