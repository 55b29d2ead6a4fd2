#include <catch2/catch.hpp>
#include <filesystem>
#include <fstream>

#include "memrc/experiments.hpp"
#include "memrc/readout.hpp"

using namespace memrc;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

DelayExperimentConfig small_delay_config() {
  DelayExperimentConfig cfg;
  cfg.n_signals = 8;
  cfg.bank.n = 6;
  cfg.periods = 18;
  cfg.train_periods = 6;
  cfg.samples_per_period = 100;
  cfg.substeps = 6;
  cfg.threads = 2;
  return cfg;
}

}  // namespace

TEST_CASE("zero delay is reproduced almost exactly") {
  DelayExperimentConfig cfg = small_delay_config();
  cfg.delay_grid = {0.0, 0.2};
  const DelayResult res = run_delay_experiment(cfg);
  REQUIRE(res.test_corr[0] > 0.999);
  REQUIRE(res.train_corr[0] > 0.999);
  REQUIRE(res.weight_matrix.rows() == 2);
  REQUIRE(res.weight_matrix.cols() == cfg.bank.n + 1);  // devices + bias
  REQUIRE(res.device_epsilons.size() == static_cast<std::size_t>(cfg.bank.n));
  for (double c : res.train_corr) {
    REQUIRE(c >= -1.0);
    REQUIRE(c <= 1.0);
  }
}

TEST_CASE("delay design matrix covers the training periods only") {
  DelayExperimentConfig cfg = small_delay_config();
  const DelayDesign design = build_delay_design(cfg);
  const auto rows_per_signal = static_cast<Eigen::Index>(cfg.train_periods * cfg.samples_per_period);
  REQUIRE(design.blocks.front().rows() == rows_per_signal + 1);  // inclusive end point
  REQUIRE(design.theta.rows() == cfg.n_signals * (rows_per_signal + 1));
  REQUIRE(design.theta.cols() == cfg.bank.n + 1);
  // recorded timestamps start after the discarded transient periods
  REQUIRE(design.blocks.front().row_meta.front() >=
          2.0 * (cfg.periods - cfg.train_periods) - 1e-9);
}

TEST_CASE("z3 design matrices have the published shape") {
  Z3ExperimentConfig cfg;
  cfg.threads = 2;
  const Z3Matrices matrices = build_z3_design(cfg);
  REQUIRE(matrices.theta.rows() == 9);
  REQUIRE(matrices.theta.cols() == 30);  // 10 devices x 3 sample offsets
  REQUIRE(matrices.raw_theta.rows() == 9);
  REQUIRE(matrices.raw_theta.cols() == 3);
  REQUIRE(numerical_rank(matrices.theta, cfg.rank_tol).rank == 3);
  // the raw inputs are linear in the two amplitudes: rank 2
  REQUIRE(numerical_rank(matrices.raw_theta, 1e-6).rank == 2);
}

TEST_CASE("constant operator is solved nearly perfectly") {
  Z3ExperimentConfig cfg;
  cfg.threads = 2;
  const Z3Matrices matrices = build_z3_design(cfg);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(matrices.theta.values);
  const ReplicatedCvScorer scorer(
      matrices.theta.values,
      default_reg_grid(svd.singularValues()(0), cfg.readout.size, cfg.readout.lo, cfg.readout.hi),
      cfg.k_folds);
  for (int symbol : {0, 1, 2}) {
    const Eigen::VectorXd y = Eigen::VectorXd::Constant(9, symbol);
    const auto outcome = scorer.evaluate(y);
    const std::vector<int> target(9, symbol);
    REQUIRE(count_errors(classify_z3(outcome.predictions), target) <= 1);
  }
}

TEST_CASE("z3 error counts are independent of the input-pair ordering") {
  Z3ExperimentConfig cfg;
  cfg.threads = 2;
  const Z3Matrices matrices = build_z3_design(cfg);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(matrices.theta.values);
  const std::vector<double> grid =
      default_reg_grid(svd.singularValues()(0), cfg.readout.size, cfg.readout.lo, cfg.readout.hi);
  const ReplicatedCvScorer scorer(matrices.theta.values, grid, cfg.k_folds);

  // permute the 9 pairs: rows of theta and targets move together
  const std::array<int, 9> perm{4, 7, 0, 2, 8, 1, 5, 3, 6};
  Eigen::MatrixXd permuted(9, matrices.theta.cols());
  for (int p = 0; p < 9; ++p) permuted.row(p) = matrices.theta.values.row(perm[static_cast<std::size_t>(p)]);
  const ReplicatedCvScorer scorer_perm(permuted, grid, cfg.k_folds);

  CounterRng rng(4, 0);
  for (int trial = 0; trial < 12; ++trial) {
    const long op = static_cast<long>(rng.below(19683));
    Eigen::VectorXd y(9);
    std::vector<int> target(9);
    long id = op;
    for (int p = 0; p < 9; ++p) {
      target[static_cast<std::size_t>(p)] = static_cast<int>(id % 3);
      y(p) = target[static_cast<std::size_t>(p)];
      id /= 3;
    }
    Eigen::VectorXd y_perm(9);
    std::vector<int> target_perm(9);
    for (int p = 0; p < 9; ++p) {
      y_perm(p) = y(perm[static_cast<std::size_t>(p)]);
      target_perm[static_cast<std::size_t>(p)] = target[static_cast<std::size_t>(perm[static_cast<std::size_t>(p)])];
    }
    const int errors = count_errors(classify_z3(scorer.evaluate(y).predictions), target);
    const int errors_perm =
        count_errors(classify_z3(scorer_perm.evaluate(y_perm).predictions), target_perm);
    REQUIRE(errors == errors_perm);
  }
}

TEST_CASE("z3 subsampled run is deterministic and well-formed") {
  Z3ExperimentConfig cfg;
  cfg.n_operators = 250;
  cfg.baseline_ranks = {7};
  cfg.baseline_trials = 2;
  cfg.threads = 2;
  const Z3Result a = run_z3_experiment(cfg);
  const Z3Result b = run_z3_experiment(cfg);
  REQUIRE(a.error_histogram == b.error_histogram);
  REQUIRE(a.solved_3_or_less == b.solved_3_or_less);
  long total = 0;
  for (long h : a.error_histogram) total += h;
  REQUIRE(total == a.n_operators);
  long baseline_total = 0;
  for (long h : a.baseline_histograms.at(7)) baseline_total += h;
  REQUIRE(baseline_total == a.n_operators * cfg.baseline_trials);
}

TEST_CASE("reports are emitted with fixed names and byte-identical reruns") {
  const auto dir = std::filesystem::temp_directory_path() / "memrc_report_test";
  std::filesystem::remove_all(dir);

  SECTION("empty delay result gives header-only CSV and no plot") {
    DelayResult res;
    res.singular_values = Eigen::VectorXd::Zero(1);
    emit_delay_report(res, (dir / "delay").string());
    REQUIRE(slurp(dir / "delay" / "correlations.csv") == "delay,train_corr,test_corr\n");
    REQUIRE_FALSE(std::filesystem::exists(dir / "delay" / "correlations.svg"));
  }

  SECTION("z3 report layout and determinism") {
    Z3ExperimentConfig cfg;
    cfg.n_operators = 150;
    cfg.baseline_ranks = {7};
    cfg.baseline_trials = 1;
    cfg.threads = 2;
    const Z3Result res = run_z3_experiment(cfg);
    emit_z3_report(res, (dir / "z3a").string());
    emit_z3_report(res, (dir / "z3b").string());
    for (const char* name : {"histogram.csv", "singular_values.csv", "histogram.svg"}) {
      REQUIRE(std::filesystem::exists(dir / "z3a" / name));
      REQUIRE(slurp(dir / "z3a" / name) == slurp(dir / "z3b" / name));
    }
    // errors 0..9 -> exactly 10 data rows after the header
    std::istringstream hist(slurp(dir / "z3a" / "histogram.csv"));
    std::string line;
    int rows = -1;  // discount the header
    while (std::getline(hist, line))
      if (!line.empty()) ++rows;
    REQUIRE(rows == 10);
  }
  std::filesystem::remove_all(dir);
}
