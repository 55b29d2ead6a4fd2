#ifndef MEMRC_EXPERIMENTS_HPP
#define MEMRC_EXPERIMENTS_HPP

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "memrc/bank.hpp"
#include "memrc/csv.hpp"
#include "memrc/device.hpp"
#include "memrc/errors.hpp"
#include "memrc/parallel.hpp"
#include "memrc/readout.hpp"
#include "memrc/rng.hpp"
#include "memrc/signal.hpp"
#include "memrc/svg.hpp"

namespace memrc {

// ---------------------------------------------------------------------------
// Signal delayer: train linear readouts over a bank driven by random Fourier
// signals so the mixture reproduces gamma(t - d) for each delay d.
// ---------------------------------------------------------------------------

struct RegGridSpec {
  int size = 9;
  double lo = 1e-8;  // multiples of sigma1^2
  double hi = 1.0;
};

struct DelayExperimentConfig {
  BankSpec bank;
  int n_signals = 50;
  double alpha = 1.0;
  int n_terms = 12;
  int periods = 36;
  int train_periods = 12;
  int samples_per_period = 150;
  int substeps = 10;               // integration steps per recorded sample
  std::vector<double> delay_grid;  // defaults to 10 values spanning [0.05, 0.5]
  double rank_tol = 1.5e-5;
  int k_folds = 10;
  RegGridSpec readout{.size = 9, .lo = 1e-10, .hi = 1.0};
  std::uint64_t seed = 42;
  int threads = 0;

  void validate() const {
    bank.validate();
    if (n_signals < 1) throw Error("delay: need n_signals >= 1");
    if (n_terms < 1) throw Error("delay: need n_terms >= 1");
    if (periods < 1 || train_periods < 1 || train_periods > periods)
      throw Error("delay: bad periods/train_periods");
    if (samples_per_period < 2 || substeps < 1) throw Error("delay: bad sampling");
    if (rank_tol <= 0.0) throw Error("delay: rank_tol must be > 0");
    if (k_folds < 2) throw Error("delay: need k_folds >= 2");
  }
};

struct DelayResult {
  std::vector<double> delays;
  std::vector<double> train_corr;
  std::vector<double> test_corr;
  Eigen::MatrixXd weight_matrix;  // one row per delay; device columns then bias
  std::vector<double> device_epsilons;
  std::vector<double> weight_center;  // |w|-weighted mean of log eps_i per delay
  int rank = 0;
  Eigen::VectorXd singular_values;
};

// Delays beyond ~a quarter of the signal period alias back through the
// periodic target (components with full-cycle phase need no memory at all),
// so the default grid stays in the monotone-recruitment regime.
inline std::vector<double> default_delay_grid(int points = 10, double lo = 0.05, double hi = 0.5) {
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i)
    grid[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1);
  return grid;
}

namespace detail {

// |w|-weighted mean of log(eps_i) over the device columns.
inline double weight_log_eps_center(const Eigen::VectorXd& weights,
                                    const std::vector<double>& eps) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const double a = std::abs(weights(static_cast<Eigen::Index>(i)));
    num += a * std::log(eps[i]);
    den += a;
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace detail

struct DelayDesign {
  std::vector<BankUnit> bank;
  std::vector<Signal> signals;       // train signals, then the held-out test signal
  std::vector<DesignMatrix> blocks;  // per-train-signal row blocks
  DesignMatrix test_block;
  DesignMatrix theta;  // train blocks stacked
};

// Simulates the bank over every training signal (plus one held-out test
// signal) and stacks the time-series design matrix from the last
// train_periods periods.
inline DelayDesign build_delay_design(const DelayExperimentConfig& cfg) {
  cfg.validate();
  const double period = 2.0;  // random Fourier signals repeat every 2 time units
  const double duration = period * cfg.periods;
  SimulateOptions sim;
  sim.dt = period / (cfg.samples_per_period * cfg.substeps);
  sim.record_every = cfg.substeps;
  sim.record_from = period * (cfg.periods - cfg.train_periods);
  sim.threads = 1;  // parallelism lives at the signal level here

  DelayDesign design;
  design.bank = build_bank(cfg.bank, cfg.seed);

  // Signal streams: 0..n_signals-1 train, n_signals is the held-out test.
  const int total_signals = cfg.n_signals + 1;
  design.signals.reserve(static_cast<std::size_t>(total_signals));
  for (int s = 0; s < total_signals; ++s)
    design.signals.push_back(random_fourier_signal(
        cfg.alpha, cfg.seed, static_cast<std::uint64_t>(s), cfg.n_terms, cfg.samples_per_period));

  design.blocks.resize(static_cast<std::size_t>(total_signals));
  parallel_for(static_cast<std::size_t>(total_signals), cfg.threads, [&](std::size_t s) {
    const auto traces = simulate_bank(design.bank, design.signals[s], duration, sim, cfg.bank.model);
    design.blocks[s] = design_matrix_timeseries(traces, 1, true);
  });
  design.test_block = std::move(design.blocks.back());
  design.blocks.pop_back();
  design.theta = vstack(design.blocks);
  design.theta.validate();
  return design;
}

inline DelayResult run_delay_experiment(const DelayExperimentConfig& cfg) {
  const std::vector<double> grid =
      cfg.delay_grid.empty() ? default_delay_grid() : cfg.delay_grid;
  DelayDesign design = build_delay_design(cfg);
  const std::vector<BankUnit>& bank = design.bank;
  const std::vector<Signal>& signals = design.signals;
  const std::vector<DesignMatrix>& blocks = design.blocks;
  const DesignMatrix& test_block = design.test_block;
  const DesignMatrix& theta = design.theta;

  std::vector<double> eps(bank.size());
  for (std::size_t i = 0; i < bank.size(); ++i) eps[i] = bank[i].epsilon();

  DelayResult res;
  res.delays = grid;
  res.device_epsilons = eps;
  const RankResult rank = numerical_rank(theta, cfg.rank_tol);
  res.rank = rank.rank;
  res.singular_values = rank.singular_values;

  const std::vector<double> reg_grid = default_reg_grid(
      rank.singular_values(0), cfg.readout.size, cfg.readout.lo, cfg.readout.hi);

  // Targets: the zero-mean waveform delayed by d, evaluated analytically at
  // the recorded timestamps (the signals are periodic, so delays wrap).
  auto target_for = [&](const Signal& sig, const std::vector<double>& stamps, double d) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(stamps.size()));
    for (std::size_t k = 0; k < stamps.size(); ++k)
      y(static_cast<Eigen::Index>(k)) = sig.zero_mean(stamps[k] - d);
    return y;
  };

  const auto n_delays = grid.size();
  res.train_corr.resize(n_delays);
  res.test_corr.resize(n_delays);
  res.weight_center.resize(n_delays);
  res.weight_matrix.resize(static_cast<Eigen::Index>(n_delays), theta.cols());

  // Row block s of theta belongs to signal s; assemble per-delay targets once.
  const std::size_t rows_per_signal = blocks.front().row_meta.size();
  parallel_for(n_delays, cfg.threads, [&](std::size_t di) {
    const double d = grid[di];
    Eigen::VectorXd y(theta.rows());
    for (int s = 0; s < cfg.n_signals; ++s) {
      const auto& stamps = blocks[static_cast<std::size_t>(s)].row_meta;
      y.segment(static_cast<Eigen::Index>(s * rows_per_signal),
                static_cast<Eigen::Index>(rows_per_signal)) =
          target_for(signals[static_cast<std::size_t>(s)], stamps, d);
    }
    const ReadoutModel model = ridge_fit(theta, y, reg_grid, cfg.k_folds, cfg.seed);
    res.weight_matrix.row(static_cast<Eigen::Index>(di)) = model.weights.transpose();
    res.train_corr[di] = correlation_coefficient(y, predict(model, theta));
    const Eigen::VectorXd y_test =
        target_for(signals.back(), test_block.row_meta, d);
    res.test_corr[di] = correlation_coefficient(y_test, predict(model, test_block));
    res.weight_center[di] = detail::weight_log_eps_center(model.weights, eps);
  });
  return res;
}

// ---------------------------------------------------------------------------
// Binary operators over Z/3: frequency-encoded input pairs, buffered readout,
// cross-validated error counts for all 3^9 operators.
// ---------------------------------------------------------------------------

struct Z3ExperimentConfig {
  BankSpec bank{.eps_lo = 0.1, .eps_hi = 10.0};
  double sample_hz = 150.0;
  int substeps = 10;
  std::vector<double> offsets = {0.95, 0.7, 0.5};  // in units of 2 pi / omega1
  double rank_tol = 1e-2;
  long n_operators = 0;  // 0 = all 19683, otherwise a seeded subsample
  std::vector<int> baseline_ranks = {1, 3, 5, 7, 9};
  int baseline_trials = 5;  // random matrices averaged per rank
  int k_folds = 10;
  RegGridSpec readout{.size = 9, .lo = 1e-10, .hi = 1.0};
  std::uint64_t seed = 42;
  int threads = 0;

  void validate() const {
    bank.validate();
    if (sample_hz <= 0.0 || substeps < 1) throw Error("z3: bad sampling");
    if (offsets.empty()) throw Error("z3: need sample offsets");
    if (rank_tol <= 0.0) throw Error("z3: rank_tol must be > 0");
    if (n_operators < 0 || n_operators > 19683) throw Error("z3: n_operators out of range");
    if (baseline_trials < 1) throw Error("z3: need baseline_trials >= 1");
    if (k_folds < 2) throw Error("z3: need k_folds >= 2");
    for (int r : baseline_ranks)
      if (r < 1 || r > 9) throw Error("z3: baseline rank out of range");
  }
};

struct Z3Result {
  std::array<long, 10> error_histogram{};  // operators per error count 0..9
  double solved_3_or_less = 0.0;
  int rank = 0;
  Eigen::VectorXd singular_values;
  std::array<long, 10> raw_histogram{};  // baseline built from the inputs directly
  double raw_solved = 0.0;
  // Random-matrix baselines: histograms are summed over baseline_trials
  // matrices (so they total n_operators * baseline_trials); solved fractions
  // are means over trials.
  std::map<int, std::array<long, 10>> baseline_histograms;
  std::map<int, double> baseline_solved;
  long n_operators = 0;
};

namespace detail {

// Operator id -> targets over the 9 pairs ordered (s1,s2) lexicographically;
// digit p of the base-3 expansion is the label of pair p.
inline std::vector<int> z3_operator_targets(long op_id) {
  std::vector<int> t(9);
  for (int p = 0; p < 9; ++p) {
    t[static_cast<std::size_t>(p)] = static_cast<int>(op_id % 3);
    op_id /= 3;
  }
  return t;
}

struct Z3Tally {
  std::array<long, 10> histogram{};
  double solved_fraction = 0.0;
};

// Cross-validated error histogram over the requested operator set. Each
// operator's readout is ridge-fit with k-fold CV over the row-replicated
// design matrix (one replica per fold) and its refit predictions are
// classified against the 9 targets.
inline Z3Tally z3_histogram(const Eigen::MatrixXd& theta, const std::vector<long>& op_ids,
                            const RegGridSpec& readout, int k_folds, int threads) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(theta);
  const std::vector<double> grid =
      default_reg_grid(svd.singularValues()(0), readout.size, readout.lo, readout.hi);
  const ReplicatedCvScorer scorer(theta, grid, k_folds);

  std::vector<int> errors(op_ids.size());
  parallel_for(op_ids.size(), threads, [&](std::size_t i) {
    const std::vector<int> targets = z3_operator_targets(op_ids[i]);
    Eigen::VectorXd y(9);
    for (int p = 0; p < 9; ++p) y(p) = targets[static_cast<std::size_t>(p)];
    const auto outcome = scorer.evaluate(y);
    errors[i] = count_errors(classify_z3(outcome.predictions), targets);
  });

  Z3Tally tally;
  long solved = 0;
  for (const int e : errors) {
    ++tally.histogram[static_cast<std::size_t>(std::min(e, 9))];
    if (e <= 3) ++solved;
  }
  tally.solved_fraction = static_cast<double>(solved) / static_cast<double>(op_ids.size());
  return tally;
}

}  // namespace detail

struct Z3Matrices {
  DesignMatrix theta;      // 9 x (devices * offsets) bank responses
  DesignMatrix raw_theta;  // 9 x offsets, the input signals sampled directly
};

// Simulates the 9 encoded pairs over T = 20 pi / omega1 and assembles the
// buffered design matrices for the bank and for the raw-input baseline.
inline Z3Matrices build_z3_design(const Z3ExperimentConfig& cfg) {
  cfg.validate();
  const double period1 = 2.0 * M_PI / kZ3Omega1;
  const double duration = 10.0 * period1;  // T = 20 pi / omega1
  SimulateOptions sim;
  sim.dt = 1.0 / (cfg.sample_hz * cfg.substeps);
  sim.record_every = cfg.substeps;
  sim.record_from = 0.0;
  sim.threads = 1;

  const auto bank = build_bank(cfg.bank, cfg.seed);

  // Simulate the 9 encoded pairs once; rows of the design matrix are pairs.
  std::vector<std::vector<Trajectory>> per_pair(9);
  std::vector<std::vector<Trajectory>> raw_pair(9);
  parallel_for(9, cfg.threads, [&](std::size_t p) {
    const int s1 = static_cast<int>(p) / 3;
    const int s2 = static_cast<int>(p) % 3;
    const Signal u = z3_encoding(s1, s2);
    per_pair[p] = simulate_bank(bank, u, duration, sim, cfg.bank.model);
    // Raw-input baseline: the same sampling applied to u(t) itself.
    Trajectory raw;
    const long n_steps = std::lround(duration / sim.dt);
    raw.times.reserve(static_cast<std::size_t>(n_steps / sim.record_every) + 1);
    for (long k = 0; k * sim.record_every <= n_steps; ++k) {
      const double t = sim.dt * static_cast<double>(k * sim.record_every);
      raw.times.push_back(t);
      raw.states.push_back(0.0);
      raw.voltages.push_back(u(t));
    }
    raw_pair[p] = {std::move(raw)};
  });

  Z3Matrices out;
  out.theta = design_matrix_buffered(per_pair, cfg.offsets, period1);
  out.theta.validate();
  out.raw_theta = design_matrix_buffered(raw_pair, cfg.offsets, period1);
  return out;
}

inline Z3Result run_z3_experiment(const Z3ExperimentConfig& cfg) {
  const Z3Matrices matrices = build_z3_design(cfg);
  const DesignMatrix& theta = matrices.theta;
  const DesignMatrix& raw_theta = matrices.raw_theta;

  Z3Result res;
  const RankResult rank = numerical_rank(theta, cfg.rank_tol);
  res.rank = rank.rank;
  res.singular_values = rank.singular_values;

  // Operator set: full enumeration or a seeded subsample without replacement.
  std::vector<long> op_ids;
  if (cfg.n_operators == 0 || cfg.n_operators >= 19683) {
    op_ids.resize(19683);
    for (long i = 0; i < 19683; ++i) op_ids[static_cast<std::size_t>(i)] = i;
  } else {
    std::vector<long> all(19683);
    for (long i = 0; i < 19683; ++i) all[static_cast<std::size_t>(i)] = i;
    CounterRng rng(cfg.seed, 0x5a33ULL);
    for (long i = 0; i < cfg.n_operators; ++i) {
      const auto j = i + static_cast<long>(rng.below(static_cast<std::uint64_t>(19683 - i)));
      std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(j)]);
    }
    op_ids.assign(all.begin(), all.begin() + cfg.n_operators);
  }
  res.n_operators = static_cast<long>(op_ids.size());

  const auto bank_tally =
      detail::z3_histogram(theta.values, op_ids, cfg.readout, cfg.k_folds, cfg.threads);
  res.error_histogram = bank_tally.histogram;
  res.solved_3_or_less = bank_tally.solved_fraction;

  const auto raw_tally =
      detail::z3_histogram(raw_theta.values, op_ids, cfg.readout, cfg.k_folds, cfg.threads);
  res.raw_histogram = raw_tally.histogram;
  res.raw_solved = raw_tally.solved_fraction;

  for (const int rank_k : cfg.baseline_ranks) {
    std::array<long, 10> hist{};
    double solved_sum = 0.0;
    for (int trial = 0; trial < cfg.baseline_trials; ++trial) {
      const std::uint64_t stream =
          cfg.seed + 1000ULL * static_cast<std::uint64_t>(rank_k) + static_cast<std::uint64_t>(trial);
      const DesignMatrix random =
          random_truncated_matrix(9, static_cast<int>(theta.cols()), rank_k, stream);
      const auto tally =
          detail::z3_histogram(random.values, op_ids, cfg.readout, cfg.k_folds, cfg.threads);
      for (std::size_t e = 0; e < 10; ++e) hist[e] += tally.histogram[e];
      solved_sum += tally.solved_fraction;
    }
    res.baseline_histograms[rank_k] = hist;
    res.baseline_solved[rank_k] = solved_sum / cfg.baseline_trials;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Report emission: CSV tables plus static SVG plots, byte-identical reruns.
// ---------------------------------------------------------------------------

inline void emit_delay_report(const DelayResult& res, const std::string& out_dir) {
  ensure_directory(out_dir);
  {
    CsvWriter csv(out_dir + "/correlations.csv");
    csv.raw_line("delay,train_corr,test_corr");
    for (std::size_t i = 0; i < res.delays.size(); ++i)
      csv.row(res.delays[i], res.train_corr[i], res.test_corr[i]);
    csv.close();
  }
  {
    CsvWriter csv(out_dir + "/weights.csv");
    std::string meta = "#meta eps:";
    for (double e : res.device_epsilons) meta += " " + format_double(e);
    csv.raw_line(meta);
    std::string header = "delay";
    for (std::size_t i = 0; i < res.device_epsilons.size(); ++i)
      header += ",w" + std::to_string(i);
    if (res.weight_matrix.cols() > static_cast<Eigen::Index>(res.device_epsilons.size()))
      header += ",bias";
    header += ",weight_center";
    csv.raw_line(header);
    for (std::size_t i = 0; i < res.delays.size(); ++i) {
      std::string line = format_double(res.delays[i]);
      for (Eigen::Index j = 0; j < res.weight_matrix.cols(); ++j)
        line += "," + format_double(res.weight_matrix(static_cast<Eigen::Index>(i), j));
      line += "," + format_double(res.weight_center[i]);
      csv.raw_line(line);
    }
    csv.close();
  }
  write_singular_values_csv(res.singular_values, out_dir + "/singular_values.csv");
  if (!res.delays.empty()) {
    svg::line_chart(out_dir + "/correlations.svg", "Delay task correlation", "delay",
                    "correlation", res.delays,
                    {{"train", res.train_corr}, {"test", res.test_corr}});
    std::vector<std::vector<double>> wm(res.delays.size());
    for (std::size_t i = 0; i < res.delays.size(); ++i) {
      wm[i].resize(res.device_epsilons.size());
      for (std::size_t j = 0; j < res.device_epsilons.size(); ++j)
        wm[i][j] = res.weight_matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    svg::heatmap(out_dir + "/weights.svg", "Readout weights (rows: delay, cols: eps)",
                 "device (increasing eps)", "delay index", wm);
  }
}

inline void emit_z3_report(const Z3Result& res, const std::string& out_dir) {
  ensure_directory(out_dir);
  {
    CsvWriter csv(out_dir + "/histogram.csv");
    std::string header = "errors,bank,raw";
    for (const auto& [rank_k, hist] : res.baseline_histograms) {
      (void)hist;
      header += ",rand_rank_" + std::to_string(rank_k);
    }
    csv.raw_line(header);
    for (int e = 0; e <= 9; ++e) {
      std::string line = std::to_string(e) + "," +
                         std::to_string(res.error_histogram[static_cast<std::size_t>(e)]) + "," +
                         std::to_string(res.raw_histogram[static_cast<std::size_t>(e)]);
      for (const auto& [rank_k, hist] : res.baseline_histograms) {
        (void)rank_k;
        line += "," + std::to_string(hist[static_cast<std::size_t>(e)]);
      }
      csv.raw_line(line);
    }
    csv.close();
  }
  write_singular_values_csv(res.singular_values, out_dir + "/singular_values.csv");
  {
    std::vector<std::string> cats;
    for (int e = 0; e <= 9; ++e) cats.push_back(std::to_string(e));
    // each series is normalized by its own total (baselines sum over trials)
    auto percentages = [](const std::array<long, 10>& hist) {
      double total = 0.0;
      for (long h : hist) total += static_cast<double>(h);
      std::vector<double> out(10);
      for (int e = 0; e <= 9; ++e)
        out[static_cast<std::size_t>(e)] =
            total > 0.0 ? 100.0 * hist[static_cast<std::size_t>(e)] / total : 0.0;
      return out;
    };
    std::vector<svg::Series> series;
    series.push_back({"memristor bank", percentages(res.error_histogram)});
    series.push_back({"raw inputs", percentages(res.raw_histogram)});
    for (const auto& [rank_k, hist] : res.baseline_histograms) {
      if (rank_k != 7) continue;  // keep the comparison plot readable
      series.push_back({"random rank 7", percentages(hist)});
    }
    svg::bar_chart(out_dir + "/histogram.svg", "Z/3 operators: CV error counts", "errors",
                   "% of operators", cats, series);
  }
}

}  // namespace memrc

#endif  // MEMRC_EXPERIMENTS_HPP
