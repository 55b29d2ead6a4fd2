#ifndef MEMRC_CONFIG_HPP
#define MEMRC_CONFIG_HPP

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "memrc/bank.hpp"
#include "memrc/errors.hpp"
#include "memrc/experiments.hpp"

namespace memrc {

// Line-oriented `section.key = value` configuration. Every field has a
// default; unknown keys are a hard error so typos cannot silently fall back
// to defaults. Lists are whitespace- or comma-separated numbers.

struct ExperimentConfig {
  // global
  std::uint64_t seed = 42;
  int threads = 0;  // 0 = available parallelism
  std::string out = "";

  // single device (simulate / analyze)
  MemristorParams device{.mu = 1.0, .lambda = 1.0, .R = 2.0, .r = 1.0, .x0 = 0.5};
  std::string device_model = "nonlinear";  // nonlinear | wiener
  double device_lambda_l = 1.0;
  double device_z_s = -2.0;
  double device_z0 = 0.0;

  // signal (simulate / analyze)
  std::string signal_kind = "sinusoid";  // sinusoid | fourier | z3
  double signal_m = 2.0;
  double signal_alpha = 0.2;
  double signal_omega = 5.0;
  std::uint64_t signal_stream = 0;
  int signal_n_terms = 12;
  int signal_s1 = 0;
  int signal_s2 = 0;
  double signal_duration = 40.0;

  // solver (simulate)
  double solver_dt = 1e-3;
  long solver_record_every = 1;
  double solver_record_from = 0.0;

  // bank geometry shared by delay / z3 / rank
  int bank_n = 10;
  double bank_lambda = 1.0;
  double bank_mu = 1.0;
  double bank_R = 2.0;
  double bank_r = 1.0;
  double bank_x0 = 0.5;
  std::string bank_model = "nonlinear";
  std::string bank_bias_mode = "independent";
  double bank_shared_m = 0.0;
  double bank_jitter = 0.0;

  // readout grid (delay / z3)
  int readout_grid_size = 9;
  double readout_grid_lo = 1e-10;
  double readout_grid_hi = 1.0;

  // delay experiment
  int delay_n_signals = 50;
  double delay_alpha = 1.0;
  int delay_n_terms = 12;
  int delay_periods = 36;
  int delay_train_periods = 12;
  int delay_samples_per_period = 150;
  int delay_substeps = 10;
  std::vector<double> delay_grid;  // empty = default grid
  double delay_rank_tol = 1.5e-5;
  int delay_folds = 10;
  double delay_eps_lo = 0.1;
  double delay_eps_hi = 100.0;

  // z3 experiment
  double z3_sample_hz = 150.0;
  int z3_substeps = 10;
  std::vector<double> z3_offsets = {0.95, 0.7, 0.5};
  double z3_rank_tol = 1e-2;
  long z3_operators = 0;
  std::vector<double> z3_baseline_ranks = {1, 3, 5, 7, 9};
  int z3_baseline_trials = 5;
  int z3_folds = 10;
  double z3_eps_lo = 0.1;
  double z3_eps_hi = 10.0;

  // analyze
  std::vector<double> analyze_omegas = {2.0, 3.0, 5.0, 7.0, 10.0};
  double analyze_duration = 0.0;  // 0 = choose from the transient time scale

  // rank
  std::string rank_source = "z3";

  BankSpec bank_spec(double eps_lo, double eps_hi) const {
    BankSpec spec;
    spec.n = bank_n;
    spec.eps_lo = eps_lo;
    spec.eps_hi = eps_hi;
    spec.base_lambda = bank_lambda;
    spec.mu = bank_mu;
    spec.R = bank_R;
    spec.r = bank_r;
    spec.x0 = bank_x0;
    spec.model = bank_model == "wiener" ? BankModel::kVolatileWiener : BankModel::kVolatileNonlinear;
    spec.bias_mode = bank_bias_mode == "shared" ? BiasMode::kShared : BiasMode::kIndependent;
    spec.shared_m = bank_shared_m;
    spec.jitter = bank_jitter;
    return spec;
  }

  DelayExperimentConfig delay_config() const {
    DelayExperimentConfig cfg;
    cfg.bank = bank_spec(delay_eps_lo, delay_eps_hi);
    cfg.n_signals = delay_n_signals;
    cfg.alpha = delay_alpha;
    cfg.n_terms = delay_n_terms;
    cfg.periods = delay_periods;
    cfg.train_periods = delay_train_periods;
    cfg.samples_per_period = delay_samples_per_period;
    cfg.substeps = delay_substeps;
    cfg.delay_grid = delay_grid;
    cfg.rank_tol = delay_rank_tol;
    cfg.k_folds = delay_folds;
    cfg.readout = {readout_grid_size, readout_grid_lo, readout_grid_hi};
    cfg.seed = seed;
    cfg.threads = threads;
    return cfg;
  }

  Z3ExperimentConfig z3_config() const {
    Z3ExperimentConfig cfg;
    cfg.bank = bank_spec(z3_eps_lo, z3_eps_hi);
    cfg.sample_hz = z3_sample_hz;
    cfg.substeps = z3_substeps;
    cfg.offsets = z3_offsets;
    cfg.rank_tol = z3_rank_tol;
    cfg.n_operators = z3_operators;
    cfg.baseline_ranks.clear();
    for (double r : z3_baseline_ranks) cfg.baseline_ranks.push_back(static_cast<int>(r));
    cfg.baseline_trials = z3_baseline_trials;
    cfg.k_folds = z3_folds;
    cfg.readout = {readout_grid_size, readout_grid_lo, readout_grid_hi};
    cfg.seed = seed;
    cfg.threads = threads;
    return cfg;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

inline double parse_number(const std::string& value, int line) {
  const std::string v = trim(value);
  char* end = nullptr;
  const double parsed = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError("not a number: '" + v + "'", line);
  return parsed;
}

inline std::vector<double> parse_list(const std::string& value, int line) {
  std::string v = value;
  for (auto& c : v)
    if (c == ',') c = ' ';
  std::istringstream in(v);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(parse_number(tok, line));
  return out;
}

struct KeyHandler {
  std::function<void(ExperimentConfig&, const std::string&, int)> apply;
};

inline void check(bool ok, const std::string& key, const std::string& what, int line) {
  if (!ok) throw RangeViolationError(key + ": " + what, line);
}

inline const std::map<std::string, KeyHandler>& key_table() {
  static const std::map<std::string, KeyHandler> table = [] {
    std::map<std::string, KeyHandler> t;
    auto num = [&t](const std::string& key, double ExperimentConfig::* field,
                    std::function<void(double, const std::string&, int)> validate = {}) {
      t[key] = {[field, validate, key](ExperimentConfig& c, const std::string& v, int line) {
        const double parsed = parse_number(v, line);
        if (validate) validate(parsed, key, line);
        c.*field = parsed;
      }};
    };
    auto integer = [&t](const std::string& key, int ExperimentConfig::* field, int lo, int hi) {
      t[key] = {[field, lo, hi, key](ExperimentConfig& c, const std::string& v, int line) {
        const double parsed = parse_number(v, line);
        check(parsed == static_cast<int>(parsed), key, "must be an integer", line);
        check(parsed >= lo && parsed <= hi, key,
              "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]", line);
        c.*field = static_cast<int>(parsed);
      }};
    };
    auto positive = [](double v, const std::string& key, int line) {
      check(v > 0.0, key, "must be > 0", line);
    };
    auto non_negative = [](double v, const std::string& key, int line) {
      check(v >= 0.0, key, "must be >= 0", line);
    };
    auto open01 = [](double v, const std::string& key, int line) {
      check(v > 0.0 && v < 1.0, key, "must be in (0, 1)", line);
    };
    auto choice = [&t](const std::string& key, std::string ExperimentConfig::* field,
                       std::vector<std::string> allowed) {
      t[key] = {[field, allowed, key](ExperimentConfig& c, const std::string& v, int line) {
        const std::string val = trim(v);
        for (const auto& a : allowed)
          if (val == a) {
            c.*field = val;
            return;
          }
        std::string what = "must be one of {";
        for (std::size_t i = 0; i < allowed.size(); ++i)
          what += (i ? ", " : "") + allowed[i];
        throw RangeViolationError(key + ": " + what + "}", line);
      }};
    };
    auto list = [&t](const std::string& key, std::vector<double> ExperimentConfig::* field) {
      t[key] = {[field](ExperimentConfig& c, const std::string& v, int line) {
        c.*field = parse_list(v, line);
      }};
    };

    t["seed"] = {[](ExperimentConfig& c, const std::string& v, int line) {
      const double parsed = parse_number(v, line);
      check(parsed >= 0 && parsed == std::floor(parsed), "seed", "must be a non-negative integer",
            line);
      c.seed = static_cast<std::uint64_t>(parsed);
    }};
    integer("threads", &ExperimentConfig::threads, 0, 4096);
    t["out"] = {[](ExperimentConfig& c, const std::string& v, int) { c.out = trim(v); }};

    t["device.mu"] = {[positive](ExperimentConfig& c, const std::string& v, int line) {
      const double parsed = parse_number(v, line);
      positive(parsed, "device.mu", line);
      c.device.mu = parsed;
    }};
    t["device.lambda"] = {[non_negative](ExperimentConfig& c, const std::string& v, int line) {
      const double parsed = parse_number(v, line);
      non_negative(parsed, "device.lambda", line);
      c.device.lambda = parsed;
    }};
    t["device.R"] = {[positive](ExperimentConfig& c, const std::string& v, int line) {
      const double parsed = parse_number(v, line);
      positive(parsed, "device.R", line);
      c.device.R = parsed;
    }};
    t["device.r"] = {[positive](ExperimentConfig& c, const std::string& v, int line) {
      const double parsed = parse_number(v, line);
      positive(parsed, "device.r", line);
      c.device.r = parsed;
    }};
    t["device.x0"] = {[open01](ExperimentConfig& c, const std::string& v, int line) {
      const double parsed = parse_number(v, line);
      open01(parsed, "device.x0", line);
      c.device.x0 = parsed;
    }};
    choice("device.model", &ExperimentConfig::device_model, {"nonlinear", "wiener"});
    num("device.lambda_l", &ExperimentConfig::device_lambda_l,
        [](double v, const std::string& k, int l) { check(v >= 0.0, k, "must be >= 0", l); });
    num("device.z_s", &ExperimentConfig::device_z_s,
        [](double v, const std::string& k, int l) { check(v <= 0.0, k, "must be <= 0", l); });
    num("device.z0", &ExperimentConfig::device_z0);

    choice("signal.kind", &ExperimentConfig::signal_kind, {"sinusoid", "fourier", "z3"});
    num("signal.m", &ExperimentConfig::signal_m);
    num("signal.alpha", &ExperimentConfig::signal_alpha);
    num("signal.omega", &ExperimentConfig::signal_omega, positive);
    t["signal.stream"] = {[](ExperimentConfig& c, const std::string& v, int line) {
      const double parsed = parse_number(v, line);
      check(parsed >= 0 && parsed == std::floor(parsed), "signal.stream",
            "must be a non-negative integer", line);
      c.signal_stream = static_cast<std::uint64_t>(parsed);
    }};
    integer("signal.n_terms", &ExperimentConfig::signal_n_terms, 1, 4096);
    integer("signal.s1", &ExperimentConfig::signal_s1, 0, 2);
    integer("signal.s2", &ExperimentConfig::signal_s2, 0, 2);
    num("signal.duration", &ExperimentConfig::signal_duration, positive);

    num("solver.dt", &ExperimentConfig::solver_dt, positive);
    t["solver.record_every"] = {[](ExperimentConfig& c, const std::string& v, int line) {
      const double parsed = parse_number(v, line);
      check(parsed >= 1 && parsed == std::floor(parsed), "solver.record_every",
            "must be an integer >= 1", line);
      c.solver_record_every = static_cast<long>(parsed);
    }};
    num("solver.record_from", &ExperimentConfig::solver_record_from, non_negative);

    integer("bank.n", &ExperimentConfig::bank_n, 1, 100000);
    num("bank.lambda", &ExperimentConfig::bank_lambda, non_negative);
    num("bank.mu", &ExperimentConfig::bank_mu, positive);
    num("bank.R", &ExperimentConfig::bank_R, positive);
    num("bank.r", &ExperimentConfig::bank_r, positive);
    num("bank.x0", &ExperimentConfig::bank_x0,
        [](double v, const std::string& k, int l) { check(v > 0.0 && v < 1.0, k, "must be in (0, 1)", l); });
    choice("bank.model", &ExperimentConfig::bank_model, {"nonlinear", "wiener"});
    choice("bank.bias_mode", &ExperimentConfig::bank_bias_mode, {"independent", "shared"});
    num("bank.shared_m", &ExperimentConfig::bank_shared_m, non_negative);
    num("bank.jitter", &ExperimentConfig::bank_jitter, non_negative);

    integer("readout.grid_size", &ExperimentConfig::readout_grid_size, 1, 1024);
    num("readout.grid_lo", &ExperimentConfig::readout_grid_lo, positive);
    num("readout.grid_hi", &ExperimentConfig::readout_grid_hi, positive);

    integer("delay.n_signals", &ExperimentConfig::delay_n_signals, 1, 1000000);
    num("delay.alpha", &ExperimentConfig::delay_alpha, positive);
    integer("delay.n_terms", &ExperimentConfig::delay_n_terms, 1, 4096);
    integer("delay.periods", &ExperimentConfig::delay_periods, 1, 100000);
    integer("delay.train_periods", &ExperimentConfig::delay_train_periods, 1, 100000);
    integer("delay.samples_per_period", &ExperimentConfig::delay_samples_per_period, 2, 100000);
    integer("delay.substeps", &ExperimentConfig::delay_substeps, 1, 100000);
    list("delay.grid", &ExperimentConfig::delay_grid);
    num("delay.rank_tol", &ExperimentConfig::delay_rank_tol, positive);
    integer("delay.folds", &ExperimentConfig::delay_folds, 2, 100000);
    num("delay.eps_lo", &ExperimentConfig::delay_eps_lo, positive);
    num("delay.eps_hi", &ExperimentConfig::delay_eps_hi, positive);

    num("z3.sample_hz", &ExperimentConfig::z3_sample_hz, positive);
    integer("z3.substeps", &ExperimentConfig::z3_substeps, 1, 100000);
    list("z3.offsets", &ExperimentConfig::z3_offsets);
    num("z3.rank_tol", &ExperimentConfig::z3_rank_tol, positive);
    t["z3.operators"] = {[](ExperimentConfig& c, const std::string& v, int line) {
      const double parsed = parse_number(v, line);
      check(parsed >= 0 && parsed <= 19683 && parsed == std::floor(parsed), "z3.operators",
            "must be an integer in [0, 19683]", line);
      c.z3_operators = static_cast<long>(parsed);
    }};
    list("z3.baseline_ranks", &ExperimentConfig::z3_baseline_ranks);
    integer("z3.baseline_trials", &ExperimentConfig::z3_baseline_trials, 1, 1000);
    integer("z3.folds", &ExperimentConfig::z3_folds, 2, 100000);
    num("z3.eps_lo", &ExperimentConfig::z3_eps_lo, positive);
    num("z3.eps_hi", &ExperimentConfig::z3_eps_hi, positive);

    list("analyze.omegas", &ExperimentConfig::analyze_omegas);
    num("analyze.duration", &ExperimentConfig::analyze_duration, non_negative);

    choice("rank.source", &ExperimentConfig::rank_source, {"delay", "z3"});
    return t;
  }();
  return table;
}

}  // namespace detail

// Parses config text; '#' starts a comment, blank lines are ignored.
inline ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto comment = raw.find('#');
    if (comment != std::string::npos) raw.erase(comment);
    const std::string line = detail::trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'section.key = value'", line_no);
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    const auto& table = detail::key_table();
    const auto it = table.find(key);
    if (it == table.end()) throw UnknownKeyError("unknown key '" + key + "'", line_no);
    if (value.empty()) throw ConfigError("empty value for '" + key + "'", line_no);
    it->second.apply(cfg, value, line_no);
  }

  // cross-field checks
  if (cfg.device.R <= cfg.device.r)
    throw RangeViolationError("device.R must exceed device.r");
  if (cfg.bank_R <= cfg.bank_r) throw RangeViolationError("bank.R must exceed bank.r");
  if (cfg.delay_train_periods > cfg.delay_periods)
    throw RangeViolationError("delay.train_periods must not exceed delay.periods");
  if (cfg.delay_eps_hi <= cfg.delay_eps_lo)
    throw RangeViolationError("delay.eps_hi must exceed delay.eps_lo");
  if (cfg.z3_eps_hi <= cfg.z3_eps_lo)
    throw RangeViolationError("z3.eps_hi must exceed z3.eps_lo");
  if (cfg.readout_grid_hi < cfg.readout_grid_lo)
    throw RangeViolationError("readout.grid_hi must be >= readout.grid_lo");
  for (double r : cfg.z3_baseline_ranks)
    if (r < 1 || r > 9 || r != std::floor(r))
      throw RangeViolationError("z3.baseline_ranks entries must be integers in [1, 9]");
  for (double d : cfg.delay_grid)
    if (d < 0.0) throw RangeViolationError("delay.grid delays must be >= 0");
  return cfg;
}

inline ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace memrc

#endif  // MEMRC_CONFIG_HPP
