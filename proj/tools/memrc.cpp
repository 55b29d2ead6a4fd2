// memrc: command-line front end for the memristor reservoir toolkit.
//
// Subcommands: simulate, analyze, delay, z3, rank. All randomness flows from
// the single seed; two invocations with identical arguments produce
// byte-identical outputs regardless of --threads.

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "memrc/config.hpp"
#include "memrc/csv.hpp"
#include "memrc/device.hpp"
#include "memrc/experiments.hpp"
#include "memrc/harmonics.hpp"
#include "memrc/signal.hpp"

namespace {

constexpr const char* kUsage =
    "usage: memrc <simulate|analyze|delay|z3|rank> [--config <path>] [--seed N]\n"
    "             [--out <dir>] [--threads N]\n"
    "\n"
    "  simulate  integrate a single device, write trajectory.csv (t,x,v)\n"
    "  analyze   analytic vs empirical harmonic table (analyze.csv)\n"
    "  delay     signal-delayer experiment, reports under <out>/delay/\n"
    "  z3        Z/3 binary-operator experiment, reports under <out>/z3/\n"
    "  rank      design-matrix diagnostics, reports under <out>/rank/\n"
    "\n"
    "  Output directory: --out, else config 'out', else $MEMRC_OUT, else ./out\n";

struct CliArgs {
  std::string command;
  std::string config_path;
  std::string out;
  std::string seed;
  std::string threads;
};

CliArgs parse_args(int argc, char** argv) {
  CliArgs args;
  if (argc < 2) throw memrc::ConfigError("missing subcommand");
  args.command = argv[1];
  for (int i = 2; i < argc; ++i) {
    const std::string flag = argv[i];
    auto need_value = [&](const char* name) -> std::string {
      if (i + 1 >= argc) throw memrc::ConfigError(std::string(name) + " needs a value");
      return argv[++i];
    };
    if (flag == "--config")
      args.config_path = need_value("--config");
    else if (flag == "--out")
      args.out = need_value("--out");
    else if (flag == "--seed")
      args.seed = need_value("--seed");
    else if (flag == "--threads")
      args.threads = need_value("--threads");
    else
      throw memrc::ConfigError("unknown flag '" + flag + "'");
  }
  return args;
}

std::string resolve_out_dir(const CliArgs& args, const memrc::ExperimentConfig& cfg) {
  if (!args.out.empty()) return args.out;
  if (!cfg.out.empty()) return cfg.out;
  if (const char* env = std::getenv("MEMRC_OUT"); env && *env) return env;
  return "out";
}

memrc::Signal signal_from_config(const memrc::ExperimentConfig& cfg) {
  if (cfg.signal_kind == "sinusoid")
    return memrc::sinusoid_with_mean(cfg.signal_m, cfg.signal_alpha, cfg.signal_omega);
  if (cfg.signal_kind == "fourier")
    return memrc::random_fourier_signal(cfg.signal_alpha, cfg.seed, cfg.signal_stream,
                                        cfg.signal_n_terms)
        .with_mean(cfg.signal_m);
  return memrc::z3_encoding(cfg.signal_s1, cfg.signal_s2);
}

int run_simulate(const memrc::ExperimentConfig& cfg, const std::string& out_dir) {
  const memrc::Signal sig = signal_from_config(cfg);
  memrc::IntegrateOptions opt{cfg.solver_record_every, cfg.solver_record_from};
  memrc::Trajectory traj;
  if (cfg.device_model == "wiener") {
    memrc::WienerParams wp;
    wp.base = cfg.device;
    wp.lambda_l = cfg.device_lambda_l;
    wp.z_s = cfg.device_z_s;
    wp.z0 = cfg.device_z0;
    bool overflow = false;
    traj = memrc::integrate_wiener_volatile(sig, wp, cfg.signal_duration, cfg.solver_dt, opt,
                                            &overflow);
    if (overflow)
      std::fprintf(stderr, "warning: |z - z_s| exceeded 1e6; unbounded linear state\n");
  } else {
    traj = memrc::integrate_volatile_nonlinear(sig, cfg.device, cfg.signal_duration,
                                               cfg.solver_dt, opt);
  }
  memrc::ensure_directory(out_dir);
  const std::string path = out_dir + "/trajectory.csv";
  memrc::write_trajectory_csv(traj, path);
  memrc::write_signal_csv(sig, cfg.solver_dt * cfg.solver_record_every, cfg.signal_duration,
                          out_dir + "/signal.csv");
  std::printf("simulate: %zu samples, final x=%s -> %s\n", traj.size(),
              memrc::format_double(traj.states.back()).c_str(), path.c_str());
  return 0;
}

int run_analyze(const memrc::ExperimentConfig& cfg, const std::string& out_dir) {
  memrc::ensure_directory(out_dir);
  const std::string path = out_dir + "/analyze.csv";
  memrc::CsvWriter csv(path);
  csv.raw_line("omega,epsilon,phi,a_w,b_w,a_2w,b_2w,src");
  const double eps = cfg.signal_m - cfg.device.lambda;
  double worst_rel = 0.0;
  for (double omega : cfg.analyze_omegas) {
    const memrc::HarmonicCoeffs hc =
        memrc::harmonic_coeffs(cfg.device, cfg.signal_m, cfg.signal_alpha, omega);
    csv.row(omega, eps, hc.phi, hc.a_w, hc.b_w, hc.a_2w, hc.b_2w, "analytic");

    const double period = 2.0 * M_PI / omega;
    const double duration = cfg.analyze_duration > 0.0
                                ? cfg.analyze_duration
                                : std::max(60.0 / std::max(eps, 0.1), 40.0 * period);
    const double dt = std::min(period / 2000.0, 4e-4 / std::max(1.0, cfg.signal_m));
    const memrc::Signal sig = memrc::sinusoid_with_mean(cfg.signal_m, cfg.signal_alpha, omega);
    const memrc::Trajectory traj = memrc::integrate_volatile_nonlinear(
        sig, cfg.device, duration, dt, {.record_every = 10});
    const memrc::HarmonicFit fit = memrc::empirical_harmonics(traj, omega, 2);
    const double phi_meas = memrc::measured_delay_phase(traj, omega);
    csv.row(omega, eps, phi_meas, fit.sine[0], fit.cosine[0], fit.sine[1], fit.cosine[1],
            "empirical");
    worst_rel = std::max(worst_rel, std::abs(fit.sine[0] - hc.a_w) / std::abs(hc.a_w));
  }
  csv.close();
  std::printf("analyze: %zu omegas, worst a_w rel dev %s -> %s\n", cfg.analyze_omegas.size(),
              memrc::format_double(worst_rel).c_str(), path.c_str());
  return 0;
}

int run_delay(const memrc::ExperimentConfig& cfg, const std::string& out_dir) {
  const memrc::DelayResult res = memrc::run_delay_experiment(cfg.delay_config());
  memrc::emit_delay_report(res, out_dir + "/delay");
  double min_train = 1.0;
  for (double c : res.train_corr) min_train = std::min(min_train, c);
  std::printf("delay: rank=%d min train corr=%s over %zu delays -> %s/delay\n", res.rank,
              memrc::format_double(min_train).c_str(), res.delays.size(), out_dir.c_str());
  return 0;
}

int run_z3(const memrc::ExperimentConfig& cfg, const std::string& out_dir) {
  const memrc::Z3Result res = memrc::run_z3_experiment(cfg.z3_config());
  memrc::emit_z3_report(res, out_dir + "/z3");
  std::printf("z3: solved(<=3 errors)=%s of %ld operators, rank=%d -> %s/z3\n",
              memrc::format_double(res.solved_3_or_less).c_str(), res.n_operators, res.rank,
              out_dir.c_str());
  return 0;
}

int run_rank(const memrc::ExperimentConfig& cfg, const std::string& out_dir) {
  memrc::DesignMatrix theta;
  double tol = 0.0;
  if (cfg.rank_source == "delay") {
    const memrc::DelayExperimentConfig dc = cfg.delay_config();
    tol = dc.rank_tol;
    theta = memrc::build_delay_design(dc).theta;
  } else {
    const memrc::Z3ExperimentConfig zc = cfg.z3_config();
    tol = zc.rank_tol;
    theta = memrc::build_z3_design(zc).theta;
  }
  const memrc::RankResult rank = memrc::numerical_rank(theta, tol);
  const std::string dir = out_dir + "/rank";
  memrc::ensure_directory(dir);
  memrc::write_design_matrix_csv(theta, dir + "/design_matrix.csv");
  memrc::write_singular_values_csv(rank.singular_values, dir + "/singular_values.csv");
  std::printf("rank: source=%s rank=%d (tol=%s) sigma1=%s -> %s\n", cfg.rank_source.c_str(),
              rank.rank, memrc::format_double(tol).c_str(),
              memrc::format_double(rank.singular_values(0)).c_str(), dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CliArgs args;
  memrc::ExperimentConfig cfg;
  try {
    args = parse_args(argc, argv);
    if (args.command == "--help" || args.command == "help") {
      std::fputs(kUsage, stdout);
      return 0;
    }
    if (!args.config_path.empty()) cfg = memrc::load_config_file(args.config_path);
    if (!args.seed.empty()) {
      char* end = nullptr;
      cfg.seed = std::strtoull(args.seed.c_str(), &end, 10);
      if (end == args.seed.c_str() || *end != '\0')
        throw memrc::ConfigError("--seed must be a non-negative integer");
    }
    if (!args.threads.empty()) {
      char* end = nullptr;
      const long threads = std::strtol(args.threads.c_str(), &end, 10);
      if (end == args.threads.c_str() || *end != '\0' || threads < 0)
        throw memrc::ConfigError("--threads must be a non-negative integer");
      cfg.threads = static_cast<int>(threads);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "config error: %s\n%s", e.what(), kUsage);
    return 1;
  }

  const std::string out_dir = resolve_out_dir(args, cfg);
  try {
    if (args.command == "simulate") return run_simulate(cfg, out_dir);
    if (args.command == "analyze") return run_analyze(cfg, out_dir);
    if (args.command == "delay") return run_delay(cfg, out_dir);
    if (args.command == "z3") return run_z3(cfg, out_dir);
    if (args.command == "rank") return run_rank(cfg, out_dir);
    std::fprintf(stderr, "config error: unknown subcommand '%s'\n%s", args.command.c_str(), kUsage);
    return 1;
  } catch (const memrc::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "runtime error: %s\n", e.what());
    return 2;
  }
}
