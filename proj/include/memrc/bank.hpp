#ifndef MEMRC_BANK_HPP
#define MEMRC_BANK_HPP

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "memrc/csv.hpp"
#include "memrc/device.hpp"
#include "memrc/errors.hpp"
#include "memrc/harmonics.hpp"
#include "memrc/parallel.hpp"
#include "memrc/rng.hpp"
#include "memrc/signal.hpp"

namespace memrc {

// A series bank: current-controlled devices in series see the same current,
// so the bank simulates as independent units sharing the zero-mean waveform
// gamma(t), each with its own bias drive m_i.

enum class BankModel { kVolatileNonlinear, kVolatileWiener };
enum class BiasMode { kIndependent, kShared };

struct BankSpec {
  int n = 10;
  double eps_lo = 0.1;  // range of m_i - lambda_i, log-spaced inclusive
  double eps_hi = 100.0;
  double base_lambda = 1.0;
  double mu = 1.0;
  double R = 2.0;
  double r = 1.0;
  double x0 = 0.5;
  BankModel model = BankModel::kVolatileNonlinear;
  BiasMode bias_mode = BiasMode::kIndependent;
  double shared_m = 0.0;  // common bias when bias_mode == kShared
  double jitter = 0.0;    // lognormal sigma applied to lambda_i and mu_i

  void validate() const {
    if (n < 1) throw Error("BankSpec: need n >= 1");
    if (!(eps_lo > 0.0 && eps_hi > eps_lo)) throw Error("BankSpec: need 0 < eps_lo < eps_hi");
    if (base_lambda < 0.0 || mu <= 0.0) throw Error("BankSpec: bad lambda/mu");
    if (!(R > r && r > 0.0)) throw Error("BankSpec: need R > r > 0");
    if (!(x0 > 0.0 && x0 < 1.0)) throw Error("BankSpec: need 0 < x0 < 1");
    if (jitter < 0.0) throw Error("BankSpec: need jitter >= 0");
    if (bias_mode == BiasMode::kShared && shared_m <= 0.0)
      throw Error("BankSpec: shared bias mode needs shared_m > 0");
  }
};

struct BankUnit {
  MemristorParams params;
  double mean_drive = 0.0;  // m_i, drive units

  double epsilon() const { return mean_drive - params.lambda; }
};

// eps_i log-spaced over [eps_lo, eps_hi], endpoints inclusive. Independent
// bias mode keeps lambda shared and sets m_i = lambda_i + eps_i; shared mode
// fixes m and varies lambda_i instead. Jitter perturbs lambda_i and mu_i
// lognormally from a per-device counter stream.
inline std::vector<BankUnit> build_bank(const BankSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::vector<BankUnit> bank(static_cast<std::size_t>(spec.n));
  const double log_lo = std::log(spec.eps_lo);
  const double log_hi = std::log(spec.eps_hi);
  for (int i = 0; i < spec.n; ++i) {
    const double f = spec.n == 1 ? 0.0 : static_cast<double>(i) / (spec.n - 1);
    const double eps = std::exp(log_lo + f * (log_hi - log_lo));
    BankUnit& unit = bank[static_cast<std::size_t>(i)];
    unit.params.mu = spec.mu;
    unit.params.lambda = spec.base_lambda;
    unit.params.R = spec.R;
    unit.params.r = spec.r;
    unit.params.x0 = spec.x0;
    if (spec.jitter > 0.0) {
      CounterRng rng(seed, static_cast<std::uint64_t>(i));
      unit.params.lambda *= std::exp(spec.jitter * rng.gaussian());
      unit.params.mu *= std::exp(spec.jitter * rng.gaussian());
    }
    if (spec.bias_mode == BiasMode::kIndependent) {
      unit.mean_drive = unit.params.lambda + eps;
    } else {
      unit.mean_drive = spec.shared_m;
      unit.params.lambda = spec.shared_m - eps;
      if (unit.params.lambda < 0.0)
        throw Error("build_bank: shared_m too small for requested epsilon range");
    }
    unit.params.validate();
  }
  return bank;
}

struct SimulateOptions {
  double dt = 1e-3;
  long record_every = 1;
  double record_from = 0.0;
  int threads = 0;
};

// Integrates every unit under drive m_i + gamma(t). The shared waveform is
// sampled once; unit i only adds its bias, so all units see bit-identical
// gamma samples. Each task owns its trajectory slot: results do not depend
// on the thread count.
inline std::vector<Trajectory> simulate_bank(const std::vector<BankUnit>& bank,
                                             const Signal& shared_signal, double duration,
                                             const SimulateOptions& opt,
                                             BankModel model = BankModel::kVolatileNonlinear) {
  if (opt.dt <= 0.0) throw Error("simulate_bank: dt must be > 0");
  const long n_steps = std::lround(duration / opt.dt);
  const auto gamma2 = detail::sample_half_grid(shared_signal, 0.0, 0.0, opt.dt, n_steps);
  const long from = std::max(0L, std::lround(opt.record_from / opt.dt));
  const long every = std::max(1L, opt.record_every);

  std::vector<Trajectory> traces(bank.size());
  parallel_for(bank.size(), opt.threads, [&](std::size_t i) {
    const BankUnit& unit = bank[i];
    std::vector<double> drive2(gamma2.size());
    for (std::size_t k = 0; k < gamma2.size(); ++k) drive2[k] = unit.mean_drive + gamma2[k];
    if (model == BankModel::kVolatileNonlinear) {
      traces[i] = detail::integrate_nonlinear_buffer(drive2, unit.params, 0.0, opt.dt, n_steps,
                                                     from, every);
    } else {
      const WienerParams wp =
          wiener_equivalent_params(unit.mean_drive, unit.params.lambda, unit.params.x0, unit.params);
      traces[i] =
          detail::integrate_wiener_buffer(drive2, wp, 0.0, opt.dt, n_steps, from, every, nullptr);
    }
  });
  return traces;
}

struct ColumnMeta {
  int device = -1;  // -1 for bias or raw-input columns
  int sample = -1;  // sample-offset index for buffered matrices
  bool bias = false;
  std::string label;
};

struct DesignMatrix {
  Eigen::MatrixXd values;
  std::vector<double> row_meta;      // timestamp or input-pair id per row
  std::vector<ColumnMeta> col_meta;  // one entry per column

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }

  void validate() const {
    if (!values.allFinite()) throw Error("DesignMatrix: non-finite entries");
    if (static_cast<Eigen::Index>(row_meta.size()) != values.rows())
      throw LengthMismatchError("DesignMatrix: row_meta size mismatch");
    if (static_cast<Eigen::Index>(col_meta.size()) != values.cols())
      throw LengthMismatchError("DesignMatrix: col_meta size mismatch");
    int bias_cols = 0;
    for (std::size_t c = 0; c < col_meta.size(); ++c) {
      if (!col_meta[c].bias) continue;
      ++bias_cols;
      if (!(values.col(static_cast<Eigen::Index>(c)).array() == 1.0).all())
        throw Error("DesignMatrix: bias column must be identically 1");
    }
    if (bias_cols > 1) throw Error("DesignMatrix: more than one bias column");
  }
};

// Row per sampled timestamp, column per device voltage, optional trailing
// bias column of ones.
inline DesignMatrix design_matrix_timeseries(const std::vector<Trajectory>& traces,
                                             long sample_stride, bool with_bias) {
  if (traces.empty()) throw Error("design_matrix_timeseries: no traces");
  const std::vector<double>& grid = traces.front().times;
  for (const auto& tr : traces)
    if (tr.times != grid)
      throw GridMismatchError("design_matrix_timeseries: traces do not share the time grid");
  sample_stride = std::max(1L, sample_stride);

  const auto n_rows = static_cast<Eigen::Index>((grid.size() + sample_stride - 1) / sample_stride);
  const auto n_dev = static_cast<Eigen::Index>(traces.size());
  DesignMatrix dm;
  dm.values.resize(n_rows, n_dev + (with_bias ? 1 : 0));
  dm.row_meta.reserve(static_cast<std::size_t>(n_rows));
  for (Eigen::Index row = 0; row < n_rows; ++row) {
    const auto s = static_cast<std::size_t>(row * sample_stride);
    dm.row_meta.push_back(grid[s]);
    for (Eigen::Index d = 0; d < n_dev; ++d)
      dm.values(row, d) = traces[static_cast<std::size_t>(d)].voltages[s];
  }
  for (int d = 0; d < n_dev; ++d)
    dm.col_meta.push_back({d, -1, false, "v" + std::to_string(d)});
  if (with_bias) {
    dm.values.col(n_dev).setOnes();
    dm.col_meta.push_back({-1, -1, true, "bias"});
  }
  return dm;
}

// Stacks row blocks that share column metadata (e.g. one block per signal).
inline DesignMatrix vstack(const std::vector<DesignMatrix>& blocks) {
  if (blocks.empty()) throw Error("vstack: no blocks");
  Eigen::Index total = 0;
  for (const auto& b : blocks) {
    if (b.cols() != blocks.front().cols()) throw GridMismatchError("vstack: column count mismatch");
    total += b.rows();
  }
  DesignMatrix out;
  out.values.resize(total, blocks.front().cols());
  out.col_meta = blocks.front().col_meta;
  out.row_meta.reserve(static_cast<std::size_t>(total));
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    out.values.middleRows(at, b.rows()) = b.values;
    out.row_meta.insert(out.row_meta.end(), b.row_meta.begin(), b.row_meta.end());
    at += b.rows();
  }
  return out;
}

// One row per input pair; columns are device x offset voltage samples taken
// at T - offsets[j]*period, matched to the nearest recorded sample (the
// recording rate is chosen so the mismatch is below half a sample).
inline DesignMatrix design_matrix_buffered(const std::vector<std::vector<Trajectory>>& per_input,
                                           const std::vector<double>& sample_offsets,
                                           double period) {
  if (per_input.empty() || per_input.front().empty())
    throw Error("design_matrix_buffered: no traces");
  if (sample_offsets.empty()) throw Error("design_matrix_buffered: no sample offsets");
  const auto n_pairs = static_cast<Eigen::Index>(per_input.size());
  const auto n_dev = static_cast<Eigen::Index>(per_input.front().size());
  const auto n_off = static_cast<Eigen::Index>(sample_offsets.size());

  DesignMatrix dm;
  dm.values.resize(n_pairs, n_dev * n_off);
  for (Eigen::Index pair = 0; pair < n_pairs; ++pair) {
    const auto& traces = per_input[static_cast<std::size_t>(pair)];
    if (static_cast<Eigen::Index>(traces.size()) != n_dev)
      throw GridMismatchError("design_matrix_buffered: ragged device count");
    dm.row_meta.push_back(static_cast<double>(pair));
    for (Eigen::Index d = 0; d < n_dev; ++d) {
      const auto& tr = traces[static_cast<std::size_t>(d)];
      const double t_end = tr.times.back();
      const double grid_dt = tr.times.size() > 1 ? tr.times[1] - tr.times[0] : 0.0;
      for (Eigen::Index j = 0; j < n_off; ++j) {
        const double t_want = t_end - sample_offsets[static_cast<std::size_t>(j)] * period;
        if (t_want < tr.times.front() - 0.5 * grid_dt || t_want > t_end + 0.5 * grid_dt)
          throw OffsetOutOfRangeError("design_matrix_buffered: sample time outside trace");
        const auto idx = static_cast<std::size_t>(
            std::lround((t_want - tr.times.front()) / grid_dt));
        dm.values(pair, d * n_off + j) = tr.voltages[std::min(idx, tr.times.size() - 1)];
      }
    }
  }
  for (int d = 0; d < n_dev; ++d)
    for (int j = 0; j < n_off; ++j)
      dm.col_meta.push_back({d, j, false, "v" + std::to_string(d) + "s" + std::to_string(j)});
  return dm;
}

struct RankResult {
  int rank = 0;
  Eigen::VectorXd singular_values;
};

// Count of singular values >= tol * sigma_1. Tall matrices are reduced by a
// thin QR first; the SVD of R has the same singular values.
inline RankResult numerical_rank(const DesignMatrix& dm, double tol) {
  if (dm.values.size() == 0) throw Error("numerical_rank: empty matrix");
  Eigen::MatrixXd reduced;
  if (dm.values.rows() > 4 * dm.values.cols()) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(dm.values);
    reduced = qr.matrixQR().topRows(dm.values.cols()).triangularView<Eigen::Upper>();
  } else {
    reduced = dm.values;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(reduced);
  RankResult res;
  res.singular_values = svd.singularValues();
  if (res.singular_values.size() == 0) return res;
  const double cutoff = tol * res.singular_values(0);
  for (Eigen::Index i = 0; i < res.singular_values.size(); ++i)
    if (res.singular_values(i) >= cutoff) ++res.rank;
  return res;
}

// CSV with a '#meta' line describing the columns, then plain rows.
inline void write_design_matrix_csv(const DesignMatrix& dm, const std::string& path) {
  CsvWriter csv(path);
  std::string meta = "#meta";
  for (const auto& c : dm.col_meta) meta += " " + c.label;
  csv.raw_line(meta);
  std::string header = "row_meta";
  for (const auto& c : dm.col_meta) header += "," + c.label;
  csv.raw_line(header);
  for (Eigen::Index i = 0; i < dm.rows(); ++i) {
    std::string line = format_double(dm.row_meta[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < dm.cols(); ++j) line += "," + format_double(dm.values(i, j));
    csv.raw_line(line);
  }
  csv.close();
}

inline void write_singular_values_csv(const Eigen::VectorXd& sigma, const std::string& path) {
  CsvWriter csv(path);
  csv.raw_line("i,sigma");
  for (Eigen::Index i = 0; i < sigma.size(); ++i) csv.row(static_cast<int>(i), sigma(i));
  csv.close();
}

}  // namespace memrc

#endif  // MEMRC_BANK_HPP
