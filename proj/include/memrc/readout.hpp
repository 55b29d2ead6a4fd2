#ifndef MEMRC_READOUT_HPP
#define MEMRC_READOUT_HPP

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "memrc/bank.hpp"
#include "memrc/csv.hpp"
#include "memrc/errors.hpp"
#include "memrc/rng.hpp"

namespace memrc {

struct ReadoutModel {
  Eigen::VectorXd weights;
  double reg = 0.0;               // grid value with the lowest mean CV loss
  std::vector<double> cv_scores;  // per-fold validation MSE at the chosen reg
};

// Default grid: log-spaced in [lo, hi] * sigma1^2 so the grid is relative to
// the problem scale.
inline std::vector<double> default_reg_grid(double sigma1, int n = 9, double lo = 1e-8,
                                            double hi = 1.0) {
  std::vector<double> grid(static_cast<std::size_t>(n));
  const double s2 = sigma1 * sigma1;
  for (int i = 0; i < n; ++i) {
    const double f = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
    grid[static_cast<std::size_t>(i)] = s2 * std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo)));
  }
  return grid;
}

namespace detail {

// Solve (gram + reg I) w = rhs by rank-revealing QR. reg = 0 is permitted
// but a rank-deficient system is then an error.
inline Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& gram, const Eigen::VectorXd& rhs,
                                   double reg) {
  Eigen::MatrixXd sys = gram;
  sys.diagonal().array() += reg;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sys);
  if (reg == 0.0 && qr.rank() < sys.cols())
    throw SingularSystemError("ridge_solve: rank-deficient system with reg = 0");
  return qr.solve(rhs);
}

// Contiguous fold boundaries: fold f covers [bounds[f], bounds[f+1]).
inline std::vector<Eigen::Index> fold_bounds(Eigen::Index rows, int k_folds) {
  std::vector<Eigen::Index> bounds(static_cast<std::size_t>(k_folds) + 1);
  for (int f = 0; f <= k_folds; ++f)
    bounds[static_cast<std::size_t>(f)] = rows * f / k_folds;
  return bounds;
}

}  // namespace detail

// Ridge regression with k-fold cross-validation over contiguous row blocks
// (time-contiguous data keeps adjacent samples inside a fold). For each grid
// value the normal equations are solved on the training folds; the reg with
// the lowest mean validation MSE wins and the model is refit on all rows.
// The fold assignment is deterministic, so a fixed seed fixes the result.
inline ReadoutModel ridge_fit(const DesignMatrix& dm, const Eigen::VectorXd& y,
                              const std::vector<double>& reg_grid, int k_folds,
                              std::uint64_t seed = 0) {
  (void)seed;  // folds are contiguous blocks; the seed is part of the call
               // signature for forward compatibility with shuffled folds
  if (dm.rows() != y.size()) throw DimensionMismatchError("ridge_fit: rows(dm) != len(y)");
  if (k_folds < 2) throw Error("ridge_fit: need k_folds >= 2");
  if (reg_grid.empty()) throw Error("ridge_fit: empty reg grid");
  for (double g : reg_grid)
    if (g < 0.0) throw Error("ridge_fit: negative reg");

  const Eigen::Index rows = dm.rows();
  const int folds = static_cast<int>(std::min<Eigen::Index>(k_folds, rows));
  const auto bounds = detail::fold_bounds(rows, folds);

  // Per-fold Gram pieces; training-fold systems are differences from the
  // full sums, validation losses come from the same pieces.
  const Eigen::MatrixXd gram_full = dm.values.transpose() * dm.values;
  const Eigen::VectorXd rhs_full = dm.values.transpose() * y;
  std::vector<Eigen::MatrixXd> gram_fold(static_cast<std::size_t>(folds));
  std::vector<Eigen::VectorXd> rhs_fold(static_cast<std::size_t>(folds));
  std::vector<double> yy_fold(static_cast<std::size_t>(folds));
  std::vector<Eigen::Index> len_fold(static_cast<std::size_t>(folds));
  for (int f = 0; f < folds; ++f) {
    const Eigen::Index lo = bounds[static_cast<std::size_t>(f)];
    const Eigen::Index len = bounds[static_cast<std::size_t>(f) + 1] - lo;
    const auto block = dm.values.middleRows(lo, len);
    const auto y_block = y.segment(lo, len);
    gram_fold[static_cast<std::size_t>(f)] = block.transpose() * block;
    rhs_fold[static_cast<std::size_t>(f)] = block.transpose() * y_block;
    yy_fold[static_cast<std::size_t>(f)] = y_block.squaredNorm();
    len_fold[static_cast<std::size_t>(f)] = len;
  }

  std::size_t best = 0;
  double best_loss = std::numeric_limits<double>::infinity();
  std::vector<double> best_scores;
  for (std::size_t g = 0; g < reg_grid.size(); ++g) {
    double total = 0.0;
    std::vector<double> scores(static_cast<std::size_t>(folds));
    for (int f = 0; f < folds; ++f) {
      const auto fi = static_cast<std::size_t>(f);
      const Eigen::MatrixXd gram_train = gram_full - gram_fold[fi];
      const Eigen::VectorXd rhs_train = rhs_full - rhs_fold[fi];
      const Eigen::VectorXd w = detail::ridge_solve(gram_train, rhs_train, reg_grid[g]);
      const double sse = w.dot(gram_fold[fi] * w) - 2.0 * w.dot(rhs_fold[fi]) + yy_fold[fi];
      scores[fi] = sse / static_cast<double>(len_fold[fi]);
      total += scores[fi];
    }
    const double mean_loss = total / folds;
    if (mean_loss < best_loss) {
      best_loss = mean_loss;
      best = g;
      best_scores = std::move(scores);
    }
  }

  ReadoutModel model;
  model.reg = reg_grid[best];
  model.cv_scores = std::move(best_scores);
  model.weights = detail::ridge_solve(gram_full, rhs_full, model.reg);
  return model;
}

inline Eigen::VectorXd predict(const ReadoutModel& model, const DesignMatrix& dm) {
  if (model.weights.size() != dm.cols())
    throw DimensionMismatchError("predict: weight/column count mismatch");
  return dm.values * model.weights;
}

// Pearson correlation; the target must not be constant.
inline double correlation_coefficient(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat) {
  if (y.size() != y_hat.size()) throw DimensionMismatchError("correlation_coefficient: lengths differ");
  if (y.size() < 2) throw Error("correlation_coefficient: need at least 2 samples");
  const Eigen::VectorXd yc = y.array() - y.mean();
  const Eigen::VectorXd pc = y_hat.array() - y_hat.mean();
  const double denom_y = yc.norm();
  if (denom_y == 0.0) throw DegenerateTargetError("correlation_coefficient: constant target");
  const double denom_p = pc.norm();
  if (denom_p == 0.0) return 0.0;
  return yc.dot(pc) / (denom_y * denom_p);
}

// Round-and-clamp decision rule onto {0,1,2}.
inline std::vector<int> classify_z3(const Eigen::VectorXd& y_hat) {
  std::vector<int> symbols(static_cast<std::size_t>(y_hat.size()));
  for (Eigen::Index i = 0; i < y_hat.size(); ++i) {
    const auto s = static_cast<int>(std::lround(y_hat(i)));
    symbols[static_cast<std::size_t>(i)] = std::clamp(s, 0, 2);
  }
  return symbols;
}

inline int count_errors(const std::vector<int>& predicted, const std::vector<int>& target) {
  if (predicted.size() != target.size())
    throw DimensionMismatchError("count_errors: lengths differ");
  int errors = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    if (predicted[i] != target[i]) ++errors;
  return errors;
}

// Gaussian matrix with the singular values beyond `rank` zeroed; a proxy for
// responses with very narrow autocorrelation.
inline DesignMatrix random_truncated_matrix(int rows, int cols, int rank, std::uint64_t seed) {
  if (rank < 1 || rank > std::min(rows, cols))
    throw Error("random_truncated_matrix: rank out of range");
  CounterRng rng(seed, 0x52414e44ULL);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.gaussian();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd sigma = svd.singularValues();
  for (Eigen::Index i = rank; i < sigma.size(); ++i) sigma(i) = 0.0;
  DesignMatrix dm;
  dm.values = svd.matrixU() * sigma.asDiagonal() * svd.matrixV().transpose();
  for (int i = 0; i < rows; ++i) dm.row_meta.push_back(static_cast<double>(i));
  for (int j = 0; j < cols; ++j) dm.col_meta.push_back({-1, j, false, "g" + std::to_string(j)});
  return dm;
}

// Builds the row-replicated design matrix used by the k-fold CV protocol on
// tiny row counts: one full copy of the base rows per fold, so every fold
// holds out a complete replica while all rows stay represented in training.
inline DesignMatrix replicate_rows(const DesignMatrix& dm, int copies) {
  if (copies < 1) throw Error("replicate_rows: need copies >= 1");
  DesignMatrix out;
  out.col_meta = dm.col_meta;
  out.values.resize(dm.rows() * copies, dm.cols());
  out.row_meta.reserve(static_cast<std::size_t>(dm.rows() * copies));
  for (int c = 0; c < copies; ++c) {
    out.values.middleRows(c * dm.rows(), dm.rows()) = dm.values;
    out.row_meta.insert(out.row_meta.end(), dm.row_meta.begin(), dm.row_meta.end());
  }
  return out;
}

// Many-target ridge fitter for the replicated-CV protocol. Algebraically
// identical to ridge_fit on replicate_rows(theta, folds) with contiguous
// folds, but the per-reg factorizations depend only on the design matrix,
// so they are computed once and shared across all targets (operators).
class ReplicatedCvScorer {
 public:
  ReplicatedCvScorer(const Eigen::MatrixXd& theta, std::vector<double> reg_grid, int folds = 10)
      : theta_(theta), grid_(std::move(reg_grid)) {
    if (folds < 2) throw Error("ReplicatedCvScorer: need folds >= 2");
    const Eigen::MatrixXd gram = theta.transpose() * theta;
    const double train_copies = static_cast<double>(folds - 1);
    const double all_copies = static_cast<double>(folds);
    for (const double reg : grid_) {
      if (reg < 0.0) throw Error("ReplicatedCvScorer: negative reg");
      Eigen::MatrixXd sys = train_copies * gram;
      sys.diagonal().array() += reg;
      cv_solvers_.emplace_back(sys);
      Eigen::MatrixXd full = all_copies * gram;
      full.diagonal().array() += reg;
      refit_solvers_.emplace_back(full);
    }
    train_copies_ = train_copies;
    all_copies_ = all_copies;
  }

  struct Outcome {
    Eigen::VectorXd predictions;  // refit predictions on the base rows
    Eigen::VectorXd weights;
    std::size_t reg_index = 0;
    double cv_mse = 0.0;
  };

  Outcome evaluate(const Eigen::VectorXd& y) const {
    const Eigen::VectorXd rhs = theta_.transpose() * y;
    Outcome best;
    best.cv_mse = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < cv_solvers_.size(); ++g) {
      const Eigen::VectorXd w = cv_solvers_[g].solve(train_copies_ * rhs);
      const double mse = (theta_ * w - y).squaredNorm() / static_cast<double>(y.size());
      if (mse < best.cv_mse) {
        best.cv_mse = mse;
        best.reg_index = g;
      }
    }
    best.weights = refit_solvers_[best.reg_index].solve(all_copies_ * rhs);
    best.predictions = theta_ * best.weights;
    return best;
  }

  const std::vector<double>& grid() const { return grid_; }

 private:
  Eigen::MatrixXd theta_;
  std::vector<double> grid_;
  std::vector<Eigen::ColPivHouseholderQR<Eigen::MatrixXd>> cv_solvers_;
  std::vector<Eigen::ColPivHouseholderQR<Eigen::MatrixXd>> refit_solvers_;
  double train_copies_ = 9.0;
  double all_copies_ = 10.0;
};

// CSV serialization: `reg=<value>` metadata line then col_id,weight rows.
inline void write_readout_csv(const ReadoutModel& model, const std::string& path) {
  CsvWriter csv(path);
  csv.raw_line("#reg=" + format_double(model.reg));
  csv.raw_line("col_id,weight");
  for (Eigen::Index i = 0; i < model.weights.size(); ++i)
    csv.row(static_cast<int>(i), model.weights(i));
  csv.close();
}

}  // namespace memrc

#endif  // MEMRC_READOUT_HPP
