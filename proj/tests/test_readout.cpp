#include <catch2/catch.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "memrc/readout.hpp"
#include "memrc/rng.hpp"

using namespace memrc;

namespace {

DesignMatrix wrap(const Eigen::MatrixXd& m) {
  DesignMatrix dm;
  dm.values = m;
  for (Eigen::Index i = 0; i < m.rows(); ++i) dm.row_meta.push_back(static_cast<double>(i));
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    dm.col_meta.push_back({static_cast<int>(j), -1, false, "c" + std::to_string(j)});
  return dm;
}

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  CounterRng rng(seed, 0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.gaussian();
  return m;
}

}  // namespace

TEST_CASE("ridge fit basics") {
  SECTION("identity design with tiny reg recovers the target") {
    const DesignMatrix dm = wrap(Eigen::MatrixXd::Identity(8, 8));
    Eigen::VectorXd y(8);
    y << 3, -1, 2, 0.5, -2, 4, 1, -0.5;
    const ReadoutModel model = ridge_fit(dm, y, {1e-12}, 4);
    REQUIRE((model.weights - y).norm() < 1e-6);
  }
  SECTION("targets in the column span leave no residual as reg -> 0") {
    const Eigen::MatrixXd theta = random_matrix(30, 4, 5);
    const Eigen::VectorXd w_true = Eigen::VectorXd::LinSpaced(4, -1.0, 2.0);
    const Eigen::VectorXd y = theta * w_true;
    const DesignMatrix dm = wrap(theta);
    const ReadoutModel model = ridge_fit(dm, y, {1e-13}, 5);
    REQUIRE((dm.values * model.weights - y).norm() < 1e-6);
  }
  SECTION("duplicate columns split the weight evenly") {
    Eigen::MatrixXd theta(12, 2);
    theta.col(0) = random_matrix(12, 1, 6);
    theta.col(1) = theta.col(0);
    Eigen::VectorXd y = 3.0 * theta.col(0);
    const ReadoutModel model = ridge_fit(wrap(theta), y, {1e-3}, 4);
    REQUIRE(model.weights(0) == Approx(model.weights(1)).epsilon(1e-10));
  }
  SECTION("reg = 0 on a rank-deficient system is an error") {
    Eigen::MatrixXd theta(12, 2);
    theta.col(0) = random_matrix(12, 1, 6);
    theta.col(1) = theta.col(0);
    const Eigen::VectorXd y = theta.col(0);
    REQUIRE_THROWS_AS(ridge_fit(wrap(theta), y, {0.0}, 4), SingularSystemError);
  }
  SECTION("reg = 0 on a full-rank system is permitted") {
    const Eigen::MatrixXd theta = random_matrix(20, 3, 7);
    const Eigen::VectorXd y = random_matrix(20, 1, 8);
    REQUIRE_NOTHROW(ridge_fit(wrap(theta), y, {0.0}, 4));
  }
}

TEST_CASE("ridge solution matches the dense normal-equations oracle") {
  // independent oracle: explicit Gaussian elimination on (X^T X + reg I) w = X^T y
  auto solve_dense = [](Eigen::MatrixXd a, Eigen::VectorXd b) {
    const Eigen::Index n = a.rows();
    for (Eigen::Index col = 0; col < n; ++col) {
      Eigen::Index pivot = col;
      for (Eigen::Index row = col + 1; row < n; ++row)
        if (std::abs(a(row, col)) > std::abs(a(pivot, col))) pivot = row;
      a.row(col).swap(a.row(pivot));
      std::swap(b(col), b(pivot));
      for (Eigen::Index row = col + 1; row < n; ++row) {
        const double f = a(row, col) / a(col, col);
        a.row(row) -= f * a.row(col);
        b(row) -= f * b(col);
      }
    }
    Eigen::VectorXd w(n);
    for (Eigen::Index row = n - 1; row >= 0; --row) {
      double acc = b(row);
      for (Eigen::Index col = row + 1; col < n; ++col) acc -= a(row, col) * w(col);
      w(row) = acc / a(row, row);
    }
    return w;
  };

  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const Eigen::MatrixXd theta = random_matrix(10, 6, seed);
    const Eigen::VectorXd y = random_matrix(10, 1, seed + 100);
    const double reg = 0.37;
    const ReadoutModel model = ridge_fit(wrap(theta), y, {reg}, 5);
    Eigen::MatrixXd gram = theta.transpose() * theta;
    gram.diagonal().array() += reg;
    const Eigen::VectorXd oracle = solve_dense(gram, theta.transpose() * y);
    REQUIRE((model.weights - oracle).norm() < 1e-10);
  }
}

TEST_CASE("ridge training residual is non-decreasing in reg") {
  const Eigen::MatrixXd theta = random_matrix(40, 5, 21);
  const Eigen::VectorXd y = random_matrix(40, 1, 22);
  const DesignMatrix dm = wrap(theta);
  double previous = -1.0;
  for (double reg : {1e-8, 1e-4, 1e-2, 1.0, 100.0}) {
    const ReadoutModel model = ridge_fit(dm, y, {reg}, 4);
    const double residual = (theta * model.weights - y).norm();
    REQUIRE(residual >= previous);
    previous = residual;
  }
}

TEST_CASE("cross-validation selection is deterministic and scale-stable") {
  const Eigen::MatrixXd theta = random_matrix(60, 6, 31);
  Eigen::VectorXd y = theta * Eigen::VectorXd::Ones(6) + 0.1 * random_matrix(60, 1, 32);
  const std::vector<double> grid{1e-6, 1e-4, 1e-2, 1.0, 100.0};
  const ReadoutModel a = ridge_fit(wrap(theta), y, grid, 10, 42);
  const ReadoutModel b = ridge_fit(wrap(theta), y, grid, 10, 42);
  REQUIRE(a.reg == b.reg);
  REQUIRE(a.weights == b.weights);
  REQUIRE(a.cv_scores == b.cv_scores);

  // scaling theta, y by c and the grid by c^2 keeps the selected index
  const double c = 13.0;
  std::vector<double> scaled_grid = grid;
  for (double& g : scaled_grid) g *= c * c;
  const ReadoutModel scaled = ridge_fit(wrap((c * theta).eval()), (c * y).eval(), scaled_grid, 10, 42);
  const auto index_of = [](const std::vector<double>& g, double v) {
    return std::find(g.begin(), g.end(), v) - g.begin();
  };
  REQUIRE(index_of(scaled_grid, scaled.reg) == index_of(grid, a.reg));
}

TEST_CASE("prediction") {
  const Eigen::MatrixXd theta = random_matrix(15, 4, 41);
  const DesignMatrix dm = wrap(theta);
  SECTION("zero weights predict zero") {
    ReadoutModel model;
    model.weights = Eigen::VectorXd::Zero(4);
    REQUIRE(predict(model, dm).norm() == 0.0);
  }
  SECTION("bias-only model predicts a constant") {
    DesignMatrix with_bias = dm;
    with_bias.values.conservativeResize(15, 5);
    with_bias.values.col(4).setOnes();
    with_bias.col_meta.push_back({-1, -1, true, "bias"});
    ReadoutModel model;
    model.weights = Eigen::VectorXd::Zero(5);
    model.weights(4) = 2.5;
    const Eigen::VectorXd y_hat = predict(model, with_bias);
    for (Eigen::Index i = 0; i < y_hat.size(); ++i) REQUIRE(y_hat(i) == 2.5);
  }
  SECTION("matches a naive double loop") {
    ReadoutModel model;
    model.weights = Eigen::VectorXd::LinSpaced(4, -2.0, 1.0);
    const Eigen::VectorXd fast = predict(model, dm);
    for (Eigen::Index i = 0; i < theta.rows(); ++i) {
      double acc = 0.0;
      for (Eigen::Index j = 0; j < theta.cols(); ++j) acc += theta(i, j) * model.weights(j);
      REQUIRE(fast(i) == Approx(acc).margin(1e-12));
    }
  }
  SECTION("dimension mismatch is an error") {
    ReadoutModel model;
    model.weights = Eigen::VectorXd::Zero(3);
    REQUIRE_THROWS_AS(predict(model, dm), DimensionMismatchError);
  }
}

TEST_CASE("correlation coefficient") {
  Eigen::VectorXd y(5);
  y << 1, 2, 3, 4, 5;
  REQUIRE(correlation_coefficient(y, y) == Approx(1.0));
  REQUIRE(correlation_coefficient(y, (-y).eval()) == Approx(-1.0));
  REQUIRE(correlation_coefficient(y, (y.array() + 7.0).matrix().eval()) == Approx(1.0));
  const Eigen::VectorXd constant = Eigen::VectorXd::Ones(5);
  REQUIRE_THROWS_AS(correlation_coefficient(constant, y), DegenerateTargetError);
}

TEST_CASE("z3 classification") {
  Eigen::VectorXd y_hat(9);
  SECTION("exact integers have zero errors") {
    std::vector<int> target(9);
    for (int i = 0; i < 9; ++i) {
      target[static_cast<std::size_t>(i)] = i % 3;
      y_hat(i) = i % 3;
    }
    REQUIRE(count_errors(classify_z3(y_hat), target) == 0);
    // shifting by 0.4 rounds back to the same symbols
    REQUIRE(count_errors(classify_z3((y_hat.array() + 0.4).matrix()), target) == 0);
  }
  SECTION("constant prediction 1.0 against the first-symbol operator") {
    std::vector<int> target(9);
    for (int p = 0; p < 9; ++p) target[static_cast<std::size_t>(p)] = p / 3;  // s1 labels
    y_hat.setOnes();
    REQUIRE(count_errors(classify_z3(y_hat), target) == 6);
  }
  SECTION("clamping keeps symbols in {0,1,2}") {
    y_hat.setConstant(17.3);
    for (int s : classify_z3(y_hat)) REQUIRE(s == 2);
    y_hat.setConstant(-4.0);
    for (int s : classify_z3(y_hat)) REQUIRE(s == 0);
  }
}

TEST_CASE("random truncated matrices") {
  SECTION("full rank reproduces the gaussian draw") {
    const DesignMatrix dm = random_truncated_matrix(9, 12, 9, 77);
    CounterRng rng(77, 0x52414e44ULL);
    Eigen::MatrixXd expected(9, 12);
    for (int i = 0; i < 9; ++i)
      for (int j = 0; j < 12; ++j) expected(i, j) = rng.gaussian();
    REQUIRE((dm.values - expected).norm() < 1e-10);
  }
  SECTION("rank one makes all columns proportional") {
    const DesignMatrix dm = random_truncated_matrix(6, 5, 1, 13);
    for (Eigen::Index j = 1; j < dm.cols(); ++j) {
      const double cross = (dm.values.col(0).normalized() -
                            dm.values.col(j).normalized() *
                                (dm.values.col(0).normalized().dot(dm.values.col(j).normalized())))
                               .norm();
      REQUIRE(cross < 1e-10);
    }
  }
  SECTION("numerical rank equals the requested rank") {
    for (int rank = 1; rank <= 5; ++rank)
      REQUIRE(numerical_rank(random_truncated_matrix(9, 30, rank, 5), 1e-10).rank == rank);
  }
  REQUIRE_THROWS_AS(random_truncated_matrix(9, 30, 0, 1), Error);
  REQUIRE_THROWS_AS(random_truncated_matrix(9, 30, 10, 1), Error);
}

TEST_CASE("readout csv serialization") {
  ReadoutModel model;
  model.weights = Eigen::VectorXd::LinSpaced(3, 0.25, 0.75);
  model.reg = 0.125;
  const auto path = std::filesystem::temp_directory_path() / "memrc_readout_test.csv";
  write_readout_csv(model, path.string());
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  REQUIRE(line == "#reg=0.125");
  std::getline(in, line);
  REQUIRE(line == "col_id,weight");
  std::getline(in, line);
  REQUIRE(line == "0,0.25");
  std::filesystem::remove(path);
}

TEST_CASE("design matrix csv carries column metadata") {
  DesignMatrix dm = wrap(Eigen::MatrixXd::Identity(2, 2));
  const auto path = std::filesystem::temp_directory_path() / "memrc_dm_test.csv";
  write_design_matrix_csv(dm, path.string());
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  REQUIRE(line == "#meta c0 c1");
  std::getline(in, line);
  REQUIRE(line == "row_meta,c0,c1");
  std::getline(in, line);
  REQUIRE(line == "0,1,0");
  std::filesystem::remove(path);
}

TEST_CASE("replicated-cv scorer equals ridge_fit on the replicated matrix") {
  const Eigen::MatrixXd theta = random_matrix(9, 7, 55);
  const std::vector<double> grid{1e-8, 1e-5, 1e-2, 10.0};
  const ReplicatedCvScorer scorer(theta, grid, 10);
  const DesignMatrix replicated = replicate_rows(wrap(theta), 10);
  CounterRng rng(56, 0);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd y(9);
    for (int p = 0; p < 9; ++p) y(p) = static_cast<double>(rng.below(3));
    Eigen::VectorXd y_rep(90);
    for (int c = 0; c < 10; ++c) y_rep.segment(9 * c, 9) = y;
    const auto outcome = scorer.evaluate(y);
    const ReadoutModel model = ridge_fit(replicated, y_rep, grid, 10);
    REQUIRE(model.reg == grid[outcome.reg_index]);
    REQUIRE((outcome.weights - model.weights).norm() < 1e-10);
  }
}
