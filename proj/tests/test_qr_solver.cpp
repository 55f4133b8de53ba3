#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "oracles.hpp"
#include "recurq/qr_solver.hpp"

using namespace recurq;

namespace {

QRSolution solve(const std::vector<double>& y, const std::vector<double>& x, std::size_t p,
                 const std::vector<double>& w, double tau, const QRSolveOptions& opt = {}) {
  return solve_weighted_qr(WeightedQRProblem{y, DesignView{x, p}, w, tau}, opt);
}

}  // namespace

TEST(QRSolver, WeightedMedianOfLogs) {
  // Responses log(1), log(2), log(3); weights put half the mass on log 2.
  const std::vector<double> y{0.0, 0.6931, 1.0986};
  const std::vector<double> x{1.0, 1.0, 1.0};
  const std::vector<double> w{0.25, 0.5, 0.25};
  const auto brute = oracle::brute_force_qr(y, x, 1, w, 0.5);
  const auto sol = solve(y, x, 1, w, 0.5);
  EXPECT_NEAR(brute.coef[0], 0.6931, 1e-12);
  EXPECT_NEAR(sol.coef[0], 0.6931, 1e-12);
}

TEST(QRSolver, UnweightedMedian) {
  const auto sol = solve({1.0, 2.0, 3.0}, {1.0, 1.0, 1.0}, 1, {1.0, 1.0, 1.0}, 0.5);
  EXPECT_DOUBLE_EQ(sol.coef[0], 2.0);
}

TEST(QRSolver, InterpolatesExactLine) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  std::vector<double> y, x, w;
  for (int i = 0; i < 12; ++i) {
    const double xi = u(rng);
    x.push_back(1.0);
    x.push_back(xi);
    y.push_back(1.0 + 2.0 * xi);
    w.push_back(0.1 + u(rng));
  }
  for (double tau : {0.1, 0.5, 0.9}) {
    const auto sol = solve(y, x, 2, w, tau);
    EXPECT_NEAR(sol.coef[0], 1.0, 1e-10);
    EXPECT_NEAR(sol.coef[1], 2.0, 1e-10);
  }
}

TEST(QRSolver, LexicographicallySmallestAmongTies) {
  // Any value in [2, 3] is a median of {1, 2, 3, 4}.
  const auto sol = solve({1.0, 2.0, 3.0, 4.0}, {1.0, 1.0, 1.0, 1.0}, 1, {1.0, 1.0, 1.0, 1.0}, 0.5);
  EXPECT_DOUBLE_EQ(sol.coef[0], 2.0);
  QRSolveOptions warm;
  warm.warm_basis = {3};
  const auto again = solve({1.0, 2.0, 3.0, 4.0}, {1.0, 1.0, 1.0, 1.0}, 1, {1.0, 1.0, 1.0, 1.0}, 0.5, warm);
  EXPECT_DOUBLE_EQ(again.coef[0], 2.0);
}

TEST(QRSolver, MatchesBruteForceOnRandomInstances) {
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> nrows(3, 8);
  std::uniform_int_distribution<int> pick_p(1, 2);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(0.05, 2.0);
  const double taus[] = {0.1, 0.25, 0.5, 0.75, 0.9};
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t p = static_cast<std::size_t>(pick_p(rng));
    const int n = nrows(rng);
    std::vector<double> y, x, w;
    for (int i = 0; i < n; ++i) {
      x.push_back(1.0);
      if (p == 2) x.push_back(z(rng));
      y.push_back(z(rng));
      w.push_back(u(rng));
    }
    const double tau = taus[trial % 5];
    const auto brute = oracle::brute_force_qr(y, x, p, w, tau);
    const auto sol = solve(y, x, p, w, tau);
    EXPECT_NEAR(oracle::oracle_objective(y, x, p, w, tau, sol.coef), brute.objective, 1e-8)
        << "trial " << trial;
    EXPECT_TRUE(satisfies_subgradient_condition(WeightedQRProblem{y, DesignView{x, p}, w, tau}, sol.coef));
  }
}

TEST(QRSolver, WeightScalingLeavesSolutionUnchanged) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> z;
  std::vector<double> y, x, w, w3;
  for (int i = 0; i < 40; ++i) {
    x.push_back(1.0);
    x.push_back(z(rng));
    x.push_back(z(rng));
    y.push_back(z(rng));
    w.push_back(std::abs(z(rng)) + 0.01);
    w3.push_back(w.back() * 3.7);
  }
  const auto a = solve(y, x, 3, w, 0.3);
  const auto b = solve(y, x, 3, w3, 0.3);
  EXPECT_LT((a.coef - b.coef).norm(), 1e-10);
  EXPECT_NEAR(b.objective, 3.7 * a.objective, 1e-9);
}

TEST(QRSolver, NoWorseThanLeastSquares) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z;
  std::vector<double> y, x, w;
  Eigen::MatrixXd X(60, 2);
  Eigen::VectorXd Y(60);
  for (int i = 0; i < 60; ++i) {
    const double xi = z(rng);
    x.push_back(1.0);
    x.push_back(xi);
    y.push_back(0.5 - xi + std::pow(z(rng), 3));
    w.push_back(1.0);
    X(i, 0) = 1.0;
    X(i, 1) = xi;
    Y[i] = y.back();
  }
  const Eigen::VectorXd ls = X.colPivHouseholderQr().solve(Y);
  for (double tau : {0.2, 0.5, 0.8}) {
    const auto sol = solve(y, x, 2, w, tau);
    EXPECT_LE(sol.objective, oracle::oracle_objective(y, x, 2, w, tau, ls) + 1e-12);
  }
}

TEST(QRSolver, WarmStartGivesSameObjective) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> z;
  std::vector<double> y, x, w;
  for (int i = 0; i < 500; ++i) {
    x.push_back(1.0);
    x.push_back(z(rng));
    y.push_back(x.back() + z(rng));
    w.push_back(std::abs(z(rng)));
  }
  const auto cold = solve(y, x, 2, w, 0.4);
  QRSolveOptions opt;
  opt.warm_basis = solve(y, x, 2, w, 0.6).basis;
  const auto warm = solve(y, x, 2, w, 0.4, opt);
  EXPECT_NEAR(cold.objective, warm.objective, 1e-9);
}

TEST(QRSolver, DegenerateTiedResponses) {
  // Many rows on a few common hyperplanes, the structure of the
  // pseudo-observations in the iterative estimator.
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> y, x, w;
  const double planes[4][2] = {{0.0, 1.0}, {0.5, 1.2}, {1.0, 0.9}, {1.3, 1.5}};
  for (int i = 0; i < 7; ++i) {
    const double xi = u(rng);
    for (const auto& pl : planes) {
      x.push_back(1.0);
      x.push_back(xi);
      y.push_back(pl[0] + pl[1] * xi);
      w.push_back(0.1 + u(rng));
    }
  }
  for (double tau : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const auto sol = solve(y, x, 2, w, tau);
    // 28 rows: brute force over all pairs is still cheap.
    const auto brute = oracle::brute_force_qr(y, x, 2, w, tau);
    EXPECT_NEAR(sol.objective, brute.objective, 1e-8) << tau;
    EXPECT_TRUE(satisfies_subgradient_condition(WeightedQRProblem{y, DesignView{x, 2}, w, tau}, sol.coef));
  }
}

TEST(QRSolver, ZeroWeightRowsAreIgnored) {
  const auto sol = solve({1.0, 2.0, 100.0}, {1.0, 1.0, 1.0}, 1, {1.0, 1.0, 0.0}, 0.9);
  EXPECT_DOUBLE_EQ(sol.coef[0], 2.0);
}

TEST(QRSolver, Errors) {
  EXPECT_THROW(solve({1.0, 2.0}, {1.0, 0.0, 1.0, 0.0}, 2, {1.0, 1.0}, 0.5), RankDeficient);
  EXPECT_THROW(solve({1.0, 2.0}, {1.0, 1.0}, 1, {1.0, 1.0}, 0.995), GridOutOfRange);
  EXPECT_THROW(solve({1.0, 2.0}, {1.0, 1.0}, 1, {0.0, 0.0}, 0.5), InvalidArgument);
  EXPECT_THROW(solve({1.0, 2.0}, {1.0, 1.0}, 1, {-1.0, 1.0}, 0.5), InvalidArgument);
}
