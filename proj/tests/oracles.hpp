#pragma once

// Independent reference computations used only by the test suites.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <vector>

namespace recurq::oracle {

// Weighted check loss written out from its definition.
inline double oracle_objective(const std::vector<double>& y, const std::vector<double>& x, std::size_t p,
                               const std::vector<double>& w, double tau, const Eigen::VectorXd& b) {
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    double fit = 0.0;
    for (std::size_t c = 0; c < p; ++c) fit += x[i * p + c] * b[static_cast<Eigen::Index>(c)];
    const double r = y[i] - fit;
    total += w[i] * (r >= 0.0 ? tau * r : (tau - 1.0) * r);
  }
  return total;
}

struct BruteForceResult {
  double objective = std::numeric_limits<double>::infinity();
  Eigen::VectorXd coef;
};

// Exhaustive search over every basic solution (p rows fitted exactly).
inline BruteForceResult brute_force_qr(const std::vector<double>& y, const std::vector<double>& x, std::size_t p,
                                       const std::vector<double>& w, double tau) {
  const std::size_t n = y.size();
  BruteForceResult best;
  std::vector<std::size_t> idx(p);
  // Enumerate p-subsets via an index odometer.
  for (std::size_t k = 0; k < p; ++k) idx[k] = k;
  while (true) {
    Eigen::MatrixXd B(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    Eigen::VectorXd yb(static_cast<Eigen::Index>(p));
    for (std::size_t r = 0; r < p; ++r) {
      for (std::size_t c = 0; c < p; ++c) B(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = x[idx[r] * p + c];
      yb[static_cast<Eigen::Index>(r)] = y[idx[r]];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
    if (lu.isInvertible()) {
      const Eigen::VectorXd b = lu.solve(yb);
      const double obj = oracle_objective(y, x, p, w, tau, b);
      if (obj < best.objective) {
        best.objective = obj;
        best.coef = b;
      }
    }
    // next subset
    std::size_t k = p;
    while (k > 0 && idx[k - 1] == n - p + k - 1) --k;
    if (k == 0) break;
    ++idx[k - 1];
    for (std::size_t j = k; j < p; ++j) idx[j] = idx[j - 1] + 1;
  }
  return best;
}

// Poisson pmf by the product series lambda^m / m! e^-lambda, no lgamma.
inline double series_poisson_pmf(unsigned m, double lambda) {
  double v = std::exp(-lambda);
  for (unsigned k = 1; k <= m; ++k) v *= lambda / static_cast<double>(k);
  return v;
}

}  // namespace recurq::oracle
