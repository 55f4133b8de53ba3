#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "recurq/estimator.hpp"
#include "recurq/sim.hpp"

using namespace recurq;

namespace {

SubjectRecord subject(std::string id, std::size_t m, double c, std::vector<double> cov = {}) {
  SubjectRecord r;
  r.id = std::move(id);
  for (std::size_t e = 0; e < m; ++e) r.event_times.push_back(c * (e + 1.0) / (m + 1.0));
  r.censoring_time = c;
  r.covariates = std::move(cov);
  return r;
}

// One-sided directional derivative of the pooled weighted check loss at b
// along d; rows with |r| <= zero_tol count as kinks.
double directional_derivative(const PseudoObservations& obs, double tau, const Vector& b, const Vector& d,
                              double zero_tol) {
  const std::size_t p = obs.cols;
  double total = 0.0;
  for (std::size_t i = 0; i < obs.rows(); ++i) {
    double fit = 0.0, a = 0.0;
    for (std::size_t c = 0; c < p; ++c) {
      fit += obs.design[i * p + c] * b[static_cast<Eigen::Index>(c)];
      a += obs.design[i * p + c] * d[static_cast<Eigen::Index>(c)];
    }
    const double r = obs.responses[i] - fit;
    double g;
    if (r > zero_tol) g = -tau * a;
    else if (r < -zero_tol) g = (1.0 - tau) * a;
    else g = std::max(-tau * a, (1.0 - tau) * a);
    total += obs.weights[i] * g;
  }
  return total;
}

double objective(const PseudoObservations& obs, double tau, const Vector& b) {
  const std::size_t p = obs.cols;
  double total = 0.0;
  for (std::size_t i = 0; i < obs.rows(); ++i) {
    double fit = 0.0;
    for (std::size_t c = 0; c < p; ++c) fit += obs.design[i * p + c] * b[static_cast<Eigen::Index>(c)];
    const double r = obs.responses[i] - fit;
    total += obs.weights[i] * r * (tau - (r < 0.0 ? 1.0 : 0.0));
  }
  return total;
}

TauGrid coarse_grid() { return TauGrid::uniform(0.05, 0.95, 0.05); }

}  // namespace

TEST(FitNaive, IdenticalSubjectsGiveConstantPath) {
  // C = nu* gives mu(C) = 1, so every gamma-hat is m = 3.
  std::vector<SubjectRecord> recs;
  for (int i = 0; i < 5; ++i) recs.push_back(subject("s" + std::to_string(i), 3, 1.0));
  const auto path = fit_naive(Dataset(recs, {}, 1.0), coarse_grid(), true);
  for (std::size_t k = 0; k < path.knots(); ++k) EXPECT_NEAR(path.theta()(static_cast<Eigen::Index>(k), 0), std::log(3.0), 1e-12);
}

TEST(FitNaive, UnitResponsesGiveUnitIntercept) {
  PseudoObservations obs;
  obs.cols = 1;
  for (int i = 0; i < 4; ++i) {
    obs.append(1.0, Vector::Ones(1), 1.0);
    obs.close_segment();
  }
  const auto path = solve_path(obs, coarse_grid());
  for (std::size_t k = 0; k < path.knots(); ++k) EXPECT_NEAR(path.theta()(static_cast<Eigen::Index>(k), 0), 1.0, 1e-12);
}

TEST(FitNaive, TwoSubjectMedianIsABreakpoint) {
  PseudoObservations obs;
  obs.cols = 1;
  obs.append(0.0, Vector::Ones(1), 1.0);
  obs.close_segment();
  obs.append(2.0, Vector::Ones(1), 1.0);
  obs.close_segment();
  const auto path = solve_path(obs, TauGrid({0.5}));
  const double a = path.theta()(0, 0);
  EXPECT_TRUE(std::abs(a) < 1e-12 || std::abs(a - 2.0) < 1e-12) << a;
}

TEST(FitNaive, UnadjustedNeedsEvents) {
  // A subject with m = 0 has gamma-hat = 0 and no finite log response.
  std::vector<SubjectRecord> recs{subject("a", 0, 1.0), subject("b", 2, 1.0)};
  EXPECT_THROW(fit_naive(Dataset(recs, {}, 1.0), coarse_grid(), false), error);
  EXPECT_NO_THROW(fit_naive(Dataset(recs, {}, 1.0), coarse_grid(), true));
}

TEST(Estimator, PointMassPosteriorReproducesNaive) {
  const auto sim = generate_dataset(DGPSpec::paper(DGPKind::homogeneous_normal, 150, 21));
  const auto base = estimate_baseline(sim.data);
  const auto naive_obs = naive_observations(sim.data, base, true);
  // Each subject's unit mass split over three rows at the same gamma-hat.
  PseudoObservations spread;
  spread.cols = naive_obs.cols;
  const std::size_t p = naive_obs.cols;
  for (std::size_t i = 0; i < naive_obs.rows(); ++i) {
    Vector x(static_cast<Eigen::Index>(p));
    for (std::size_t c = 0; c < p; ++c) x[static_cast<Eigen::Index>(c)] = naive_obs.design[i * p + c];
    spread.append(naive_obs.responses[i], x, 0.2);
    spread.append(naive_obs.responses[i], x, 0.5);
    spread.append(naive_obs.responses[i], x, 0.3);
    spread.close_segment();
  }
  const auto grid = coarse_grid();
  const auto naive = fit_naive(sim.data, grid, true);
  const auto pooled = solve_path(spread, grid);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double f_naive = objective(naive_obs, grid[k], naive.at_knot(k));
    const double f_pooled = objective(naive_obs, grid[k], pooled.at_knot(k));
    EXPECT_NEAR(f_pooled, f_naive, 1e-9 * (1 + f_naive));
    EXPECT_LT((naive.at_knot(k) - pooled.at_knot(k)).norm(), 1e-9) << "tau " << grid[k];
  }
}

TEST(Estimator, StepThreeSolvesSatisfySubgradientCondition) {
  const auto sim = generate_dataset(DGPSpec::paper(DGPKind::homogeneous_normal, 120, 5));
  const auto grid = coarse_grid();
  const auto base = estimate_baseline(sim.data);
  const auto start = fit_naive(sim.data, grid, true);
  const auto obs = posterior_observations(sim.data, start, base, 1, Quadrature::left_riemann, 1);
  const auto path = solve_path(obs, grid);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  for (std::size_t k = 0; k < grid.size(); k += 3) {
    const Vector b = path.at_knot(k);
    for (int t = 0; t < 200; ++t) {
      Vector d(3);
      for (int c = 0; c < 3; ++c) d[c] = z(rng);
      if (t < 6) d = Vector::Unit(3, t % 3) * (t < 3 ? 1.0 : -1.0);
      EXPECT_GE(directional_derivative(obs, grid[k], b, d, 1e-9), -1e-9) << "tau " << grid[k];
    }
  }
}

TEST(Estimator, ConfigValidation) {
  FitConfig c;
  c.tol = 0.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = FitConfig{};
  c.max_iter = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = FitConfig{};
  c.initial_path = CoefficientPath(TauGrid({0.5}), Matrix::Zero(1, 1));
  EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(Estimator, FitResultInvariants) {
  const auto sim = generate_dataset(DGPSpec::paper(DGPKind::homogeneous_normal, 100, 8));
  FitConfig c;
  c.grid = coarse_grid();
  const auto res = fit(sim.data, c);
  EXPECT_LE(res.iterations, c.max_iter);
  EXPECT_EQ(res.step_norms.size(), res.iterations);
  EXPECT_EQ(res.final_step_norm, res.step_norms.back());
  if (res.converged) EXPECT_LT(res.final_step_norm, c.tol);
  EXPECT_EQ(res.naive_path, fit_naive(sim.data, c.grid, true));

  c.max_iter = 1;
  c.tol = 1e-300;
  const auto one = fit(sim.data, c);
  EXPECT_EQ(one.iterations, 1u);
  EXPECT_FALSE(one.converged);
}

TEST(Estimator, ResultDoesNotDependOnJobs) {
  const auto sim = generate_dataset(DGPSpec::paper(DGPKind::heteroscedastic_normal, 120, 13));
  FitConfig c;
  c.max_iter = 5;
  const auto a = fit(sim.data, c);
  c.jobs = 3;
  const auto b = fit(sim.data, c);
  EXPECT_EQ(a.path, b.path);
  EXPECT_EQ(a.step_norms, b.step_norms);
}

TEST(Estimator, DegenerateRiskRecoversConstant) {
  // gamma = 20 for everyone: slopes vanish and the intercept sits near log 20.
  auto spec = DGPSpec::paper(DGPKind::custom, 400, 31);
  spec.b = {std::log(20.0), 0.0, 0.0};
  const auto sim = generate_dataset(spec);
  const auto res = fit(sim.data);
  for (double tau : {0.3, 0.5, 0.7}) {
    const Vector b = res.path.evaluate(tau);
    EXPECT_NEAR(b[0], std::log(20.0), 0.15) << tau;
    EXPECT_NEAR(b[1], 0.0, 0.15) << tau;
    EXPECT_NEAR(b[2], 0.0, 0.15) << tau;
  }
}
