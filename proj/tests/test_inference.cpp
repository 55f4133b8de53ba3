#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "recurq/inference.hpp"
#include "recurq/sim.hpp"

using namespace recurq;

namespace {

TauGrid coarse_grid() { return TauGrid::uniform(0.05, 0.95, 0.05); }

CoefficientPath path_from(const TauGrid& grid, const std::function<double(double)>& f) {
  Matrix theta(static_cast<Eigen::Index>(grid.size()), 1);
  for (std::size_t k = 0; k < grid.size(); ++k) theta(static_cast<Eigen::Index>(k), 0) = f(grid[k]);
  return CoefficientPath(grid, theta);
}

CoefficientPath random_path(const TauGrid& grid, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  return path_from(grid, [&](double) { return z(rng); });
}

// Trapezoid sum of beta over [a, b] on a very fine uniform mesh.
double fine_integral(const CoefficientPath& path, double a, double b) {
  const int steps = 200000;
  const double h = (b - a) / steps;
  double s = 0.0;
  for (int i = 0; i < steps; ++i) s += 0.5 * h * (path.evaluate(a + i * h)[0] + path.evaluate(a + (i + 1) * h)[0]);
  return s;
}

Dataset identical_subjects(std::size_t n) {
  std::vector<SubjectRecord> recs;
  for (std::size_t i = 0; i < n; ++i) {
    SubjectRecord r;
    r.id = "s" + std::to_string(i);
    r.censoring_time = 1.0;
    r.event_times = {0.2, 0.4, 0.6};
    recs.push_back(r);
  }
  return Dataset(recs, {}, 1.0);
}

}  // namespace

TEST(OrderStatisticQuantile, TypeOne) {
  const std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  EXPECT_EQ(order_statistic_quantile(v, 0.0), 1.0);
  EXPECT_EQ(order_statistic_quantile(v, 0.025), 1.0);
  EXPECT_EQ(order_statistic_quantile(v, 0.1), 1.0);
  EXPECT_EQ(order_statistic_quantile(v, 0.11), 2.0);
  EXPECT_EQ(order_statistic_quantile(v, 0.5), 5.0);
  EXPECT_EQ(order_statistic_quantile(v, 0.975), 10.0);
  EXPECT_EQ(order_statistic_quantile(v, 1.0), 10.0);
  EXPECT_THROW(order_statistic_quantile(std::vector<double>{}, 0.5), InvalidArgument);
}

TEST(AverageEffect, ConstantPath) {
  const auto p = path_from(TauGrid::default_grid(), [](double) { return 0.7; });
  EXPECT_EQ(average_effect(p, 0), 0.7);
  EXPECT_EQ(average_effect(p, 0, 0.123, 0.456), 0.7);
}

TEST(AverageEffect, LinearPathMidpoint) {
  const auto p = path_from(TauGrid::default_grid(), [](double t) { return t; });
  EXPECT_NEAR(average_effect(p, 0, 0.1, 0.9), 0.5, 1e-14);
  EXPECT_NEAR(average_effect(p, 0, 0.2, 0.3), 0.25, 1e-14);
}

TEST(AverageEffect, ExactForPiecewiseLinearPaths) {
  std::mt19937_64 rng(1);
  const auto grid = coarse_grid();
  for (int rep = 0; rep < 5; ++rep) {
    const auto p = random_path(grid, rng);
    EXPECT_NEAR(average_effect(p, 0, 0.13, 0.77), fine_integral(p, 0.13, 0.77) / 0.64, 1e-9);
  }
}

TEST(AverageEffect, LinearInThePath) {
  std::mt19937_64 rng(2);
  const auto grid = TauGrid::default_grid();
  const auto p1 = random_path(grid, rng);
  const auto p2 = random_path(grid, rng);
  const CoefficientPath combo(grid, 2.5 * p1.theta() + p2.theta());
  EXPECT_NEAR(average_effect(combo, 0), 2.5 * average_effect(p1, 0) + average_effect(p2, 0), 1e-12);
}

TEST(AverageEffect, RangeErrors) {
  const auto p = path_from(coarse_grid(), [](double t) { return t; });
  EXPECT_THROW(average_effect(p, 0, 0.01, 0.5), RangeError);
  EXPECT_THROW(average_effect(p, 0, 0.5, 0.99), RangeError);
  EXPECT_THROW(average_effect(p, 0, 0.5, 0.5), RangeError);
  EXPECT_THROW(average_effect(p, 1, 0.1, 0.9), RangeError);
}

TEST(ConstancyStatistic, ZeroOnConstantPath) {
  for (double c : {0.0, 1.0, -3.25, 0.1, 1e6 / 7.0}) {
    const auto p = path_from(TauGrid::default_grid(), [&](double) { return c; });
    EXPECT_EQ(constancy_statistic(p, 0, 0.1, 0.9, 500), 0.0) << c;
    EXPECT_EQ(constancy_statistic(p, 0, 0.123, 0.877, 500), 0.0) << c;
  }
}

TEST(ConstancyStatistic, MatchesDefinition) {
  // beta = tau: eta = 0.5, int_{0.1}^{0.5} (tau - 0.5) = -0.08.
  const auto p = path_from(TauGrid::default_grid(), [](double t) { return t; });
  EXPECT_NEAR(constancy_statistic(p, 0, 0.1, 0.9, 100), 10.0 * -0.08, 1e-12);
  std::mt19937_64 rng(4);
  const auto q = random_path(coarse_grid(), rng);
  const double eta = fine_integral(q, 0.1, 0.9) / 0.8;
  const double want = std::sqrt(50.0) * (fine_integral(q, 0.1, 0.5) - 0.4 * eta);
  EXPECT_NEAR(constancy_statistic(q, 0, 0.1, 0.9, 50), want, 1e-8);
}

TEST(ConstancyStatistic, InvariantToShiftAndLinear) {
  std::mt19937_64 rng(5);
  const auto grid = TauGrid::default_grid();
  const auto p1 = random_path(grid, rng);
  const auto p2 = random_path(grid, rng);
  const CoefficientPath shifted(grid, p1.theta().array() + 3.0);
  EXPECT_NEAR(constancy_statistic(shifted, 0, 0.1, 0.9, 200), constancy_statistic(p1, 0, 0.1, 0.9, 200), 1e-12);
  const CoefficientPath combo(grid, p1.theta() - 0.5 * p2.theta());
  EXPECT_NEAR(constancy_statistic(combo, 0, 0.1, 0.9, 200),
              constancy_statistic(p1, 0, 0.1, 0.9, 200) - 0.5 * constancy_statistic(p2, 0, 0.1, 0.9, 200), 1e-12);
}

TEST(Bootstrap, IdenticalSubjectsHaveZeroSE) {
  FitConfig c;
  c.grid = coarse_grid();
  BootstrapOptions o;
  o.B = 5;
  const auto boot = bootstrap(identical_subjects(8), c, o);
  EXPECT_EQ(boot.replicate_paths.size(), 5u);
  EXPECT_TRUE(boot.failures.empty());
  EXPECT_EQ(boot.se.maxCoeff(), 0.0);
  EXPECT_EQ(boot.se.minCoeff(), 0.0);
  EXPECT_EQ(boot.normal_lo, boot.estimate.theta());
  EXPECT_EQ(boot.normal_hi, boot.estimate.theta());
}

TEST(Bootstrap, TwoIdenticalReplicatesGiveDegeneratePercentileInterval) {
  FitConfig c;
  c.grid = coarse_grid();
  BootstrapOptions o;
  o.B = 2;
  const auto boot = bootstrap(identical_subjects(6), c, o);
  ASSERT_EQ(boot.replicate_paths.size(), 2u);
  EXPECT_EQ(boot.replicate_paths[0], boot.replicate_paths[1]);
  EXPECT_EQ(boot.percentile_lo, boot.replicate_paths[0].theta());
  EXPECT_EQ(boot.percentile_hi, boot.replicate_paths[0].theta());
}

TEST(Bootstrap, SummaryFormulas) {
  std::mt19937_64 rng(6);
  const auto grid = coarse_grid();
  BootstrapSummary s;
  s.estimate = random_path(grid, rng);
  s.alpha = 0.1;
  for (int b = 0; b < 41; ++b) s.replicate_paths.push_back(random_path(grid, rng));
  summarize_replicates(s);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    std::vector<double> v;
    for (const auto& rp : s.replicate_paths) v.push_back(rp.theta()(kk, 0));
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= v.size();
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / (v.size() - 1));
    EXPECT_NEAR(s.se(kk, 0), sd, 1e-12);
    EXPECT_NEAR(s.normal_hi(kk, 0) - s.estimate.theta()(kk, 0), 1.6448536269514722 * sd, 1e-9);
    std::sort(v.begin(), v.end());
    // ceil(41 * 0.05) = 3, ceil(41 * 0.95) = 39
    EXPECT_EQ(s.percentile_lo(kk, 0), v[2]);
    EXPECT_EQ(s.percentile_hi(kk, 0), v[38]);
    const double median = v[20];
    EXPECT_LE(s.percentile_lo(kk, 0), median);
    EXPECT_GE(s.percentile_hi(kk, 0), median);
  }
}

TEST(Bootstrap, DeterministicAcrossRunsAndJobs) {
  const auto sim = generate_dataset(DGPSpec::paper(DGPKind::homogeneous_normal, 60, 3));
  FitConfig c;
  c.grid = coarse_grid();
  c.max_iter = 4;
  BootstrapOptions o;
  o.B = 4;
  o.seed = 99;
  const auto a = bootstrap(sim.data, c, o);
  o.jobs = 2;
  const auto b = bootstrap(sim.data, c, o);
  ASSERT_EQ(a.replicate_paths.size(), b.replicate_paths.size());
  for (std::size_t r = 0; r < a.replicate_paths.size(); ++r) EXPECT_EQ(a.replicate_paths[r], b.replicate_paths[r]);
  EXPECT_EQ(a.se, b.se);
  o.seed = 100;
  const auto d = bootstrap(sim.data, c, o);
  EXPECT_FALSE(d.se == a.se);
}

TEST(Bootstrap, TooManyFailedReplicates) {
  // One subject in ten has events: about a third of resamples have none.
  auto data = identical_subjects(10);
  std::vector<SubjectRecord> recs = data.records();
  for (std::size_t i = 1; i < recs.size(); ++i) recs[i].event_times.clear();
  FitConfig c;
  c.grid = coarse_grid();
  BootstrapOptions o;
  o.B = 30;
  EXPECT_THROW(bootstrap(Dataset(recs, {}, 1.0), c, o), ReplicateFailure);
  o.max_failure_fraction = 1.0;
  const auto boot = bootstrap(Dataset(recs, {}, 1.0), c, o);
  EXPECT_GT(boot.failures.size(), 0u);
  EXPECT_EQ(boot.failures.size() + boot.replicate_paths.size(), 30u);
}

TEST(ConstancyTest, RegionFromCenteredReplicates) {
  std::mt19937_64 rng(8);
  const auto grid = TauGrid::default_grid();
  BootstrapSummary s;
  s.estimate = path_from(grid, [](double t) { return 2.0 * t; });
  s.alpha = 0.05;
  for (int b = 0; b < 40; ++b) s.replicate_paths.push_back(random_path(grid, rng));
  const std::size_t n = 300;
  const auto res = constancy_test(s, n, 0, 0.1, 0.9);
  const double t = constancy_statistic(s.estimate, 0, 0.1, 0.9, n);
  EXPECT_EQ(res.statistic, t);
  std::vector<double> star;
  for (const auto& rp : s.replicate_paths) star.push_back(constancy_statistic(rp, 0, 0.1, 0.9, n) - t);
  std::sort(star.begin(), star.end());
  EXPECT_EQ(res.region_lo, star[0]);    // ceil(40 * 0.025) = 1
  EXPECT_EQ(res.region_hi, star[38]);   // ceil(40 * 0.975) = 39
  EXPECT_EQ(res.reject, t < star[0] || t > star[38]);
  EXPECT_NEAR(res.eta_hat, 1.0, 1e-12);
  EXPECT_EQ(res.replicates, 40u);
}
