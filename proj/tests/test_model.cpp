#include <gtest/gtest.h>

#include "recurq/model.hpp"

using namespace recurq;

namespace {

SubjectRecord record(std::vector<double> events, double c, std::vector<double> cov = {}) {
  SubjectRecord r;
  r.id = "a";
  r.event_times = std::move(events);
  r.censoring_time = c;
  r.covariates = std::move(cov);
  return r;
}

CoefficientPath two_knot_path() {
  Matrix theta(2, 2);
  theta << 1, 0, 3, 2;
  return CoefficientPath(TauGrid({0.2, 0.4}), theta);
}

}  // namespace

TEST(CountingProcess, CountsEventsUpToT) {
  EXPECT_EQ(counting_process_value(record({0.25, 0.75}, 1.0), 0.75), 2u);
  EXPECT_EQ(counting_process_value(record({0.25, 0.75}, 1.0), 0.1), 0u);
}

TEST(CountingProcess, CappedAtCensoring) {
  SubjectRecord r;
  r.event_times = {0.25, 0.75};
  r.censoring_time = 0.5;
  // Built directly: the record would fail validate() but N(t) only reads C.
  EXPECT_EQ(counting_process_value(r, 0.9), 1u);
}

TEST(SubjectRecord, RejectsEventAfterCensoring) {
  EXPECT_THROW(record({0.25, 0.75}, 0.5).validate(), InvalidArgument);
  EXPECT_THROW(record({0.5, 0.5}, 1.0).validate(), InvalidArgument);
  EXPECT_THROW(record({}, 0.0).validate(), InvalidArgument);
  EXPECT_NO_THROW(record({1.0}, 1.0).validate());
}

TEST(CoefficientPath, LinearBetweenKnots) {
  const auto path = two_knot_path();
  const Vector mid = evaluate_path(path, 0.3);
  EXPECT_NEAR(mid[0], 2.0, 1e-12);
  EXPECT_NEAR(mid[1], 1.0, 1e-12);
  const Vector knot = evaluate_path(path, 0.4);
  EXPECT_EQ(knot[0], 3.0);
  EXPECT_EQ(knot[1], 2.0);
  const Vector below = evaluate_path(path, 0.05);
  EXPECT_EQ(below[0], 1.0);
  EXPECT_EQ(below[1], 0.0);
  const Vector above = evaluate_path(path, 0.99);
  EXPECT_EQ(above[0], 3.0);
}

TEST(CoefficientPath, ConvexCombinationOfNeighbours) {
  const auto path = two_knot_path();
  for (double tau = 0.2; tau <= 0.4; tau += 0.01) {
    const Vector b = path.evaluate(tau);
    const double w = (tau - 0.2) / 0.2;
    EXPECT_NEAR(b[0], (1 - w) * 1 + w * 3, 1e-12);
    EXPECT_NEAR(b[1], w * 2, 1e-12);
  }
}

TEST(CoefficientPath, RowCountMustMatchGrid) {
  EXPECT_THROW(CoefficientPath(TauGrid({0.2, 0.4}), Matrix::Zero(3, 2)), InvalidArgument);
}

TEST(TauGrid, DefaultGridHasNinetySevenKnots) {
  const auto g = TauGrid::default_grid();
  ASSERT_EQ(g.size(), 97u);
  EXPECT_EQ(g.front(), 0.02);
  EXPECT_EQ(g.back(), 0.98);
  EXPECT_EQ(g[7], 0.09);
  EXPECT_NEAR(g.mesh(), 0.01, 1e-12);
}

TEST(TauGrid, RejectsBadKnots) {
  EXPECT_THROW(TauGrid(std::vector<double>{}), InvalidArgument);
  EXPECT_THROW(TauGrid({0.0, 0.5}), InvalidArgument);
  EXPECT_THROW(TauGrid({0.5, 1.0}), InvalidArgument);
  EXPECT_THROW(TauGrid({0.5, 0.4}), InvalidArgument);
  EXPECT_THROW(TauGrid::uniform(0.1, 0.9, 0.0), InvalidArgument);
}

TEST(Dataset, DefaultsNuStarToLargestCensoring) {
  Dataset d({record({0.1}, 0.8, {1.0}), record({}, 0.6, {2.0})}, {"x"});
  EXPECT_EQ(d.nu_star(), 0.8);
  EXPECT_EQ(d.dimension(), 2u);
  EXPECT_EQ(d.total_events(), 1u);
  EXPECT_THROW(Dataset({record({}, 0.8, {1.0})}, {"x"}, 0.5), InvalidArgument);
  EXPECT_THROW(Dataset({record({}, 0.8, {})}, {"x"}), InvalidArgument);
  EXPECT_THROW(Dataset({}, {"x"}), InvalidArgument);
}

TEST(Dataset, StandardizeCentersAndScales) {
  Dataset d({record({}, 1, {1.0, 5.0}), record({}, 1, {2.0, 5.0}), record({}, 1, {3.0, 5.0})}, {"a", "b"});
  const Dataset s = d.standardized({0, 1});
  EXPECT_DOUBLE_EQ(s[0].covariates[0], -1.0);
  EXPECT_DOUBLE_EQ(s[2].covariates[0], 1.0);
  EXPECT_DOUBLE_EQ(s[1].covariates[1], 0.0);  // zero spread: centered only
  ASSERT_TRUE(s.standardization());
  EXPECT_DOUBLE_EQ(s.standardization()->centers[0], 2.0);
  EXPECT_DOUBLE_EQ(s.standardization()->scales[0], 1.0);
  EXPECT_DOUBLE_EQ(s.standardization()->scales[1], 1.0);
}

TEST(DesignRow, PrependsIntercept) {
  const auto x = DesignRow::from_covariates({0.5, 1.0});
  ASSERT_EQ(x.size(), 3u);
  EXPECT_EQ(x[0], 1.0);
  EXPECT_EQ(x[1], 0.5);
  EXPECT_EQ(x[2], 1.0);
}
