#pragma once

// Monte Carlo harness: R simulated datasets, each fitted by the proposed
// and the naive estimator, optionally bootstrapped; aggregates bias, SD,
// mean SE and CI coverage at chosen tau values.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "recurq/errors.hpp"
#include "recurq/estimator.hpp"
#include "recurq/inference.hpp"
#include "recurq/model.hpp"
#include "recurq/parallel.hpp"
#include "recurq/random.hpp"
#include "recurq/sim.hpp"

namespace recurq {

struct MonteCarloConfig {
  DGPSpec spec;
  FitConfig fit;
  std::size_t R = 100;
  std::size_t B = 0;  // 0: no bootstrap, SE and coverage are NaN
  double alpha = 0.05;
  std::vector<double> tau_report{0.1, 0.25, 0.5, 0.75, 0.9};  // must be knots of fit.grid
  std::optional<std::size_t> constancy_coefficient;          // run the constancy test (needs B >= 2)
  double tau_l = 0.1;
  double tau_u = 0.9;
  std::size_t jobs = 1;  // replications in parallel
  double max_failure_fraction = 0.1;

  void validate() const {
    spec.validate();
    fit.validate();
    if (R < 1) throw InvalidArgument("monte carlo: R must be at least 1");
    if (B == 1) throw InvalidArgument("monte carlo: B must be 0 or at least 2");
    if (constancy_coefficient && B < 2) throw InvalidArgument("monte carlo: the constancy test needs B >= 2");
  }
};

struct ReplicationOutcome {
  bool ok = false;
  std::string message;
  Matrix estimate;  // one row per reported tau
  Matrix naive;
  Matrix se;
  Matrix covered;  // 1 if the normal CI holds the truth
  double mean_events = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  bool stable_tail = false;  // step norms nonincreasing over the last five iterations
  Vector path_correlation;   // corr over knots in [0.1, 0.9] of fitted and true beta_j
  std::optional<ConstancyTestResult> test;
};

struct MonteCarloRow {
  double tau = 0.0;
  std::size_t coefficient = 0;
  std::string name;
  double truth = 0.0;
  double mean_estimate = 0.0;
  double bias = 0.0;
  double sd = 0.0;
  double mean_se = 0.0;
  double coverage = 0.0;
  double naive_mean = 0.0;
  double naive_bias = 0.0;
  double naive_sd = 0.0;
};

struct MonteCarloReport {
  std::string dgp;
  std::size_t n = 0;
  std::size_t R = 0;
  std::size_t B = 0;
  std::uint64_t seed = 0;
  std::size_t succeeded = 0;
  std::size_t converged = 0;
  std::size_t stable_tail = 0;
  double mean_events = 0.0;
  double mean_iterations = 0.0;
  std::vector<double> mean_path_correlation;  // per coefficient; NaN where the truth is flat
  std::optional<double> rejection_rate;
  std::vector<MonteCarloRow> rows;
  std::vector<ReplicateFailureRecord> failures;

  const MonteCarloRow& row(double tau, std::size_t coefficient) const {
    for (const auto& r : rows)
      if (std::abs(r.tau - tau) < 1e-9 && r.coefficient == coefficient) return r;
    throw InvalidArgument("monte carlo report has no row for tau " + std::to_string(tau));
  }
};

namespace detail {

inline std::size_t knot_index(const TauGrid& grid, double tau) {
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (std::abs(grid[k] - tau) < 1e-9) return k;
  throw InvalidArgument("reported tau " + std::to_string(tau) + " is not a knot of the fitting grid");
}

// Sum in sorted order, so the result does not depend on the order of the
// replications.
inline double ordered_sum(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

inline double ordered_mean(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return ordered_sum(v) / static_cast<double>(v.size());
}

inline double ordered_sd(const std::vector<double>& v) {
  if (v.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double m = ordered_mean(v);
  std::vector<double> sq;
  sq.reserve(v.size());
  for (double x : v) sq.push_back((x - m) * (x - m));
  return std::sqrt(ordered_sum(std::move(sq)) / static_cast<double>(v.size() - 1));
}

inline double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = ordered_mean(a);
  const double mb = ordered_mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (!(saa > 0.0) || !(sbb > 1e-24)) return std::numeric_limits<double>::quiet_NaN();
  return sab / std::sqrt(saa * sbb);
}

inline ReplicationOutcome run_replication(const MonteCarloConfig& cfg, std::size_t r) {
  ReplicationOutcome out;
  const std::size_t T = cfg.tau_report.size();
  const auto& grid = cfg.fit.grid;
  FitConfig fc = cfg.fit;
  fc.jobs = 1;
  const SimulatedDataset sim = generate_dataset(cfg.spec, r);
  out.mean_events = mean_events_per_subject(sim.data);
  const FitResult fr = fit(sim.data, fc);
  const std::size_t p = fr.path.dimension();
  out.iterations = fr.iterations;
  out.converged = fr.converged;
  if (fr.step_norms.size() >= 5) {
    out.stable_tail = true;
    for (std::size_t s = fr.step_norms.size() - 4; s < fr.step_norms.size(); ++s)
      if (fr.step_norms[s] > fr.step_norms[s - 1]) out.stable_tail = false;
  }
  const auto P = static_cast<Eigen::Index>(p);
  out.estimate = Matrix(static_cast<Eigen::Index>(T), P);
  out.naive = Matrix(static_cast<Eigen::Index>(T), P);
  out.se = Matrix::Constant(static_cast<Eigen::Index>(T), P, std::numeric_limits<double>::quiet_NaN());
  out.covered = out.se;
  std::optional<BootstrapSummary> boot;
  if (cfg.B >= 2) {
    BootstrapOptions bo;
    bo.B = cfg.B;
    bo.alpha = cfg.alpha;
    bo.seed = derive_seed(cfg.spec.seed, Stream::monte_carlo, r);
    boot = bootstrap(sim.data, fc, fr.path, bo);
  }
  for (std::size_t t = 0; t < T; ++t) {
    const std::size_t k = knot_index(grid, cfg.tau_report[t]);
    const Vector truth = true_coefficients(cfg.spec, cfg.tau_report[t]);
    const auto row = static_cast<Eigen::Index>(t);
    for (Eigen::Index j = 0; j < P; ++j) {
      const auto kk = static_cast<Eigen::Index>(k);
      out.estimate(row, j) = fr.path.theta()(kk, j);
      out.naive(row, j) = fr.naive_path.theta()(kk, j);
      if (boot) {
        out.se(row, j) = boot->se(kk, j);
        out.covered(row, j) = boot->normal_lo(kk, j) <= truth[j] && truth[j] <= boot->normal_hi(kk, j) ? 1.0 : 0.0;
      }
    }
  }
  out.path_correlation = Vector(P);
  for (Eigen::Index j = 0; j < P; ++j) {
    std::vector<double> fitted, truth;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (grid[k] < 0.1 - 1e-12 || grid[k] > 0.9 + 1e-12) continue;
      fitted.push_back(fr.path.theta()(static_cast<Eigen::Index>(k), j));
      truth.push_back(true_coefficients(cfg.spec, grid[k])[j]);
    }
    out.path_correlation[j] = correlation(fitted, truth);
  }
  if (cfg.constancy_coefficient)
    out.test = constancy_test(*boot, sim.data.size(), *cfg.constancy_coefficient, cfg.tau_l, cfg.tau_u);
  out.ok = true;
  return out;
}

}  // namespace detail

// Replication r simulates with stream (seed, simulate, r) and bootstraps
// with a seed derived from (seed, monte_carlo, r); replications may run in
// any order or in parallel with identical aggregates.
inline MonteCarloReport run_monte_carlo(const MonteCarloConfig& cfg) {
  cfg.validate();
  for (double tau : cfg.tau_report) (void)detail::knot_index(cfg.fit.grid, tau);
  std::vector<ReplicationOutcome> outcomes(cfg.R);
  parallel_for(cfg.R, cfg.jobs, [&](std::size_t r) {
    try {
      outcomes[r] = detail::run_replication(cfg, r);
    } catch (const error& e) {
      outcomes[r].ok = false;
      outcomes[r].message = e.what();
    }
  });

  MonteCarloReport rep;
  rep.dgp = std::string(to_string(cfg.spec.kind));
  rep.n = cfg.spec.n;
  rep.R = cfg.R;
  rep.B = cfg.B;
  rep.seed = cfg.spec.seed;
  std::vector<const ReplicationOutcome*> ok;
  for (std::size_t r = 0; r < cfg.R; ++r) {
    if (outcomes[r].ok) ok.push_back(&outcomes[r]);
    else rep.failures.push_back({r, outcomes[r].message});
  }
  if (static_cast<double>(rep.failures.size()) > cfg.max_failure_fraction * static_cast<double>(cfg.R))
    throw SimulationFailure(std::to_string(rep.failures.size()) + " of " + std::to_string(cfg.R) +
                            " replications failed; first: " + rep.failures.front().message);
  rep.succeeded = ok.size();
  if (ok.empty()) throw SimulationFailure("no replication succeeded");

  std::vector<double> events, iters;
  std::size_t rejections = 0;
  for (const auto* o : ok) {
    events.push_back(o->mean_events);
    iters.push_back(static_cast<double>(o->iterations));
    rep.converged += o->converged ? 1 : 0;
    rep.stable_tail += o->stable_tail ? 1 : 0;
    if (o->test && o->test->reject) ++rejections;
  }
  rep.mean_events = detail::ordered_mean(events);
  rep.mean_iterations = detail::ordered_mean(iters);
  if (cfg.constancy_coefficient) rep.rejection_rate = static_cast<double>(rejections) / static_cast<double>(ok.size());

  const auto p = static_cast<Eigen::Index>(ok.front()->estimate.cols());
  for (Eigen::Index j = 0; j < p; ++j) {
    std::vector<double> c;
    for (const auto* o : ok)
      if (std::isfinite(o->path_correlation[j])) c.push_back(o->path_correlation[j]);
    rep.mean_path_correlation.push_back(detail::ordered_mean(c));
  }

  const std::vector<std::string> names{"intercept", "x1", "x2"};
  for (std::size_t t = 0; t < cfg.tau_report.size(); ++t) {
    const Vector truth = true_coefficients(cfg.spec, cfg.tau_report[t]);
    const auto row = static_cast<Eigen::Index>(t);
    for (Eigen::Index j = 0; j < p; ++j) {
      std::vector<double> est, naive, se, cov;
      for (const auto* o : ok) {
        est.push_back(o->estimate(row, j));
        naive.push_back(o->naive(row, j));
        if (std::isfinite(o->se(row, j))) {
          se.push_back(o->se(row, j));
          cov.push_back(o->covered(row, j));
        }
      }
      MonteCarloRow m;
      m.tau = cfg.tau_report[t];
      m.coefficient = static_cast<std::size_t>(j);
      m.name = static_cast<std::size_t>(j) < names.size() ? names[static_cast<std::size_t>(j)] : "x" + std::to_string(j);
      m.truth = truth[j];
      m.mean_estimate = detail::ordered_mean(est);
      m.bias = m.mean_estimate - m.truth;
      m.sd = detail::ordered_sd(est);
      m.mean_se = detail::ordered_mean(se);
      m.coverage = detail::ordered_mean(cov);
      m.naive_mean = detail::ordered_mean(naive);
      m.naive_bias = m.naive_mean - m.truth;
      m.naive_sd = detail::ordered_sd(naive);
      rep.rows.push_back(std::move(m));
    }
  }
  return rep;
}

}  // namespace recurq
