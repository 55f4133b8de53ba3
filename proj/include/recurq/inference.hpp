#pragma once

// Bootstrap standard errors and confidence intervals, the average effect
// of a coefficient over a tau range, and the bootstrap test of whether a
// coefficient is constant in tau.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "recurq/errors.hpp"
#include "recurq/estimator.hpp"
#include "recurq/model.hpp"
#include "recurq/parallel.hpp"
#include "recurq/quantiles.hpp"
#include "recurq/random.hpp"

namespace recurq {

// Empirical quantile of type 1 (inverse of the empirical CDF): the
// ceil(n p)-th order statistic, the first one for p = 0. `sorted` must be
// ascending and nonempty.
inline double order_statistic_quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw InvalidArgument("quantile of an empty sample");
  const auto n = static_cast<double>(sorted.size());
  auto k = static_cast<std::size_t>(std::ceil(n * p - 1e-12));
  k = std::clamp<std::size_t>(k, 1, sorted.size());
  return sorted[k - 1];
}

struct ReplicateFailureRecord {
  std::size_t replicate = 0;
  std::string message;
};

struct BootstrapSummary {
  CoefficientPath estimate;                   // full-data fit
  std::vector<CoefficientPath> replicate_paths;  // successful replicates, in replicate order
  std::vector<std::size_t> replicate_index;      // which draw each path came from
  std::vector<ReplicateFailureRecord> failures;
  Matrix se;  // K x p replicate standard deviations
  Matrix normal_lo, normal_hi;
  Matrix percentile_lo, percentile_hi;
  std::size_t B = 0;
  double alpha = 0.05;
  std::uint64_t seed = 0;
};

// Whole-subject resample: n draws with replacement.
inline Dataset resample_subjects(const Dataset& data, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
  std::vector<SubjectRecord> records;
  records.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) records.push_back(data[pick(rng)]);
  return data.with_records(std::move(records));
}

// SEs and intervals from replicate paths around a given estimate.
inline void summarize_replicates(BootstrapSummary& out) {
  const auto K = static_cast<Eigen::Index>(out.estimate.knots());
  const auto p = static_cast<Eigen::Index>(out.estimate.dimension());
  const std::size_t R = out.replicate_paths.size();
  out.se = Matrix::Zero(K, p);
  out.normal_lo = out.normal_hi = out.percentile_lo = out.percentile_hi = Matrix::Zero(K, p);
  const double z = normal_quantile(1.0 - out.alpha / 2.0);
  std::vector<double> v(R);
  for (Eigen::Index k = 0; k < K; ++k)
    for (Eigen::Index j = 0; j < p; ++j) {
      double mean = 0.0;
      for (std::size_t b = 0; b < R; ++b) {
        v[b] = out.replicate_paths[b].theta()(k, j);
        mean += v[b];
      }
      mean /= static_cast<double>(R);
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      const double se = R > 1 ? std::sqrt(ss / static_cast<double>(R - 1)) : 0.0;
      const double est = out.estimate.theta()(k, j);
      out.se(k, j) = se;
      out.normal_lo(k, j) = est - z * se;
      out.normal_hi(k, j) = est + z * se;
      std::sort(v.begin(), v.end());
      out.percentile_lo(k, j) = order_statistic_quantile(v, out.alpha / 2.0);
      out.percentile_hi(k, j) = order_statistic_quantile(v, 1.0 - out.alpha / 2.0);
    }
}

struct BootstrapOptions {
  std::size_t B = 100;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;  // replicates run in parallel; each fit is serial
  double max_failure_fraction = 0.2;
};

// Replicate b resamples with stream (seed, bootstrap, b) and refits from
// its own naive start, with the baseline re-estimated on the resample.
inline BootstrapSummary bootstrap(const Dataset& data, const FitConfig& config, const CoefficientPath& estimate,
                                  const BootstrapOptions& options) {
  if (options.B < 2) throw InvalidArgument("bootstrap: B must be at least 2");
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) throw InvalidArgument("bootstrap: alpha must lie in (0, 1)");
  FitConfig rep_config = config;
  rep_config.jobs = 1;
  rep_config.initial_path.reset();
  std::vector<std::optional<CoefficientPath>> paths(options.B);
  std::vector<std::string> errors(options.B);
  parallel_for(options.B, options.jobs, [&](std::size_t b) {
    Rng rng = make_stream(options.seed, Stream::bootstrap, b);
    try {
      paths[b] = fit(resample_subjects(data, rng), rep_config).path;
    } catch (const error& e) {
      errors[b] = e.what();
    }
  });
  BootstrapSummary out;
  out.estimate = estimate;
  out.B = options.B;
  out.alpha = options.alpha;
  out.seed = options.seed;
  for (std::size_t b = 0; b < options.B; ++b) {
    if (paths[b]) {
      out.replicate_paths.push_back(std::move(*paths[b]));
      out.replicate_index.push_back(b);
    } else {
      out.failures.push_back({b, errors[b]});
    }
  }
  if (static_cast<double>(out.failures.size()) > options.max_failure_fraction * static_cast<double>(options.B))
    throw ReplicateFailure(std::to_string(out.failures.size()) + " of " + std::to_string(options.B) +
                           " bootstrap replicates failed; first: " + out.failures.front().message);
  if (out.replicate_paths.size() < 2) throw ReplicateFailure("fewer than two bootstrap replicates succeeded");
  summarize_replicates(out);
  return out;
}

inline BootstrapSummary bootstrap(const Dataset& data, const FitConfig& config, const BootstrapOptions& options) {
  return bootstrap(data, config, fit(data, config).path, options);
}

namespace detail {

struct Piece {
  double width;
  double mean;  // average of beta_j over the piece
};

// beta_j restricted to [a, b] split at the knots; exact for the
// piecewise-linear path.
inline std::vector<Piece> path_pieces(const CoefficientPath& path, std::size_t j, double a, double b) {
  const auto& t = path.grid().knots();
  const auto col = static_cast<Eigen::Index>(j);
  std::vector<Piece> out;
  for (std::size_t k = 0; k + 1 < t.size(); ++k) {
    const double lo = std::max(a, t[k]);
    const double hi = std::min(b, t[k + 1]);
    if (!(hi > lo)) continue;
    out.push_back({hi - lo, 0.5 * (path.evaluate(lo)[col] + path.evaluate(hi)[col])});
  }
  return out;
}

// Sum of width * (mean - ref). Centering on ref keeps a flat path at
// exactly zero.
inline double centered_integral(const std::vector<Piece>& pieces, double ref) {
  double total = 0.0;
  for (const auto& pc : pieces) total += pc.width * (pc.mean - ref);
  return total;
}

inline void check_range(const CoefficientPath& path, std::size_t j, double tau_l, double tau_u) {
  if (j >= path.dimension()) throw RangeError("coefficient index out of range");
  if (!(tau_l < tau_u)) throw RangeError("need tau_L < tau_U");
  if (tau_l < path.grid().front() || tau_u > path.grid().back())
    throw RangeError("averaging range [" + std::to_string(tau_l) + ", " + std::to_string(tau_u) +
                     "] leaves the tau grid");
}

}  // namespace detail

// Mean of beta_j over [tau_L, tau_U].
inline double average_effect(const CoefficientPath& path, std::size_t j, double tau_l = 0.1, double tau_u = 0.9) {
  detail::check_range(path, j, tau_l, tau_u);
  const auto pieces = detail::path_pieces(path, j, tau_l, tau_u);
  const double ref = pieces.front().mean;
  return ref + detail::centered_integral(pieces, ref) / (tau_u - tau_l);
}

// T = sqrt(n) * int Xi(tau) {beta_j(tau) - eta_j} dtau with
// Xi(tau) = I{tau <= (tau_L + tau_U)/2}, eta_j the average effect.
inline double constancy_statistic(const CoefficientPath& path, std::size_t j, double tau_l, double tau_u,
                                  std::size_t n) {
  const double eta = average_effect(path, j, tau_l, tau_u);
  const double mid = 0.5 * (tau_l + tau_u);
  return std::sqrt(static_cast<double>(n)) * detail::centered_integral(detail::path_pieces(path, j, tau_l, mid), eta);
}

struct ConstancyTestResult {
  std::size_t coefficient = 0;
  double statistic = 0.0;
  double region_lo = 0.0;  // reject below
  double region_hi = 0.0;  // reject above
  bool reject = false;
  double eta_hat = 0.0;
  double tau_l = 0.1;
  double tau_u = 0.9;
  std::size_t replicates = 0;
};

// T is linear in the path, so T* = T(beta*) - T(beta_hat).
inline ConstancyTestResult constancy_test(const BootstrapSummary& boot, std::size_t n, std::size_t j,
                                          double tau_l = 0.1, double tau_u = 0.9) {
  ConstancyTestResult out;
  out.coefficient = j;
  out.tau_l = tau_l;
  out.tau_u = tau_u;
  out.statistic = constancy_statistic(boot.estimate, j, tau_l, tau_u, n);
  out.eta_hat = average_effect(boot.estimate, j, tau_l, tau_u);
  std::vector<double> star;
  star.reserve(boot.replicate_paths.size());
  for (const auto& rp : boot.replicate_paths)
    star.push_back(constancy_statistic(rp, j, tau_l, tau_u, n) - out.statistic);
  std::sort(star.begin(), star.end());
  out.region_lo = order_statistic_quantile(star, boot.alpha / 2.0);
  out.region_hi = order_statistic_quantile(star, 1.0 - boot.alpha / 2.0);
  out.reject = out.statistic < out.region_lo || out.statistic > out.region_hi;
  out.replicates = star.size();
  return out;
}

inline ConstancyTestResult constancy_test(const Dataset& data, const FitConfig& config, std::size_t j, double tau_l,
                                          double tau_u, const BootstrapOptions& options) {
  const CoefficientPath est = fit(data, config).path;
  detail::check_range(est, j, tau_l, tau_u);
  return constancy_test(bootstrap(data, config, est, options), data.size(), j, tau_l, tau_u);
}

}  // namespace recurq
