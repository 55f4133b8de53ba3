#pragma once

// Iterative conditional-score estimator of the quantile coefficient path.
//
//   1. naive path: quantile regression of log(gamma_hat_i) on X_i;
//   2. posterior density of gamma_i on a grid built from the current path;
//   3. for every tau_k, a pooled weighted quantile regression over all
//      (subject, grid point) pairs with responses log(gamma_ij) and weights
//      f(gamma_ij) times the quadrature weight;
//   4. repeat 2-3 until sum_k |beta_new(tau_k) - beta_old(tau_k)|^2 < tol.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "recurq/baseline.hpp"
#include "recurq/density.hpp"
#include "recurq/errors.hpp"
#include "recurq/model.hpp"
#include "recurq/parallel.hpp"
#include "recurq/qr_solver.hpp"

namespace recurq {

struct FitConfig {
  TauGrid grid = TauGrid::default_grid();
  std::size_t max_iter = 100;
  double tol = 0.01;
  std::size_t gamma_grid_refinement = 1;
  bool adjusted_naive_start = true;
  std::uint64_t rng_seed = 0;  // reserved for randomized starts; the default fit draws nothing
  Quadrature quadrature = Quadrature::left_riemann;
  std::optional<CoefficientPath> initial_path;  // replaces the naive start
  std::size_t jobs = 1;

  void validate() const {
    if (!(tol > 0.0)) throw InvalidArgument("fit: tol must be positive");
    if (max_iter < 1) throw InvalidArgument("fit: max_iter must be at least 1");
    if (gamma_grid_refinement < 1) throw InvalidArgument("fit: gamma grid refinement must be at least 1");
    if (grid.size() == 0) throw InvalidArgument("fit: empty tau grid");
    if (initial_path && !(initial_path->grid() == grid))
      throw InvalidArgument("fit: initial path must live on the fitting grid");
  }
};

struct FitResult {
  CoefficientPath path;
  CoefficientPath naive_path;
  std::size_t iterations = 0;
  bool converged = false;
  double final_step_norm = 0.0;
  std::vector<double> step_norms;  // one per iteration
  std::size_t dropped_subjects = 0;  // ZeroMass drops summed over iterations
  BaselineEstimate baseline;
};

// Rows of one pooled weighted QR: responses, row-major design, weights.
// Rows come in segments (one per subject) sharing the same design row,
// with strictly increasing responses inside a segment.
struct PseudoObservations {
  std::vector<double> responses;
  std::vector<double> design;
  std::vector<double> weights;
  std::vector<std::size_t> segments{0};  // segment s is [segments[s], segments[s+1])
  std::size_t cols = 0;
  std::size_t dropped = 0;

  std::size_t rows() const noexcept { return responses.size(); }
  std::size_t segment_count() const noexcept { return segments.size() - 1; }

  void append(double y, const Vector& x, double w) {
    responses.push_back(y);
    for (Eigen::Index c = 0; c < x.size(); ++c) design.push_back(x[c]);
    weights.push_back(w);
  }
  void close_segment() {
    if (segments.back() != rows()) segments.push_back(rows());
  }
};

inline std::vector<Vector> design_rows(const Dataset& data) {
  std::vector<Vector> rows;
  rows.reserve(data.size());
  for (const auto& r : data.records()) rows.push_back(DesignRow(r).values());
  return rows;
}

// One row per subject: (log gamma_hat_i, X_i) with unit weight.
inline PseudoObservations naive_observations(const Dataset& data, const BaselineEstimate& baseline, bool adjusted) {
  PseudoObservations obs;
  obs.cols = data.dimension();
  for (const auto& r : data.records()) {
    const double g = naive_gamma(r, baseline, adjusted);
    if (!(g > 0.0))
      throw InvalidArgument("subject '" + r.id + "' has no events; the unadjusted naive estimate is log(0)");
    obs.append(std::log(g), DesignRow(r).values(), 1.0);
    obs.close_segment();
  }
  return obs;
}

// Step 2: posterior of gamma_i on its grid, turned into weighted rows.
inline PseudoObservations posterior_observations(const Dataset& data, const CoefficientPath& path,
                                                 const BaselineEstimate& baseline, std::size_t refinement,
                                                 Quadrature rule, std::size_t jobs = 1) {
  const std::size_t n = data.size();
  const std::vector<Vector> xs = design_rows(data);
  std::vector<PseudoObservations> parts(n);
  const auto& taus = path.grid().knots();
  parallel_for(n, jobs, [&](std::size_t i) {
    const auto& r = data[i];
    const auto q = monotone_quantiles(xs[i], path);
    const GammaGrid grid = default_gamma_grid(DesignRow(r), path, refinement);
    const auto& pts = grid.points();
    std::vector<double> masses(pts.size());
    auto& part = parts[i];
    part.cols = xs[i].size();
    try {
      posterior_cell_masses(r.event_count(), baseline.mu(r.censoring_time), q, taus, pts, rule, masses);
    } catch (const ZeroMass&) {
      part.dropped = 1;
      return;
    }
    for (std::size_t j = 0; j < pts.size(); ++j)
      if (masses[j] > 0.0) part.append(std::log(pts[j]), xs[i], masses[j]);
  });
  PseudoObservations obs;
  obs.cols = data.dimension();
  for (auto& part : parts) {
    obs.responses.insert(obs.responses.end(), part.responses.begin(), part.responses.end());
    obs.design.insert(obs.design.end(), part.design.begin(), part.design.end());
    obs.weights.insert(obs.weights.end(), part.weights.begin(), part.weights.end());
    obs.dropped += part.dropped;
    obs.close_segment();
  }
  if (obs.rows() == 0) throw ZeroMass("every subject's posterior vanished on its gamma grid");
  return obs;
}

struct PathSolveStats {
  std::size_t pivots = 0;
  std::size_t resolves = 0;  // globbing rounds beyond the first
};

namespace detail {

// Segments with fewer rows in total are solved without globbing.
inline constexpr std::size_t glob_threshold = 4000;

// Knots per warm-start chain in solve_path.
inline constexpr std::size_t path_block = 25;

// Exact solve of the pooled weighted QR by globbing. Around a guess b only
// rows with |y - x'b| <= h_s enter the simplex, h_s a per-segment window;
// in each segment the rows below and above the window contribute the
// linear term of their known residual sign. The reduced solution is
// optimal for the full problem iff no globbed row changed sides. Segments
// where one did get a wider window and the problem is re-solved around the
// new solution, warm-started from its basis.
class PooledSolver {
 public:
  explicit PooledSolver(const PseudoObservations& obs)
      : obs_(obs), p_(obs.cols), h_(obs.segment_count(), initial_window) {
    cum_.assign(obs.rows() + obs.segment_count(), 0.0);
    for (std::size_t s = 0; s < obs.segment_count(); ++s) {
      const std::size_t a = obs.segments[s];
      const std::size_t b = obs.segments[s + 1];
      double acc = 0.0;
      cum_[a + s] = 0.0;
      for (std::size_t i = a; i < b; ++i) {
        acc += obs.weights[i];
        cum_[i + s + 1] = acc;
      }
    }
  }

  QRSolution solve(double tau, const Vector& guess, const std::vector<std::size_t>& warm, PathSolveStats& stats) {
    const WeightedQRProblem full{obs_.responses, DesignView{obs_.design, p_}, obs_.weights, tau};
    QRSolveOptions opt;
    opt.warm_basis = warm;
    if (obs_.rows() <= glob_threshold) return finish(solve_weighted_qr(full, opt), full, stats);
    Vector centre = guess;
    std::vector<std::size_t> start = warm;  // global row indices
    widened_.assign(h_.size(), 0);
    for (;;) {
      if (!(*std::max_element(h_.begin(), h_.end()) < 1e6)) {
        opt.warm_basis = start;
        return finish(solve_weighted_qr(full, opt), full, stats);
      }
      build(tau, centre);
      if (std::count_if(sub_w_.begin(), sub_w_.end(), [](double w) { return w > 0.0; }) <
          static_cast<std::ptrdiff_t>(p_)) {
        widen_all(stats);
        continue;
      }
      opt.warm_basis.clear();
      for (std::size_t i : start) {
        const std::size_t a = local_of(i);
        if (a == npos) break;
        opt.warm_basis.push_back(a);
      }
      const WeightedQRProblem reduced{sub_y_, DesignView{sub_x_, p_}, sub_w_, tau, linear_};
      QRSolution sol;
      try {
        sol = solve_weighted_qr(reduced, opt);
      } catch (const Unbounded&) {
        widen_all(stats);
        continue;
      } catch (const RankDeficient&) {
        widen_all(stats);
        continue;
      }
      stats.pivots += sol.pivots;
      for (auto& i : sol.basis) i = index_[i];
      if (!consistent(sol.coef)) {
        ++stats.resolves;
        centre = sol.coef;
        start = sol.basis;
        continue;
      }
      if (!satisfies_subgradient_condition(reduced, sol.coef))
        throw SolverFailure("step-3 solution violates the subgradient optimality condition");
      for (std::size_t s = 0; s < h_.size(); ++s)
        if (!widened_[s]) h_[s] = std::max(0.75 * h_[s], min_window);
      sol.objective = weighted_check_objective(full, sol.coef);
      return sol;
    }
  }

 private:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  QRSolution finish(QRSolution sol, const WeightedQRProblem& full, PathSolveStats& stats) {
    stats.pivots += sol.pivots;
    if (!satisfies_subgradient_condition(full, sol.coef))
      throw SolverFailure("step-3 solution violates the subgradient optimality condition");
    return sol;
  }

  void widen_all(PathSolveStats& stats) {
    for (std::size_t s = 0; s < h_.size(); ++s) {
      h_[s] *= 2.0;
      widened_[s] = 1;
    }
    ++stats.resolves;
  }

  double fit(std::size_t row, const Vector& b) const {
    double f = 0.0;
    for (std::size_t c = 0; c < p_; ++c) f += obs_.design[row * p_ + c] * b[static_cast<Eigen::Index>(c)];
    return f;
  }

  std::size_t local_of(std::size_t row) const {
    const auto it = std::lower_bound(index_.begin(), index_.end(), row);
    return it != index_.end() && *it == row ? static_cast<std::size_t>(it - index_.begin()) : npos;
  }

  void build(double tau, const Vector& centre) {
    const std::size_t S = obs_.segment_count();
    lo_.resize(S);
    hi_.resize(S);
    sub_y_.clear();
    sub_x_.clear();
    sub_w_.clear();
    index_.clear();
    linear_.assign(p_, 0.0);
    for (std::size_t s = 0; s < S; ++s) {
      const std::size_t a = obs_.segments[s];
      const std::size_t b = obs_.segments[s + 1];
      const double f = fit(a, centre);
      const auto first = obs_.responses.begin();
      const auto lo = static_cast<std::size_t>(std::lower_bound(first + a, first + b, f - h_[s]) - first);
      const auto hi = static_cast<std::size_t>(std::upper_bound(first + lo, first + b, f + h_[s]) - first);
      lo_[s] = lo;
      hi_[s] = hi;
      for (std::size_t i = lo; i < hi; ++i) {
        index_.push_back(i);
        sub_y_.push_back(obs_.responses[i]);
        sub_x_.insert(sub_x_.end(), obs_.design.begin() + static_cast<std::ptrdiff_t>(i * p_),
                      obs_.design.begin() + static_cast<std::ptrdiff_t>((i + 1) * p_));
        sub_w_.push_back(obs_.weights[i]);
      }
      // rho_tau(y - x'b) = const - tau x'b above the fit, + (1 - tau) x'b below.
      const double below = cum_[lo + s] - cum_[a + s];
      const double above = cum_[b + s] - cum_[hi + s];
      const double slope = (1.0 - tau) * below - tau * above;
      if (slope != 0.0)
        for (std::size_t c = 0; c < p_; ++c) linear_[c] += slope * obs_.design[a * p_ + c];
    }
  }

  // Globbed rows stay on their side; within a segment only the rows next
  // to the window need checking. Offending segments get twice the window.
  bool consistent(const Vector& b) {
    bool ok = true;
    for (std::size_t s = 0; s < obs_.segment_count(); ++s) {
      const std::size_t a = obs_.segments[s];
      const std::size_t e = obs_.segments[s + 1];
      const double f = fit(a, b);
      if ((lo_[s] > a && obs_.responses[lo_[s] - 1] - f > 0.0) ||
          (hi_[s] < e && obs_.responses[hi_[s]] - f < 0.0)) {
        h_[s] *= 2.0;
        widened_[s] = 1;
        ok = false;
      }
    }
    return ok;
  }

  const PseudoObservations& obs_;
  std::size_t p_;
  static constexpr double initial_window = 0.05;
  static constexpr double min_window = 0.02;
  std::vector<double> h_;  // per-segment half-widths
  std::vector<unsigned char> widened_;
  std::vector<double> cum_;  // per-segment prefix sums of weights, one leading zero per segment
  std::vector<std::size_t> lo_, hi_, index_;
  std::vector<double> sub_y_, sub_x_, sub_w_, linear_;
};

}  // namespace detail

// Step 3: one weighted QR per knot. Knots are processed in contiguous
// blocks of fixed size, so the result does not depend on the number of
// workers; within a block each solve is warm-started from its left
// neighbour. `guess` (e.g. the previous iterate) seeds the first knot of
// each block and the shape of the path.
inline CoefficientPath solve_path(const PseudoObservations& obs, const TauGrid& grid, std::size_t jobs = 1,
                                  const CoefficientPath* guess = nullptr, PathSolveStats* stats = nullptr) {
  const std::size_t K = grid.size();
  const std::size_t p = obs.cols;
  Matrix theta(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(p));
  std::vector<PathSolveStats> block_stats(K);
  const std::size_t blocks = (K + detail::path_block - 1) / detail::path_block;
  parallel_for(blocks, jobs, [&](std::size_t blk) {
    const std::size_t begin = blk * detail::path_block;
    const std::size_t end = std::min(K, begin + detail::path_block);
    std::vector<std::size_t> warm;
    Vector start = guess ? guess->at_knot(begin) : Vector::Zero(static_cast<Eigen::Index>(p));
    if (!guess && obs.rows() > detail::glob_threshold) {
      // Cold start without a guess: unglobbed solve for the first knot.
      const WeightedQRProblem problem{obs.responses, DesignView{obs.design, p}, obs.weights, grid[begin]};
      const QRSolution sol = solve_weighted_qr(problem);
      start = sol.coef;
      warm = sol.basis;
    }
    detail::PooledSolver solver(obs);
    for (std::size_t k = begin; k < end; ++k) {
      // Left neighbour's solution moved by the guess path's increment.
      if (guess && k > begin) start += guess->at_knot(k) - guess->at_knot(k - 1);
      const QRSolution sol = solver.solve(grid[k], start, warm, block_stats[k]);
      theta.row(static_cast<Eigen::Index>(k)) = sol.coef.transpose();
      warm = sol.basis;
      start = sol.coef;
    }
  });
  if (stats)
    for (const auto& b : block_stats) {
      stats->pivots += b.pivots;
      stats->resolves += b.resolves;
    }
  return CoefficientPath(grid, std::move(theta));
}

// Step 1.
inline CoefficientPath fit_naive(const Dataset& data, const TauGrid& grid, bool adjusted, std::size_t jobs = 1) {
  const BaselineEstimate baseline = estimate_baseline(data);
  return solve_path(naive_observations(data, baseline, adjusted), grid, jobs);
}

inline double squared_step(const CoefficientPath& a, const CoefficientPath& b) {
  return (a.theta() - b.theta()).squaredNorm();
}

inline FitResult fit(const Dataset& data, const FitConfig& config = {}) {
  config.validate();
  FitResult out;
  out.baseline = estimate_baseline(data);
  out.naive_path =
      solve_path(naive_observations(data, out.baseline, config.adjusted_naive_start), config.grid, config.jobs);
  CoefficientPath current = config.initial_path ? *config.initial_path : out.naive_path;
  for (std::size_t r = 1; r <= config.max_iter; ++r) {
    const PseudoObservations obs = posterior_observations(data, current, out.baseline, config.gamma_grid_refinement,
                                                          config.quadrature, config.jobs);
    out.dropped_subjects += obs.dropped;
    CoefficientPath next = solve_path(obs, config.grid, config.jobs, &current);
    const double step = squared_step(current, next);
    out.step_norms.push_back(step);
    out.iterations = r;
    out.final_step_norm = step;
    current = std::move(next);
    if (step < config.tol) {
      out.converged = true;
      break;
    }
  }
  out.path = std::move(current);
  return out;
}

}  // namespace recurq
