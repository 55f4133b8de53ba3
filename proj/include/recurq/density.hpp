#pragma once

// Poisson window pmf, the piecewise-constant conditional density of gamma
// implied by a coefficient path, and the posterior density of gamma given
// (m, C, X) that serves as quadrature weights in the estimating equation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "recurq/baseline.hpp"
#include "recurq/errors.hpp"
#include "recurq/model.hpp"

namespace recurq {

// log of {gamma mu(C)}^m / m! exp{-gamma mu(C)}.
inline double log_poisson_window_pmf(std::size_t m, double gamma, double mu_c) {
  const double mean = gamma * mu_c;
  const double md = static_cast<double>(m);
  if (m == 0) return -mean;
  return md * std::log(mean) - mean - std::lgamma(md + 1.0);
}

inline double poisson_window_pmf(std::size_t m, double gamma, double mu_c) {
  return std::exp(log_poisson_window_pmf(m, gamma, mu_c));
}

// Sorted, strictly increasing q_k = exp{x' beta(tau_k)}. Crossing quantiles
// are rearranged; coincident values are pushed apart by 1e-8 (1 + |q_K|).
inline std::vector<double> monotone_quantiles(const Vector& x, const CoefficientPath& path) {
  const Vector lp = path.linear_predictor(x);
  std::vector<double> q(static_cast<std::size_t>(lp.size()));
  for (std::size_t k = 0; k < q.size(); ++k) q[k] = lp[static_cast<Eigen::Index>(k)];
  std::sort(q.begin(), q.end());
  for (double& v : q) v = std::exp(v);
  const double eps = 1e-8 * (1.0 + std::abs(q.back()));
  for (std::size_t k = 1; k < q.size(); ++k)
    if (q[k] <= q[k - 1]) q[k] = q[k - 1] + eps;
  return q;
}

inline std::vector<double> monotone_quantiles(const DesignRow& x, const CoefficientPath& path) {
  return monotone_quantiles(x.values(), path);
}

// (tau_k - tau_{k-1}) / (q_k - q_{k-1}) on q_{k-1} < gamma <= q_k, with
// tau_0 = q_0 = 0; zero beyond q_K. Returns log of that (or -inf).
inline double log_piecewise_density(double gamma, std::span<const double> quantiles,
                                    std::span<const double> taus) {
  if (!(gamma > 0.0)) return -std::numeric_limits<double>::infinity();
  const auto it = std::lower_bound(quantiles.begin(), quantiles.end(), gamma);
  if (it == quantiles.end()) return -std::numeric_limits<double>::infinity();
  const auto k = static_cast<std::size_t>(it - quantiles.begin());
  const double q_lo = k == 0 ? 0.0 : quantiles[k - 1];
  const double t_lo = k == 0 ? 0.0 : taus[k - 1];
  const double width = quantiles[k] - q_lo;
  if (!(width > 0.0)) throw DegenerateBin("adjacent quantiles coincide; the coefficient path has collapsed");
  return std::log(taus[k] - t_lo) - std::log(width);
}

inline double piecewise_density(double gamma, std::span<const double> quantiles, std::span<const double> taus) {
  return std::exp(log_piecewise_density(gamma, quantiles, taus));
}

inline double piecewise_density(double gamma, const DesignRow& x, const CoefficientPath& path) {
  const auto q = monotone_quantiles(x, path);
  return piecewise_density(gamma, q, path.grid().knots());
}

// Strictly increasing positive gamma values for one subject.
class GammaGrid {
 public:
  GammaGrid() = default;

  explicit GammaGrid(std::vector<double> points) : points_(std::move(points)) {
    if (points_.size() < 2) throw InvalidArgument("gamma grid needs at least two points");
    if (!(points_.front() > 0.0)) throw InvalidArgument("gamma grid points must be positive");
    for (std::size_t j = 1; j < points_.size(); ++j)
      if (!(points_[j] > points_[j - 1])) throw InvalidArgument("gamma grid must be strictly increasing");
  }

  const std::vector<double>& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  double operator[](std::size_t j) const { return points_[j]; }

 private:
  std::vector<double> points_;
};

// factor - 1 equally spaced points inserted between consecutive points.
inline std::vector<double> refine_points(std::span<const double> points, std::size_t factor) {
  if (factor <= 1 || points.size() < 2) return {points.begin(), points.end()};
  std::vector<double> out;
  out.reserve((points.size() - 1) * factor + 1);
  for (std::size_t j = 0; j + 1 < points.size(); ++j) {
    const double step = (points[j + 1] - points[j]) / static_cast<double>(factor);
    out.push_back(points[j]);
    for (std::size_t s = 1; s < factor; ++s) out.push_back(points[j] + static_cast<double>(s) * step);
  }
  out.push_back(points.back());
  return out;
}

// The current iterate's K quantile values, optionally refined.
inline GammaGrid default_gamma_grid(const DesignRow& x, const CoefficientPath& path, std::size_t refinement = 1) {
  auto q = monotone_quantiles(x, path);
  if (q.size() == 1) q.push_back(q.front() * (1.0 + 1e-8) + 1e-8);
  return GammaGrid(refine_points(q, refinement));
}

enum class Quadrature { left_riemann, trapezoid };

// Weights of the quadrature rule on a grid: left Riemann uses
// (g_{j+1} - g_j) for j < J and 0 for the last point.
inline void quadrature_weights(std::span<const double> points, Quadrature rule, std::span<double> out) {
  const std::size_t J = points.size();
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t j = 0; j + 1 < J; ++j) {
    const double h = points[j + 1] - points[j];
    if (rule == Quadrature::left_riemann) {
      out[j] += h;
    } else {
      out[j] += 0.5 * h;
      out[j + 1] += 0.5 * h;
    }
  }
}

struct PosteriorDensity {
  GammaGrid grid;
  std::vector<double> values;  // f(gamma_j | m, C, X)
  double log_normalizer = 0.0; // log of the quadrature approximation of the integral of rho * g

  double normalizer() const { return std::exp(log_normalizer); }
};

// Fills values[j] = rho(m | gamma_j, C) g(gamma_j) / Z for the given
// quantile sequence, Z the quadrature sum. Returns log Z.
inline double posterior_values(std::size_t m, double mu_c, std::span<const double> quantiles,
                               std::span<const double> taus, std::span<const double> points,
                               Quadrature rule, std::span<double> values, std::span<double> scratch) {
  const std::size_t J = points.size();
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < J; ++j) {
    const double lg = log_piecewise_density(points[j], quantiles, taus);
    values[j] = std::isfinite(lg) ? lg + log_poisson_window_pmf(m, points[j], mu_c)
                                  : -std::numeric_limits<double>::infinity();
    peak = std::max(peak, values[j]);
  }
  if (!std::isfinite(peak)) throw ZeroMass("posterior has no mass on the gamma grid");
  quadrature_weights(points, rule, scratch);
  double z = 0.0;
  for (std::size_t j = 0; j < J; ++j) {
    values[j] = std::exp(values[j] - peak);
    z += values[j] * scratch[j];
  }
  if (!(z > 0.0) || !std::isfinite(z)) throw ZeroMass("posterior normalizer underflows on the gamma grid");
  for (std::size_t j = 0; j < J; ++j) values[j] /= z;
  return std::log(z) + peak;
}

// Quadrature masses of the posterior at the grid points, for the pooled
// regression. g is taken on the cell (g_j, g_{j+1}] each weight integrates
// over rather than at the node itself: at a node g takes the value of the
// bin to its left, and pairing that with the width of the cell to its right
// blows up next to nearly tied quantiles. rho stays at the node. The
// masses sum to one; returns log Z.
inline double posterior_cell_masses(std::size_t m, double mu_c, std::span<const double> quantiles,
                                    std::span<const double> taus, std::span<const double> points,
                                    Quadrature rule, std::span<double> masses) {
  const std::size_t J = points.size();
  constexpr double neg_inf = -std::numeric_limits<double>::infinity();
  std::fill(masses.begin(), masses.end(), neg_inf);
  auto add = [](double& acc, double v) {
    if (v == neg_inf) return;
    acc = acc == neg_inf ? v : std::max(acc, v) + std::log1p(std::exp(-std::abs(acc - v)));
  };
  for (std::size_t j = 0; j + 1 < J; ++j) {
    const double h = points[j + 1] - points[j];
    const double lg = log_piecewise_density(0.5 * (points[j] + points[j + 1]), quantiles, taus);
    if (!std::isfinite(lg)) continue;
    const double cell = lg + std::log(h);
    if (rule == Quadrature::left_riemann) {
      add(masses[j], cell);
    } else {
      add(masses[j], cell + std::log(0.5));
      add(masses[j + 1], cell + std::log(0.5));
    }
  }
  double peak = neg_inf;
  for (std::size_t j = 0; j < J; ++j) {
    if (masses[j] != neg_inf) masses[j] += log_poisson_window_pmf(m, points[j], mu_c);
    peak = std::max(peak, masses[j]);
  }
  if (!std::isfinite(peak)) throw ZeroMass("posterior has no mass on the gamma grid");
  double z = 0.0;
  for (std::size_t j = 0; j < J; ++j) {
    masses[j] = std::exp(masses[j] - peak);
    z += masses[j];
  }
  if (!(z > 0.0) || !std::isfinite(z)) throw ZeroMass("posterior normalizer underflows on the gamma grid");
  for (std::size_t j = 0; j < J; ++j) masses[j] /= z;
  return std::log(z) + peak;
}

inline PosteriorDensity posterior_density(const SubjectRecord& record, const DesignRow& x,
                                          const CoefficientPath& path, const BaselineEstimate& baseline,
                                          const GammaGrid& grid, Quadrature rule = Quadrature::left_riemann) {
  const auto q = monotone_quantiles(x, path);
  PosteriorDensity out{grid, std::vector<double>(grid.size()), 0.0};
  std::vector<double> scratch(grid.size());
  out.log_normalizer = posterior_values(record.event_count(), baseline.mu(record.censoring_time), q,
                                        path.grid().knots(), grid.points(), rule, out.values, scratch);
  return out;
}

}  // namespace recurq
