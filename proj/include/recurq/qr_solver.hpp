#pragma once

// Exact minimizer of the weighted check loss
//   sum_i w_i rho_tau(y_i - x_i' b),  rho_tau(v) = v (tau - I(v < 0)).
//
// The solver walks basic solutions (b interpolating p observations). At a
// vertex the dual multipliers of the basic rows are read off the
// subgradient equation; a multiplier outside [tau - 1, tau] names an edge
// along which the loss decreases, and the step along that edge is the
// exact minimizer of the loss on the ray (a weighted median over the
// residual breakpoints).
//
// Degenerate vertices (more than p zero residuals) are the rule for the
// pooled pseudo-observations, whose responses lie on common hyperplanes.
// They are resolved by a symbolic perturbation y_i + eps * delta_i with
// fixed pseudo-random delta_i: every residual carries its eps-coefficient,
// residuals at rounding level count as zero and then take the sign of that
// coefficient. The perturbed problem is nondegenerate, so in exact
// arithmetic the loss strictly decreases (lexicographically) at every pivot
// and the walk cannot cycle; any basis optimal for it is optimal for the
// original problem.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <set>
#include <span>
#include <vector>

#include "recurq/errors.hpp"
#include "recurq/model.hpp"

namespace recurq {

// Row-major N x p matrix view.
struct DesignView {
  std::span<const double> data;
  std::size_t cols = 0;

  std::size_t rows() const noexcept { return cols == 0 ? 0 : data.size() / cols; }
  const double* row(std::size_t i) const noexcept { return data.data() + i * cols; }
};

struct WeightedQRProblem {
  std::span<const double> responses;
  DesignView design;
  std::span<const double> weights;
  double tau = 0.5;
  // Optional c (length p) adding c'b to the objective: the exact
  // contribution of observations whose residual sign is known.
  std::span<const double> linear = {};
};

struct QRSolveOptions {
  // Row indices of a previous optimal basis; ignored if unusable.
  std::vector<std::size_t> warm_basis;
  // Among several minimizers move to the lexicographically smallest vertex.
  bool lexicographic_ties = true;
  std::size_t max_pivots = 0;  // 0 = automatic
};

struct QRSolution {
  Vector coef;
  double objective = 0.0;
  std::vector<std::size_t> basis;
  std::size_t pivots = 0;
};

inline double check_loss(double v, double tau) { return v * (tau - (v < 0.0 ? 1.0 : 0.0)); }

inline double weighted_check_objective(const WeightedQRProblem& problem, const Vector& coef) {
  const std::size_t p = problem.design.cols;
  double total = 0.0;
  for (std::size_t i = 0; i < problem.responses.size(); ++i) {
    if (problem.weights[i] == 0.0) continue;
    const double* x = problem.design.row(i);
    double fit = 0.0;
    for (std::size_t c = 0; c < p; ++c) fit += x[c] * coef[static_cast<Eigen::Index>(c)];
    total += problem.weights[i] * check_loss(problem.responses[i] - fit, problem.tau);
  }
  for (std::size_t c = 0; c < problem.linear.size(); ++c) total += problem.linear[c] * coef[static_cast<Eigen::Index>(c)];
  return total;
}

// sum_i w_i x_i psi_tau(y_i - x_i' b) - c, psi_tau(v) = tau - I(v < 0).
inline Vector weighted_estimating_function(const WeightedQRProblem& problem, const Vector& coef) {
  const std::size_t p = problem.design.cols;
  Vector s = Vector::Zero(static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < problem.responses.size(); ++i) {
    const double w = problem.weights[i];
    if (w == 0.0) continue;
    const double* x = problem.design.row(i);
    double fit = 0.0;
    for (std::size_t c = 0; c < p; ++c) fit += x[c] * coef[static_cast<Eigen::Index>(c)];
    const double psi = problem.tau - ((problem.responses[i] - fit) < 0.0 ? 1.0 : 0.0);
    for (std::size_t c = 0; c < p; ++c) s[static_cast<Eigen::Index>(c)] += w * x[c] * psi;
  }
  for (std::size_t c = 0; c < problem.linear.size(); ++c) s[static_cast<Eigen::Index>(c)] -= problem.linear[c];
  return s;
}

// Subgradient condition: every component of the estimating function is
// within the total weight*|x| of the observations fitted exactly (those are
// the only ones whose psi may take any value in [tau - 1, tau]).
inline bool satisfies_subgradient_condition(const WeightedQRProblem& problem, const Vector& coef,
                                            double rel_tol = 1e-8) {
  const std::size_t p = problem.design.cols;
  double yscale = 1.0;
  for (double y : problem.responses) yscale = std::max(yscale, std::abs(y));
  const double zero_tol = 1e-8 * yscale;
  Vector s = Vector::Zero(static_cast<Eigen::Index>(p));
  Vector slack = Vector::Zero(static_cast<Eigen::Index>(p));
  double scale = 0.0;
  for (std::size_t i = 0; i < problem.responses.size(); ++i) {
    const double w = problem.weights[i];
    if (w == 0.0) continue;
    const double* x = problem.design.row(i);
    double fit = 0.0;
    for (std::size_t c = 0; c < p; ++c) fit += x[c] * coef[static_cast<Eigen::Index>(c)];
    const double r = problem.responses[i] - fit;
    const double psi = problem.tau - (r < 0.0 ? 1.0 : 0.0);
    const bool active = std::abs(r) <= zero_tol;
    for (std::size_t c = 0; c < p; ++c) {
      s[static_cast<Eigen::Index>(c)] += w * x[c] * psi;
      if (active) slack[static_cast<Eigen::Index>(c)] += w * std::abs(x[c]);
      scale += w * std::abs(x[c]);
    }
  }
  for (std::size_t c = 0; c < problem.linear.size(); ++c) {
    s[static_cast<Eigen::Index>(c)] -= problem.linear[c];
    scale += std::abs(problem.linear[c]);
  }
  for (std::size_t c = 0; c < p; ++c) {
    const auto ci = static_cast<Eigen::Index>(c);
    if (std::abs(s[ci]) > slack[ci] + rel_tol * scale) return false;
  }
  return true;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic value in [-0.5, 0.5) attached to row i.
inline double row_jitter(std::size_t i) {
  return static_cast<double>(splitmix64(static_cast<std::uint64_t>(i)) >> 11) * 0x1.0p-53 - 0.5;
}

struct Breakpoint {
  double t;
  double t_eps;  // eps-coefficient of t
  double cost;   // slope increase w_i |x_i' d|
  std::size_t row;
};

inline bool breakpoint_less(const Breakpoint& a, const Breakpoint& b) {
  if (a.t != b.t) return a.t < b.t;
  if (a.t_eps != b.t_eps) return a.t_eps < b.t_eps;
  return a.row < b.row;
}

// Smallest breakpoint at which the accumulated cost reaches `need`
// (expected linear time). Returns the last one if the total falls short.
inline Breakpoint weighted_select(std::vector<Breakpoint>& bp, double need) {
  std::size_t lo = 0;
  std::size_t hi = bp.size();
  Breakpoint best = bp.front();
  double best_t = -1.0;
  for (const auto& b : bp)
    if (b.t > best_t) {
      best_t = b.t;
      best = b;
    }
  while (hi - lo > 0) {
    if (hi - lo <= 16) {
      std::sort(bp.begin() + static_cast<std::ptrdiff_t>(lo), bp.begin() + static_cast<std::ptrdiff_t>(hi),
                breakpoint_less);
      for (std::size_t k = lo; k < hi; ++k) {
        need -= bp[k].cost;
        if (need <= 0.0) return bp[k];
      }
      return best;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    std::nth_element(bp.begin() + static_cast<std::ptrdiff_t>(lo), bp.begin() + static_cast<std::ptrdiff_t>(mid),
                     bp.begin() + static_cast<std::ptrdiff_t>(hi), breakpoint_less);
    double left = 0.0;
    for (std::size_t k = lo; k < mid; ++k) left += bp[k].cost;
    if (left >= need) {
      hi = mid;
    } else {
      need -= left;
      lo = mid;
    }
  }
  return best;
}

class SimplexSolver {
 public:
  SimplexSolver(const WeightedQRProblem& problem, const QRSolveOptions& options)
      : prob_(problem), opt_(options), p_(problem.design.cols), n_(problem.responses.size()) {}

  QRSolution run() {
    validate();
    perturb();
    initial_basis();
    const std::size_t cap = opt_.max_pivots ? opt_.max_pivots : 50 * n_ + 1000;
    std::size_t pivots = 0;
    // Residuals of a few ulps either snap to zero or not depending on the
    // basis, which can still close a cycle. A repeated basis switches to a
    // real perturbation of the responses; from its optimum the original
    // problem is resumed, and a second repeat ends the walk.
    std::set<std::vector<std::size_t>> seen;
    int stage = 0;
    for (;;) {
      std::vector<std::size_t> key = basis_;
      std::sort(key.begin(), key.end());
      if (!seen.insert(std::move(key)).second) {
        seen.clear();
        if (stage == 0) {
          for (std::size_t i : active_) y_[i] = prob_.responses[i] + 1e-9 * yscale_ * delta_[i];
          stage = 1;
        } else if (stage == 2) {
          refresh();
          break;
        }
      }
      refresh();
      std::size_t leave = p_;
      int sign = 0;
      double best = 0.0;
      for (std::size_t l = 0; l < p_; ++l) {
        const double w = prob_.weights[basis_[l]];
        const double u = dual_[l];
        double amount = 0.0;
        int s = 0;
        if (u > prob_.tau * w + dual_tol_) {
          amount = u - prob_.tau * w;
          s = +1;
        } else if (u < (prob_.tau - 1.0) * w - dual_tol_) {
          amount = (prob_.tau - 1.0) * w - u;
          s = -1;
        }
        if (s == 0) continue;
        const double rate = amount / edge_scale(l);
        if (rate > best) {
          best = rate;
          leave = l;
          sign = s;
        }
      }
      if (leave == p_) {
        if (stage != 1) break;
        y_.assign(prob_.responses.begin(), prob_.responses.end());
        seen.clear();
        stage = 2;
        continue;
      }
      const double slope0 = -(sign > 0 ? dual_[leave] - prob_.tau * prob_.weights[basis_[leave]]
                                       : (prob_.tau - 1.0) * prob_.weights[basis_[leave]] - dual_[leave]);
      pivot(leave, sign, slope0);
      if (++pivots > cap) throw SolverFailure("pivot limit exceeded");
    }
    if (opt_.lexicographic_ties) pivots += walk_flat_edges();
    return finish(pivots);
  }

 private:
  void validate() {
    if (p_ == 0) throw InvalidArgument("weighted QR: design has no columns");
    if (prob_.design.data.size() != n_ * p_ || prob_.weights.size() != n_)
      throw InvalidArgument("weighted QR: responses, design and weights disagree in size");
    if (!prob_.linear.empty() && prob_.linear.size() != p_)
      throw InvalidArgument("weighted QR: linear term must have one entry per column");
    for (double c : prob_.linear)
      if (!std::isfinite(c)) throw InvalidArgument("weighted QR: non-finite linear term");
    if (!(prob_.tau >= 0.01 && prob_.tau <= 0.99))
      throw GridOutOfRange("tau must lie in [0.01, 0.99]");
    double wsum = 0.0;
    active_.clear();
    for (std::size_t i = 0; i < n_; ++i) {
      const double w = prob_.weights[i];
      if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("weighted QR: weights must be finite and nonnegative");
      if (!std::isfinite(prob_.responses[i])) throw InvalidArgument("weighted QR: non-finite response");
      if (w > 0.0) {
        active_.push_back(i);
        wsum += w;
      }
    }
    if (!(wsum > 0.0)) throw InvalidArgument("weighted QR: total weight must be positive");
    Matrix gram = Matrix::Zero(static_cast<Eigen::Index>(p_), static_cast<Eigen::Index>(p_));
    scale_ = 0.0;
    for (std::size_t i : active_) {
      const double* x = prob_.design.row(i);
      double xmax = 0.0;
      for (std::size_t a = 0; a < p_; ++a) {
        xmax = std::max(xmax, std::abs(x[a]));
        for (std::size_t b = 0; b < p_; ++b)
          gram(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) += x[a] * x[b];
      }
      scale_ += prob_.weights[i] * std::max(xmax, 1.0);
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(gram);
    qr.setThreshold(1e-12);
    if (static_cast<std::size_t>(qr.rank()) < p_)
      throw RankDeficient("design is not of full column rank on the positive-weight rows");
    dual_tol_ = 1e-11 * scale_;
  }

  void perturb() {
    double yscale = 1.0;
    for (std::size_t i : active_) yscale = std::max(yscale, std::abs(prob_.responses[i]));
    yscale_ = yscale;
    zero_tol_ = 64.0 * std::numeric_limits<double>::epsilon() * yscale;
    y_.assign(prob_.responses.begin(), prob_.responses.end());
    delta_.assign(n_, 0.0);
    for (std::size_t i : active_) delta_[i] = row_jitter(i);
    residual_.assign(n_, 0.0);
    residual_eps_.assign(n_, 0.0);
    in_basis_.assign(n_, 0);
    proj_.assign(n_ * p_, 0.0);
  }

  bool set_basis(const std::vector<std::size_t>& rows) {
    if (rows.size() != p_) return false;
    Matrix B(static_cast<Eigen::Index>(p_), static_cast<Eigen::Index>(p_));
    for (std::size_t l = 0; l < p_; ++l) {
      const std::size_t i = rows[l];
      if (i >= n_ || !(prob_.weights[i] > 0.0)) return false;
      for (std::size_t c = 0; c < p_; ++c) B(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(c)) = prob_.design.row(i)[c];
    }
    Eigen::FullPivLU<Matrix> lu(B);
    lu.setThreshold(1e-10);
    if (!lu.isInvertible()) return false;
    basis_ = rows;
    return true;
  }

  void initial_basis() {
    if (!opt_.warm_basis.empty() && set_basis(opt_.warm_basis)) return;
    // Weighted least squares, then the p best-fitting independent rows.
    Matrix xtwx = Matrix::Zero(static_cast<Eigen::Index>(p_), static_cast<Eigen::Index>(p_));
    Vector xtwy = Vector::Zero(static_cast<Eigen::Index>(p_));
    for (std::size_t i : active_) {
      const double* x = prob_.design.row(i);
      const double w = prob_.weights[i];
      for (std::size_t a = 0; a < p_; ++a) {
        xtwy[static_cast<Eigen::Index>(a)] += w * x[a] * y_[i];
        for (std::size_t b = 0; b < p_; ++b)
          xtwx(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) += w * x[a] * x[b];
      }
    }
    const Vector b = xtwx.ldlt().solve(xtwy);
    std::vector<std::pair<double, std::size_t>> order;
    order.reserve(active_.size());
    for (std::size_t i : active_) {
      const double* x = prob_.design.row(i);
      double fit = 0.0;
      for (std::size_t c = 0; c < p_; ++c) fit += x[c] * b[static_cast<Eigen::Index>(c)];
      order.emplace_back(std::abs(y_[i] - fit), i);
    }
    std::sort(order.begin(), order.end());
    // Greedy Gram-Schmidt over rows in order of fit.
    std::vector<Vector> ortho;
    std::vector<std::size_t> rows;
    for (const auto& [res, i] : order) {
      (void)res;
      Vector v(static_cast<Eigen::Index>(p_));
      for (std::size_t c = 0; c < p_; ++c) v[static_cast<Eigen::Index>(c)] = prob_.design.row(i)[c];
      const double norm0 = v.norm();
      if (norm0 == 0.0) continue;
      for (const auto& q : ortho) v -= q.dot(v) * q;
      if (v.norm() > 1e-6 * norm0) {
        ortho.push_back(v.normalized());
        rows.push_back(i);
        if (rows.size() == p_) break;
      }
    }
    if (!set_basis(rows)) throw RankDeficient("could not find a nonsingular starting basis");
  }

  // Recomputes b, residuals, projections X B^-1 and the basic duals.
  void refresh() {
    const auto P = static_cast<Eigen::Index>(p_);
    Matrix B(P, P);
    Vector yb(P);
    Vector db(P);
    for (std::size_t l = 0; l < p_; ++l) {
      for (std::size_t c = 0; c < p_; ++c) B(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(c)) = prob_.design.row(basis_[l])[c];
      yb[static_cast<Eigen::Index>(l)] = y_[basis_[l]];
      db[static_cast<Eigen::Index>(l)] = delta_[basis_[l]];
    }
    binv_ = B.inverse();
    coef_ = binv_ * yb;
    coef_eps_ = binv_ * db;
    // Residuals below rounding level count as zero; rounding grows with
    // the conditioning of the basis.
    const double kappa = B.cwiseAbs().rowwise().sum().maxCoeff() * binv_.cwiseAbs().rowwise().sum().maxCoeff();
    const double zero_tol = zero_tol_ * std::max(1.0, kappa);
    std::fill(in_basis_.begin(), in_basis_.end(), 0);
    for (std::size_t l = 0; l < p_; ++l) in_basis_[basis_[l]] = static_cast<unsigned char>(l + 1);

    // Row-major copy of B^-1, so x' B^-1 is a run of axpys.
    binv_rm_.resize(p_ * p_);
    for (std::size_t c = 0; c < p_; ++c)
      for (std::size_t l = 0; l < p_; ++l)
        binv_rm_[c * p_ + l] = binv_(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(l));
    const double* bi = binv_rm_.data();
    std::vector<double> g(p_, 0.0);
    edge_norm_.assign(p_, 0.0);
    for (std::size_t i : active_) {
      const double* x = prob_.design.row(i);
      double* a = &proj_[i * p_];
      for (std::size_t l = 0; l < p_; ++l) a[l] = x[0] * bi[l];
      for (std::size_t c = 1; c < p_; ++c)
        for (std::size_t l = 0; l < p_; ++l) a[l] += x[c] * bi[c * p_ + l];
      if (in_basis_[i]) {
        residual_[i] = 0.0;
        continue;
      }
      // x' b = (x' B^-1) y_B.
      double fit = 0.0;
      double fit_eps = 0.0;
      for (std::size_t l = 0; l < p_; ++l) {
        fit += a[l] * yb[static_cast<Eigen::Index>(l)];
        fit_eps += a[l] * db[static_cast<Eigen::Index>(l)];
      }
      double r = y_[i] - fit;
      if (std::abs(r) <= zero_tol) r = 0.0;
      residual_[i] = r;
      residual_eps_[i] = delta_[i] - fit_eps;
      const double w = prob_.weights[i];
      const double wpsi = w * (prob_.tau - (negative(i) ? 1.0 : 0.0));
      for (std::size_t c = 0; c < p_; ++c) g[c] -= wpsi * x[c];
      for (std::size_t l = 0; l < p_; ++l) edge_norm_[l] += w * std::abs(a[l]);
    }
    for (std::size_t c = 0; c < prob_.linear.size(); ++c) g[c] += prob_.linear[c];
    // B' u = g  ->  u = B^-T g, u_l = w_l v_l.
    const Vector u = binv_.transpose() * Eigen::Map<const Vector>(g.data(), P);
    dual_.assign(p_, 0.0);
    // Nonbasic contribution enters with a minus sign above; the basic rows
    // must cancel it: sum_nonbasic w psi x + sum_basic u x = 0.
    for (std::size_t l = 0; l < p_; ++l) dual_[l] = u[static_cast<Eigen::Index>(l)];
  }

  // Sign of the perturbed residual.
  bool negative(std::size_t i) const {
    return residual_[i] < 0.0 || (residual_[i] == 0.0 && residual_eps_[i] < 0.0);
  }

  double edge_scale(std::size_t l) const {
    return edge_norm_[l] + prob_.weights[basis_[l]] + std::numeric_limits<double>::min();
  }

  // Collects residual breakpoints along d = -sign B^-1 e_l; x_i'd = -sign a_il.
  void collect_breakpoints(std::size_t l, int sign) {
    bp_.clear();
    for (std::size_t i : active_) {
      if (in_basis_[i]) continue;
      const double ad = -static_cast<double>(sign) * proj_[i * p_ + l];
      if (ad == 0.0) continue;
      // residual moves as r - t * ad; a sign change costs w |ad| of slope.
      if (negative(i) == (ad < 0.0))
        bp_.push_back({residual_[i] / ad, residual_eps_[i] / ad, prob_.weights[i] * std::abs(ad), i});
    }
  }

  void pivot(std::size_t l, int sign, double slope0) {
    collect_breakpoints(l, sign);
    double total = 0.0;
    for (const auto& b : bp_) total += b.cost;
    // Only a linear term can make the loss decrease without bound.
    if (bp_.empty() || total < -slope0 * (1.0 - 1e-12)) throw Unbounded("objective unbounded along an edge");
    const Breakpoint enter = weighted_select(bp_, -slope0);
    basis_[l] = enter.row;
  }

  // Moves along zero-slope edges that decrease the coefficients
  // lexicographically. Returns the number of moves.
  std::size_t walk_flat_edges() {
    std::size_t moves = 0;
    for (std::size_t guard = 0; guard < 100 * p_ + 100; ++guard) {
      bool moved = false;
      for (std::size_t l = 0; l < p_ && !moved; ++l) {
        const double w = prob_.weights[basis_[l]];
        for (int sign : {+1, -1}) {
          const double slope = sign > 0 ? prob_.tau * w - dual_[l] : dual_[l] - (prob_.tau - 1.0) * w;
          if (std::abs(slope) > dual_tol_) continue;
          // d = -sign * column l of B^-1.
          double dnorm = 0.0;
          for (std::size_t c = 0; c < p_; ++c) dnorm = std::max(dnorm, std::abs(binv_(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(l))));
          double lead = 0.0;
          for (std::size_t c = 0; c < p_; ++c) {
            const double dc = -static_cast<double>(sign) * binv_(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(l));
            if (std::abs(dc) > 1e-12 * dnorm) {
              lead = dc;
              break;
            }
          }
          if (!(lead < 0.0)) continue;
          collect_breakpoints(l, sign);
          if (bp_.empty()) continue;
          const auto first = std::min_element(bp_.begin(), bp_.end(), breakpoint_less);
          if (!(first->t > 0.0)) continue;
          basis_[l] = first->row;
          refresh();
          ++moves;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    return moves;
  }

  QRSolution finish(std::size_t pivots) {
    const auto P = static_cast<Eigen::Index>(p_);
    Matrix B(P, P);
    Vector yb(P);
    for (std::size_t l = 0; l < p_; ++l) {
      for (std::size_t c = 0; c < p_; ++c) B(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(c)) = prob_.design.row(basis_[l])[c];
      yb[static_cast<Eigen::Index>(l)] = prob_.responses[basis_[l]];
    }
    QRSolution out;
    out.coef = B.fullPivLu().solve(yb);
    out.objective = weighted_check_objective(prob_, out.coef);
    out.basis = basis_;
    out.pivots = pivots;
    return out;
  }

  const WeightedQRProblem& prob_;
  const QRSolveOptions& opt_;
  std::size_t p_;
  std::size_t n_;
  std::vector<std::size_t> active_;
  std::vector<double> y_;
  std::vector<double> delta_;
  std::vector<double> residual_;
  std::vector<double> residual_eps_;
  std::vector<unsigned char> in_basis_;
  std::vector<double> proj_;
  std::vector<double> edge_norm_;
  std::vector<double> dual_;
  std::vector<std::size_t> basis_;
  std::vector<Breakpoint> bp_;
  Matrix binv_;
  std::vector<double> binv_rm_;
  Vector coef_;
  Vector coef_eps_;
  double zero_tol_ = 0.0;
  double yscale_ = 1.0;
  double scale_ = 0.0;
  double dual_tol_ = 0.0;
};

}  // namespace detail

inline QRSolution solve_weighted_qr(const WeightedQRProblem& problem, const QRSolveOptions& options = {}) {
  return detail::SimplexSolver(problem, options).run();
}

}  // namespace recurq
