#pragma once

// Domain types shared by every module: subject records, the dataset
// container, the tau-grid and the piecewise-linear coefficient path.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "recurq/errors.hpp"

namespace recurq {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// One subject: event times T(1) < T(2) < ... <= C and the covariate row
// without the leading intercept.
struct SubjectRecord {
  std::string id;
  std::vector<double> event_times;
  double censoring_time = 0.0;
  std::vector<double> covariates;

  std::size_t event_count() const noexcept { return event_times.size(); }

  void validate() const {
    if (!(censoring_time > 0.0) || !std::isfinite(censoring_time))
      throw InvalidArgument("subject '" + id + "': censoring time must be positive");
    double prev = 0.0;
    for (std::size_t j = 0; j < event_times.size(); ++j) {
      const double t = event_times[j];
      if (!(t > prev))
        throw InvalidArgument("subject '" + id + "': event times must be positive and strictly increasing");
      if (t > censoring_time)
        throw InvalidArgument("subject '" + id + "': event after censoring time");
      prev = t;
    }
    for (double v : covariates)
      if (!std::isfinite(v)) throw InvalidArgument("subject '" + id + "': non-finite covariate");
  }

  friend bool operator==(const SubjectRecord&, const SubjectRecord&) = default;
};

// N_i(t) = N*_i(t ^ C_i); right-continuous, so an event at exactly t counts.
inline std::size_t counting_process_value(const SubjectRecord& record, double t) {
  const double horizon = std::min(t, record.censoring_time);
  return static_cast<std::size_t>(
      std::upper_bound(record.event_times.begin(), record.event_times.end(), horizon) -
      record.event_times.begin());
}

// Center/scale applied to selected covariate columns. Stored with the
// dataset so fitted coefficients can be read on the right scale.
struct Standardization {
  std::vector<std::size_t> columns;
  std::vector<double> centers;
  std::vector<double> scales;

  friend bool operator==(const Standardization&, const Standardization&) = default;
};

class Dataset {
 public:
  Dataset() = default;

  // nu_star defaults to the largest observed censoring time.
  Dataset(std::vector<SubjectRecord> records, std::vector<std::string> covariate_names,
          std::optional<double> nu_star = std::nullopt)
      : records_(std::move(records)), covariate_names_(std::move(covariate_names)) {
    if (records_.empty()) throw InvalidArgument("dataset has no subjects");
    double max_c = 0.0;
    for (const auto& r : records_) {
      r.validate();
      if (r.covariates.size() != covariate_names_.size())
        throw InvalidArgument("subject '" + r.id + "': expected " +
                              std::to_string(covariate_names_.size()) + " covariates, got " +
                              std::to_string(r.covariates.size()));
      max_c = std::max(max_c, r.censoring_time);
    }
    nu_star_ = nu_star.value_or(max_c);
    if (!(nu_star_ >= max_c))
      throw InvalidArgument("nu_star must be at least the largest censoring time");
  }

  const std::vector<SubjectRecord>& records() const noexcept { return records_; }
  const SubjectRecord& operator[](std::size_t i) const { return records_[i]; }
  std::size_t size() const noexcept { return records_.size(); }
  double nu_star() const noexcept { return nu_star_; }
  const std::vector<std::string>& covariate_names() const noexcept { return covariate_names_; }
  // Number of regression coefficients, intercept included.
  std::size_t dimension() const noexcept { return covariate_names_.size() + 1; }
  const std::optional<Standardization>& standardization() const noexcept { return standardization_; }

  std::size_t total_events() const noexcept {
    std::size_t total = 0;
    for (const auto& r : records_) total += r.event_count();
    return total;
  }

  // Same nu_star, names and standardization; subset/resample of records.
  Dataset with_records(std::vector<SubjectRecord> records) const {
    Dataset out(std::move(records), covariate_names_, nu_star_);
    out.standardization_ = standardization_;
    return out;
  }

  // Centers and scales the given covariate columns (sample SD). Columns
  // with zero spread are only centered.
  Dataset standardized(const std::vector<std::size_t>& columns) const {
    Standardization s;
    std::vector<SubjectRecord> recs = records_;
    const double n = static_cast<double>(recs.size());
    for (std::size_t c : columns) {
      if (c >= covariate_names_.size()) throw InvalidArgument("standardize: column out of range");
      double mean = 0.0;
      for (const auto& r : recs) mean += r.covariates[c];
      mean /= n;
      double ss = 0.0;
      for (const auto& r : recs) ss += (r.covariates[c] - mean) * (r.covariates[c] - mean);
      double sd = recs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
      if (!(sd > 0.0)) sd = 1.0;
      for (auto& r : recs) r.covariates[c] = (r.covariates[c] - mean) / sd;
      s.columns.push_back(c);
      s.centers.push_back(mean);
      s.scales.push_back(sd);
    }
    Dataset out(std::move(recs), covariate_names_, nu_star_);
    out.standardization_ = std::move(s);
    return out;
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::vector<SubjectRecord> records_;
  std::vector<std::string> covariate_names_;
  double nu_star_ = 0.0;
  std::optional<Standardization> standardization_;
};

// X_i = (1, x~_i).
class DesignRow {
 public:
  explicit DesignRow(const SubjectRecord& record) : x_(record.covariates.size() + 1) {
    x_[0] = 1.0;
    for (std::size_t c = 0; c < record.covariates.size(); ++c)
      x_[static_cast<Eigen::Index>(c + 1)] = record.covariates[c];
  }

  // From covariates without the intercept.
  static DesignRow from_covariates(const std::vector<double>& covariates) {
    SubjectRecord r;
    r.covariates = covariates;
    return DesignRow(r);
  }

  const Vector& values() const noexcept { return x_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(x_.size()); }
  double operator[](std::size_t j) const { return x_[static_cast<Eigen::Index>(j)]; }

 private:
  Vector x_;
};

// Knots 0 < tau_1 < ... < tau_K < 1; tau_0 = 0 is implicit.
class TauGrid {
 public:
  TauGrid() = default;

  explicit TauGrid(std::vector<double> knots) : knots_(std::move(knots)) {
    if (knots_.empty()) throw InvalidArgument("tau grid is empty");
    if (!(knots_.front() > 0.0) || !(knots_.back() < 1.0))
      throw InvalidArgument("tau grid knots must lie in (0, 1)");
    for (std::size_t k = 1; k < knots_.size(); ++k)
      if (!(knots_[k] > knots_[k - 1])) throw InvalidArgument("tau grid knots must be strictly increasing");
  }

  // lo, lo+step, ..., hi (hi included when it is a whole number of steps away).
  static TauGrid uniform(double lo, double hi, double step) {
    if (!(step > 0.0) || !(hi >= lo)) throw InvalidArgument("tau grid: need step > 0 and hi >= lo");
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> knots(count);
    for (std::size_t k = 0; k < count; ++k) {
      // Rounded to 12 decimals so 0.02 + 7*0.01 prints as 0.09.
      knots[k] = std::round((lo + static_cast<double>(k) * step) * 1e12) / 1e12;
    }
    return TauGrid(std::move(knots));
  }

  // Paper default: 0.02, 0.03, ..., 0.98.
  static TauGrid default_grid() { return uniform(0.02, 0.98, 0.01); }

  const std::vector<double>& knots() const noexcept { return knots_; }
  std::size_t size() const noexcept { return knots_.size(); }
  double operator[](std::size_t k) const { return knots_[k]; }
  double front() const { return knots_.front(); }
  double back() const { return knots_.back(); }

  double mesh() const noexcept {
    double m = 0.0;
    for (std::size_t k = 1; k < knots_.size(); ++k) m = std::max(m, knots_[k] - knots_[k - 1]);
    return m;
  }

  friend bool operator==(const TauGrid&, const TauGrid&) = default;

 private:
  std::vector<double> knots_;
};

// beta(tau) on a tau-grid: row k of theta is beta(tau_k). Linear between
// knots, constant outside [tau_1, tau_K].
class CoefficientPath {
 public:
  CoefficientPath() = default;

  CoefficientPath(TauGrid grid, Matrix theta) : grid_(std::move(grid)), theta_(std::move(theta)) {
    if (static_cast<std::size_t>(theta_.rows()) != grid_.size())
      throw InvalidArgument("coefficient path: theta rows must match the tau grid");
    if (theta_.cols() < 1) throw InvalidArgument("coefficient path: need at least one coefficient");
  }

  const TauGrid& grid() const noexcept { return grid_; }
  const Matrix& theta() const noexcept { return theta_; }
  std::size_t knots() const noexcept { return grid_.size(); }
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(theta_.cols()); }

  Vector at_knot(std::size_t k) const { return theta_.row(static_cast<Eigen::Index>(k)).transpose(); }

  Vector evaluate(double tau) const {
    const auto& t = grid_.knots();
    if (tau <= t.front()) return at_knot(0);
    if (tau >= t.back()) return at_knot(t.size() - 1);
    const auto hi = static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), tau) - t.begin());
    if (t[hi] == tau) return at_knot(hi);
    const std::size_t lo = hi - 1;
    // Written as lo + w (hi - lo) so flat segments evaluate exactly.
    const double w = (tau - t[lo]) / (t[hi] - t[lo]);
    const Vector a = at_knot(lo);
    return a + w * (at_knot(hi) - a);
  }

  // x' beta(tau_k) for every knot.
  Vector linear_predictor(const Vector& x) const { return theta_ * x; }

  friend bool operator==(const CoefficientPath& a, const CoefficientPath& b) {
    return a.grid_ == b.grid_ && a.theta_.rows() == b.theta_.rows() &&
           a.theta_.cols() == b.theta_.cols() && a.theta_ == b.theta_;
  }

 private:
  TauGrid grid_;
  Matrix theta_;
};

inline Vector evaluate_path(const CoefficientPath& path, double tau) { return path.evaluate(tau); }

}  // namespace recurq
