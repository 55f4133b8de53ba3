#pragma once

// Nelson-Aalen-form estimator of the baseline cumulative intensity,
// normalized so that mu(nu*) = 1, and the naive per-subject risk proxy.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "recurq/errors.hpp"
#include "recurq/model.hpp"

namespace recurq {

// H(t) = -sum of jumps over (t, nu*]; mu(t) = exp(H(t)). Right-continuous.
class BaselineEstimate {
 public:
  BaselineEstimate() = default;

  BaselineEstimate(std::vector<double> jump_times, std::vector<double> jumps, double nu_star)
      : jump_times_(std::move(jump_times)), jumps_(std::move(jumps)), nu_star_(nu_star) {
    // h_values_[k] = H(jump_times_[k]) = -(sum of jumps strictly after k).
    h_values_.assign(jumps_.size(), 0.0);
    double tail = 0.0;
    for (std::size_t k = jumps_.size(); k-- > 0;) {
      h_values_[k] = -tail;
      tail += jumps_[k];
    }
    h_origin_ = -tail;
  }

  const std::vector<double>& jump_times() const noexcept { return jump_times_; }
  const std::vector<double>& jumps() const noexcept { return jumps_; }
  // H evaluated at each jump time.
  const std::vector<double>& h_values() const noexcept { return h_values_; }
  double nu_star() const noexcept { return nu_star_; }

  double log_mu(double t) const {
    const auto it = std::upper_bound(jump_times_.begin(), jump_times_.end(), t);
    if (it == jump_times_.begin()) return h_origin_;
    return h_values_[static_cast<std::size_t>(it - jump_times_.begin()) - 1];
  }

  double mu(double t) const { return std::exp(log_mu(t)); }

 private:
  std::vector<double> jump_times_;
  std::vector<double> jumps_;
  std::vector<double> h_values_;
  double h_origin_ = 0.0;  // H(0+)
  double nu_star_ = 0.0;
};

// At each distinct event time s the jump of H is
//   (#events at s) / sum_i I(C_i >= s) N_i(s),
// with N_i(s) counting events up to and including s.
inline BaselineEstimate estimate_baseline(const Dataset& data) {
  std::vector<double> events;
  events.reserve(data.total_events());
  for (const auto& r : data.records()) events.insert(events.end(), r.event_times.begin(), r.event_times.end());
  if (events.empty()) throw NoEvents("dataset has zero events");
  std::sort(events.begin(), events.end());

  // Subjects leave the risk set (with their accumulated count) once s > C_i.
  std::vector<std::pair<double, std::size_t>> exits;
  exits.reserve(data.size());
  for (const auto& r : data.records()) exits.emplace_back(r.censoring_time, r.event_count());
  std::sort(exits.begin(), exits.end());

  std::vector<double> jump_times;
  std::vector<double> jumps;
  double at_risk = 0.0;  // sum over subjects still under observation of N_i(s)
  std::size_t next_exit = 0;
  std::size_t e = 0;
  while (e < events.size()) {
    const double s = events[e];
    while (next_exit < exits.size() && exits[next_exit].first < s) {
      at_risk -= static_cast<double>(exits[next_exit].second);
      ++next_exit;
    }
    std::size_t ties = 0;
    while (e < events.size() && events[e] == s) {
      ++ties;
      ++e;
    }
    at_risk += static_cast<double>(ties);
    if (!(at_risk > 0.0)) throw EmptyRisk("zero risk-set denominator at event time");
    jump_times.push_back(s);
    jumps.push_back(static_cast<double>(ties) / at_risk);
  }
  return BaselineEstimate(std::move(jump_times), std::move(jumps), data.nu_star());
}

// m_i / mu(C_i), or max(1, m_i) / mu(C_i) when adjusted.
inline double naive_gamma(const SubjectRecord& record, const BaselineEstimate& baseline, bool adjusted) {
  const double m = static_cast<double>(record.event_count());
  const double numerator = adjusted ? std::max(1.0, m) : m;
  return numerator / baseline.mu(record.censoring_time);
}

}  // namespace recurq
