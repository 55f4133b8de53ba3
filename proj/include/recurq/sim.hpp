#pragma once

// Data-generating processes of the simulation study:
//   log(gamma) = X'b + s * eps   (homogeneous, eps ~ N(0,1) or t3, s = 0.5)
//   log(gamma) = X'b + (X'd) eps (heteroscedastic, eps ~ N(0,1))
// with X = (1, U(0,1), Bernoulli(0.5)), C ~ U(lo, hi) and, given gamma,
// a homogeneous Poisson process of rate gamma on [0, C] (mu0(t) = t).

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "recurq/errors.hpp"
#include "recurq/model.hpp"
#include "recurq/quantiles.hpp"
#include "recurq/random.hpp"

namespace recurq {

enum class DGPKind { homogeneous_normal, homogeneous_t3, heteroscedastic_normal, custom };

inline std::string_view to_string(DGPKind kind) {
  switch (kind) {
    case DGPKind::homogeneous_normal: return "homogeneous-normal";
    case DGPKind::homogeneous_t3: return "homogeneous-t3";
    case DGPKind::heteroscedastic_normal: return "heteroscedastic-normal";
    case DGPKind::custom: return "custom";
  }
  return "unknown";
}

inline DGPKind parse_dgp_kind(std::string_view name) {
  if (name == "homogeneous-normal") return DGPKind::homogeneous_normal;
  if (name == "homogeneous-t3") return DGPKind::homogeneous_t3;
  if (name == "heteroscedastic-normal") return DGPKind::heteroscedastic_normal;
  if (name == "custom") return DGPKind::custom;
  throw InvalidArgument("unknown data-generating process '" + std::string(name) + "'");
}

// `custom` draws no error term: gamma = exp(X'b) exactly.
struct DGPSpec {
  DGPKind kind = DGPKind::homogeneous_normal;
  std::vector<double> b{std::log(3.0) + 1.0, 1.0, 1.0};
  std::vector<double> d{0.1, 0.1, 0.1};  // heteroscedastic scale coefficients
  double error_scale = 0.5;              // homogeneous error scale
  double censor_lo = 2.0 / 3.0;
  double censor_hi = 1.0;
  std::size_t n = 500;
  std::uint64_t seed = 1;

  static DGPSpec paper(DGPKind kind, std::size_t n = 500, std::uint64_t seed = 1) {
    DGPSpec s;
    s.kind = kind;
    s.n = n;
    s.seed = seed;
    return s;
  }

  void validate() const {
    if (n < 1) throw InvalidArgument("DGP: n must be at least 1");
    if (b.size() != 3) throw InvalidArgument("DGP: b must have three entries (intercept, x1, x2)");
    if (!(censor_lo > 0.0) || !(censor_hi >= censor_lo)) throw InvalidArgument("DGP: need 0 < censor_lo <= censor_hi");
    if (kind == DGPKind::heteroscedastic_normal) {
      if (d.size() != 3) throw InvalidArgument("DGP: d must have three entries");
      // X'd over the covariate support {1} x [0,1] x {0,1}.
      for (double x1 : {0.0, 1.0})
        for (double x2 : {0.0, 1.0})
          if (!(d[0] + d[1] * x1 + d[2] * x2 > 0.0))
            throw InvalidArgument("DGP: X'd must be positive on the covariate support");
    }
    if (!(error_scale >= 0.0)) throw InvalidArgument("DGP: error scale must be nonnegative");
  }
};

struct SimulatedSubject {
  SubjectRecord record;
  double gamma = 0.0;
};

// Event times of a rate-gamma Poisson process on [0, C]: partial sums of
// Exponential(gamma) gaps.
inline std::vector<double> poisson_process_events(double gamma, double horizon, Rng& rng) {
  std::vector<double> times;
  if (!(gamma > 0.0)) return times;
  std::exponential_distribution<double> gap(gamma);
  double t = gap(rng);
  while (t <= horizon) {
    times.push_back(t);
    t += gap(rng);
  }
  return times;
}

// t3 via Z / sqrt(V / 3), V chi-square(3) from three squared normals.
inline double draw_t3(Rng& rng) {
  std::normal_distribution<double> z;
  const double num = z(rng);
  double v = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double e = z(rng);
    v += e * e;
  }
  return num / std::sqrt(v / 3.0);
}

inline SimulatedSubject generate_subject(const DGPSpec& spec, Rng& rng, std::string id = {}) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> z;
  const double x1 = unif(rng);
  const double x2 = coin(rng) ? 1.0 : 0.0;
  const double lp = spec.b[0] + spec.b[1] * x1 + spec.b[2] * x2;
  double log_gamma = lp;
  switch (spec.kind) {
    case DGPKind::homogeneous_normal: log_gamma += spec.error_scale * z(rng); break;
    case DGPKind::homogeneous_t3: log_gamma += spec.error_scale * draw_t3(rng); break;
    case DGPKind::heteroscedastic_normal:
      log_gamma += (spec.d[0] + spec.d[1] * x1 + spec.d[2] * x2) * z(rng);
      break;
    case DGPKind::custom: break;
  }
  const double c = spec.censor_lo + (spec.censor_hi - spec.censor_lo) * unif(rng);
  SimulatedSubject out;
  out.gamma = std::exp(log_gamma);
  out.record.id = std::move(id);
  out.record.censoring_time = c;
  out.record.covariates = {x1, x2};
  out.record.event_times = poisson_process_events(out.gamma, c, rng);
  return out;
}

struct SimulatedDataset {
  Dataset data;
  std::vector<double> gammas;
};

// nu* is the censoring upper bound, where mu0(t) = t already equals 1.
inline SimulatedDataset generate_dataset(const DGPSpec& spec, std::uint64_t replication = 0) {
  spec.validate();
  Rng rng = make_stream(spec.seed, Stream::simulate, replication);
  std::vector<SubjectRecord> records;
  std::vector<double> gammas;
  records.reserve(spec.n);
  gammas.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    auto s = generate_subject(spec, rng, "s" + std::to_string(i + 1));
    records.push_back(std::move(s.record));
    gammas.push_back(s.gamma);
  }
  return {Dataset(std::move(records), {"x1", "x2"}, spec.censor_hi), std::move(gammas)};
}

inline double error_quantile(const DGPSpec& spec, double tau) {
  switch (spec.kind) {
    case DGPKind::homogeneous_normal:
    case DGPKind::heteroscedastic_normal: return normal_quantile(tau);
    case DGPKind::homogeneous_t3: return student_t3_quantile(tau);
    case DGPKind::custom: return 0.0;
  }
  return 0.0;
}

// beta0(tau) implied by the design.
inline Vector true_coefficients(const DGPSpec& spec, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidArgument("true_coefficients: tau must lie in (0, 1)");
  Vector beta(3);
  for (int j = 0; j < 3; ++j) beta[j] = spec.b[static_cast<std::size_t>(j)];
  const double q = error_quantile(spec, tau);
  switch (spec.kind) {
    case DGPKind::homogeneous_normal:
    case DGPKind::homogeneous_t3: beta[0] += spec.error_scale * q; break;
    case DGPKind::heteroscedastic_normal:
      for (int j = 0; j < 3; ++j) beta[j] += spec.d[static_cast<std::size_t>(j)] * q;
      break;
    case DGPKind::custom: break;
  }
  return beta;
}

inline double mean_events_per_subject(const Dataset& data) {
  return static_cast<double>(data.total_events()) / static_cast<double>(data.size());
}

}  // namespace recurq
