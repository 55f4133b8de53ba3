#pragma once

// Run configuration (a JSON document validated before any work starts),
// run manifests and the Monte Carlo report in JSON and CSV form.

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "recurq/errors.hpp"
#include "recurq/estimator.hpp"
#include "recurq/io.hpp"
#include "recurq/model.hpp"
#include "recurq/monte_carlo.hpp"
#include "recurq/sim.hpp"

#ifndef RECURQ_VERSION
#define RECURQ_VERSION "0.1.0"
#endif

namespace recurq {

using json = nlohmann::ordered_json;

inline constexpr const char* version() { return RECURQ_VERSION; }

struct TestSettings {
  std::vector<std::string> coefficients;  // empty: every covariate
  double tau_l = 0.1;
  double tau_u = 0.9;
};

struct SimulateSettings {
  DGPSpec spec;
  std::size_t R = 1;
  bool monte_carlo = false;  // fit every replication and write the study report
  std::vector<double> tau_report{0.1, 0.25, 0.5, 0.75, 0.9};
};

struct RunConfig {
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
  std::string subjects;
  std::string events;
  std::string out_dir = ".";
  std::optional<double> nu_star;
  std::vector<std::string> standardize;
  std::string tau_grid = "0.02:0.98:0.01";
  FitConfig fit;
  std::size_t bootstrap = 0;
  double alpha = 0.05;
  bool percentile_ci = false;
  bool timings = false;
  TestSettings test;
  SimulateSettings simulate;
};

// "lo:hi:step".
inline TauGrid parse_tau_grid(const std::string& spec) {
  std::vector<double> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) {
    const auto v = detail::parse_number(detail::trim(item));
    if (!v) throw SchemaError("tau grid '" + spec + "' must read lo:hi:step");
    parts.push_back(*v);
  }
  if (parts.size() != 3) throw SchemaError("tau grid '" + spec + "' must read lo:hi:step");
  try {
    return TauGrid::uniform(parts[0], parts[1], parts[2]);
  } catch (const InvalidArgument& e) {
    throw SchemaError(std::string("tau grid '") + spec + "': " + e.what());
  }
}

namespace detail {

inline void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw SchemaError(where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw SchemaError(where + ": unknown key '" + it.key() + "'");
}

template <class T>
T get_as(const json& j, const std::string& key, const std::string& where) {
  const json& v = j.at(key);
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw SchemaError(where + "." + key + " must be a boolean");
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) throw SchemaError(where + "." + key + " must be a string");
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      throw SchemaError(where + "." + key + " must be a nonnegative integer");
  } else {
    if (!v.is_number()) throw SchemaError(where + "." + key + " must be a number");
  }
  return v.get<T>();
}

template <class T>
void read_opt(const json& j, const std::string& key, const std::string& where, T& out) {
  if (j.contains(key)) out = get_as<T>(j, key, where);
}

inline std::vector<double> number_list(const json& j, const std::string& key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_array()) throw SchemaError(where + "." + key + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw SchemaError(where + "." + key + " must be an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

inline std::vector<std::string> string_list(const json& j, const std::string& key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_array()) throw SchemaError(where + "." + key + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) throw SchemaError(where + "." + key + " must be an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

}  // namespace detail

inline Quadrature parse_quadrature(const std::string& s) {
  if (s == "left_riemann") return Quadrature::left_riemann;
  if (s == "trapezoid") return Quadrature::trapezoid;
  throw SchemaError("quadrature must be 'left_riemann' or 'trapezoid'");
}

// Applies a parsed JSON config on top of `cfg`. Unknown keys and wrong
// types are SchemaErrors.
inline void apply_config(const json& j, RunConfig& cfg) {
  using namespace detail;
  check_keys(j, "config", {"seed", "jobs", "subjects", "events", "out_dir", "nu_star", "standardize", "tau_grid",
                           "fit", "bootstrap", "alpha", "ci", "timings", "test", "simulate"});
  read_opt(j, "seed", "config", cfg.seed);
  read_opt(j, "jobs", "config", cfg.jobs);
  read_opt(j, "subjects", "config", cfg.subjects);
  read_opt(j, "events", "config", cfg.events);
  read_opt(j, "out_dir", "config", cfg.out_dir);
  if (j.contains("nu_star")) cfg.nu_star = get_as<double>(j, "nu_star", "config");
  if (j.contains("standardize")) cfg.standardize = string_list(j, "standardize", "config");
  read_opt(j, "tau_grid", "config", cfg.tau_grid);
  read_opt(j, "bootstrap", "config", cfg.bootstrap);
  read_opt(j, "alpha", "config", cfg.alpha);
  read_opt(j, "timings", "config", cfg.timings);
  if (j.contains("ci")) {
    const auto ci = get_as<std::string>(j, "ci", "config");
    if (ci != "normal" && ci != "percentile") throw SchemaError("config.ci must be 'normal' or 'percentile'");
    cfg.percentile_ci = ci == "percentile";
  }
  if (j.contains("fit")) {
    const json& f = j.at("fit");
    check_keys(f, "config.fit", {"max_iter", "tol", "gamma_grid_refinement", "adjusted_naive_start", "quadrature"});
    read_opt(f, "max_iter", "config.fit", cfg.fit.max_iter);
    read_opt(f, "tol", "config.fit", cfg.fit.tol);
    read_opt(f, "gamma_grid_refinement", "config.fit", cfg.fit.gamma_grid_refinement);
    read_opt(f, "adjusted_naive_start", "config.fit", cfg.fit.adjusted_naive_start);
    if (f.contains("quadrature")) cfg.fit.quadrature = parse_quadrature(get_as<std::string>(f, "quadrature", "config.fit"));
  }
  if (j.contains("test")) {
    const json& t = j.at("test");
    check_keys(t, "config.test", {"coefficients", "tau_l", "tau_u"});
    if (t.contains("coefficients")) cfg.test.coefficients = string_list(t, "coefficients", "config.test");
    read_opt(t, "tau_l", "config.test", cfg.test.tau_l);
    read_opt(t, "tau_u", "config.test", cfg.test.tau_u);
  }
  if (j.contains("simulate")) {
    const json& s = j.at("simulate");
    check_keys(s, "config.simulate",
               {"dgp", "n", "replications", "b", "d", "error_scale", "censoring", "monte_carlo", "tau_report"});
    auto& sp = cfg.simulate.spec;
    if (s.contains("dgp")) {
      try {
        sp.kind = parse_dgp_kind(get_as<std::string>(s, "dgp", "config.simulate"));
      } catch (const InvalidArgument& e) {
        throw SchemaError(std::string("config.simulate.dgp: ") + e.what());
      }
    }
    read_opt(s, "n", "config.simulate", sp.n);
    read_opt(s, "replications", "config.simulate", cfg.simulate.R);
    if (s.contains("b")) sp.b = number_list(s, "b", "config.simulate");
    if (s.contains("d")) sp.d = number_list(s, "d", "config.simulate");
    read_opt(s, "error_scale", "config.simulate", sp.error_scale);
    if (s.contains("censoring")) {
      const auto c = number_list(s, "censoring", "config.simulate");
      if (c.size() != 2) throw SchemaError("config.simulate.censoring must be [lo, hi]");
      sp.censor_lo = c[0];
      sp.censor_hi = c[1];
    }
    read_opt(s, "monte_carlo", "config.simulate", cfg.simulate.monte_carlo);
    if (s.contains("tau_report")) cfg.simulate.tau_report = number_list(s, "tau_report", "config.simulate");
  }
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open config '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError("config '" + path + "' is not valid JSON: " + e.what());
  }
}

// Checks that do not depend on the command.
inline void validate_config(const RunConfig& cfg) {
  if (cfg.jobs > 1024) throw SchemaError("jobs must be at most 1024");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw SchemaError("alpha must lie in (0, 1)");
  if (cfg.bootstrap == 1) throw SchemaError("bootstrap must be 0 or at least 2");
  if (cfg.nu_star && !(*cfg.nu_star > 0.0)) throw SchemaError("nu_star must be positive");
  if (cfg.out_dir.empty()) throw SchemaError("out_dir must not be empty");
  (void)parse_tau_grid(cfg.tau_grid);
  try {
    cfg.fit.validate();
  } catch (const InvalidArgument& e) {
    throw SchemaError(e.what());
  }
}

inline json grid_json(const TauGrid& grid) {
  json j;
  j["size"] = grid.size();
  j["first"] = grid.front();
  j["last"] = grid.back();
  j["mesh"] = grid.mesh();
  return j;
}

inline json report_json(const MonteCarloReport& rep) {
  json j;
  j["dgp"] = rep.dgp;
  j["n"] = rep.n;
  j["replications"] = rep.R;
  j["bootstrap"] = rep.B;
  j["seed"] = rep.seed;
  j["succeeded"] = rep.succeeded;
  j["converged"] = rep.converged;
  j["stable_tail"] = rep.stable_tail;
  j["mean_events_per_subject"] = rep.mean_events;
  j["mean_iterations"] = rep.mean_iterations;
  json corr = json::array();
  for (double c : rep.mean_path_correlation) corr.push_back(std::isfinite(c) ? json(c) : json(nullptr));
  j["mean_path_correlation"] = corr;
  if (rep.rejection_rate) j["rejection_rate"] = *rep.rejection_rate;
  json fails = json::array();
  for (const auto& f : rep.failures) fails.push_back({{"replication", f.replicate}, {"message", f.message}});
  j["failures"] = fails;
  json rows = json::array();
  for (const auto& r : rep.rows) {
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    rows.push_back({{"tau", r.tau},
                    {"coef_name", r.name},
                    {"truth", num(r.truth)},
                    {"mean_estimate", num(r.mean_estimate)},
                    {"bias", num(r.bias)},
                    {"sd", num(r.sd)},
                    {"mean_se", num(r.mean_se)},
                    {"coverage", num(r.coverage)},
                    {"naive_bias", num(r.naive_bias)},
                    {"naive_sd", num(r.naive_sd)}});
  }
  j["rows"] = rows;
  return j;
}

inline std::string report_csv(const MonteCarloReport& rep) {
  std::ostringstream os;
  os << "tau,coef_name,truth,mean_estimate,bias,sd,mean_se,coverage,naive_mean,naive_bias,naive_sd\n";
  for (const auto& r : rep.rows)
    os << format_double(r.tau) << ',' << r.name << ',' << format_double(r.truth) << ','
       << format_double(r.mean_estimate) << ',' << format_double(r.bias) << ',' << format_double(r.sd) << ','
       << format_double(r.mean_se) << ',' << format_double(r.coverage) << ',' << format_double(r.naive_mean) << ','
       << format_double(r.naive_bias) << ',' << format_double(r.naive_sd) << '\n';
  return os.str();
}

}  // namespace recurq
