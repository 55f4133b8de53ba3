// recurq: fit, bootstrap, test and simulate from the command line.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "recurq/config.hpp"
#include "recurq/estimator.hpp"
#include "recurq/inference.hpp"
#include "recurq/io.hpp"
#include "recurq/monte_carlo.hpp"
#include "recurq/sim.hpp"

namespace fs = std::filesystem;
using namespace recurq;

namespace {

// Values given on the command line or through RECURQ_* variables; they
// override the config file.
struct Overrides {
  std::string config;
  std::optional<std::string> subjects, events, out_dir, tau_grid, ci, dgp;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs, bootstrap, n, replications;
  std::optional<double> alpha, nu_star, tau_l, tau_u;
  std::vector<std::string> standardize, coefficients;
  bool timings = false;
  bool monte_carlo = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON run configuration")->envname("RECURQ_CONFIG");
  cmd->add_option("--subjects", o.subjects, "subjects CSV (subject_id, censoring_time, covariates...)")
      ->envname("RECURQ_SUBJECTS");
  cmd->add_option("--events", o.events, "events CSV (subject_id, event_time)")->envname("RECURQ_EVENTS");
  cmd->add_option("--out-dir", o.out_dir, "output directory")->envname("RECURQ_OUT_DIR");
  cmd->add_option("--seed", o.seed, "master random seed")->envname("RECURQ_SEED");
  cmd->add_option("--jobs", o.jobs, "worker threads (0 = all cores)")->envname("RECURQ_JOBS");
  cmd->add_option("--tau-grid", o.tau_grid, "tau grid as lo:hi:step")->envname("RECURQ_TAU_GRID");
  cmd->add_option("--bootstrap", o.bootstrap, "bootstrap replicates B (0 = none)")->envname("RECURQ_BOOTSTRAP");
  cmd->add_option("--alpha", o.alpha, "1 - confidence level")->envname("RECURQ_ALPHA");
  cmd->add_option("--nu-star", o.nu_star, "normalization time nu* (default: largest censoring time)")
      ->envname("RECURQ_NU_STAR");
  cmd->add_option("--standardize", o.standardize, "covariates to center and scale");
  cmd->add_option("--ci", o.ci, "interval type written to the path CSV")->check(CLI::IsMember({"normal", "percentile"}));
  cmd->add_flag("--timings", o.timings, "record wall-clock timings in the manifest");
}

RunConfig resolve(const Overrides& o) {
  RunConfig cfg;
  if (!o.config.empty()) apply_config(load_json_file(o.config), cfg);
  if (o.subjects) cfg.subjects = *o.subjects;
  if (o.events) cfg.events = *o.events;
  if (o.out_dir) cfg.out_dir = *o.out_dir;
  if (o.seed) cfg.seed = *o.seed;
  if (o.jobs) cfg.jobs = *o.jobs;
  if (o.tau_grid) cfg.tau_grid = *o.tau_grid;
  if (o.bootstrap) cfg.bootstrap = *o.bootstrap;
  if (o.alpha) cfg.alpha = *o.alpha;
  if (o.nu_star) cfg.nu_star = *o.nu_star;
  if (!o.standardize.empty()) cfg.standardize = o.standardize;
  if (o.ci) cfg.percentile_ci = *o.ci == "percentile";
  if (o.timings) cfg.timings = true;
  if (!o.coefficients.empty()) cfg.test.coefficients = o.coefficients;
  if (o.tau_l) cfg.test.tau_l = *o.tau_l;
  if (o.tau_u) cfg.test.tau_u = *o.tau_u;
  if (o.dgp) cfg.simulate.spec.kind = parse_dgp_kind(*o.dgp);
  if (o.n) cfg.simulate.spec.n = *o.n;
  if (o.replications) cfg.simulate.R = *o.replications;
  if (o.monte_carlo) cfg.simulate.monte_carlo = true;
  cfg.fit.grid = parse_tau_grid(cfg.tau_grid);
  cfg.fit.jobs = cfg.jobs;
  cfg.fit.rng_seed = cfg.seed;
  cfg.simulate.spec.seed = cfg.seed;
  validate_config(cfg);
  return cfg;
}

class Clock {
 public:
  void mark(const std::string& name) {
    const auto now = std::chrono::steady_clock::now();
    laps_[name] = std::chrono::duration<double>(now - last_).count();
    last_ = now;
  }
  const json& laps() const { return laps_; }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
  json laps_ = json::object();
};

json base_manifest(const std::string& command, const RunConfig& cfg) {
  json m;
  m["command"] = command;
  m["software"] = {{"name", "recurq"}, {"version", version()}};
  m["seed"] = cfg.seed;
  m["grid"] = grid_json(cfg.fit.grid);
  return m;
}

void finish_manifest(json& m, const RunConfig& cfg, const Clock& clock, const std::vector<std::string>& outputs) {
  m["outputs"] = outputs;
  if (cfg.timings) m["timings_seconds"] = clock.laps();
  write_text((fs::path(cfg.out_dir) / "manifest.json").string(), m.dump(2) + "\n");
}

IngestResult load(const RunConfig& cfg) {
  if (cfg.subjects.empty() || cfg.events.empty()) throw SchemaError("--subjects and --events are required");
  IngestOptions io;
  io.nu_star = cfg.nu_star;
  io.standardize = cfg.standardize;
  IngestResult in = ingest(cfg.subjects, cfg.events, io);
  if (in.excluded_missing > 0)
    std::cerr << "ingest: excluded " << in.excluded_missing << " subject(s) with missing covariates\n";
  return in;
}

json data_json(const IngestResult& in) {
  json j;
  j["subjects"] = in.data.size();
  j["total_events"] = in.data.total_events();
  j["mean_events_per_subject"] = mean_events_per_subject(in.data);
  j["excluded_missing_covariates"] = in.excluded_missing;
  j["nu_star"] = in.data.nu_star();
  j["covariates"] = in.data.covariate_names();
  if (const auto& s = in.data.standardization()) {
    json st = json::array();
    for (std::size_t k = 0; k < s->columns.size(); ++k)
      st.push_back({{"covariate", in.data.covariate_names()[s->columns[k]]},
                    {"center", s->centers[k]},
                    {"scale", s->scales[k]}});
    j["standardization"] = st;
  }
  return j;
}

json fit_json(const FitResult& fr) {
  json j;
  j["iterations"] = fr.iterations;
  j["converged"] = fr.converged;
  j["final_step_norm"] = fr.final_step_norm;
  j["dropped_subjects"] = fr.dropped_subjects;
  return j;
}

json bootstrap_json(const BootstrapSummary& b) {
  json j;
  j["B"] = b.B;
  j["alpha"] = b.alpha;
  j["succeeded"] = b.replicate_paths.size();
  json f = json::array();
  for (const auto& r : b.failures) f.push_back({{"replicate", r.replicate}, {"message", r.message}});
  j["failures"] = f;
  return j;
}

// fit, bootstrap and test share the same pipeline.
int run_fit(const std::string& command, const RunConfig& cfg) {
  Clock clock;
  fs::create_directories(cfg.out_dir);
  const IngestResult in = load(cfg);
  clock.mark("ingest");
  const FitResult fr = fit(in.data, cfg.fit);
  clock.mark("fit");
  if (!fr.converged)
    std::cerr << "fit: no convergence after " << fr.iterations << " iterations (last step "
              << format_double(fr.final_step_norm) << ")\n";
  const auto names = coefficient_names(in.data);
  json m = base_manifest(command, cfg);
  m["data"] = data_json(in);
  m["fit"] = fit_json(fr);
  std::vector<std::string> outputs{"path.csv", "manifest.json"};

  std::size_t B = cfg.bootstrap;
  if (command != "fit" && B == 0) B = 100;
  std::optional<BootstrapSummary> boot;
  if (B >= 2) {
    BootstrapOptions bo;
    bo.B = B;
    bo.alpha = cfg.alpha;
    bo.seed = cfg.seed;
    bo.jobs = cfg.jobs;
    boot = bootstrap(in.data, cfg.fit, fr.path, bo);
    clock.mark("bootstrap");
    m["bootstrap"] = bootstrap_json(*boot);
    m["bootstrap"]["ci"] = cfg.percentile_ci ? "percentile" : "normal";
  }
  write_text((fs::path(cfg.out_dir) / "path.csv").string(),
             path_csv(fr.path, fr.naive_path, names, boot ? &*boot : nullptr, cfg.percentile_ci));
  if (command == "bootstrap") {
    write_text((fs::path(cfg.out_dir) / "bootstrap_replicates.csv").string(), replicates_csv(*boot, names));
    outputs.push_back("bootstrap_replicates.csv");
  }
  if (command == "test") {
    std::vector<std::size_t> cols;
    if (cfg.test.coefficients.empty()) {
      for (std::size_t j = 1; j < names.size(); ++j) cols.push_back(j);
    } else {
      for (const auto& c : cfg.test.coefficients) {
        const auto it = std::find(names.begin(), names.end(), c);
        if (it == names.end()) throw SchemaError("test: unknown coefficient '" + c + "'");
        cols.push_back(static_cast<std::size_t>(it - names.begin()));
      }
    }
    json tests = json::array();
    std::string csv = "coef_name,statistic,region_lo,region_hi,decision,average_effect,tau_l,tau_u\n";
    for (std::size_t j : cols) {
      const ConstancyTestResult t = constancy_test(*boot, in.data.size(), j, cfg.test.tau_l, cfg.test.tau_u);
      const std::string decision = t.reject ? "reject" : "fail to reject";
      tests.push_back({{"coef_name", names[j]},
                       {"statistic", t.statistic},
                       {"region", {{"reject_below", t.region_lo}, {"reject_above", t.region_hi}}},
                       {"decision", decision},
                       {"average_effect", t.eta_hat},
                       {"tau_l", t.tau_l},
                       {"tau_u", t.tau_u},
                       {"replicates", t.replicates}});
      csv += names[j] + "," + format_double(t.statistic) + "," + format_double(t.region_lo) + "," +
             format_double(t.region_hi) + "," + decision + "," + format_double(t.eta_hat) + "," +
             format_double(t.tau_l) + "," + format_double(t.tau_u) + "\n";
    }
    clock.mark("test");
    write_text((fs::path(cfg.out_dir) / "test.json").string(), json{{"tests", tests}}.dump(2) + "\n");
    write_text((fs::path(cfg.out_dir) / "test.csv").string(), csv);
    outputs.push_back("test.json");
    outputs.push_back("test.csv");
  }
  finish_manifest(m, cfg, clock, outputs);
  return 0;
}

int run_simulate(const RunConfig& cfg) {
  Clock clock;
  fs::create_directories(cfg.out_dir);
  const DGPSpec& spec = cfg.simulate.spec;
  const SimulatedDataset sim = generate_dataset(spec, 0);
  write_text((fs::path(cfg.out_dir) / "subjects.csv").string(), subjects_csv(sim.data));
  write_text((fs::path(cfg.out_dir) / "events.csv").string(), events_csv(sim.data));
  clock.mark("simulate");
  json m = base_manifest("simulate", cfg);
  m["dgp"] = {{"kind", std::string(to_string(spec.kind))},
              {"n", spec.n},
              {"b", spec.b},
              {"d", spec.d},
              {"error_scale", spec.error_scale},
              {"censoring", {spec.censor_lo, spec.censor_hi}},
              {"nu_star", sim.data.nu_star()}};
  m["replications"] = cfg.simulate.R;
  std::vector<double> means;
  for (std::size_t r = 0; r < cfg.simulate.R; ++r)
    means.push_back(r == 0 ? mean_events_per_subject(sim.data)
                           : mean_events_per_subject(generate_dataset(spec, r).data));
  double total = 0.0;
  for (double v : means) total += v;
  m["mean_events_per_subject"] = total / static_cast<double>(means.size());
  std::vector<std::string> outputs{"subjects.csv", "events.csv", "manifest.json"};
  if (cfg.simulate.monte_carlo) {
    MonteCarloConfig mc;
    mc.spec = spec;
    mc.fit = cfg.fit;
    mc.R = cfg.simulate.R;
    mc.B = cfg.bootstrap;
    mc.alpha = cfg.alpha;
    mc.tau_report = cfg.simulate.tau_report;
    mc.jobs = cfg.jobs;
    const MonteCarloReport rep = run_monte_carlo(mc);
    clock.mark("monte_carlo");
    write_text((fs::path(cfg.out_dir) / "monte_carlo.csv").string(), report_csv(rep));
    write_text((fs::path(cfg.out_dir) / "monte_carlo.json").string(), report_json(rep).dump(2) + "\n");
    outputs.push_back("monte_carlo.csv");
    outputs.push_back("monte_carlo.json");
  }
  finish_manifest(m, cfg, clock, outputs);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantile regression of a latent recurrent-event risk multiplier"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("recurq ") + version());
  Overrides o;
  auto* fit_cmd = app.add_subcommand("fit", "fit the coefficient path (and naive path)");
  auto* boot_cmd = app.add_subcommand("bootstrap", "fit plus bootstrap standard errors and intervals");
  auto* test_cmd = app.add_subcommand("test", "bootstrap test that a coefficient is constant in tau");
  auto* sim_cmd = app.add_subcommand("simulate", "simulate data, optionally run a Monte Carlo study");
  for (auto* c : {fit_cmd, boot_cmd, test_cmd, sim_cmd}) add_common(c, o);
  test_cmd->add_option("--coef", o.coefficients, "coefficients to test (default: every covariate)");
  test_cmd->add_option("--tau-l", o.tau_l, "lower end of the averaging range");
  test_cmd->add_option("--tau-u", o.tau_u, "upper end of the averaging range");
  sim_cmd->add_option("--dgp", o.dgp, "data-generating process")
      ->check(CLI::IsMember({"homogeneous-normal", "homogeneous-t3", "heteroscedastic-normal", "custom"}));
  sim_cmd->add_option("--n", o.n, "subjects per dataset");
  sim_cmd->add_option("--replications", o.replications, "number of simulated datasets R");
  sim_cmd->add_flag("--monte-carlo", o.monte_carlo, "fit every replication and write the study report");
  CLI11_PARSE(app, argc, argv);

  try {
    const RunConfig cfg = resolve(o);
    if (*fit_cmd) return run_fit("fit", cfg);
    if (*boot_cmd) return run_fit("bootstrap", cfg);
    if (*test_cmd) return run_fit("test", cfg);
    return run_simulate(cfg);
  } catch (const recurq::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
