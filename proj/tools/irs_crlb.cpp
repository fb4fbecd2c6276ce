// irs-crlb: CRLB sweeps, phase design and self-verification.

#include "irs_crlb/irs_crlb.hpp"
#include "irs_crlb/verification.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

using namespace irs_crlb;

namespace {

struct SceneArgs {
  std::string preset = "paper-3irs";
  std::string config;
  std::optional<std::uint64_t> seed;
};

struct OptArgs {
  std::size_t restarts = OptimizerConfig{}.restarts;
  double eps = OptimizerConfig{}.residual_eps;
  std::size_t max_iters = OptimizerConfig{}.max_outer_iters;
  std::size_t threads = 0;
};

void add_scene_flags(CLI::App* app, SceneArgs& a) {
  app->add_option("--preset", a.preset, "Built-in scenario: no-irs, paper-1irs, paper-3irs")->capture_default_str();
  app->add_option("--config", a.config, "JSON scenario file (overrides --preset)");
  app->add_option("--seed", a.seed, "Seed for scenario draws and optimizer restarts");
}

void add_opt_flags(CLI::App* app, OptArgs& a) {
  app->add_option("--restarts", a.restarts, "Optimizer restarts")->capture_default_str()->check(CLI::PositiveNumber);
  app->add_option("--eps", a.eps, "Constraint residual tolerance")->capture_default_str()->check(CLI::PositiveNumber);
  app->add_option("--max-iters", a.max_iters, "Alternating passes per penalty round")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app->add_option("--threads", a.threads, "Worker threads (0 = all cores)")->capture_default_str();
}

ScenarioConfig resolve_scene(const SceneArgs& a) {
  ScenarioConfig cfg = a.config.empty() ? preset(a.preset) : load_scenario(a.config);
  if (a.seed) cfg.seed = *a.seed;
  cfg.validate();
  return cfg;
}

OptimizerConfig resolve_opt(const OptArgs& a, const ScenarioConfig& cfg) {
  OptimizerConfig o;
  o.restarts = a.restarts;
  o.residual_eps = a.eps;
  o.max_outer_iters = a.max_iters;
  o.threads = a.threads;
  o.seed = cfg.seed;
  o.validate();
  return o;
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

int run_sweep(const SceneArgs& sa, const OptArgs& oa, const std::string& axis, std::string grid,
              const std::string& out, const std::string& trace, const std::string& scenarios, bool no_optimize) {
  const ScenarioConfig cfg = resolve_scene(sa);
  const OptimizerConfig opt = resolve_opt(oa, cfg);

  std::vector<ScenarioVariant> variants;
  if (scenarios.empty()) {
    variants = default_variants(cfg);
  } else {
    std::stringstream ss(scenarios);
    std::string item;
    while (std::getline(ss, item, ',')) variants.push_back(parse_variant(item, cfg));
  }

  if (grid.empty()) grid = axis == "sigma2" ? "1e-3:1e1:log:25" : "1e-2:1e2:log:25";
  const std::vector<double> values = parse_grid(grid);
  SweepOptions so;
  so.optimize = !no_optimize;
  so.threads = oa.threads;

  const SweepResult r = axis == "sigma2" ? run_sigma_sweep(cfg, values, variants, opt, so)
                                         : run_gamma_sweep(cfg, values, variants, opt, so);

  std::ostringstream csv;
  write_csv({r}, csv);
  write_text(out, csv.str());
  if (!trace.empty()) {
    std::ostringstream tr;
    write_trace_jsonl(r, tr);
    write_text(trace, tr.str());
  }

  std::size_t unconverged = 0;
  std::size_t singular = 0;
  for (const auto& s : r.series)
    for (const auto& p : s.points) {
      unconverged += !p.converged;
      singular += p.singular;
    }
  if (unconverged) std::fprintf(stderr, "warning: %zu point(s) did not reach the residual tolerance\n", unconverged);
  if (singular) std::fprintf(stderr, "warning: %zu point(s) have a singular FIM; their traces are inf\n", singular);
  return 0;
}

int run_design_cmd(const SceneArgs& sa, const OptArgs& oa, const std::string& out) {
  const ScenarioConfig cfg = resolve_scene(sa);
  if (cfg.irs_count() == 0) throw ConfigError("irs", "design needs at least one IRS");
  const OptimizerConfig opt = resolve_opt(oa, cfg);
  const Scene scene = build_scene(cfg);
  const DesignResult d = run_design(scene, opt);

  std::ostringstream csv;
  csv << "irs,element,phase\n";
  for (std::size_t k = 0; k < d.optimal_phases.size(); ++k)
    for (std::size_t m = 0; m < d.optimal_phases[k].size(); ++m)
      csv << k << ',' << m << ',' << format_double(d.optimal_phases[k][m]) << '\n';
  write_text(out, csv.str());

  std::fprintf(stderr, "surrogate %s  trace_crlb %s  residual %.3g  passes %zu  restart %zu\n",
               format_double(d.achieved_surrogate).c_str(), format_double(d.achieved_trace_crlb).c_str(),
               d.constraint_residual, d.iterations_used, d.restart_used);
  if (!d.converged) {
    std::fprintf(stderr, "error: constraint residual %.3g above tolerance %.3g after all penalty rounds\n",
                 d.constraint_residual, opt.residual_eps);
    return 3;
  }
  return 0;
}

int run_verify(bool full) {
  using namespace irs_crlb::verify;
  std::vector<CheckResult> results = oracle_suite();
  if (full) {
    const OptimizerConfig opt;
    auto t0 = std::chrono::steady_clock::now();
    const SweepResult a = noise_sweep(opt);
    results.push_back(noise_sweep_trend(a, elapsed_s(t0)));
    t0 = std::chrono::steady_clock::now();
    const SweepResult b = lsr_sweep(opt);
    results.push_back(lsr_sweep_trend(b, elapsed_s(t0)));
    results.push_back(determinism(a, [&] { return noise_sweep(opt, 1); }));
  }
  int failed = 0;
  for (const auto& r : results) {
    std::printf("%s  %s: %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    failed += !r.passed;
  }
  return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cramer-Rao bounds and phase design for IRS-aided pulse-Doppler radar"};
  app.require_subcommand(1);

  SceneArgs sweep_scene;
  OptArgs sweep_opt;
  std::string axis = "sigma2";
  std::string grid;
  std::string out = "-";
  std::string trace;
  std::string scenarios;
  bool no_optimize = false;
  auto* sweep = app.add_subcommand("sweep", "Sweep noise variance or LSR and write a CSV");
  add_scene_flags(sweep, sweep_scene);
  add_opt_flags(sweep, sweep_opt);
  sweep->add_option("--axis", axis, "Swept quantity")->check(CLI::IsMember({"sigma2", "gamma"}))->capture_default_str();
  sweep->add_option("--grid", grid, "start:stop:log|lin:count or a comma list (default depends on --axis)");
  sweep->add_option("--out", out, "Output CSV path, - for stdout")->capture_default_str();
  sweep->add_option("--trace", trace, "Write optimizer traces as JSON lines to this path");
  sweep->add_option("--scenarios", scenarios, "Comma list of variants, e.g. no-irs,1-irs,3-irs");
  sweep->add_flag("--no-optimize", no_optimize, "Use random phases instead of designed ones");

  SceneArgs design_scene;
  OptArgs design_opt;
  std::string design_out = "-";
  auto* design = app.add_subcommand("design", "Design IRS phases for one scenario and write them as CSV");
  add_scene_flags(design, design_scene);
  add_opt_flags(design, design_opt);
  design->add_option("--out", design_out, "Output CSV path, - for stdout")->capture_default_str();

  bool full = false;
  auto* verify = app.add_subcommand("verify", "Run the built-in oracle checks");
  verify->add_flag("--full", full, "Also run the sweep trend and determinism checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sweep) return run_sweep(sweep_scene, sweep_opt, axis, grid, out, trace, scenarios, no_optimize);
    if (*design) return run_design_cmd(design_scene, design_opt, design_out);
    if (*verify) return run_verify(full);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
