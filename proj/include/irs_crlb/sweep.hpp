#pragma once

// Noise-variance and LSR sweeps over scenario variants, plus CSV and
// JSON-lines emission.

#include "irs_crlb/fisher.hpp"
#include "irs_crlb/optimizer.hpp"
#include "irs_crlb/parallel.hpp"
#include "irs_crlb/scenario.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <ostream>
#include <string>
#include <vector>

namespace irs_crlb {

/// Which IRS subsets to evaluate: 0 = no IRS, n = the first n panels.
struct ScenarioVariant {
  std::string label;
  std::size_t irs_count = 0;
};

/// no-irs, 1-irs and all-panels (deduplicated) for a config.
inline std::vector<ScenarioVariant> default_variants(const ScenarioConfig& cfg) {
  std::vector<ScenarioVariant> v{{"no-irs", 0}};
  if (cfg.irs_count() >= 1) v.push_back({"1-irs", 1});
  if (cfg.irs_count() >= 2) v.push_back({std::to_string(cfg.irs_count()) + "-irs", cfg.irs_count()});
  return v;
}

inline ScenarioVariant parse_variant(const std::string& label, const ScenarioConfig& cfg) {
  if (label == "no-irs") return {label, 0};
  const auto dash = label.find("-irs");
  if (dash != std::string::npos && dash > 0 && dash + 4 == label.size()) {
    std::size_t n = 0;
    try {
      n = std::stoul(label.substr(0, dash));
    } catch (const std::exception&) {
      throw ConfigError("scenarios", "cannot parse variant '" + label + "'");
    }
    if (n > cfg.irs_count())
      throw ConfigError("scenarios", "variant '" + label + "' needs more IRS panels than the config has");
    return {label, n};
  }
  throw ConfigError("scenarios", "unknown variant '" + label + "' (expected no-irs or <n>-irs)");
}

struct SweepOptions {
  bool optimize = true;  // false: random phases drawn from the optimizer seed
  std::size_t threads = 0;
};

struct SweepPoint {
  double axis_value = 0.0;
  double trace_crlb = 0.0;
  double trace_alpha_block = 0.0;
  double trace_nu_block = 0.0;
  double surrogate = 0.0;
  bool converged = true;
  double residual = 0.0;
  bool singular = false;  // full FIM above the condition limit; traces are inf
  double condition = 0.0;
  std::vector<double> objective_trace;
  std::vector<std::size_t> pass_starts;
  PhaseSet phases;
};

struct SweepSeries {
  std::string scenario;
  std::vector<SweepPoint> points;
};

struct SweepResult {
  std::string axis_name;
  std::vector<double> axis_values;
  std::vector<SweepSeries> series;
  std::uint64_t seed = 0;
  std::string config_digest;
};

namespace detail {

/// Metrics of one scene. K = 0 uses the LoS closed forms for the surrogate
/// and the general FIM for the full CRLB (its alpha-nu cross block is not
/// zero). K >= 1 designs phases (or draws them) and evaluates the design.
inline SweepPoint evaluate_scene(const Scene& scene, const OptimizerConfig& opt, const SweepOptions& options) {
  SweepPoint pt;
  if (scene.irs_count() == 0) {
    const NoIrsFim closed = no_irs_fim(scene.radar, scene.channels.h_los, scene.target.alpha(0), scene.target.nu(0),
                                       scene.sigma2);
    pt.surrogate = 2.0 / closed.f_aa0(0, 0) + 1.0 / closed.f_nn0;
    const CrlbResult c = crlb(assemble_full_fim(fim_blocks(scene.radar, scene.channels, scene.target,
                                                           NoiseModel::white(scene.sigma2))));
    pt.trace_crlb = c.trace_total;
    pt.trace_alpha_block = c.trace_alpha_block;
    pt.trace_nu_block = c.trace_nu_block;
    return pt;
  }

  if (options.optimize) {
    DesignResult d = run_design(scene, opt);
    pt.phases = std::move(d.optimal_phases);
    pt.converged = d.converged;
    pt.residual = d.constraint_residual;
    pt.objective_trace = std::move(d.state.objective_trace);
    pt.pass_starts = std::move(d.state.pass_starts);
  } else {
    pt.phases = random_phases(scene, opt.seed);
  }
  try {
    const CrlbResult c = evaluate_design(pt.phases, scene);
    pt.trace_crlb = c.trace_total;
    pt.trace_alpha_block = c.trace_alpha_block;
    pt.trace_nu_block = c.trace_nu_block;
    pt.surrogate = c.surrogate;
  } catch (const SingularFimError& e) {
    const double inf = std::numeric_limits<double>::infinity();
    pt.trace_crlb = pt.trace_alpha_block = pt.trace_nu_block = inf;
    pt.singular = true;
    pt.condition = e.condition();
    pt.surrogate = surrogate_objective(ChannelSet{scene.channels.h_los, consistent_channels(scene.coupling, pt.phases)}.stacked(), scene).value;
  }
  return pt;
}

inline SweepResult make_result(const ScenarioConfig& cfg, const std::string& axis, const std::vector<double>& grid,
                               const std::vector<ScenarioVariant>& variants) {
  require(!grid.empty(), "sweep: grid must not be empty");
  require(!variants.empty(), "sweep: at least one scenario variant is required");
  SweepResult r;
  r.axis_name = axis;
  r.axis_values = grid;
  r.seed = cfg.seed;
  r.config_digest = config_digest(cfg);
  for (const auto& v : variants) r.series.push_back({v.label, std::vector<SweepPoint>(grid.size())});
  return r;
}

}  // namespace detail

/// Noise-variance sweep. The CRLB is exactly proportional to sigma^2, so each
/// variant is designed once at sigma^2 = 1 and every grid point is that
/// result scaled by sigma^2.
inline SweepResult run_sigma_sweep(const ScenarioConfig& cfg, const std::vector<double>& sigma2_grid,
                                   const std::vector<ScenarioVariant>& variants, const OptimizerConfig& opt,
                                   const SweepOptions& options = {}) {
  for (double s : sigma2_grid) require(std::isfinite(s) && s > 0.0, "run_sigma_sweep: grid values must be positive");
  SweepResult r = detail::make_result(cfg, "sigma2", sigma2_grid, variants);

  std::vector<SweepPoint> unit(variants.size());
  parallel_for(
      variants.size(),
      [&](std::size_t v) {
        ScenarioConfig c = cfg.with_irs_count(variants[v].irs_count);
        c.sigma2 = 1.0;
        unit[v] = detail::evaluate_scene(build_scene(c), opt, options);
      },
      options.threads);

  for (std::size_t v = 0; v < variants.size(); ++v) {
    for (std::size_t i = 0; i < sigma2_grid.size(); ++i) {
      SweepPoint pt = unit[v];
      const double s = sigma2_grid[i];
      pt.axis_value = s;
      pt.trace_crlb *= s;
      pt.trace_alpha_block *= s;
      pt.trace_nu_block *= s;
      pt.surrogate *= s;
      for (double& g : pt.objective_trace) g *= s;
      r.series[v].points[i] = std::move(pt);
    }
  }
  return r;
}

/// LSR sweep at the config's sigma^2; phases are re-designed at every point.
inline SweepResult run_gamma_sweep(const ScenarioConfig& cfg, const std::vector<double>& gamma_grid,
                                   const std::vector<ScenarioVariant>& variants, const OptimizerConfig& opt,
                                   const SweepOptions& options = {}) {
  for (double g : gamma_grid) require(std::isfinite(g) && g > 0.0, "run_gamma_sweep: grid values must be positive");
  SweepResult r = detail::make_result(cfg, "gamma", gamma_grid, variants);

  const std::size_t n = gamma_grid.size() * variants.size();
  OptimizerConfig inner = opt;
  inner.threads = 1;  // parallelism is across sweep points
  parallel_for(
      n,
      [&](std::size_t job) {
        const std::size_t v = job / gamma_grid.size();
        const std::size_t i = job % gamma_grid.size();
        ScenarioConfig c = cfg.with_irs_count(variants[v].irs_count);
        c.gamma = gamma_grid[i];
        SweepPoint pt = detail::evaluate_scene(build_scene(c), inner, options);
        pt.axis_value = gamma_grid[i];
        r.series[v].points[i] = std::move(pt);
      },
      options.threads);
  return r;
}

/// "a:b:log:n" or "a:b:lin:n" (endpoints included), or a comma list.
inline std::vector<double> parse_grid(const std::string& spec) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : spec) {
    if (ch == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  parts.push_back(cur);

  auto to_double = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw ConfigError("grid", "cannot parse '" + s + "'");
    }
    if (used != s.size()) throw ConfigError("grid", "cannot parse '" + s + "'");
    return v;
  };

  if (parts.size() == 1) {
    std::vector<double> out;
    std::string item;
    std::stringstream ss(spec);
    while (std::getline(ss, item, ',')) out.push_back(to_double(item));
    if (out.empty()) throw ConfigError("grid", "empty grid");
    return out;
  }
  if (parts.size() != 4) throw ConfigError("grid", "expected start:stop:log|lin:count");
  const double a = to_double(parts[0]);
  const double b = to_double(parts[1]);
  const double count_d = to_double(parts[3]);
  if (count_d < 1 || count_d != std::floor(count_d)) throw ConfigError("grid", "count must be a positive integer");
  const auto count = static_cast<std::size_t>(count_d);
  std::vector<double> out(count);
  if (parts[2] == "log") {
    if (!(a > 0.0 && b > 0.0)) throw ConfigError("grid", "log grids need positive endpoints");
    const double la = std::log10(a);
    const double lb = std::log10(b);
    for (std::size_t i = 0; i < count; ++i)
      out[i] = count == 1 ? a : std::pow(10.0, la + (lb - la) * static_cast<double>(i) / static_cast<double>(count - 1));
    out.front() = a;
    if (count > 1) out.back() = b;
  } else if (parts[2] == "lin") {
    for (std::size_t i = 0; i < count; ++i)
      out[i] = count == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1);
  } else {
    throw ConfigError("grid", "spacing must be log or lin");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Output

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline constexpr const char* kCsvHeader =
    "axis,scenario,trace_crlb,trace_alpha_block,trace_nu_block,surrogate,converged,seed";

/// One row per (scenario, axis value), scenario-major in variant order.
inline void write_csv(const std::vector<SweepResult>& results, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const auto& r : results)
    for (const auto& s : r.series)
      for (const auto& p : s.points)
        out << format_double(p.axis_value) << ',' << s.scenario << ',' << format_double(p.trace_crlb) << ','
            << format_double(p.trace_alpha_block) << ',' << format_double(p.trace_nu_block) << ','
            << format_double(p.surrogate) << ',' << (p.converged ? 1 : 0) << ',' << r.seed << '\n';
}

inline void emit_csv(const std::vector<SweepResult>& results, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_csv: cannot open '" + path + "' for writing");
  write_csv(results, out);
  out.flush();
  if (!out) throw std::runtime_error("emit_csv: write to '" + path + "' failed");
}

/// One JSON object per (scenario, axis value) with the optimizer trace.
inline void write_trace_jsonl(const SweepResult& r, std::ostream& out) {
  for (const auto& s : r.series) {
    for (const auto& p : s.points) {
      nlohmann::json j;
      j["axis"] = r.axis_name;
      j["value"] = p.axis_value;
      j["scenario"] = s.scenario;
      j["converged"] = p.converged;
      j["residual"] = p.residual;
      j["singular"] = p.singular;
      j["objective_trace"] = p.objective_trace;
      j["pass_starts"] = p.pass_starts;
      j["phases"] = p.phases;
      j["config_digest"] = r.config_digest;
      out << j.dump() << '\n';
    }
  }
}

}  // namespace irs_crlb
