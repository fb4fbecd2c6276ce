#pragma once

// Self-checks shared by `irs-crlb verify` and the acceptance binary. Each
// check returns a named pass/fail verdict with a one-line detail string.

#include "irs_crlb/fisher.hpp"
#include "irs_crlb/optimizer.hpp"
#include "irs_crlb/scenario.hpp"
#include "irs_crlb/sweep.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace irs_crlb::verify {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

inline std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

inline std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

/// Random scene with O(1) channel magnitudes: h_los ~ CN(0,1), NLoS gains from
/// random geometry and random phases normalized by M, alpha ~ CN(0,1) and
/// Dopplers in [-0.5, 0.5) at least `min_gap` apart.
inline Scene random_scene(std::size_t k_count, std::size_t m, std::size_t n, std::uint64_t seed,
                          double min_gap = 0.1) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Scene s;
  s.radar = RadarParams::constant(n);
  s.sigma2 = 0.5 + uni(rng);
  s.channels.h_los = standard_complex_normal(1, rng)(0);
  s.channels.h_nlos = CVector(static_cast<Eigen::Index>(k_count));
  for (std::size_t k = 0; k < k_count; ++k) {
    const double th_ir = (uni(rng) - 0.5) * kPi;
    const double th_ti = (uni(rng) - 0.5) * kPi;
    CouplingMatrix c = coupling_matrix(th_ir, th_ti, m);
    c.s /= static_cast<double>(m);
    std::vector<double> ph(m);
    for (double& p : ph) p = uni(rng) * kTwoPi;
    IrsPanel panel(ph);
    s.channels.h_nlos(static_cast<Eigen::Index>(k)) = nlos_channel_quadratic(panel.reflection(), c);
    s.coupling.push_back(std::move(c));
    s.panels.push_back(std::move(panel));
  }
  const Eigen::Index p = static_cast<Eigen::Index>(k_count + 1);
  s.target.alpha = standard_complex_normal(p, rng);
  s.target.nu = RVector(p);
  for (Eigen::Index k = 0; k < p;) {
    const double cand = uni(rng) - 0.5;
    bool ok = true;
    for (Eigen::Index j = 0; j < k; ++j) ok = ok && std::abs(cand - s.target.nu(j)) >= min_gap;
    if (ok) s.target.nu(k++) = cand;
  }
  return s;
}

/// max_mn |a_mn - o_mn| / sqrt(|o_mm o_nn|)
inline double normalized_entry_error(const RMatrix& a, const RMatrix& o) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      worst = std::max(worst, std::abs(a(i, j) - o(i, j)) / std::sqrt(std::abs(o(i, i) * o(j, j))));
  return worst;
}

inline double relative_frobenius(const RMatrix& a, const RMatrix& b) { return (a - b).norm() / b.norm(); }

inline double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

inline CheckResult fim_oracle_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  int cases = 0;
  for (std::size_t k : {1, 2, 3})
    for (std::size_t m : {1, 4, 8})
      for (std::size_t n : {8, 16})
        for (std::uint64_t rep = 0; rep < 5; ++rep) {
          const Scene s = random_scene(k, m, n, 1000 * k + 100 * m + 10 * n + rep);
          const NoiseModel r = NoiseModel::white(s.sigma2);
          const RMatrix analytic = assemble_full_fim(fim_blocks(s.radar, s.channels, s.target, r));
          const RMatrix oracle = fim_oracle(model_mean(s.radar, s.channels), r, pack_parameters(s.target));
          worst = std::max(worst, normalized_entry_error(analytic, oracle));
          ++cases;
        }
  const double t = elapsed_s(t0);
  return {"FIM matches finite-difference oracle", worst <= 1e-6 && t < 60.0,
          std::to_string(cases) + " scenarios, " + fmt("worst normalized error %.3g, %.2f s", worst, t)};
}

inline CheckResult reformulation_equivalence() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Scene s = random_scene(1 + seed % 3, 1 + seed % 8, 8 + 8 * (seed % 2), 5000 + seed);
    const FimBlocks a = fim_blocks(s.radar, s.channels, s.target, NoiseModel::white(s.sigma2));
    const FimBlocks b = fim_from_h(s.channels, s.radar, s.target.alpha, s.target.nu, s.sigma2);
    worst = std::max({worst, relative_frobenius(b.f_aa, a.f_aa), relative_frobenius(b.f_nn, a.f_nn)});
  }
  return {"channel-parameterized blocks match sensing-matrix FIM", worst <= 1e-10,
          fmt("50 scenarios, worst relative error %.3g", worst)};
}

inline CheckResult closed_forms() {
  const NoIrsFim a = no_irs_fim(RadarParams::constant(8), 1.0, 1.0, 0.3, 1.0);
  const NoIrsFim b = no_irs_fim(RadarParams::constant(4), 1.0, 1.0, -0.2, 1.0);
  const double ea = (a.f_aa0 - 16.0 * RMatrix::Identity(2, 2)).cwiseAbs().maxCoeff();
  const double eb = std::abs(b.f_nn0 - 28.0);
  return {"no-IRS closed forms", ea <= 1e-12 && eb <= 1e-12,
          fmt("|f_aa0 - 16 I| = %.3g, |f_nn0 - 28| = %.3g", ea, eb)};
}

inline CheckResult block_trace_bound() {
  int done = 0;
  int skipped = 0;
  double worst = -1.0;
  for (std::uint64_t seed = 0; done < 100; ++seed) {
    const Scene s = random_scene(1 + seed % 3, 1 + 3 * (seed % 3), 8 + 8 * (seed % 2), 9000 + seed, 0.02);
    CrlbResult c;
    try {
      c = crlb(assemble_full_fim(fim_blocks(s.radar, s.channels, s.target, NoiseModel::white(s.sigma2))));
    } catch (const SingularFimError&) {
      ++skipped;
      continue;
    }
    worst = std::max(worst, (c.surrogate - c.trace_total) / c.trace_total);
    ++done;
  }
  return {"block surrogate bounds the full trace", worst <= 1e-9,
          "100 nonsingular scenarios (" + std::to_string(skipped) + " singular skipped), " +
              fmt("max (surrogate - trace)/trace = %.3g", worst)};
}

/// Largest increase of the objective trace inside any fixed-eta pass,
/// relative to the value it rose from.
inline double worst_pass_increase(const OptimizerState& st) {
  double worst = -std::numeric_limits<double>::infinity();
  const auto& tr = st.objective_trace;
  for (std::size_t p = 0; p < st.pass_starts.size(); ++p) {
    const std::size_t begin = st.pass_starts[p];
    const std::size_t end = p + 1 < st.pass_starts.size() ? st.pass_starts[p + 1] : tr.size();
    for (std::size_t i = begin + 1; i < end; ++i)
      worst = std::max(worst, (tr[i] - tr[i - 1]) / std::max(std::abs(tr[i - 1]), 1e-300));
  }
  return worst;
}

/// Achieved surrogate and the exhaustive minimum over `points` phases for a
/// single-element single-IRS scene.
struct GridComparison {
  double optimizer = 0.0;
  double grid_min = 0.0;
  double resolution = 0.0;  // largest change between neighbouring grid points
};

inline GridComparison single_element_grid(const Scene& scene, const OptimizerConfig& cfg, std::size_t points = 4096) {
  require(scene.irs_count() == 1 && scene.coupling[0].s.rows() == 1, "single_element_grid: needs K = 1, M = 1");
  const DesignResult d = run_design(scene, cfg);
  const DesignObjective obj(scene);
  std::vector<double> f(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double phi = kTwoPi * static_cast<double>(i) / static_cast<double>(points);
    f[i] = obj.surrogate_part(obj.implied_channels({{phi}})).value;
  }
  GridComparison g;
  g.optimizer = d.design_surrogate;
  g.grid_min = *std::min_element(f.begin(), f.end());
  for (std::size_t i = 0; i < points; ++i) g.resolution = std::max(g.resolution, std::abs(f[(i + 1) % points] - f[i]));
  return g;
}

inline CheckResult ao_contract() {
  const auto t0 = std::chrono::steady_clock::now();
  ScenarioConfig cfg = preset("paper-1irs");
  const Scene scene = build_scene(cfg);
  OptimizerConfig opt;
  opt.seed = cfg.seed;
  const DesignResult d = run_design(scene, opt);
  const double t = elapsed_s(t0);
  const double rise = worst_pass_increase(d.state);

  ScenarioConfig one = cfg;
  one.irs[0].elements = 1;
  const GridComparison g = single_element_grid(build_scene(one), opt);
  const bool grid_ok = g.optimizer <= g.grid_min + g.resolution;

  const bool ok = rise <= 1e-9 && d.constraint_residual <= 1e-6 && d.converged && grid_ok && t < 30.0;
  std::ostringstream os;
  os << "M=8 N=16: max relative rise " << fmt("%.3g", rise) << ", residual " << fmt("%.3g", d.constraint_residual)
     << ", " << fmt("%.2f s", t) << "; M=1 optimizer " << fmt("%.6g vs grid %.6g", g.optimizer, g.grid_min)
     << " (resolution " << fmt("%.3g", g.resolution) << ")";
  return {"alternating optimization contract", ok, os.str()};
}

/// Relative error of analytic vs central-difference gradients of the
/// penalized objective with respect to [Re h, Im h] and every phase.
inline double gradient_error(const Scene& scene, const CVector& h, const PhaseSet& phases, const RVector& eta) {
  const DesignObjective obj(scene);
  const PenalizedGradient g = penalized_gradient(h, phases, eta, scene);
  auto value = [&](const CVector& hh, const PhaseSet& pp) { return obj.penalized_part(hh, pp, eta).value; };

  std::vector<double> analytic;
  std::vector<double> numeric;
  for (Eigen::Index k = 1; k < h.size(); ++k) {
    const double step = 1e-6 * std::max(1.0, std::abs(h(k)));
    for (int part = 0; part < 2; ++part) {
      const cplx dir = part == 0 ? cplx{step, 0.0} : cplx{0.0, step};
      CVector hp = h;
      CVector hm = h;
      hp(k) += dir;
      hm(k) -= dir;
      numeric.push_back((value(hp, phases) - value(hm, phases)) / (2.0 * step));
      analytic.push_back(g.h(2 * (k - 1) + part));
    }
  }
  for (std::size_t k = 0; k < phases.size(); ++k)
    for (std::size_t m = 0; m < phases[k].size(); ++m) {
      const double step = 1e-6;
      PhaseSet pp = phases;
      PhaseSet pm = phases;
      pp[k][m] += step;
      pm[k][m] -= step;
      numeric.push_back((value(h, pp) - value(h, pm)) / (2.0 * step));
      analytic.push_back(g.phases[k][m]);
    }
  const Eigen::Map<const RVector> a(analytic.data(), static_cast<Eigen::Index>(analytic.size()));
  const Eigen::Map<const RVector> n(numeric.data(), static_cast<Eigen::Index>(numeric.size()));
  return (a - n).norm() / n.norm();
}

inline CheckResult gradient_checks() {
  double worst = 0.0;
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const Scene s = random_scene(1 + i % 3, 2 + i % 5, 8 + 8 * (i % 2), 300 + static_cast<std::uint64_t>(i));
    const PhaseSet phases = random_phases(s, 400 + static_cast<std::uint64_t>(i));
    CVector h = s.channels.stacked();
    for (Eigen::Index k = 1; k < h.size(); ++k) h(k) += 0.3 * standard_complex_normal(1, rng)(0);
    RVector eta(static_cast<Eigen::Index>(s.irs_count()));
    for (Eigen::Index k = 0; k < eta.size(); ++k) eta(k) = std::pow(10.0, 3.0 * uni(rng) - 1.0);
    worst = std::max(worst, gradient_error(s, h, phases, eta));
  }
  return {"analytic gradients match finite differences", worst <= 1e-5,
          fmt("20 points, worst relative error %.3g", worst)};
}

// ---------------------------------------------------------------------------
// Sweep trends

/// Least-squares slope of log(y) against log(x); NaN when any y is not a
/// positive finite number.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(y[i] > 0.0) || !std::isfinite(y[i])) return std::numeric_limits<double>::quiet_NaN();
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double dn = static_cast<double>(n);
  return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

inline const SweepSeries& series_of(const SweepResult& r, const std::string& name) {
  for (const auto& s : r.series)
    if (s.scenario == name) return s;
  throw InvalidArgument("series_of: no series '" + name + "'");
}

/// Count of grid points where a <= b fails on trace_crlb, restricted to
/// indices accepted by `where`.
inline std::size_t ordering_violations(const SweepSeries& a, const SweepSeries& b,
                                       const std::function<bool(double)>& where = [](double) { return true; }) {
  std::size_t bad = 0;
  for (std::size_t i = 0; i < a.points.size(); ++i)
    if (where(a.points[i].axis_value) && !(a.points[i].trace_crlb <= b.points[i].trace_crlb)) ++bad;
  return bad;
}

inline SweepResult noise_sweep(const OptimizerConfig& opt, std::size_t threads = 0) {
  ScenarioConfig cfg = preset("paper-3irs");
  cfg.gamma = 0.1;
  SweepOptions so;
  so.threads = threads;
  return run_sigma_sweep(cfg, parse_grid("1e-3:1e1:log:25"), default_variants(cfg), opt, so);
}

inline SweepResult lsr_sweep(const OptimizerConfig& opt, std::size_t threads = 0) {
  ScenarioConfig cfg = preset("paper-3irs");
  cfg.sigma2 = 0.1;
  SweepOptions so;
  so.threads = threads;
  return run_gamma_sweep(cfg, parse_grid("1e-2:1e2:log:25"), default_variants(cfg), opt, so);
}

inline CheckResult noise_sweep_trend(const SweepResult& r, double seconds) {
  const auto& none = series_of(r, "no-irs");
  const auto& one = series_of(r, "1-irs");
  const auto& three = series_of(r, "3-irs");
  const std::size_t v31 = ordering_violations(three, one);
  const std::size_t v10 = ordering_violations(one, none);
  double worst_slope = 0.0;
  std::ostringstream slopes;
  for (const auto& s : r.series) {
    std::vector<double> y;
    for (const auto& p : s.points) y.push_back(p.trace_crlb);
    const double slope = loglog_slope(r.axis_values, y);
    worst_slope = std::isnan(slope) ? std::numeric_limits<double>::infinity()
                                    : std::max(worst_slope, std::abs(slope - 1.0));
    slopes << ' ' << s.scenario << '=' << fmt("%.12g", slope);
  }
  const bool ok = v31 == 0 && v10 == 0 && worst_slope <= 1e-6 && seconds < 600.0;
  std::ostringstream os;
  os << "3-irs > 1-irs at " << v31 << "/25, 1-irs > no-irs at " << v10 << "/25; slopes" << slopes.str() << "; "
     << fmt("%.2f s", seconds);
  return {"noise sweep ordering and unit slope", ok, os.str()};
}

inline CheckResult lsr_sweep_trend(const SweepResult& r, double seconds) {
  const auto& none = series_of(r, "no-irs");
  const auto& one = series_of(r, "1-irs");
  const auto& three = series_of(r, "3-irs");
  std::size_t low = 0;
  for (double g : r.axis_values) low += g < 1.0;
  const std::size_t v10 = ordering_violations(one, none, [](double g) { return g < 1.0; });
  const std::size_t v31 = ordering_violations(three, one);
  const bool ok = v10 == 0 && v31 == 0 && seconds < 900.0;
  std::ostringstream os;
  os << "1-irs > no-irs at " << v10 << "/" << low << " points with gamma < 1, 3-irs > 1-irs at " << v31
     << "/25; " << fmt("%.2f s", seconds);
  return {"LSR sweep ordering", ok, os.str()};
}

inline std::string csv_string(const SweepResult& r) {
  std::ostringstream os;
  write_csv({r}, os);
  return os.str();
}

inline CheckResult determinism(const SweepResult& first, const std::function<SweepResult()>& rerun) {
  const std::string a = csv_string(first);
  const std::string b = csv_string(rerun());
  return {"identical seeds give byte-identical CSV", a == b,
          std::to_string(a.size()) + " bytes, " + (a == b ? "identical" : "different")};
}

/// The fast oracle checks (no sweeps).
inline std::vector<CheckResult> oracle_suite() {
  return {fim_oracle_equivalence(), reformulation_equivalence(), closed_forms(),
          block_trace_bound(),      ao_contract(),               gradient_checks()};
}

}  // namespace irs_crlb::verify
