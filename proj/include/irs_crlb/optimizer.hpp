#pragma once

// Doppler-aware IRS phase design.
//
// The A-optimality surrogate f(h) = Tr(F_aa^-1) + Tr(F_nn^-1) is minimized
// over the auxiliary channel vector h and the IRS phases, coupled through the
// quadratic penalty sum_k eta_k |h_k - v_k^T S_k v_k|^2. The two blocks are
// updated alternately with gradient descent plus Armijo backtracking, and
// eta is increased geometrically until the constraint residual is small.
//
// With white noise the reflectivity block has a closed-form trace,
//   Tr(F_aa^-1) = sigma^2 sum_k [G^-1]_kk / |h_k|^2,
// whose k = 0 term depends only on the LoS channel and the Dopplers. That
// term is the same for every phase design and, with a realistic LoS path
// loss, is dozens of orders of magnitude larger than the rest of the
// objective. The optimizer therefore works on g minus that term ("design
// part"); the full value is always fixed_term() + design part.
//
// The penalty weight of IRS k is eta_k * f_ref / s_k^2, with s_k the largest
// reachable |v^T S_k v| and f_ref the design part with every panel at that
// magnitude. eta is then dimensionless, so the same schedule works whatever
// the absolute scale of the channels and of the bound.

#include "irs_crlb/fisher.hpp"
#include "irs_crlb/parallel.hpp"
#include "irs_crlb/scene.hpp"
#include "irs_crlb/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace irs_crlb {

inline constexpr double kBarrierValue = 1e30;

struct OptimizerConfig {
  std::size_t max_outer_iters = 500;  // AO sweeps per penalty round
  std::size_t inner_max_iters = 200;
  double inner_grad_tol = 1e-10;
  double residual_eps = 1e-6;
  double penalty_init = 1.0;
  std::vector<double> penalty_init_per_irs;  // overrides penalty_init when non-empty
  double penalty_growth = 10.0;
  std::size_t max_penalty_rounds = 10;
  double outer_rel_tol = 1e-10;
  std::uint64_t seed = 0;
  std::size_t restarts = 4;
  std::size_t threads = 0;  // 0 = hardware concurrency

  void validate() const {
    require(max_outer_iters >= 1 && inner_max_iters >= 1, "OptimizerConfig: iteration counts must be positive");
    require(inner_grad_tol > 0.0 && residual_eps > 0.0 && outer_rel_tol > 0.0,
            "OptimizerConfig: tolerances must be positive");
    require(penalty_init > 0.0, "OptimizerConfig: initial penalty must be positive");
    for (double e : penalty_init_per_irs) require(e > 0.0, "OptimizerConfig: initial penalty must be positive");
    require(penalty_growth > 1.0, "OptimizerConfig: penalty growth must exceed 1");
    require(max_penalty_rounds >= 1, "OptimizerConfig: at least one penalty round is required");
    require(restarts >= 1, "OptimizerConfig: at least one restart is required");
  }
};

using PhaseSet = std::vector<std::vector<double>>;

struct OptimizerState {
  CVector h;  // K+1 entries, h(0) is the LoS channel and never changes
  PhaseSet phases;
  RVector eta;
  std::vector<double> objective_trace;   // design part of g after every half-step
  std::vector<std::size_t> pass_starts;  // where each fixed-eta pass begins in objective_trace
  double residual = 0.0;
};

struct DesignResult {
  PhaseSet optimal_phases;
  double achieved_surrogate = 0.0;   // f at the channels implied by the phases
  double design_surrogate = 0.0;     // the phase-dependent part of achieved_surrogate
  double achieved_trace_crlb = 0.0;  // Tr of the full CRLB at the same point
  double constraint_residual = 0.0;  // max_k |h_k - v_k^T S_k v_k| at the end of the run
  double penalty_value = 0.0;        // sum_k w_k |h_k - v_k^T S_k v_k|^2
  std::vector<double> penalty_weights;  // w_k at the end of the run
  std::size_t iterations_used = 0;
  std::size_t restart_used = 0;
  bool converged = false;
  OptimizerState state;
};

/// Value of f (or of its design part) plus a flag when a block was singular
/// and the barrier value was substituted.
struct ObjectiveValue {
  double value = 0.0;
  bool singular = false;
};

/// Precomputed pieces of the surrogate and the penalty for one scene.
class DesignObjective {
 public:
  explicit DesignObjective(const Scene& scene)
      : sigma2_(scene.sigma2), alpha_(scene.target.alpha), coupling_(scene.coupling), h_los_(scene.channels.h_los) {
    scene.validate();
    const CMatrix g = doppler_gram(scene.radar, scene.target.nu);
    g_dot_ = doppler_derivative_gram(scene.radar, scene.target.nu);
    const Eigen::Index p = g.rows();
    g_inv_diag_ = RVector::Zero(p);
    // G is Hermitian PD unless two Dopplers coincide.
    try {
      const RMatrix g_inv = invert_equilibrated(realify(g)).inverse;
      for (Eigen::Index k = 0; k < p; ++k) g_inv_diag_(k) = g_inv(k, k);
      gram_singular_ = false;
    } catch (const SingularFimError&) {
      gram_singular_ = true;
    }
    fixed_term_ = gram_singular_ || h_los_ == cplx{} ? kBarrierValue
                                                      : sigma2_ * g_inv_diag_(0) / std::norm(h_los_);

    CVector h_ref(p);
    h_ref(0) = h_los_;
    scale_.assign(coupling_.size(), 1.0);
    std::vector<double> reach(coupling_.size());
    for (std::size_t k = 0; k < coupling_.size(); ++k) {
      const CMatrix& sk = coupling_[k].s;
      // S = u u^T, so max |v^T S v| = (sum |u_m|)^2 = sum_mn |S_mn|
      reach[k] = sk.cwiseAbs().sum();
      h_ref(static_cast<Eigen::Index>(k) + 1) = reach[k];
    }
    const ObjectiveValue ref = evaluate_surrogate(h_ref, nullptr);
    if (!ref.singular && ref.value > 0.0 && std::isfinite(ref.value))
      for (std::size_t k = 0; k < coupling_.size(); ++k)
        if (reach[k] > 0.0) scale_[k] = ref.value / (reach[k] * reach[k]);
  }

  std::size_t irs_count() const noexcept { return coupling_.size(); }
  double sigma2() const noexcept { return sigma2_; }
  const std::vector<CouplingMatrix>& coupling() const noexcept { return coupling_; }
  cplx h_los() const noexcept { return h_los_; }

  /// sigma^2 [G^-1]_00 / |h_los|^2, identical for every phase design.
  double fixed_term() const noexcept { return fixed_term_; }

  /// f(h) - fixed_term(). `h` holds all K+1 channels.
  ObjectiveValue surrogate_part(const CVector& h) const {
    return evaluate_surrogate(h, nullptr);
  }

  /// Design part of f and its gradient with respect to
  /// [Re h_1, Im h_1, ..., Re h_K, Im h_K].
  ObjectiveValue surrogate_part(const CVector& h, RVector& grad) const { return evaluate_surrogate(h, &grad); }

  /// Penalty weight of IRS k for schedule value eta.
  double weight(std::size_t k, double eta) const { return eta * scale_[k]; }

  /// sum_k w_k |h_k - v_k^T S_k v_k|^2, the penalty term inside g.
  double penalty(const CVector& h, const PhaseSet& phases, const RVector& eta) const {
    double total = 0.0;
    for (std::size_t k = 0; k < coupling_.size(); ++k)
      total += weight(k, eta(static_cast<Eigen::Index>(k))) *
               panel_mismatch_norm(h(static_cast<Eigen::Index>(k) + 1), phases[k], k);
    return total;
  }

  /// w_k |h_k - c_k(phi)|^2 and its gradient with respect to the phases of IRS k.
  double panel_penalty(cplx h_k, const std::vector<double>& phases, std::size_t k, double eta,
                       RVector* grad) const {
    const CMatrix& s = coupling_[k].s;
    CVector v(s.rows());
    for (Eigen::Index m = 0; m < v.size(); ++m) v(m) = std::polar(1.0, phases[static_cast<std::size_t>(m)]);
    const CVector sv = s * v;
    const cplx c = v.transpose() * sv;
    const cplx d = h_k - c;
    const double w = weight(k, eta);
    if (grad) {
      grad->resize(v.size());
      // dc/dphi_m = 2 j v_m (S v)_m for symmetric S
      for (Eigen::Index m = 0; m < v.size(); ++m)
        (*grad)(m) = -2.0 * w * std::real(std::conj(d) * (2.0 * kJ * v(m) * sv(m)));
    }
    return w * std::norm(d);
  }

  cplx implied_channel(const std::vector<double>& phases, std::size_t k) const {
    const CMatrix& s = coupling_[k].s;
    CVector v(s.rows());
    for (Eigen::Index m = 0; m < v.size(); ++m) v(m) = std::polar(1.0, phases[static_cast<std::size_t>(m)]);
    return v.transpose() * (s * v);
  }

  CVector implied_channels(const PhaseSet& phases) const {
    CVector h(static_cast<Eigen::Index>(coupling_.size()) + 1);
    h(0) = h_los_;
    for (std::size_t k = 0; k < coupling_.size(); ++k) h(static_cast<Eigen::Index>(k) + 1) = implied_channel(phases[k], k);
    return h;
  }

  /// Design part of g = f + penalty.
  ObjectiveValue penalized_part(const CVector& h, const PhaseSet& phases, const RVector& eta) const {
    ObjectiveValue f = surrogate_part(h);
    f.value += penalty(h, phases, eta);
    return f;
  }

 private:
  double panel_mismatch_norm(cplx h_k, const std::vector<double>& phases, std::size_t k) const {
    return std::norm(h_k - implied_channel(phases, k));
  }

  ObjectiveValue evaluate_surrogate(const CVector& h, RVector* grad) const {
    const Eigen::Index p = alpha_.size();
    require(h.size() == p, "DesignObjective: h must have K+1 entries");
    if (grad) grad->setZero(2 * (p - 1));
    if (gram_singular_) return {kBarrierValue, true};
    for (Eigen::Index k = 1; k < p; ++k)
      if (!(std::norm(h(k)) > 0.0) || !std::isfinite(std::norm(h(k)))) return {kBarrierValue, true};

    double value = 0.0;
    for (Eigen::Index k = 1; k < p; ++k) value += sigma2_ * g_inv_diag_(k) / std::norm(h(k));

    const CVector beta = alpha_.cwiseProduct(h);
    RMatrix f_nn = (2.0 / sigma2_) * (beta.conjugate().asDiagonal() * g_dot_ * beta.asDiagonal()).real();
    f_nn = 0.5 * (f_nn + f_nn.transpose());
    RMatrix f_nn_inv;
    try {
      f_nn_inv = invert_equilibrated(f_nn).inverse;
    } catch (const SingularFimError&) {
      return {kBarrierValue, true};
    }
    value += f_nn_inv.trace();

    if (grad) {
      const RMatrix w = f_nn_inv * f_nn_inv;
      for (Eigen::Index k = 1; k < p; ++k) {
        const double hk4 = std::norm(h(k)) * std::norm(h(k));
        const double a = -2.0 * sigma2_ * g_inv_diag_(k) / hk4;
        cplx s{};
        for (Eigen::Index n = 0; n < p; ++n) s += w(k, n) * g_dot_(k, n) * beta(n);
        const cplx q = std::conj(alpha_(k)) * s;
        (*grad)(2 * (k - 1)) = a * h(k).real() - (4.0 / sigma2_) * q.real();
        (*grad)(2 * (k - 1) + 1) = a * h(k).imag() - (4.0 / sigma2_) * q.imag();
      }
    }
    return {value, false};
  }

  double sigma2_;
  CVector alpha_;
  std::vector<CouplingMatrix> coupling_;
  cplx h_los_;
  CMatrix g_dot_;
  RVector g_inv_diag_;
  bool gram_singular_ = false;
  double fixed_term_ = 0.0;
  std::vector<double> scale_;
};

// ---------------------------------------------------------------------------
// Gradient descent with Armijo backtracking.

struct DescentResult {
  RVector x;
  double value = 0.0;
  std::size_t iterations = 0;
};

struct DescentOptions {
  std::size_t max_iters = 200;
  double grad_tol = 1e-10;
  double armijo_slope = 1e-4;
  double shrink = 0.5;
  std::size_t max_backtracks = 60;
};

/// Minimizes fn(x, grad) -> value from x0. Every accepted step satisfies the
/// Armijo condition and never increases the value, so the returned value is
/// at most fn(x0). The first trial step of each iteration is the
/// Barzilai-Borwein step (falling back to doubling the previous step).
template <class Fn>
DescentResult gradient_descent(Fn&& fn, RVector x, const DescentOptions& opt) {
  RVector grad(x.size());
  double value = fn(x, grad);
  if (!std::isfinite(value)) throw InvalidStateError("gradient_descent: objective is not finite at the start");

  DescentResult out{x, value, 0};
  double step = 0.0;
  RVector prev_x;
  RVector prev_grad;
  RVector trial_grad(x.size());

  for (std::size_t it = 0; it < opt.max_iters; ++it) {
    const double gnorm = grad.norm();
    if (!(gnorm > opt.grad_tol) || !std::isfinite(gnorm)) break;

    if (it > 0) {
      const RVector s = x - prev_x;
      const RVector y = grad - prev_grad;
      const double sy = s.dot(y);
      step = sy > 0.0 ? s.squaredNorm() / sy : 2.0 * step;
    } else {
      step = 1e-2 * std::max(1.0, x.norm()) / gnorm;
    }

    const double slope = -grad.squaredNorm();
    bool accepted = false;
    double trial_value = value;
    RVector trial;
    for (std::size_t bt = 0; bt < opt.max_backtracks; ++bt) {
      trial = x - step * grad;
      trial_value = fn(trial, trial_grad);
      if (std::isfinite(trial_value) && trial_value <= value + opt.armijo_slope * step * slope &&
          trial_value <= value) {
        accepted = true;
        break;
      }
      step *= opt.shrink;
    }
    if (!accepted) break;

    prev_x = x;
    prev_grad = grad;
    const bool stalled = trial_value == value;
    x = trial;
    grad = trial_grad;
    value = trial_value;
    out.iterations = it + 1;
    if (stalled) break;
  }
  out.x = std::move(x);
  out.value = value;
  return out;
}

// ---------------------------------------------------------------------------
// Objective wrappers.

/// f(h) = Tr(F_aa^-1) + Tr(F_nn^-1) from the channel-parameterized blocks;
/// barrier value and flag when a block is singular.
inline ObjectiveValue surrogate_objective(const CVector& h, const Scene& scene) {
  const DesignObjective obj(scene);
  ObjectiveValue part = obj.surrogate_part(h);
  if (part.singular || obj.fixed_term() >= kBarrierValue) return {kBarrierValue, true};
  return {obj.fixed_term() + part.value, false};
}

/// g = f(h) + sum_k eta_k |h_k - v_k^T S_k v_k|^2
inline ObjectiveValue penalized_objective(const CVector& h, const PhaseSet& phases, const RVector& eta,
                                          const Scene& scene) {
  const DesignObjective obj(scene);
  require(phases.size() == obj.irs_count() && eta.size() == static_cast<Eigen::Index>(obj.irs_count()),
          "penalized_objective: one phase vector and one multiplier per IRS are required");
  ObjectiveValue part = obj.penalized_part(h, phases, eta);
  if (part.singular || obj.fixed_term() >= kBarrierValue) return {kBarrierValue, true};
  return {obj.fixed_term() + part.value, false};
}

/// Analytic gradients of g: with respect to [Re h_k, Im h_k] (k = 1..K) and
/// with respect to every phase.
struct PenalizedGradient {
  RVector h;
  PhaseSet phases;
};

inline PenalizedGradient penalized_gradient(const CVector& h, const PhaseSet& phases, const RVector& eta,
                                            const Scene& scene) {
  const DesignObjective obj(scene);
  PenalizedGradient out;
  obj.surrogate_part(h, out.h);
  out.phases.resize(obj.irs_count());
  for (std::size_t k = 0; k < obj.irs_count(); ++k) {
    const Eigen::Index ki = static_cast<Eigen::Index>(k);
    const cplx d = h(ki + 1) - obj.implied_channel(phases[k], k);
    const double w = obj.weight(k, eta(ki));
    out.h(2 * ki) += 2.0 * w * d.real();
    out.h(2 * ki + 1) += 2.0 * w * d.imag();
    RVector gphi;
    obj.panel_penalty(h(ki + 1), phases[k], k, eta(ki), &gphi);
    out.phases[k].assign(gphi.data(), gphi.data() + gphi.size());
  }
  return out;
}

namespace detail {

inline RVector pack_nlos(const CVector& h) {
  RVector x(2 * (h.size() - 1));
  for (Eigen::Index k = 1; k < h.size(); ++k) {
    x(2 * (k - 1)) = h(k).real();
    x(2 * (k - 1) + 1) = h(k).imag();
  }
  return x;
}

inline void unpack_nlos(const RVector& x, CVector& h) {
  for (Eigen::Index k = 1; k < h.size(); ++k) h(k) = {x(2 * (k - 1)), x(2 * (k - 1) + 1)};
}

inline DescentOptions descent_options(const OptimizerConfig& cfg) {
  DescentOptions o;
  o.max_iters = cfg.inner_max_iters;
  o.grad_tol = cfg.inner_grad_tol;
  return o;
}

inline double max_residual(const DesignObjective& obj, const OptimizerState& st) {
  double r = 0.0;
  for (std::size_t k = 0; k < obj.irs_count(); ++k)
    r = std::max(r, std::abs(st.h(static_cast<Eigen::Index>(k) + 1) - obj.implied_channel(st.phases[k], k)));
  return r;
}

}  // namespace detail

/// Step 1 of an AO sweep: argmin over the NLoS channels with phases fixed.
/// h_los is held fixed. Returns the updated channel vector.
inline CVector minimize_over_h(const OptimizerState& state, const DesignObjective& obj, const OptimizerConfig& cfg) {
  const ObjectiveValue start = obj.penalized_part(state.h, state.phases, state.eta);
  if (!std::isfinite(start.value) || start.singular)
    throw InvalidStateError("minimize_over_h: objective is not finite at the current state");

  // Targets v_k^T S_k v_k do not change during this step.
  CVector targets(static_cast<Eigen::Index>(obj.irs_count()));
  for (std::size_t k = 0; k < obj.irs_count(); ++k)
    targets(static_cast<Eigen::Index>(k)) = obj.implied_channel(state.phases[k], k);

  CVector h = state.h;
  auto fn = [&](const RVector& x, RVector& grad) {
    detail::unpack_nlos(x, h);
    const ObjectiveValue f = obj.surrogate_part(h, grad);
    if (f.singular) return kBarrierValue;
    double value = f.value;
    for (Eigen::Index k = 0; k < targets.size(); ++k) {
      const cplx d = h(k + 1) - targets(k);
      const double w = obj.weight(static_cast<std::size_t>(k), state.eta(k));
      value += w * std::norm(d);
      grad(2 * k) += 2.0 * w * d.real();
      grad(2 * k + 1) += 2.0 * w * d.imag();
    }
    return value;
  };
  const DescentResult res = gradient_descent(fn, detail::pack_nlos(state.h), detail::descent_options(cfg));
  CVector out = state.h;
  detail::unpack_nlos(res.x, out);
  return out;
}

/// Step 2 of an AO sweep: argmin over the phases with h fixed. Only the
/// penalty depends on the phases and it separates per IRS, so each panel is
/// descended on its own. Results are canonicalized into [0, 2pi).
inline PhaseSet minimize_over_phases(const OptimizerState& state, const DesignObjective& obj,
                                     const OptimizerConfig& cfg) {
  PhaseSet out = state.phases;
  for (std::size_t k = 0; k < obj.irs_count(); ++k) {
    const Eigen::Index ki = static_cast<Eigen::Index>(k);
    const double eta = state.eta(ki);
    if (eta == 0.0) continue;
    const cplx h_k = state.h(ki + 1);
    std::vector<double> work = out[k];
    auto fn = [&](const RVector& x, RVector& grad) {
      work.assign(x.data(), x.data() + x.size());
      return obj.panel_penalty(h_k, work, k, eta, &grad);
    };
    RVector x0 = Eigen::Map<const RVector>(out[k].data(), static_cast<Eigen::Index>(out[k].size()));
    const DescentResult res = gradient_descent(fn, x0, detail::descent_options(cfg));
    for (Eigen::Index m = 0; m < res.x.size(); ++m) out[k][static_cast<std::size_t>(m)] = canonical_phase(res.x(m));
  }
  return out;
}

/// Uniform [0, 2pi) phases for every element, deterministic in `seed`.
inline PhaseSet random_phases(const Scene& scene, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, kTwoPi);
  PhaseSet phases(scene.irs_count());
  for (std::size_t k = 0; k < scene.irs_count(); ++k) {
    phases[k].resize(static_cast<std::size_t>(scene.coupling[k].s.rows()));
    for (double& p : phases[k]) p = canonical_phase(uni(rng));
  }
  return phases;
}

/// Full CRLB (closed-form blocks, R = sigma^2 I) of the scene with its NLoS
/// channels replaced by those implied by `phases`.
inline CrlbResult evaluate_design(const PhaseSet& phases, const Scene& scene) {
  Scene s = scene;
  s.channels.h_nlos = consistent_channels(scene.coupling, phases);
  return crlb(assemble_full_fim(fim_blocks(s.radar, s.channels, s.target, NoiseModel::white(s.sigma2))));
}

inline double trace_crlb_of_design(const PhaseSet& phases, const Scene& scene) {
  return evaluate_design(phases, scene).trace_total;
}

namespace detail {

inline std::uint64_t restart_seed(std::uint64_t seed, std::size_t restart) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(restart), 0x1257u};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

inline DesignResult single_run(const DesignObjective& obj, const Scene& scene, const OptimizerConfig& cfg,
                               const PhaseSet& initial) {
  const std::size_t k_count = obj.irs_count();
  OptimizerState st;
  st.phases = initial;
  st.h = obj.implied_channels(st.phases);
  st.eta = RVector(static_cast<Eigen::Index>(k_count));
  for (std::size_t k = 0; k < k_count; ++k)
    st.eta(static_cast<Eigen::Index>(k)) = cfg.penalty_init_per_irs.empty() ? cfg.penalty_init : cfg.penalty_init_per_irs[k];

  DesignResult res;
  bool success = false;
  for (std::size_t round = 0; round < cfg.max_penalty_rounds; ++round) {
    if (round > 0) st.eta *= cfg.penalty_growth;
    st.pass_starts.push_back(st.objective_trace.size());
    double g = obj.penalized_part(st.h, st.phases, st.eta).value;
    st.objective_trace.push_back(g);
    for (std::size_t it = 0; it < cfg.max_outer_iters; ++it) {
      const double g_start = g;
      st.h = minimize_over_h(st, obj, cfg);
      st.objective_trace.push_back(obj.penalized_part(st.h, st.phases, st.eta).value);
      st.phases = minimize_over_phases(st, obj, cfg);
      g = obj.penalized_part(st.h, st.phases, st.eta).value;
      st.objective_trace.push_back(g);
      ++res.iterations_used;
      if (std::abs(g_start - g) <= cfg.outer_rel_tol * std::max(std::abs(g), std::numeric_limits<double>::min()))
        break;
    }
    st.residual = max_residual(obj, st);
    res.penalty_value = obj.penalty(st.h, st.phases, st.eta);
    if (st.residual <= cfg.residual_eps && res.penalty_value <= cfg.residual_eps) {
      success = true;
      break;
    }
  }

  res.converged = success;
  for (std::size_t k = 0; k < k_count; ++k) res.penalty_weights.push_back(obj.weight(k, st.eta(static_cast<Eigen::Index>(k))));
  res.constraint_residual = st.residual;
  res.optimal_phases = st.phases;
  const CVector h_design = obj.implied_channels(st.phases);
  const ObjectiveValue part = obj.surrogate_part(h_design);
  res.design_surrogate = part.value;
  res.achieved_surrogate = obj.fixed_term() + part.value;
  try {
    res.achieved_trace_crlb = trace_crlb_of_design(st.phases, scene);
  } catch (const SingularFimError&) {
    res.achieved_trace_crlb = std::numeric_limits<double>::infinity();
  }
  res.state = std::move(st);
  return res;
}

}  // namespace detail

/// Runs every restart and returns the best one. Restarts that reach the
/// residual target beat those that do not; among equals the lower design
/// surrogate wins, ties going to the earlier restart. Never throws on
/// non-convergence; check `converged`.
inline DesignResult run_design(const Scene& scene, const OptimizerConfig& cfg) {
  cfg.validate();
  scene.validate();
  require(scene.irs_count() >= 1, "alternating_optimize: at least one IRS is required");
  require(cfg.penalty_init_per_irs.empty() || cfg.penalty_init_per_irs.size() == scene.irs_count(),
          "alternating_optimize: one initial penalty per IRS is required");
  const DesignObjective obj(scene);

  std::vector<DesignResult> runs(cfg.restarts);
  parallel_for(
      cfg.restarts,
      [&](std::size_t r) { runs[r] = detail::single_run(obj, scene, cfg, random_phases(scene, detail::restart_seed(cfg.seed, r))); },
      cfg.threads);

  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    const bool better_status = runs[r].converged && !runs[best].converged;
    const bool same_status = runs[r].converged == runs[best].converged;
    if (better_status || (same_status && runs[r].design_surrogate < runs[best].design_surrogate)) best = r;
  }
  DesignResult out = std::move(runs[best]);
  out.restart_used = best;
  return out;
}

/// Penalized alternating optimization; throws NonConvergenceError carrying
/// the objective trace when no restart reaches the residual target.
inline DesignResult alternating_optimize(const Scene& scene, const OptimizerConfig& cfg) {
  DesignResult res = run_design(scene, cfg);
  if (!res.converged)
    throw NonConvergenceError("alternating_optimize: constraint residual " + std::to_string(res.constraint_residual) +
                                  " above tolerance after all penalty rounds",
                              res.state.objective_trace, res.constraint_residual);
  return res;
}

}  // namespace irs_crlb
