#pragma once

// Fisher information for zeta = [alpha_R; alpha_I; nu], each block K+1 long.
//
// Three independent routes are provided:
//   * the closed-form blocks built from the sensing matrix and its Doppler
//     derivative (general Hermitian R),
//   * the channel-parameterized blocks built from the Doppler Gram matrices
//     G and Gdot (white noise only), used by the phase designer,
//   * a finite-difference Slepian-Bangs oracle on an arbitrary mean function.

#include "irs_crlb/signal_model.hpp"
#include "irs_crlb/types.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <string>

namespace irs_crlb {

struct FimBlocks {
  RMatrix f_aa;  // 2(K+1) x 2(K+1)
  RMatrix f_an;  // 2(K+1) x (K+1); empty when produced by fim_from_h
  RMatrix f_nn;  // (K+1) x (K+1)

  Eigen::Index path_count() const noexcept { return f_nn.rows(); }
};

struct CrlbResult {
  RMatrix crlb;
  double trace_total = 0.0;
  double trace_alpha_block = 0.0;
  double trace_nu_block = 0.0;
  double surrogate = 0.0;  // Tr(f_aa^-1) + Tr(f_nn^-1)
  double condition = 0.0;  // of the equilibrated FIM
};

inline constexpr double kMaxFimCondition = 1e12;

/// [[Re M, -Im M], [Im M, Re M]]; the real representation of a complex
/// matrix acting on [Re z; Im z].
inline RMatrix realify(const CMatrix& m) {
  const Eigen::Index n = m.rows();
  const Eigen::Index c = m.cols();
  RMatrix out(2 * n, 2 * c);
  out.topLeftCorner(n, c) = m.real();
  out.topRightCorner(n, c) = -m.imag();
  out.bottomLeftCorner(n, c) = m.imag();
  out.bottomRightCorner(n, c) = m.real();
  return out;
}

struct SymmetricInverse {
  RMatrix inverse;
  double condition = std::numeric_limits<double>::infinity();
};

/// Inverse of a symmetric positive definite matrix through Jacobi
/// equilibration D^-1/2 F D^-1/2. The condition number reported is that of
/// the equilibrated matrix, which does not depend on the units of each
/// parameter. Throws SingularFimError when it exceeds `max_condition`.
inline SymmetricInverse invert_equilibrated(const RMatrix& f, double max_condition = kMaxFimCondition) {
  require(f.rows() == f.cols() && f.rows() > 0, "invert_equilibrated: matrix must be square");
  if (!f.allFinite()) throw SingularFimError("FIM has non-finite entries", std::numeric_limits<double>::infinity());
  const Eigen::Index n = f.rows();
  RVector scale(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(f(i, i) > 0.0))
      throw SingularFimError("FIM has a non-positive diagonal entry at index " + std::to_string(i),
                             std::numeric_limits<double>::infinity());
    scale(i) = 1.0 / std::sqrt(f(i, i));
  }
  RMatrix eq = scale.asDiagonal() * f * scale.asDiagonal();
  eq = 0.5 * (eq + eq.transpose());
  Eigen::SelfAdjointEigenSolver<RMatrix> eig(eq);
  const double lmin = eig.eigenvalues().minCoeff();
  const double lmax = eig.eigenvalues().maxCoeff();
  const double cond = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();
  if (!(cond <= max_condition))
    throw SingularFimError("FIM is numerically singular (equilibrated condition " + std::to_string(cond) + ")",
                           cond);
  const RMatrix& v = eig.eigenvectors();
  RMatrix inv_eq = v * eig.eigenvalues().cwiseInverse().asDiagonal() * v.transpose();
  RMatrix inv = scale.asDiagonal() * inv_eq * scale.asDiagonal();
  inv = 0.5 * (inv + inv.transpose());
  return {std::move(inv), cond};
}

// ---------------------------------------------------------------------------
// Closed-form blocks from the sensing matrix.

/// 2 realify(A^H R^-1 A)
inline RMatrix fim_alpha_alpha(const CMatrix& a, const NoiseModel& r) {
  require(r.positive_definite(), "fim_alpha_alpha: noise covariance is singular");
  CMatrix m = a.adjoint() * r.solve(a);
  m = 0.5 * (m + m.adjoint()).eval();
  return 2.0 * realify(m);
}

/// Rows alpha_R then alpha_I, column n: 2Re / 2Im of (A^H R^-1 Adot)_{mn} alpha_n.
inline RMatrix fim_alpha_nu(const CMatrix& a, const CMatrix& a_dot, const NoiseModel& r, const CVector& alpha) {
  require(r.positive_definite(), "fim_alpha_nu: noise covariance is singular");
  require(a.cols() == a_dot.cols() && a.rows() == a_dot.rows() && alpha.size() == a.cols(),
          "fim_alpha_nu: dimension mismatch");
  const Eigen::Index p = a.cols();
  const CMatrix cross = (a.adjoint() * r.solve(a_dot)) * alpha.asDiagonal();
  RMatrix out(2 * p, p);
  out.topRows(p) = 2.0 * cross.real();
  out.bottomRows(p) = 2.0 * cross.imag();
  return out;
}

/// Entry (m, n) = 2Re{conj(alpha_m) (Adot^H R^-1 Adot)_{mn} alpha_n}.
inline RMatrix fim_nu_nu(const CMatrix& a_dot, const NoiseModel& r, const CVector& alpha) {
  require(r.positive_definite(), "fim_nu_nu: noise covariance is singular");
  require(alpha.size() == a_dot.cols(), "fim_nu_nu: dimension mismatch");
  const CMatrix q = alpha.conjugate().asDiagonal() * (a_dot.adjoint() * r.solve(a_dot)) * alpha.asDiagonal();
  RMatrix out = 2.0 * q.real();
  return 0.5 * (out + out.transpose());
}

/// All three blocks for y = A(nu) alpha + w.
inline FimBlocks fim_blocks(const RadarParams& radar, const ChannelSet& channels, const TargetParams& target,
                            const NoiseModel& r) {
  require(target.alpha.size() == channels.irs_count() + 1, "fim_blocks: alpha must have K+1 entries");
  const CMatrix a = sensing_matrix(radar, channels, target.nu);
  const CMatrix a_dot = sensing_matrix_derivative(radar, channels, target.nu);
  return {fim_alpha_alpha(a, r), fim_alpha_nu(a, a_dot, r, target.alpha), fim_nu_nu(a_dot, r, target.alpha)};
}

// ---------------------------------------------------------------------------
// Channel-parameterized blocks (R = sigma^2 I).

/// G = P^H Diag(|x|^2) P
inline CMatrix doppler_gram(const RadarParams& radar, const RVector& nu) {
  const RVector w = radar.waveform.cwiseAbs2();
  CMatrix p(radar.waveform.size(), nu.size());
  for (Eigen::Index k = 0; k < nu.size(); ++k) p.col(k) = doppler_steering(nu(k), radar.pulse_count);
  return p.adjoint() * w.asDiagonal() * p;
}

/// Gdot = Pdot^H Diag(|x|^2) Pdot
inline CMatrix doppler_derivative_gram(const RadarParams& radar, const RVector& nu) {
  const RVector w = radar.waveform.cwiseAbs2();
  CMatrix p(radar.waveform.size(), nu.size());
  for (Eigen::Index k = 0; k < nu.size(); ++k) p.col(k) = doppler_steering_derivative(nu(k), radar.pulse_count);
  return p.adjoint() * w.asDiagonal() * p;
}

/// f_aa = (2/s2) realify((h h^H)^T .* G), f_nn = (2/s2) Re{(beta beta^H)^T .* Gdot}
/// with beta = alpha .* h. f_an is left empty.
inline FimBlocks fim_from_h(const ChannelSet& h, const RadarParams& radar, const CVector& alpha, const RVector& nu,
                            double sigma2) {
  require(std::isfinite(sigma2) && sigma2 > 0.0, "fim_from_h: noise variance must be positive");
  const CVector hv = h.stacked();
  require(alpha.size() == hv.size() && nu.size() == hv.size(), "fim_from_h: alpha and nu must have K+1 entries");
  const CMatrix hh_t = (hv * hv.adjoint()).transpose();
  const CMatrix g = doppler_gram(radar, nu);
  const CMatrix g_dot = doppler_derivative_gram(radar, nu);

  FimBlocks out;
  CMatrix m = hh_t.cwiseProduct(g);
  m = 0.5 * (m + m.adjoint()).eval();
  out.f_aa = (2.0 / sigma2) * realify(m);
  const CVector beta = alpha.cwiseProduct(hv);
  const CMatrix weighted = (beta * beta.adjoint()).transpose().cwiseProduct(g_dot);
  out.f_nn = (2.0 / sigma2) * weighted.real();
  out.f_nn = 0.5 * (out.f_nn + out.f_nn.transpose());
  return out;
}

// ---------------------------------------------------------------------------

inline RMatrix assemble_full_fim(const FimBlocks& b) {
  const Eigen::Index p = b.f_nn.rows();
  require(b.f_aa.rows() == 2 * p && b.f_aa.cols() == 2 * p && b.f_an.rows() == 2 * p && b.f_an.cols() == p &&
              b.f_nn.cols() == p,
          "assemble_full_fim: inconsistent block dimensions");
  RMatrix f(3 * p, 3 * p);
  f.topLeftCorner(2 * p, 2 * p) = b.f_aa;
  f.topRightCorner(2 * p, p) = b.f_an;
  f.bottomLeftCorner(p, 2 * p) = b.f_an.transpose();
  f.bottomRightCorner(p, p) = b.f_nn;
  return f;
}

inline FimBlocks extract_blocks(const RMatrix& full) {
  require(full.rows() == full.cols() && full.rows() % 3 == 0 && full.rows() > 0,
          "extract_blocks: FIM must be 3(K+1) square");
  const Eigen::Index p = full.rows() / 3;
  return {full.topLeftCorner(2 * p, 2 * p), full.topRightCorner(2 * p, p), full.bottomRightCorner(p, p)};
}

inline CrlbResult crlb(const RMatrix& full_fim) {
  const FimBlocks b = extract_blocks(full_fim);
  const Eigen::Index p = b.path_count();
  SymmetricInverse inv = invert_equilibrated(full_fim);
  CrlbResult out;
  out.condition = inv.condition;
  out.crlb = std::move(inv.inverse);
  out.trace_alpha_block = out.crlb.topLeftCorner(2 * p, 2 * p).trace();
  out.trace_nu_block = out.crlb.bottomRightCorner(p, p).trace();
  out.trace_total = out.trace_alpha_block + out.trace_nu_block;
  out.surrogate = invert_equilibrated(b.f_aa).inverse.trace() + invert_equilibrated(b.f_nn).inverse.trace();
  return out;
}

/// Tr(f_aa^-1) + Tr(f_nn^-1) for a pair of diagonal blocks.
inline double block_surrogate(const FimBlocks& b) {
  return invert_equilibrated(b.f_aa).inverse.trace() + invert_equilibrated(b.f_nn).inverse.trace();
}

struct NoIrsFim {
  RMatrix f_aa0;  // 2x2
  double f_nn0 = 0.0;
};

/// LoS-only closed forms: 2|h|^2 ||x.*p||^2/s2 I_2 and 2|alpha h|^2 ||x.*pdot||^2/s2.
inline NoIrsFim no_irs_fim(const RadarParams& radar, cplx h_los, cplx alpha0, double nu0, double sigma2) {
  require(std::isfinite(sigma2) && sigma2 > 0.0, "no_irs_fim: noise variance must be positive");
  const double xp = radar.waveform.cwiseProduct(doppler_steering(nu0, radar.pulse_count)).squaredNorm();
  const double xpd = radar.waveform.cwiseProduct(doppler_steering_derivative(nu0, radar.pulse_count)).squaredNorm();
  NoIrsFim out;
  out.f_aa0 = (2.0 * std::norm(h_los) * xp / sigma2) * RMatrix::Identity(2, 2);
  out.f_nn0 = 2.0 * std::norm(alpha0 * h_los) * xpd / sigma2;
  return out;
}

// ---------------------------------------------------------------------------
// Slepian-Bangs oracle.

using MeanFunction = std::function<CVector(const RVector&)>;

inline constexpr double kOracleStep = 1e-6;

/// [F]_{mn} = 2Re{dmu_m^H R^-1 dmu_n} with every dmu by central differences.
/// The step for parameter m is step * max(1, |zeta_m|).
inline RMatrix fim_oracle(const MeanFunction& mean_fn, const NoiseModel& r, const RVector& zeta0,
                          double step = kOracleStep) {
  require(step > 0.0, "fim_oracle: step must be positive");
  require(r.positive_definite(), "fim_oracle: noise covariance is singular");
  const Eigen::Index p = zeta0.size();
  const Eigen::Index n = mean_fn(zeta0).size();
  CMatrix jac(n, p);
  for (Eigen::Index m = 0; m < p; ++m) {
    const double h = step * std::max(1.0, std::abs(zeta0(m)));
    RVector plus = zeta0;
    RVector minus = zeta0;
    plus(m) += h;
    minus(m) -= h;
    jac.col(m) = (mean_fn(plus) - mean_fn(minus)) / (plus(m) - minus(m));
  }
  RMatrix f = 2.0 * (jac.adjoint() * r.solve(jac)).real();
  return 0.5 * (f + f.transpose());
}

/// zeta = [alpha_R; alpha_I; nu]
inline RVector pack_parameters(const TargetParams& target) {
  const Eigen::Index p = target.alpha.size();
  RVector z(3 * p);
  z.segment(0, p) = target.alpha.real();
  z.segment(p, p) = target.alpha.imag();
  z.segment(2 * p, p) = target.nu;
  return z;
}

inline TargetParams unpack_parameters(const RVector& zeta) {
  require(zeta.size() % 3 == 0 && zeta.size() > 0, "unpack_parameters: length must be 3(K+1)");
  const Eigen::Index p = zeta.size() / 3;
  TargetParams t;
  t.alpha = CVector(p);
  for (Eigen::Index k = 0; k < p; ++k) t.alpha(k) = {zeta(k), zeta(p + k)};
  t.nu = zeta.segment(2 * p, p);
  return t;
}

/// mu(zeta) = A(nu) alpha for a fixed radar and channel set.
inline MeanFunction model_mean(const RadarParams& radar, const ChannelSet& channels) {
  return [radar, channels](const RVector& zeta) {
    const TargetParams t = unpack_parameters(zeta);
    return CVector(sensing_matrix(radar, channels, t.nu) * t.alpha);
  };
}

}  // namespace irs_crlb
