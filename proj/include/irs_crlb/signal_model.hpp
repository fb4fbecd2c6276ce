#pragma once

// Slow-time signal model: y = A alpha + w with A = x h^T .* P(nu).

#include "irs_crlb/geometry.hpp"
#include "irs_crlb/types.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>

namespace irs_crlb {

struct RadarParams {
  std::size_t pulse_count = 0;  // N
  double pri = 1e-3;            // seconds
  CVector waveform;             // slow-time code x, length N

  /// x = 1_N
  static RadarParams constant(std::size_t n, double pri = 1e-3) {
    RadarParams r{n, pri, CVector::Ones(static_cast<Eigen::Index>(n))};
    r.validate();
    return r;
  }

  void validate() const {
    require(pulse_count >= 2, "RadarParams: at least two pulses are needed to observe Doppler");
    require(std::isfinite(pri) && pri > 0.0, "RadarParams: PRI must be positive");
    require(waveform.size() == static_cast<Eigen::Index>(pulse_count),
            "RadarParams: waveform length must equal the pulse count");
    require(waveform.allFinite(), "RadarParams: waveform must be finite");
    require(waveform.squaredNorm() > 0.0, "RadarParams: waveform must not be all zero");
  }
};

/// Reflectivities and normalized Dopplers, index 0 = LoS.
struct TargetParams {
  CVector alpha;
  RVector nu;

  Eigen::Index path_count() const noexcept { return alpha.size(); }

  void validate() const {
    require(alpha.size() >= 1 && alpha.size() == nu.size(),
            "TargetParams: alpha and nu must both have K+1 entries");
    for (Eigen::Index k = 0; k < nu.size(); ++k)
      require(nu(k) >= -0.5 && nu(k) < 0.5, "TargetParams: normalized Doppler outside [-0.5, 0.5)");
  }
};

/// Noise covariance R: either sigma^2 I or an explicit Hermitian PD matrix.
class NoiseModel {
 public:
  static NoiseModel white(double sigma2) {
    require(std::isfinite(sigma2) && sigma2 >= 0.0, "NoiseModel: variance must be non-negative");
    NoiseModel n;
    n.sigma2_ = sigma2;
    return n;
  }

  static NoiseModel covariance(const CMatrix& r) {
    require(r.rows() == r.cols() && r.rows() > 0, "NoiseModel: covariance must be square");
    const double scale = std::max(r.cwiseAbs().maxCoeff(), 1e-300);
    require((r - r.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * scale,
            "NoiseModel: covariance must be Hermitian");
    const CMatrix herm = 0.5 * (r + r.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(herm, Eigen::EigenvaluesOnly);
    require(eig.eigenvalues().minCoeff() > 0.0, "NoiseModel: covariance must be positive definite");
    NoiseModel n;
    n.cov_ = herm;
    n.chol_ = Eigen::LLT<CMatrix>(herm);
    return n;
  }

  bool is_white() const noexcept { return !cov_.has_value(); }
  /// Only meaningful for white noise.
  double sigma2() const noexcept { return sigma2_; }

  bool positive_definite() const noexcept { return cov_.has_value() || sigma2_ > 0.0; }

  CMatrix matrix(Eigen::Index n) const {
    if (cov_) {
      require(cov_->rows() == n, "NoiseModel: covariance dimension mismatch");
      return *cov_;
    }
    return sigma2_ * CMatrix::Identity(n, n);
  }

  /// R^{-1} B
  CMatrix solve(const CMatrix& b) const {
    require(positive_definite(), "NoiseModel: covariance is singular");
    if (cov_) {
      require(cov_->rows() == b.rows(), "NoiseModel: covariance dimension mismatch");
      return chol_.solve(b);
    }
    return b / sigma2_;
  }

  /// w = L z with R = L L^H and z ~ CN(0, I).
  CVector color(const CVector& z) const {
    if (cov_) {
      require(cov_->rows() == z.size(), "NoiseModel: covariance dimension mismatch");
      return chol_.matrixL() * z;
    }
    return std::sqrt(sigma2_) * z;
  }

 private:
  NoiseModel() = default;
  double sigma2_ = 0.0;
  std::optional<CMatrix> cov_;
  Eigen::LLT<CMatrix> chol_;
};

/// p(nu)_i = exp(j i nu)
inline CVector doppler_steering(double nu, std::size_t n) {
  require(n >= 1, "doppler_steering: length must be >= 1");
  CVector p(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = std::polar(1.0, nu * static_cast<double>(i));
  return p;
}

/// dp/dnu, entries j i exp(j i nu)
inline CVector doppler_steering_derivative(double nu, std::size_t n) {
  require(n >= 1, "doppler_steering_derivative: length must be >= 1");
  CVector d(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    const double di = static_cast<double>(i);
    d(i) = kJ * di * std::polar(1.0, nu * di);
  }
  return d;
}

namespace detail {

inline void check_model_dims(const RadarParams& radar, const ChannelSet& channels, const RVector& nu) {
  require(radar.waveform.size() == static_cast<Eigen::Index>(radar.pulse_count) && radar.pulse_count >= 1,
          "sensing matrix: waveform length must equal the pulse count");
  require(nu.size() == channels.irs_count() + 1, "sensing matrix: nu must have K+1 entries");
}

}  // namespace detail

/// Column k = h_k (x .* p(nu_k)).
inline CMatrix sensing_matrix(const RadarParams& radar, const ChannelSet& channels, const RVector& nu) {
  detail::check_model_dims(radar, channels, nu);
  const CVector h = channels.stacked();
  CMatrix a(radar.waveform.size(), h.size());
  for (Eigen::Index k = 0; k < h.size(); ++k)
    a.col(k) = h(k) * radar.waveform.cwiseProduct(doppler_steering(nu(k), radar.pulse_count));
  return a;
}

/// Column k = h_k (x .* pdot(nu_k)); column k of A depends only on nu_k.
inline CMatrix sensing_matrix_derivative(const RadarParams& radar, const ChannelSet& channels,
                                         const RVector& nu) {
  detail::check_model_dims(radar, channels, nu);
  const CVector h = channels.stacked();
  CMatrix a(radar.waveform.size(), h.size());
  for (Eigen::Index k = 0; k < h.size(); ++k)
    a.col(k) = h(k) * radar.waveform.cwiseProduct(doppler_steering_derivative(nu(k), radar.pulse_count));
  return a;
}

/// Standard circular complex Gaussian vector (unit variance per entry).
inline CVector standard_complex_normal(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  CVector z(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    z(i) = {re, im};
  }
  return z;
}

/// y = A alpha + w, w ~ CN(0, R); deterministic in `seed`.
inline CVector synthesize_received(const CMatrix& a, const TargetParams& target, const NoiseModel& noise,
                                   std::uint64_t seed) {
  require(a.cols() == target.alpha.size(), "synthesize_received: alpha length must match A's columns");
  CVector y = a * target.alpha;
  if (noise.is_white() && noise.sigma2() == 0.0) return y;
  std::mt19937_64 rng(seed);
  return y + noise.color(standard_complex_normal(a.rows(), rng));
}

}  // namespace irs_crlb
