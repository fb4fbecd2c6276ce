#pragma once

// 2-D scene geometry, IRS array steering and the radar-IRS-target-IRS-radar
// channel coefficients.
//
// Angle convention: every IRS is a ULA lying along the x-axis. A bearing is
// measured from the array normal on the side of the array where the point
// lies, positive clockwise when looking out along that normal. For a point at
// offset (dx, dy) from the IRS this gives sin(theta) = sign(dy) * dx / r with
// sign(0) = +1, so theta is always in [-pi/2, pi/2].

#include "irs_crlb/types.hpp"

#include <cmath>

namespace irs_crlb {

struct Position2D {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Position2D&, const Position2D&) = default;
};

inline double distance(const Position2D& a, const Position2D& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

/// Wraps an angle into [0, 2pi).
inline double canonical_phase(double phi) {
  double r = std::fmod(phi, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

/// One reconfigurable surface: M unit-amplitude reflecting elements.
class IrsPanel {
 public:
  IrsPanel() = default;
  explicit IrsPanel(std::vector<double> phases, double spacing_ratio = 0.5)
      : phases_(std::move(phases)), spacing_ratio_(spacing_ratio) {
    require(!phases_.empty(), "IrsPanel: element count must be positive");
    require(std::isfinite(spacing_ratio_) && spacing_ratio_ > 0.0,
            "IrsPanel: spacing ratio must be positive");
    for (double& p : phases_) {
      require(std::isfinite(p), "IrsPanel: phases must be finite");
      p = canonical_phase(p);
    }
  }

  static IrsPanel zeros(std::size_t m, double spacing_ratio = 0.5) {
    return IrsPanel(std::vector<double>(m, 0.0), spacing_ratio);
  }

  std::size_t element_count() const noexcept { return phases_.size(); }
  double spacing_ratio() const noexcept { return spacing_ratio_; }
  const std::vector<double>& phases() const noexcept { return phases_; }

  /// Reflection vector v = diag(Phi), entries exp(j phi_m).
  CVector reflection() const {
    CVector v(static_cast<Eigen::Index>(phases_.size()));
    for (std::size_t m = 0; m < phases_.size(); ++m) v(static_cast<Eigen::Index>(m)) = std::polar(1.0, phases_[m]);
    return v;
  }

 private:
  std::vector<double> phases_;
  double spacing_ratio_ = 0.5;
};

/// LoS gain plus one NLoS gain per IRS.
struct ChannelSet {
  cplx h_los{1.0, 0.0};
  CVector h_nlos;

  Eigen::Index irs_count() const noexcept { return h_nlos.size(); }

  /// h = [h_los, h_nlos_1, ..., h_nlos_K]
  CVector stacked() const {
    CVector h(h_nlos.size() + 1);
    h(0) = h_los;
    h.tail(h_nlos.size()) = h_nlos;
    return h;
  }

  static ChannelSet from_stacked(const CVector& h) {
    require(h.size() >= 1, "ChannelSet: stacked vector must hold at least h_los");
    return ChannelSet{h(0), h.tail(h.size() - 1)};
  }
};

/// Symmetric rank-one matrix S = u u^T, u = b(theta_ir) .* b(theta_ti).
/// h_nlos = v^T S v for reflection vector v.
struct CouplingMatrix {
  CMatrix s;
};

inline CVector steering_vector(double theta, std::size_t m, double spacing_ratio = 0.5) {
  require(m >= 1, "steering_vector: element count must be >= 1");
  const double step = kTwoPi * spacing_ratio * std::sin(theta);
  CVector b(static_cast<Eigen::Index>(m));
  for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = std::polar(1.0, step * static_cast<double>(i));
  return b;
}

struct IrsAngles {
  double theta_ir = 0.0;  // bearing of the radar seen from the IRS
  double theta_ti = 0.0;  // bearing of the target seen from the IRS
};

/// Bearing of `point` from an x-axis array at `irs` (see file comment).
inline double bearing_from_irs(const Position2D& irs, const Position2D& point) {
  const double dx = point.x - irs.x;
  const double dy = point.y - irs.y;
  require(dx != 0.0 || dy != 0.0, "bearing_from_irs: point coincides with the IRS");
  return dy >= 0.0 ? std::atan2(dx, dy) : std::atan2(-dx, -dy);
}

inline IrsAngles angles_from_positions(const Position2D& radar, const Position2D& irs,
                                       const Position2D& target) {
  require(std::isfinite(radar.x) && std::isfinite(radar.y) && std::isfinite(irs.x) &&
              std::isfinite(irs.y) && std::isfinite(target.x) && std::isfinite(target.y),
          "angles_from_positions: positions must be finite");
  require(!(irs == radar), "angles_from_positions: IRS coincides with the radar");
  require(!(irs == target), "angles_from_positions: IRS coincides with the target");
  return {bearing_from_irs(irs, radar), bearing_from_irs(irs, target)};
}

/// Linear gain 10^(l0_db/10) * (distance/d0)^(-beta0).
inline double path_loss(double distance_m, double l0_db, double d0, double beta0) {
  require(std::isfinite(distance_m) && distance_m > 0.0, "path_loss: distance must be positive");
  require(std::isfinite(d0) && d0 > 0.0, "path_loss: reference distance must be positive");
  return std::pow(10.0, l0_db / 10.0) * std::pow(distance_m / d0, -beta0);
}

inline CMatrix phase_matrix(const IrsPanel& panel) {
  return panel.reflection().asDiagonal();
}

inline CouplingMatrix coupling_matrix(double theta_ir, double theta_ti, std::size_t m,
                                      double spacing_ratio = 0.5) {
  const CVector u = steering_vector(theta_ir, m, spacing_ratio).cwiseProduct(
      steering_vector(theta_ti, m, spacing_ratio));
  return {u * u.transpose()};
}

/// b^T(theta_ir) Phi b(theta_ti) * b^T(theta_ti) Phi b(theta_ir)
inline cplx nlos_channel_direct(const IrsPanel& panel, double theta_ir, double theta_ti) {
  const std::size_t m = panel.element_count();
  const CVector b_ir = steering_vector(theta_ir, m, panel.spacing_ratio());
  const CVector b_ti = steering_vector(theta_ti, m, panel.spacing_ratio());
  const CVector v = panel.reflection();
  const cplx forward = (b_ir.cwiseProduct(v)).transpose() * b_ti;
  const cplx backward = (b_ti.cwiseProduct(v)).transpose() * b_ir;
  return forward * backward;
}

inline constexpr double kUnimodularTol = 1e-9;

inline bool is_unimodular(const CVector& v, double tol = kUnimodularTol) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (!(std::abs(std::abs(v(i)) - 1.0) <= tol)) return false;
  return true;
}

/// v^T S v (plain transpose, S symmetric).
inline cplx nlos_channel_quadratic(const CVector& v, const CouplingMatrix& s) {
  require(s.s.rows() == v.size() && s.s.cols() == v.size(),
          "nlos_channel_quadratic: dimension mismatch");
  require(is_unimodular(v), "nlos_channel_quadratic: reflection vector must be unimodular");
  return v.transpose() * (s.s * v);
}

/// |alpha_0 h_los|^2 / sum_k |alpha_k h_k|^2
inline double lsr(const CVector& alpha, const ChannelSet& channels) {
  require(alpha.size() == channels.irs_count() + 1, "lsr: alpha must have K+1 entries");
  double nlos = 0.0;
  for (Eigen::Index k = 1; k < alpha.size(); ++k) nlos += std::norm(alpha(k) * channels.h_nlos(k - 1));
  if (!(nlos > 0.0)) throw DegenerateChannelError("lsr: NLoS power is zero");
  return std::norm(alpha(0) * channels.h_los) / nlos;
}

/// Rescales raw reflectivities so that |alpha_0 h_los|^2 = gamma and the NLoS
/// powers sum to one. Phases of the raw draws are kept; the LoS and NLoS
/// groups are scaled independently.
inline CVector scale_reflectivities(const CVector& raw_alpha, const ChannelSet& channels, double gamma) {
  const Eigen::Index k_count = channels.irs_count();
  require(k_count >= 1, "scale_reflectivities: at least one IRS is required");
  require(raw_alpha.size() == k_count + 1, "scale_reflectivities: alpha must have K+1 entries");
  require(std::isfinite(gamma) && gamma > 0.0, "scale_reflectivities: gamma must be positive");

  const double los_power = std::norm(raw_alpha(0) * channels.h_los);
  if (!(los_power > 0.0)) throw DegenerateChannelError("scale_reflectivities: LoS term is zero");

  double nlos_power = 0.0;
  for (Eigen::Index k = 1; k <= k_count; ++k) {
    const cplx h = channels.h_nlos(k - 1);
    if (raw_alpha(k) != cplx{} && h == cplx{})
      throw DegenerateChannelError("scale_reflectivities: NLoS channel " + std::to_string(k) + " is zero");
    nlos_power += std::norm(raw_alpha(k) * h);
  }
  if (!(nlos_power > 0.0)) throw DegenerateChannelError("scale_reflectivities: NLoS power is zero");

  CVector alpha = raw_alpha;
  alpha(0) *= std::sqrt(gamma / los_power);
  alpha.tail(k_count) *= 1.0 / std::sqrt(nlos_power);
  return alpha;
}

}  // namespace irs_crlb
