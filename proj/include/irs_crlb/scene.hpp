#pragma once

#include "irs_crlb/geometry.hpp"
#include "irs_crlb/signal_model.hpp"

#include <vector>

namespace irs_crlb {

/// Everything needed to evaluate the Fisher information of one experiment:
/// radar code, channels for the current phases, target parameters, the
/// per-IRS coupling matrices and the white-noise variance.
struct Scene {
  RadarParams radar;
  ChannelSet channels;
  TargetParams target;
  std::vector<CouplingMatrix> coupling;  // one per IRS
  std::vector<IrsPanel> panels;          // phases that produced `channels`
  double sigma2 = 1.0;

  std::size_t irs_count() const noexcept { return coupling.size(); }

  void validate() const {
    radar.validate();
    require(channels.irs_count() == static_cast<Eigen::Index>(coupling.size()),
            "Scene: one coupling matrix per NLoS channel is required");
    require(panels.empty() || panels.size() == coupling.size(), "Scene: one panel per IRS is required");
    require(target.alpha.size() == channels.irs_count() + 1 && target.nu.size() == target.alpha.size(),
            "Scene: target parameters must have K+1 entries");
    for (std::size_t k = 0; k < coupling.size(); ++k)
      require(coupling[k].s.rows() == coupling[k].s.cols() && coupling[k].s.rows() >= 1,
              "Scene: coupling matrices must be square");
    require(std::isfinite(sigma2) && sigma2 > 0.0, "Scene: noise variance must be positive");
  }

  /// Same scene with every covariance-dependent quantity evaluated at a
  /// different noise level.
  Scene with_sigma2(double s2) const {
    Scene s = *this;
    s.sigma2 = s2;
    return s;
  }
};

/// NLoS channels implied by a set of phases: h_k = v_k^T S_k v_k.
inline CVector consistent_channels(const std::vector<CouplingMatrix>& coupling,
                                   const std::vector<std::vector<double>>& phases) {
  require(coupling.size() == phases.size(), "consistent_channels: one phase vector per IRS is required");
  CVector h(static_cast<Eigen::Index>(coupling.size()));
  for (std::size_t k = 0; k < coupling.size(); ++k) {
    require(static_cast<Eigen::Index>(phases[k].size()) == coupling[k].s.rows(),
            "consistent_channels: phase count must match the IRS element count");
    CVector v(coupling[k].s.rows());
    for (Eigen::Index m = 0; m < v.size(); ++m) v(m) = std::polar(1.0, phases[k][static_cast<std::size_t>(m)]);
    h(static_cast<Eigen::Index>(k)) = nlos_channel_quadratic(v, coupling[k]);
  }
  return h;
}

}  // namespace irs_crlb
