#include "irs_crlb/fisher.hpp"
#include "irs_crlb/verification.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace irs_crlb;
using irs_crlb::verify::normalized_entry_error;
using irs_crlb::verify::random_scene;
using irs_crlb::verify::relative_frobenius;

namespace {

RMatrix full_fim(const Scene& s, const NoiseModel& r) {
  return assemble_full_fim(fim_blocks(s.radar, s.channels, s.target, r));
}

RMatrix full_fim(const Scene& s) { return full_fim(s, NoiseModel::white(s.sigma2)); }

/// Kronecker product of two complex matrices, written out.
CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace

TEST(Fim, NoIrsReflectivityBlockIs16I) {
  for (double nu : {-0.4, 0.0, 0.33}) {
    const RadarParams r = RadarParams::constant(8);
    const ChannelSet ch{std::polar(1.0, 0.7), CVector(0)};
    const CMatrix a = sensing_matrix(r, ch, RVector::Constant(1, nu));
    EXPECT_LT((fim_alpha_alpha(a, NoiseModel::white(1.0)) - 16.0 * RMatrix::Identity(2, 2)).cwiseAbs().maxCoeff(),
              1e-13);
  }
}

TEST(Fim, NoIrsDopplerBlockIs28) {
  const RadarParams r = RadarParams::constant(4);
  const ChannelSet ch{cplx{0.0, 1.0}, CVector(0)};
  const CVector alpha = CVector::Constant(1, std::polar(1.0, 2.1));
  const CMatrix ad = sensing_matrix_derivative(r, ch, RVector::Constant(1, 0.12));
  EXPECT_NEAR(fim_nu_nu(ad, NoiseModel::white(1.0), alpha)(0, 0), 28.0, 1e-13);
}

TEST(Fim, ClosedFormsExact) {
  const NoIrsFim a = no_irs_fim(RadarParams::constant(8), 1.0, 1.0, 0.25, 1.0);
  EXPECT_EQ(a.f_aa0(0, 0), 16.0);
  EXPECT_EQ(a.f_aa0(1, 1), 16.0);
  EXPECT_EQ(a.f_aa0(0, 1), 0.0);
  EXPECT_EQ(no_irs_fim(RadarParams::constant(4), 1.0, 1.0, -0.1, 1.0).f_nn0, 28.0);
}

TEST(Fim, ClosedFormsMatchGeneralPathAtK0) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const RadarParams r{12, 1e-3, standard_complex_normal(12, rng)};
    const ChannelSet ch{standard_complex_normal(1, rng)(0), CVector(0)};
    const TargetParams tgt{standard_complex_normal(1, rng), RVector::Constant(1, 0.05 * t - 0.45)};
    const double s2 = 0.3 + t;
    const FimBlocks b = fim_blocks(r, ch, tgt, NoiseModel::white(s2));
    const NoIrsFim c = no_irs_fim(r, ch.h_los, tgt.alpha(0), tgt.nu(0), s2);
    EXPECT_LT(relative_frobenius(b.f_aa, c.f_aa0), 1e-12);
    EXPECT_NEAR(b.f_nn(0, 0) / c.f_nn0, 1.0, 1e-12);
  }
}

TEST(Fim, ReflectivityBlockStructureAndKronecker) {
  const Scene s = random_scene(2, 4, 8, 21);
  const NoiseModel r = NoiseModel::white(s.sigma2);
  const CMatrix a = sensing_matrix(s.radar, s.channels, s.target.nu);
  const CMatrix m = a.adjoint() * a / s.sigma2;
  const RMatrix f = fim_alpha_alpha(a, r);
  const Eigen::Index p = a.cols();
  EXPECT_LT((f.topLeftCorner(p, p) - f.bottomRightCorner(p, p)).norm(), 1e-12 * f.norm());
  EXPECT_LT((f.topRightCorner(p, p) + f.bottomLeftCorner(p, p)).norm(), 1e-12 * f.norm());

  CMatrix one_j(1, 2);
  one_j << 1.0, kJ;
  const RMatrix literal = 2.0 * kron(kron(one_j.adjoint(), one_j), m).real();
  EXPECT_LT(relative_frobenius(f, literal), 1e-14);
}

TEST(Fim, CrossBlockScalarCase) {
  const RadarParams r = RadarParams::constant(6);
  const ChannelSet ch{cplx{0.4, -0.9}, CVector(0)};
  const cplx alpha{1.3, 0.2};
  const double nu = 0.17;
  const CMatrix a = sensing_matrix(r, ch, RVector::Constant(1, nu));
  const CMatrix ad = sensing_matrix_derivative(r, ch, RVector::Constant(1, nu));
  const RMatrix f = fim_alpha_nu(a, ad, NoiseModel::white(2.0), CVector::Constant(1, alpha));
  // d mu / d alpha_R = a, d mu / d alpha_I = j a, d mu / d nu = alpha adot
  const cplx s = a.col(0).dot(ad.col(0)) * alpha / 2.0;
  EXPECT_NEAR(f(0, 0), 2.0 * s.real(), 1e-13);
  EXPECT_NEAR(f(1, 0), 2.0 * s.imag(), 1e-13);
}

TEST(Fim, ZeroAlphaGivesZeroBlocks) {
  Scene s = random_scene(2, 3, 8, 22);
  s.target.alpha.setZero();
  const FimBlocks b = fim_blocks(s.radar, s.channels, s.target, NoiseModel::white(1.0));
  EXPECT_EQ(b.f_an.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(b.f_nn.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Fim, NoiseScaling) {
  const Scene s = random_scene(2, 4, 8, 23);
  const RMatrix f1 = full_fim(s, NoiseModel::white(1.0));
  const RMatrix f3 = full_fim(s, NoiseModel::white(3.0));
  EXPECT_LT(relative_frobenius(3.0 * f3, f1), 1e-14);

  const CMatrix r0 = CMatrix::Identity(8, 8) * 2.0 + CMatrix::Constant(8, 8, 0.1);
  const RMatrix g1 = full_fim(s, NoiseModel::covariance(r0));
  const RMatrix g2 = full_fim(s, NoiseModel::covariance(4.0 * r0));
  EXPECT_LT(relative_frobenius(4.0 * g2, g1), 1e-13);

  const CrlbResult c1 = crlb(f1);
  const CrlbResult c3 = crlb(f3);
  EXPECT_LT(relative_frobenius(c3.crlb, 3.0 * c1.crlb), 1e-14 * c1.condition);
}

TEST(Fim, MatchesOracleOnSmallScene) {
  const Scene s = random_scene(1, 2, 8, 24);
  const NoiseModel r = NoiseModel::white(s.sigma2);
  const RMatrix oracle = fim_oracle(model_mean(s.radar, s.channels), r, pack_parameters(s.target));
  EXPECT_LT(normalized_entry_error(full_fim(s), oracle), 1e-6);
}

TEST(Fim, MatchesOracleWithColoredNoise) {
  const Scene s = random_scene(2, 4, 8, 25);
  CMatrix b = CMatrix::Random(8, 8);
  const NoiseModel r = NoiseModel::covariance(b * b.adjoint() + CMatrix::Identity(8, 8));
  const RMatrix oracle = fim_oracle(model_mean(s.radar, s.channels), r, pack_parameters(s.target));
  EXPECT_LT(normalized_entry_error(full_fim(s, r), oracle), 1e-6);
}

TEST(Fim, SymmetricAndPositiveSemidefinite) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Scene s = random_scene(1 + seed % 3, 4, 16, 100 + seed);
    const RMatrix f = full_fim(s);
    EXPECT_EQ((f - f.transpose()).cwiseAbs().maxCoeff(), 0.0);
    const Eigen::SelfAdjointEigenSolver<RMatrix> eig(f);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-10 * f.norm());
    const FimBlocks b = extract_blocks(f);
    EXPECT_EQ((assemble_full_fim(b) - f).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Fim, ChannelFormMatchesSensingForm) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Scene s = random_scene(1 + seed % 3, 1 + seed % 8, 8 + 8 * (seed % 2), 200 + seed);
    const FimBlocks a = fim_blocks(s.radar, s.channels, s.target, NoiseModel::white(s.sigma2));
    const FimBlocks b = fim_from_h(s.channels, s.radar, s.target.alpha, s.target.nu, s.sigma2);
    EXPECT_LT(relative_frobenius(b.f_aa, a.f_aa), 1e-10);
    EXPECT_LT(relative_frobenius(b.f_nn, a.f_nn), 1e-10);
  }
}

TEST(Fim, ChannelFormWithNonUnitWaveform) {
  Scene s = random_scene(2, 3, 8, 26);
  std::mt19937_64 rng(26);
  s.radar.waveform = standard_complex_normal(8, rng);
  const FimBlocks a = fim_blocks(s.radar, s.channels, s.target, NoiseModel::white(s.sigma2));
  const FimBlocks b = fim_from_h(s.channels, s.radar, s.target.alpha, s.target.nu, s.sigma2);
  EXPECT_LT(relative_frobenius(b.f_aa, a.f_aa), 1e-10);
  EXPECT_LT(relative_frobenius(b.f_nn, a.f_nn), 1e-10);
}

TEST(Fim, ChannelFormLosOnlyReducesToClosedForms) {
  Scene s = random_scene(2, 3, 8, 27);
  s.channels.h_nlos.setZero();
  const FimBlocks b = fim_from_h(s.channels, s.radar, s.target.alpha, s.target.nu, s.sigma2);
  const NoIrsFim c = no_irs_fim(s.radar, s.channels.h_los, s.target.alpha(0), s.target.nu(0), s.sigma2);
  const Eigen::Index p = 3;
  EXPECT_NEAR(b.f_aa(0, 0), c.f_aa0(0, 0), 1e-12 * c.f_aa0(0, 0));
  EXPECT_NEAR(b.f_aa(p, p), c.f_aa0(1, 1), 1e-12 * c.f_aa0(0, 0));
  EXPECT_NEAR(b.f_nn(0, 0), c.f_nn0, 1e-12 * c.f_nn0);
  EXPECT_EQ(b.f_nn.bottomRightCorner(2, 2).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Fim, ChannelFormNoiseScaling) {
  const Scene s = random_scene(2, 3, 8, 28);
  const FimBlocks a = fim_from_h(s.channels, s.radar, s.target.alpha, s.target.nu, 1.0);
  const FimBlocks b = fim_from_h(s.channels, s.radar, s.target.alpha, s.target.nu, 2.0);
  EXPECT_LT(relative_frobenius(2.0 * b.f_aa, a.f_aa), 1e-15);
  EXPECT_LT(relative_frobenius(2.0 * b.f_nn, a.f_nn), 1e-15);
}

TEST(Crlb, ScaledIdentity) {
  const CrlbResult c = crlb(2.0 * RMatrix::Identity(6, 6));
  EXPECT_LT((c.crlb - 0.5 * RMatrix::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(c.trace_total, 3.0, 1e-15);
  EXPECT_NEAR(c.trace_alpha_block, 2.0, 1e-15);
  EXPECT_NEAR(c.trace_nu_block, 1.0, 1e-15);
  EXPECT_NEAR(c.surrogate, 3.0, 1e-15);
}

TEST(Crlb, SurrogateBoundsTrace) {
  int checked = 0;
  for (std::uint64_t seed = 0; checked < 100; ++seed) {
    const Scene s = random_scene(1 + seed % 3, 1 + 3 * (seed % 3), 8 + 8 * (seed % 2), 300 + seed, 0.02);
    CrlbResult c;
    try {
      c = crlb(full_fim(s));
    } catch (const SingularFimError&) {
      continue;
    }
    EXPECT_LE(c.surrogate, c.trace_total * (1 + 1e-9));
    for (Eigen::Index i = 0; i < c.crlb.rows(); ++i) EXPECT_GT(c.crlb(i, i), 0.0);
    ++checked;
  }
}

TEST(Crlb, DuplicateDopplerIsSingular) {
  Scene s = random_scene(1, 4, 16, 29);
  s.channels.h_nlos(0) = s.channels.h_los;
  s.target.alpha(1) = s.target.alpha(0);
  s.target.nu(1) = s.target.nu(0);
  try {
    crlb(full_fim(s));
    FAIL() << "singular FIM not detected";
  } catch (const SingularFimError& e) {
    EXPECT_GT(e.condition(), kMaxFimCondition);
  }
}

TEST(Crlb, InvertsFullFim) {
  const Scene s = random_scene(3, 8, 16, 30);
  const RMatrix f = full_fim(s);
  const CrlbResult c = crlb(f);
  // Compare in equilibrated units, where the error is governed by the condition number.
  const RVector d = f.diagonal().cwiseSqrt();
  const RMatrix ce = d.asDiagonal() * c.crlb * d.asDiagonal();
  const RMatrix fe = d.cwiseInverse().asDiagonal() * f * d.cwiseInverse().asDiagonal();
  EXPECT_LT((ce * fe - RMatrix::Identity(f.rows(), f.cols())).cwiseAbs().maxCoeff(), 1e-14 * c.condition);
  EXPECT_LE(c.condition, kMaxFimCondition);
}

TEST(Crlb, BadlyScaledButWellPosedFim) {
  // Units differ by 1e26 between parameters; equilibration keeps it invertible.
  RVector d(6);
  d << 1e-26, 1e-26, 1.0, 1e-26, 1.0, 5.0;
  RMatrix m = RMatrix::Identity(6, 6);
  m(0, 2) = m(2, 0) = 0.3;
  const RMatrix f = d.cwiseSqrt().asDiagonal() * m * d.cwiseSqrt().asDiagonal();
  const CrlbResult c = crlb(f);
  EXPECT_NEAR(c.crlb(5, 5), 0.2, 1e-14);
  EXPECT_NEAR(c.crlb(1, 1) * 1e-26, 1.0, 1e-12);
}

TEST(Oracle, LinearMeanIsExact) {
  std::mt19937_64 rng(31);
  CMatrix b(5, 3);
  for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = standard_complex_normal(1, rng)(0);
  const NoiseModel r = NoiseModel::white(0.7);
  const MeanFunction mean = [&](const RVector& z) { return CVector(b * z.cast<cplx>()); };
  const RMatrix o = fim_oracle(mean, r, RVector::Random(3));
  const RMatrix exact = 2.0 * (b.adjoint() * b).real() / 0.7;
  EXPECT_LT(relative_frobenius(o, exact), 1e-9);
}

TEST(Oracle, SecondOrderConvergence) {
  const Scene s = random_scene(1, 2, 8, 32);
  const NoiseModel r = NoiseModel::white(s.sigma2);
  const RMatrix exact = full_fim(s);
  const auto mean = model_mean(s.radar, s.channels);
  const RVector z = pack_parameters(s.target);
  const double e1 = (fim_oracle(mean, r, z, 1e-2) - exact).norm();
  const double e2 = (fim_oracle(mean, r, z, 5e-3) - exact).norm();
  EXPECT_NEAR(e1 / e2, 4.0, 0.2);
}

TEST(Oracle, ParameterPackingRoundTrips) {
  const Scene s = random_scene(2, 3, 8, 33);
  const TargetParams t = unpack_parameters(pack_parameters(s.target));
  EXPECT_EQ((t.alpha - s.target.alpha).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ((t.nu - s.target.nu).cwiseAbs().maxCoeff(), 0.0);
}
