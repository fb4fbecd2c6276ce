#include "irs_crlb/signal_model.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace irs_crlb;

namespace {

CVector vec(std::initializer_list<cplx> xs) {
  CVector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (cplx x : xs) v(i++) = x;
  return v;
}

double max_abs(const CMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

RVector random_nu(Eigen::Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(-0.5, 0.5);
  RVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = uni(rng);
  return v;
}

}  // namespace

TEST(DopplerSteering, Examples) {
  EXPECT_LT(max_abs(doppler_steering(0.0, 4) - CVector::Ones(4)), 1e-15);
  EXPECT_LT(max_abs(doppler_steering(kPi, 3) - vec({1, -1, 1})), 1e-15);
  const CVector p = doppler_steering(0.2, 8);
  for (int i = 0; i < 8; ++i) EXPECT_LT(std::abs(p(i) - std::exp(kJ * (0.2 * i))), 1e-15);
}

TEST(DopplerSteering, DerivativeExamples) {
  EXPECT_LT(max_abs(doppler_steering_derivative(0.0, 4) - vec({0, kJ, 2.0 * kJ, 3.0 * kJ})), 1e-15);
  std::mt19937_64 rng(1);
  for (double nu : random_nu(10, rng)) EXPECT_EQ(doppler_steering_derivative(nu, 5)(0), cplx{});
}

TEST(DopplerSteering, DerivativeMatchesFiniteDifference) {
  const double h = 1e-6;
  const CVector fd = (doppler_steering(0.2 + h, 16) - doppler_steering(0.2 - h, 16)) / (2 * h);
  EXPECT_LT(max_abs(fd - doppler_steering_derivative(0.2, 16)), 1e-7);

  std::mt19937_64 rng(2);
  for (double nu : random_nu(20, rng)) {
    const CVector d = (doppler_steering(nu + h, 12) - doppler_steering(nu - h, 12)) / (2 * h);
    EXPECT_LT(max_abs(d - doppler_steering_derivative(nu, 12)), 1e-7);
  }
}

TEST(DopplerSteering, NormIdentities) {
  std::mt19937_64 rng(4);
  const CVector x = CVector::Random(9);
  double weighted = 0;
  for (int i = 0; i < 9; ++i) weighted += i * i * std::norm(x(i));
  for (double nu : random_nu(10, rng)) {
    const CVector p = doppler_steering(nu, 9);
    EXPECT_NEAR(p.cwiseAbs().maxCoeff(), 1.0, 1e-15);
    EXPECT_NEAR(p.cwiseAbs().minCoeff(), 1.0, 1e-15);
    EXPECT_NEAR(x.cwiseProduct(p).norm(), x.norm(), 1e-13);
    EXPECT_NEAR(x.cwiseProduct(doppler_steering_derivative(nu, 9)).squaredNorm(), weighted, 1e-11);
  }
}

TEST(RadarParams, Validation) {
  EXPECT_THROW(RadarParams::constant(1).validate(), InvalidArgument);
  RadarParams r = RadarParams::constant(4);
  r.waveform.setZero();
  EXPECT_THROW(r.validate(), InvalidArgument);
  r.pri = 0.0;
  r.waveform.setOnes();
  EXPECT_THROW(r.validate(), InvalidArgument);
}

TEST(TargetParams, DopplerRange) {
  TargetParams t{CVector::Ones(2), RVector(2)};
  t.nu << 0.1, 0.5;
  EXPECT_THROW(t.validate(), InvalidArgument);
  t.nu << -0.5, 0.49;
  EXPECT_NO_THROW(t.validate());
}

TEST(SensingMatrix, SingleLosColumn) {
  const RadarParams r = RadarParams::constant(6);
  const CMatrix a = sensing_matrix(r, ChannelSet{1.0, CVector(0)}, RVector::Zero(1));
  ASSERT_EQ(a.cols(), 1);
  EXPECT_LT(max_abs(a.col(0) - CVector::Ones(6)), 1e-15);
}

TEST(SensingMatrix, ColumnwiseMatchesHadamard) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    const Eigen::Index k = 1 + t % 4;
    RadarParams r{8, 1e-3, CVector::Random(8)};
    const ChannelSet ch{cplx{0.3, -1.0}, CVector::Random(k)};
    const RVector nu = random_nu(k + 1, rng);
    CMatrix p(8, k + 1);
    CMatrix pd(8, k + 1);
    for (Eigen::Index c = 0; c <= k; ++c) {
      for (Eigen::Index i = 0; i < 8; ++i) {
        p(i, c) = std::exp(kJ * (static_cast<double>(i) * nu(c)));
        pd(i, c) = kJ * static_cast<double>(i) * p(i, c);
      }
    }
    const CMatrix xht = r.waveform * ch.stacked().transpose();
    EXPECT_LT(max_abs(sensing_matrix(r, ch, nu) - xht.cwiseProduct(p)), 1e-14);
    EXPECT_LT(max_abs(sensing_matrix_derivative(r, ch, nu) - xht.cwiseProduct(pd)), 1e-13);
  }
}

TEST(SensingMatrix, LinearInChannels) {
  std::mt19937_64 rng(6);
  const RadarParams r = RadarParams::constant(8);
  const ChannelSet ch{cplx{1.0, 2.0}, CVector::Random(2)};
  const RVector nu = random_nu(3, rng);
  const cplx c{-0.7, 2.5};
  const ChannelSet scaled{c * ch.h_los, c * ch.h_nlos};
  EXPECT_LT(max_abs(sensing_matrix(r, scaled, nu) - c * sensing_matrix(r, ch, nu)), 1e-14);
}

TEST(SensingMatrix, DerivativeExamples) {
  const RadarParams r = RadarParams::constant(4);
  const ChannelSet ones{1.0, CVector::Ones(2)};
  const CMatrix d = sensing_matrix_derivative(r, ones, RVector::Zero(3));
  for (Eigen::Index c = 0; c < 3; ++c) EXPECT_LT(max_abs(d.col(c) - vec({0, kJ, 2.0 * kJ, 3.0 * kJ})), 1e-15);

  RadarParams zero{4, 1e-3, CVector::Zero(4)};
  EXPECT_EQ(max_abs(sensing_matrix_derivative(zero, ones, RVector::Constant(3, 0.2))), 0.0);
}

TEST(SensingMatrix, DerivativeMatchesFiniteDifference) {
  std::mt19937_64 rng(7);
  const RadarParams r{10, 1e-3, CVector::Random(10)};
  const ChannelSet ch{cplx{0.5, 0.5}, CVector::Random(3)};
  const RVector nu = random_nu(4, rng);
  const CMatrix d = sensing_matrix_derivative(r, ch, nu);
  const double h = 1e-6;
  for (Eigen::Index k = 0; k < 4; ++k) {
    RVector up = nu;
    RVector dn = nu;
    up(k) += h;
    dn(k) -= h;
    const CVector fd = (sensing_matrix(r, ch, up).col(k) - sensing_matrix(r, ch, dn).col(k)) / (2 * h);
    EXPECT_LT(max_abs(fd - d.col(k)), 1e-7);
  }
}

TEST(SensingMatrix, DimensionMismatch) {
  const RadarParams r = RadarParams::constant(4);
  EXPECT_THROW(sensing_matrix(r, ChannelSet{1.0, CVector::Ones(2)}, RVector::Zero(2)), InvalidArgument);
}

TEST(Noise, CovarianceValidation) {
  CMatrix bad = CMatrix::Identity(3, 3);
  bad(0, 1) = 0.5;
  EXPECT_THROW(NoiseModel::covariance(bad), InvalidArgument);
  CMatrix indefinite = CMatrix::Identity(3, 3);
  indefinite(2, 2) = -1.0;
  EXPECT_THROW(NoiseModel::covariance(indefinite), InvalidArgument);
  EXPECT_THROW(NoiseModel::white(-1.0), InvalidArgument);
}

TEST(Synthesis, NoiselessIsExact) {
  const RadarParams r = RadarParams::constant(8);
  const ChannelSet ch{cplx{0.2, 0.1}, CVector::Random(2)};
  TargetParams t{CVector::Random(3), RVector(3)};
  t.nu << 0.1, -0.2, 0.3;
  const CMatrix a = sensing_matrix(r, ch, t.nu);
  const CVector y = synthesize_received(a, t, NoiseModel::white(0.0), 9);
  EXPECT_EQ(max_abs(y - a * t.alpha), 0.0);
}

TEST(Synthesis, SeedDeterminism) {
  const CMatrix a = CMatrix::Random(8, 2);
  TargetParams t{CVector::Random(2), RVector::Zero(2)};
  const CVector y1 = synthesize_received(a, t, NoiseModel::white(0.3), 42);
  const CVector y2 = synthesize_received(a, t, NoiseModel::white(0.3), 42);
  const CVector y3 = synthesize_received(a, t, NoiseModel::white(0.3), 43);
  EXPECT_TRUE((y1.array() == y2.array()).all());
  EXPECT_FALSE((y1.array() == y3.array()).all());
}

TEST(Synthesis, EmpiricalCovarianceMatchesR) {
  const int n = 8;
  CMatrix b = CMatrix::Random(n, n);
  const CMatrix r = b * b.adjoint() + 0.5 * CMatrix::Identity(n, n);
  const NoiseModel noise = NoiseModel::covariance(r);
  const CMatrix a = CMatrix::Zero(n, 1);
  const TargetParams t{CVector::Zero(1), RVector::Zero(1)};
  CMatrix acc = CMatrix::Zero(n, n);
  const int draws = 100000;
  for (int s = 0; s < draws; ++s) {
    const CVector w = synthesize_received(a, t, noise, static_cast<std::uint64_t>(s));
    acc += w * w.adjoint();
  }
  acc /= static_cast<double>(draws);
  EXPECT_LT((acc - r).norm() / r.norm(), 0.02);
}
