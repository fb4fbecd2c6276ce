#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace irs_crlb {

using cplx = std::complex<double>;

using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr cplx kJ{0.0, 1.0};

// Error hierarchy. Everything derives from std::invalid_argument or
// std::runtime_error so callers can catch at whatever granularity they like.

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a channel gain that must be nonzero (for scaling or for an
/// LSR denominator) vanishes.
class DegenerateChannelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The FIM is numerically singular: some parameter is unidentifiable in the
/// scenario (e.g. two paths share a Doppler). Carries the condition estimate
/// of the diagonally equilibrated matrix.
class SingularFimError : public std::runtime_error {
 public:
  SingularFimError(const std::string& what, double condition)
      : std::runtime_error(what), condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

/// The optimizer was handed a state it cannot start from (non-finite or
/// singular objective).
class InvalidStateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, std::vector<double> trace, double residual)
      : std::runtime_error(what), trace_(std::move(trace)), residual_(residual) {}
  const std::vector<double>& trace() const noexcept { return trace_; }
  double residual() const noexcept { return residual_; }

 private:
  std::vector<double> trace_;
  double residual_;
};

/// Configuration problem; `field()` is the dotted path of the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidArgument(msg);
}

}  // namespace irs_crlb
