#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace dsse {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Eigen::MatrixXd;
using Eigen::VectorXd;
using MatrixXcd = Eigen::MatrixXcd;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file (JSON syntax or missing/mistyped field).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Input parsed but violates a model invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// The Jacobian/gain matrix lost full column rank.
class ObservabilityError : public Error {
 public:
  ObservabilityError(const std::string& what, int rank, int required)
      : Error(what), rank_(rank), required_(required) {}
  int rank() const { return rank_; }
  int required() const { return required_; }

 private:
  int rank_;
  int required_;
};

/// An iterative numerical routine failed to reach its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double achieved)
      : Error(what), achieved_(achieved) {}
  /// Best estimate reached before giving up.
  double achieved() const { return achieved_; }

 private:
  double achieved_;
};

}  // namespace dsse
