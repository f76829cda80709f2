#pragma once

#include <stdexcept>
#include <string>

namespace lgq {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// e^{-z^2} scaling in the complex error function would overflow a double.
class OverflowDomain : public Error {
 public:
  using Error::Error;
};

/// Adaptive refinement ran out of its subdivision budget before meeting tolerance.
class QuadratureFailure : public Error {
 public:
  using Error::Error;
};

/// Covariance determinant vanished (coincident times) and the shifted limit was disabled.
class DegenerateKernel : public Error {
 public:
  using Error::Error;
};

/// Correlation coefficient sits on the arcsin branch point.
class BranchAmbiguity : public Error {
 public:
  using Error::Error;
};

class AllCellsFailed : public Error {
 public:
  using Error::Error;
};

/// Invalid user configuration; the message names the offending field.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace lgq
