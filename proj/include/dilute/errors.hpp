#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dilute {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Out-of-domain argument (n < 2, eta <= 0, Im z <= 0, ...).
class ParameterError : public Error {
public:
  using Error::Error;
};

/// Non-finite input data or a test function returning a non-finite value.
class DataError : public Error {
public:
  using Error::Error;
};

/// Iterative solver failed to converge.
class NumericalError : public Error {
public:
  NumericalError(const std::string& what, std::size_t index)
      : Error(what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

private:
  std::size_t index_;
};

/// Evaluation would overflow (cosh-weighted functions far from the origin).
class RangeError : public Error {
public:
  using Error::Error;
};

/// Operation not available for this function family.
class UnsupportedError : public Error {
public:
  using Error::Error;
};

/// An improper integral failed to converge; carries the last partial sum.
class DivergenceError : public Error {
public:
  DivergenceError(const std::string& what, double partial_sum, double last_increment)
      : Error(what), partial_sum_(partial_sum), last_increment_(last_increment) {}
  double partial_sum() const noexcept { return partial_sum_; }
  double last_increment() const noexcept { return last_increment_; }

private:
  double partial_sum_;
  double last_increment_;
};

/// Invalid experiment or sweep configuration.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// A replica failed inside an experiment run.
class RunError : public Error {
public:
  RunError(const std::string& what, std::size_t replica)
      : Error(what), replica_(replica) {}
  std::size_t replica() const noexcept { return replica_; }

private:
  std::size_t replica_;
};

}  // namespace dilute
