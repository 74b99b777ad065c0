#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace cvct {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (t <= 0, variance <= 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// API misuse: empty input lists, wrong basis tags, missing scenario keys.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Adaptive quadrature did not reach the requested tolerance.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double achieved_error, double requested_error)
      : Error(what + " (achieved error " + format(achieved_error) + ", requested " +
              format(requested_error) + ")"),
        achieved_(achieved_error),
        requested_(requested_error) {}

  double achieved_error() const noexcept { return achieved_; }
  double requested_error() const noexcept { return requested_; }

 private:
  static std::string format(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
  }

  double achieved_;
  double requested_;
};

/// The measurement outcome has (numerically) zero probability; no post-measurement state exists.
class DegenerateOutcomeError : public Error {
 public:
  using Error::Error;
};

/// A grid is too coarse or too narrow for the state it is asked to carry.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// Scalar search could not bracket an extremum.
class SearchError : public Error {
 public:
  using Error::Error;
};

}  // namespace cvct
