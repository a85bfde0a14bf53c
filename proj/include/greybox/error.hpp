#ifndef GREYBOX_ERROR_HPP
#define GREYBOX_ERROR_HPP

#include <stdexcept>
#include <string>

namespace greybox {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two signals that must share a sampling grid do not.
class GridMismatchError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Normalizing by a reference signal whose norm is zero.
class DegenerateReferenceError : public Error {
 public:
  using Error::Error;
};

class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, double failure_time)
      : Error(what + " (t = " + std::to_string(failure_time) + ")"),
        failure_time_(failure_time) {}

  double failure_time() const noexcept { return failure_time_; }

 private:
  double failure_time_;
};

// The scalar search found its minimum on the boundary of the search interval.
class BracketingError : public Error {
 public:
  explicit BracketingError(const std::string& what, bool at_upper = false) : Error(what), at_upper_(at_upper) {}
  bool at_upper() const { return at_upper_; }

 private:
  bool at_upper_;
};

// Invalid model parameters, e.g. a non-Hurwitz residual denominator.
class ParameterError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class ManifestError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace greybox

#endif  // GREYBOX_ERROR_HPP
