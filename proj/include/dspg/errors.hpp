#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace dspg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidDimensionError : public Error {
 public:
  using Error::Error;
};

class InvalidAgentError : public Error {
 public:
  using Error::Error;
};

class UnsupportedOperationError : public Error {
 public:
  using Error::Error;
};

class EnumerationLimitError : public Error {
 public:
  using Error::Error;
};

// Raised when an objective evaluation returns a non-finite value. Carries the
// point at which the evaluation blew up so callers can report it.
class NumericalOverflowError : public Error {
 public:
  NumericalOverflowError(const std::string& message, Eigen::VectorXd point)
      : Error(message), point_(std::move(point)) {}

  const Eigen::VectorXd& point() const noexcept { return point_; }

 private:
  Eigen::VectorXd point_;
};

// Aggregates every validation failure found in a config document, not just
// the first one.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> issues)
      : Error(join(issues)), issues_(std::move(issues)) {}

  const std::vector<std::string>& issues() const noexcept { return issues_; }

 private:
  static std::string join(const std::vector<std::string>& issues) {
    std::string out = "invalid config:";
    for (const auto& issue : issues) {
      out += "\n  - ";
      out += issue;
    }
    return out;
  }

  std::vector<std::string> issues_;
};

}  // namespace dspg
