#pragma once

#include <stdexcept>
#include <string>

namespace enlarge {

/// Covariance (or model matrix) is singular or numerically indefinite.
class ModelSingularError : public std::runtime_error {
 public:
  explicit ModelSingularError(const std::string& msg) : std::runtime_error(msg) {}
};

/// All sample densities underflowed to zero; the score is undefined.
class DegenerateScoreError : public std::runtime_error {
 public:
  explicit DegenerateScoreError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Residual scale collapsed to the numerical floor.
class ScaleDegenerateError : public std::runtime_error {
 public:
  explicit ScaleDegenerateError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Design matrix (with intercept column) is rank deficient.
class DesignSingularError : public std::runtime_error {
 public:
  explicit DesignSingularError(const std::string& msg) : std::runtime_error(msg) {}
};

/// LTS trimming leaves fewer retained points than parameters.
class InvalidTrimError : public std::runtime_error {
 public:
  explicit InvalidTrimError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad experiment configuration or CLI arguments.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Unreadable or malformed input data.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace enlarge
