#pragma once

#include <stdexcept>
#include <string>

namespace cshap {

/// Failure classes. The numeric values double as CLI exit codes.
enum class ErrorKind : int {
  kUsage = 1,
  kData = 2,
  kForecaster = 3,
  kInvariant = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::kUsage, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

class ForecasterError : public Error {
 public:
  explicit ForecasterError(const std::string& what) : Error(ErrorKind::kForecaster, what) {}
};

/// Raised when a mathematical invariant (e.g. SHAP efficiency) is broken.
class InvariantError : public Error {
 public:
  explicit InvariantError(const std::string& what) : Error(ErrorKind::kInvariant, what) {}
};

}  // namespace cshap
