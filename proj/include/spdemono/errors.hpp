#pragma once

#include <stdexcept>
#include <string>

namespace spdemono {

/// Error categories. The numeric values are shared with the C API.
enum class ErrorCode : int {
  kOk = 0,
  kConfig = 1,
  kNonConvergence = 2,
  kIo = 3,
  kDomain = 4,
  kResolution = 5,
  kIncompatibleGrid = 6,
  kResource = 7,
  kInvalidArgument = 8,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error(ErrorCode::kDomain, w) {}
};
struct ResolutionError : Error {
  explicit ResolutionError(const std::string& w) : Error(ErrorCode::kResolution, w) {}
};
struct IncompatibleGridError : Error {
  explicit IncompatibleGridError(const std::string& w) : Error(ErrorCode::kIncompatibleGrid, w) {}
};
struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(ErrorCode::kConfig, w) {}
};
struct IoError : Error {
  explicit IoError(const std::string& w) : Error(ErrorCode::kIo, w) {}
};
struct ResourceError : Error {
  explicit ResourceError(const std::string& w) : Error(ErrorCode::kResource, w) {}
};

/// Newton (or Picard) failed to reach the requested residual.
struct NonConvergenceError : Error {
  NonConvergenceError(const std::string& w, double last_residual)
      : Error(ErrorCode::kNonConvergence, w), last_residual(last_residual) {}
  double last_residual;
};

}  // namespace spdemono
