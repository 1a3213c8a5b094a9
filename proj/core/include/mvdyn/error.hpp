#pragma once

#include <stdexcept>
#include <string>

namespace mvdyn {

/// Broad failure classes. The CLI maps them onto process exit codes.
enum class ErrorKind {
  kConfig,       // malformed or inadmissible input
  kDimension,    // objects built over different strategy spaces
  kAssumption,   // vital rates violate the admissibility assumptions
  kNumerical,    // non-finite values, step underflow, solver breakdown
  kConvergence,  // fixed-point iteration did not converge
  kPositivity,   // a state left the nonnegative cone
  kIo,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define MVDYN_DEFINE_ERROR(Name, Kind)                                \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& what) : Error(Kind, what) {}     \
  }

MVDYN_DEFINE_ERROR(ConfigError, ErrorKind::kConfig);
MVDYN_DEFINE_ERROR(DimensionError, ErrorKind::kDimension);
MVDYN_DEFINE_ERROR(AssumptionError, ErrorKind::kAssumption);
MVDYN_DEFINE_ERROR(NumericalError, ErrorKind::kNumerical);
MVDYN_DEFINE_ERROR(ConvergenceError, ErrorKind::kConvergence);
MVDYN_DEFINE_ERROR(PositivityError, ErrorKind::kPositivity);
MVDYN_DEFINE_ERROR(IoError, ErrorKind::kIo);

#undef MVDYN_DEFINE_ERROR

const char* to_string(ErrorKind kind) noexcept;

}  // namespace mvdyn
