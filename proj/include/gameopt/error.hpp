#ifndef GAMEOPT_ERROR_HPP
#define GAMEOPT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace gameopt {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kDomainError,
  kInvalidDistribution,
  kNonConvergence,
  kUnbounded,
  kNoThreshold,
  kParse,
  kVerification,
};

const char* error_code_name(ErrorCode code);

// All library failures are reported through this type. The code lets callers
// (the CLI in particular) tell user errors apart from numerical trouble.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gameopt

#endif  // GAMEOPT_ERROR_HPP
