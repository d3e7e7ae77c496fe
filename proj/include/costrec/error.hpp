#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace costrec {

enum class ErrorCode {
  InvalidArgument,
  ZeroMassInterval,
  NotDiscrete,
  SupportTooLarge,
  GridMismatch,
  NonMonotoneCurve,
  GammaOutOfRange,
  ZeroInterimServed,
  NonBinaryValuation,
  ValueOutsideSupport,
  EntryBelowOne,
  Configuration,
  Incompatible,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every library failure is reported through this one exception type; the
/// code lets callers (the CLI in particular) map failures onto exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace costrec
