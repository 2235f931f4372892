#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rdiag {

enum class ErrorCode {
  non_normalized,
  negative_support,
  negative_density,
  non_integrable,
  domain_error,
  out_of_window,
  out_of_range,
  no_convergence,
  dirac_measure,
  regime_error,
  eigen_failure,
  input_error,
  input_not_found,
  tolerance_exceeded,
};

// Stable snake_case names, used verbatim in the CLI error JSON.
constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::non_normalized: return "non_normalized";
    case ErrorCode::negative_support: return "negative_support";
    case ErrorCode::negative_density: return "negative_density";
    case ErrorCode::non_integrable: return "non_integrable";
    case ErrorCode::domain_error: return "domain_error";
    case ErrorCode::out_of_window: return "out_of_window";
    case ErrorCode::out_of_range: return "out_of_range";
    case ErrorCode::no_convergence: return "no_convergence";
    case ErrorCode::dirac_measure: return "dirac_measure";
    case ErrorCode::regime_error: return "regime_error";
    case ErrorCode::eigen_failure: return "eigen_failure";
    case ErrorCode::input_error: return "input_error";
    case ErrorCode::input_not_found: return "input_not_found";
    case ErrorCode::tolerance_exceeded: return "tolerance_exceeded";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace rdiag
