#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lpseq {

enum class ErrorKind {
  invalid_parameter,
  dimension_mismatch,
  non_finite_input,
  bracket_failure,
  empty_input,
  ragged_input,
  degenerate_input,
  dimension_too_large,
  epsilon_out_of_range,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_parameter: return "invalid-parameter";
    case ErrorKind::dimension_mismatch: return "dimension-mismatch";
    case ErrorKind::non_finite_input: return "non-finite-input";
    case ErrorKind::bracket_failure: return "bracket-failure";
    case ErrorKind::empty_input: return "empty-input";
    case ErrorKind::ragged_input: return "ragged-input";
    case ErrorKind::degenerate_input: return "degenerate-input";
    case ErrorKind::dimension_too_large: return "dimension-too-large";
    case ErrorKind::epsilon_out_of_range: return "epsilon-out-of-range";
  }
  return "unknown";
}

/// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool condition, ErrorKind kind, const char* what) {
  if (!condition) throw Error(kind, what);
}

}  // namespace lpseq
