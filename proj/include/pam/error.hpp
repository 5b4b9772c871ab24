#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pam {

enum class ErrorKind {
  InvalidGeometry,
  UnsupportedTransform,
  Domain,
  QuadratureFailure,
  Configuration,
  Range,
  InvalidMeasure,
  PositivityViolation,
  BandConnectivity,
  Budget,
  Io,
};

[[nodiscard]] std::string_view to_string(ErrorKind kind) noexcept;

/// Contract failure raised by every module; the kind identifies the failed precondition.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidGeometry: return "invalid-geometry";
    case ErrorKind::UnsupportedTransform: return "unsupported-transform";
    case ErrorKind::Domain: return "domain-error";
    case ErrorKind::QuadratureFailure: return "quadrature-failure";
    case ErrorKind::Configuration: return "configuration-error";
    case ErrorKind::Range: return "range-error";
    case ErrorKind::InvalidMeasure: return "invalid-measure";
    case ErrorKind::PositivityViolation: return "positivity-violation";
    case ErrorKind::BandConnectivity: return "band-connectivity-error";
    case ErrorKind::Budget: return "budget-error";
    case ErrorKind::Io: return "io-error";
  }
  return "error";
}

}  // namespace pam
