#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mpsmesh {

enum class ErrorKind {
  CollinearInput,
  NonPlanarInput,
  DegenerateSimplex,
  InvalidParams,
  EmptyField,
  InfeasibleEdge,
  InvalidDomain,
  AllCollinear,
  AllCoplanar,
  DuplicatePoints,
  SegmentEndpointMissing,
  ParseError,
  ValidationError,
  IoError,
  MaxItersExceeded,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::CollinearInput: return "CollinearInput";
    case ErrorKind::NonPlanarInput: return "NonPlanarInput";
    case ErrorKind::DegenerateSimplex: return "DegenerateSimplex";
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::EmptyField: return "EmptyField";
    case ErrorKind::InfeasibleEdge: return "InfeasibleEdge";
    case ErrorKind::InvalidDomain: return "InvalidDomain";
    case ErrorKind::AllCollinear: return "AllCollinear";
    case ErrorKind::AllCoplanar: return "AllCoplanar";
    case ErrorKind::DuplicatePoints: return "DuplicatePoints";
    case ErrorKind::SegmentEndpointMissing: return "SegmentEndpointMissing";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::MaxItersExceeded: return "MaxItersExceeded";
  }
  return "Unknown";
}

}  // namespace mpsmesh
