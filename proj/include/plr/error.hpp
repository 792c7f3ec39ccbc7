#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace plr {

enum class ErrorKind {
  MalformedHeader,
  MalformedMetadata,
  DimensionMismatch,
  NonFiniteValue,
  IoFailure,
  InvalidArgument,
  InvalidK,
  HeuristicZero,
  EmptySelection,
  TooFewIdentities,
  IdentityTooSmall,
  NoValidQuery,
  GalleryTooSmall,
  InfeasibleSpec,
  TrainerFailure,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Domain error raised by every library operation. The message always starts
/// with the kind name so CLI diagnostics can be matched on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::MalformedHeader: return "MalformedHeader";
    case ErrorKind::MalformedMetadata: return "MalformedMetadata";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidK: return "InvalidK";
    case ErrorKind::HeuristicZero: return "HeuristicZero";
    case ErrorKind::EmptySelection: return "EmptySelection";
    case ErrorKind::TooFewIdentities: return "TooFewIdentities";
    case ErrorKind::IdentityTooSmall: return "IdentityTooSmall";
    case ErrorKind::NoValidQuery: return "NoValidQuery";
    case ErrorKind::GalleryTooSmall: return "GalleryTooSmall";
    case ErrorKind::InfeasibleSpec: return "InfeasibleSpec";
    case ErrorKind::TrainerFailure: return "TrainerFailure";
  }
  return "Unknown";
}

}  // namespace plr
