#include "hcbr/error.hpp"

namespace hcbr {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::MalformedLine: return "MalformedLine";
    case Errc::CycleDetected: return "CycleDetected";
    case Errc::UnknownNode: return "UnknownNode";
    case Errc::DuplicateEdge: return "DuplicateEdge";
    case Errc::LevelViolation: return "LevelViolation";
    case Errc::ForeignFactor: return "ForeignFactor";
    case Errc::MissingOutcome: return "MissingOutcome";
    case Errc::NoPath: return "NoPath";
    case Errc::NotADistinction: return "NotADistinction";
    case Errc::TooLarge: return "TooLarge";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::ConstraintsUnsatisfiable: return "ConstraintsUnsatisfiable";
    case Errc::MissingTarget: return "MissingTarget";
    case Errc::AuthMissing: return "AuthMissing";
    case Errc::Transport: return "Transport";
    case Errc::RateLimited: return "RateLimited";
    case Errc::SchemaMismatch: return "SchemaMismatch";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace hcbr
