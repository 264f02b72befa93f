#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hcbr {

enum class Errc {
  // knowledge
  MalformedLine,
  CycleDetected,
  UnknownNode,
  DuplicateEdge,
  LevelViolation,
  // solver
  ForeignFactor,
  MissingOutcome,
  NoPath,
  NotADistinction,
  TooLarge,
  // scenariogen
  InvalidConfig,
  ConstraintsUnsatisfiable,
  // harness / scoring
  MissingTarget,
  AuthMissing,
  Transport,
  RateLimited,
  SchemaMismatch,
  Io,
};

std::string_view errc_name(Errc code) noexcept;

/// Single exception type for the library. `line()` is 1-based and only
/// meaningful for parse errors; `details()` carries structured payload such as
/// the node labels on a detected cycle.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message, std::size_t line = 0,
        std::vector<std::string> details = {})
      : std::runtime_error(message), code_(code), line_(line),
        details_(std::move(details)) {}

  Errc code() const noexcept { return code_; }
  std::size_t line() const noexcept { return line_; }
  const std::vector<std::string>& details() const noexcept { return details_; }

 private:
  Errc code_;
  std::size_t line_;
  std::vector<std::string> details_;
};

}  // namespace hcbr
