#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hcbr/prompt.hpp"

namespace hcbr {

enum class ParseStatus : std::uint8_t { Ok, Malformed };

struct ParsedAnswer {
  Task task = Task::Task1;
  ParseStatus status = ParseStatus::Malformed;
  /// Tasks 1 and 3: normalized labels in answer order, duplicates kept.
  std::vector<std::string> factors;
  /// Task 2: whichever of these the answer provided.
  std::optional<bool> emphasize;
  std::optional<bool> downplay;
  std::optional<bool> significance;

  bool ok() const noexcept { return status == ParseStatus::Ok; }
  friend bool operator==(const ParsedAnswer&, const ParsedAnswer&) = default;
};

/// "f6_Security-Measures (P)" -> "F6(p)". Empty when the text is not a
/// factor label with a side.
std::optional<std::string> normalize_factor_label(std::string_view text);

/// Key the answer object must carry for `task`.
std::string_view answer_key(Task task, Task2Schema schema = Task2Schema::Pair);

/// Takes the last well-formed JSON object in `text` that carries a key for
/// `task`. Never throws; anything unusable is Malformed.
ParsedAnswer parse_answer(Task task, std::string_view text) noexcept;

nlohmann::json parsed_answer_to_json(const ParsedAnswer& a);
ParsedAnswer parsed_answer_from_json(const nlohmann::json& j);

}  // namespace hcbr
