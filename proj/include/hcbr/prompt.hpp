#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "hcbr/solver.hpp"

namespace hcbr {

enum class Task : std::uint8_t { Task1 = 1, Task2 = 2, Task3 = 3 };

std::string_view task_name(Task t) noexcept;  // "1", "2", "3"
std::optional<Task> parse_task(std::string_view s) noexcept;

/// How Task 2 answers are requested and graded: the emphasize/downplay pair,
/// or a single significance boolean.
enum class Task2Schema : std::uint8_t { Pair, Significance };

std::string_view task2_schema_name(Task2Schema s) noexcept;
std::optional<Task2Schema> parse_task2_schema(std::string_view s) noexcept;

/// Worked demonstration placed in every prompt. Its answers are computed by
/// the solver, so the example can never disagree with the grader.
struct OneShotExample {
  Scenario scenario;  // scenario.target is the Task 2 demonstration target
};

/// Bundled example on its own small hierarchy, disjoint from generated data.
const OneShotExample& default_one_shot();

/// Prompt text for one task instance. `target` is required for Task 2 and
/// ignored otherwise. Throws Errc::MissingTarget.
std::string build_prompt(Task task, const Scenario& scenario,
                         const std::optional<Distinction>& target, const OneShotExample& one_shot,
                         Task2Schema schema = Task2Schema::Pair);

/// Hex SHA-256 of the prompt bytes.
std::string prompt_hash(std::string_view prompt);

}  // namespace hcbr
