#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hcbr/answer.hpp"
#include "hcbr/solver.hpp"

namespace hcbr {

/// Ground truth in label form, as stored in dataset files.
struct ExpectedAnswers {
  std::set<std::string> task1;
  std::map<std::string, std::pair<bool, bool>> task2;  // label -> (emphasize, downplay)
  std::set<std::string> task3;

  friend bool operator==(const ExpectedAnswers&, const ExpectedAnswers&) = default;
};

ExpectedAnswers expected_answers(const Hierarchy& h, const GroundTruth& gt);
/// From the ground_truth_to_json layout. Throws Errc::SchemaMismatch.
ExpectedAnswers expected_answers_from_json(const nlohmann::json& j);

/// Exact set match for Tasks 1 and 3; for Task 2, the pair (Pair) or the
/// derived significance (Significance). Malformed answers are wrong.
/// Throws Errc::MissingTarget, or Errc::NotADistinction for an unknown target.
bool score_instance(Task task, const ParsedAnswer& parsed, const ExpectedAnswers& expected,
                    const std::optional<std::string>& target, Task2Schema schema);
bool score_instance(Task task, const ParsedAnswer& parsed, const Hierarchy& h,
                    const GroundTruth& gt, const std::optional<Distinction>& target,
                    Task2Schema schema);

struct EvalRecord {
  std::size_t id = 0;
  Task task = Task::Task1;
  std::string model;
  Task2Schema schema = Task2Schema::Pair;
  std::optional<std::string> target;
  ParsedAnswer parsed;
  bool correct = false;
  std::optional<std::uint64_t> reasoning_tokens;
  bool truncated = false;

  friend bool operator==(const EvalRecord&, const EvalRecord&) = default;
};

nlohmann::json eval_record_to_json(const EvalRecord& r);
EvalRecord eval_record_from_json(const nlohmann::json& j);
/// Missing file throws Errc::Io; bad lines throw Errc::MalformedLine.
std::vector<EvalRecord> load_eval_records(const std::filesystem::path& path);
void write_eval_records(std::ostream& out, std::span<const EvalRecord> records);

struct ReportRow {
  std::string model;
  Task task = Task::Task1;
  std::size_t n = 0;
  std::size_t n_correct = 0;
  std::size_t n_malformed = 0;
  std::size_t n_truncated = 0;
  std::size_t n_tokens_correct = 0;    // correct records with a token count
  std::size_t n_tokens_incorrect = 0;  // incorrect records with a token count
  double accuracy = 0.0;               // percent
  std::optional<double> tokens_all;
  std::optional<double> tokens_correct;
  std::optional<double> tokens_incorrect;

  std::size_t n_incorrect() const { return n - n_correct; }
};

struct Report {
  std::vector<ReportRow> rows;  // sorted by (model, task)
};

/// Groups by (model, task). Token means use only records with a count;
/// an empty partition is absent rather than zero.
Report aggregate(std::span<const EvalRecord> records);

enum class ReportFormat : std::uint8_t { Csv, Markdown, Jsonl };

std::optional<ReportFormat> parse_report_format(std::string_view s) noexcept;
std::string render_report(const Report& report, ReportFormat format);
/// Throws Errc::Io.
void emit_report(const Report& report, ReportFormat format, const std::filesystem::path& path);
/// Reads render_report(.., Csv) output back. Values carry the rendered
/// precision. Throws Errc::SchemaMismatch.
Report parse_report_csv(std::string_view text);

}  // namespace hcbr
