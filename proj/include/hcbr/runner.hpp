#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hcbr/model.hpp"
#include "hcbr/prompt.hpp"
#include "hcbr/scenariogen.hpp"

namespace hcbr {

/// One line of a responses file.
struct ResponseRecord {
  std::size_t id = 0;
  Task task = Task::Task1;
  std::string model;
  std::string prompt_hash;
  std::string response;
  std::optional<std::uint64_t> reasoning_tokens;
  std::uint64_t completion_tokens = 0;
  std::int64_t latency_ms = 0;
  std::string finish_reason;
  bool truncated = false;

  friend bool operator==(const ResponseRecord&, const ResponseRecord&) = default;
};

nlohmann::json response_record_to_json(const ResponseRecord& r);
ResponseRecord response_record_from_json(const nlohmann::json& j);

/// Missing file = no records. Bad lines throw Errc::MalformedLine.
std::vector<ResponseRecord> load_responses(const std::filesystem::path& path);

struct RunOptions {
  Task task = Task::Task1;
  Task2Schema schema = Task2Schema::Pair;
  const OneShotExample* one_shot = nullptr;  // null = default_one_shot()
  std::size_t workers = 4;
};

struct RunStats {
  std::size_t total = 0;
  std::size_t reused = 0;
  std::size_t queried = 0;
  std::size_t truncated = 0;
};

/// Prompt for one dataset instance under `opts`.
std::string instance_prompt(const InstanceRecord& inst, const RunOptions& opts);

/// Queries `client` for every instance and writes `out` in instance order.
/// Finished responses are appended to `out` + ".partial" as they arrive;
/// a rerun reuses records from both files whose prompt hash and model match,
/// so an interrupted run resumes where it stopped. The first client error
/// stops the run and is rethrown after the workers drain.
RunStats run_model(const std::vector<InstanceRecord>& instances, ChatClient& client,
                   const RunOptions& opts, const std::filesystem::path& out);

}  // namespace hcbr
