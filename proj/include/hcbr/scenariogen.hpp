#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hcbr/rng.hpp"
#include "hcbr/solver.hpp"

namespace hcbr {

enum class TaskFocus : std::uint8_t { Task1, Task2, Task3, Mixed };

std::string_view task_focus_name(TaskFocus f) noexcept;
std::optional<TaskFocus> parse_task_focus(std::string_view s) noexcept;

struct GenConstraints {
  bool require_distinction = true;
  bool require_blocking_instance = false;
  bool require_emphasis_opportunity = false;
  bool require_downplay_opportunity = false;
  /// Bounds on |current ∩ precedent|; unconstrained when absent.
  std::optional<std::size_t> min_overlap;
  std::optional<std::size_t> max_overlap;

  friend bool operator==(const GenConstraints&, const GenConstraints&) = default;
};

struct GenConfig {
  std::size_t current_factor_count = 4;
  std::size_t precedent_factor_count = 4;
  std::size_t instance_count = 253;
  std::uint64_t seed = 0;
  TaskFocus task_focus = TaskFocus::Mixed;
  std::size_t max_rejections = 10'000;
  GenConstraints constraints;

  /// Throws Errc::InvalidConfig.
  void validate(const Hierarchy& h) const;

  friend bool operator==(const GenConfig&, const GenConfig&) = default;
};

nlohmann::json gen_config_to_json(const GenConfig& cfg);
GenConfig gen_config_from_json(const nlohmann::json& j);

struct Instance {
  std::size_t id = 0;
  Scenario scenario;
  GroundTruth truth;
};

struct Dataset {
  std::string hierarchy_fingerprint;
  GenConfig config;
  std::vector<Instance> instances;
};

/// One rejection-sampled scenario drawn from `stream`. Throws
/// Errc::ConstraintsUnsatisfiable once `cfg.max_rejections` draws fail.
Instance generate_scenario(const std::shared_ptr<const Hierarchy>& h, const GenConfig& cfg,
                           RandomStream& stream, std::size_t id = 0);

/// Instance i is drawn from RandomStream(cfg.seed, i), so the result does not
/// depend on thread count or schedule. Parallel over instances with OpenMP.
Dataset generate_dataset(const std::shared_ptr<const Hierarchy>& h, const GenConfig& cfg);
/// Single-threaded reference; must produce an identical Dataset.
Dataset generate_dataset_serial(const std::shared_ptr<const Hierarchy>& h, const GenConfig& cfg);

/// True when some factor of either case has blocked support for an ancestor.
bool has_blocking_instance(const Hierarchy& h, const Scenario& s);

// ---------------------------------------------------------------------------
// Dataset files: JSON lines, one instance per line
//   {"id":..,"hierarchy":<fingerprint>,"current":{..},"precedent":{..},
//    "target_distinction":"F6(p)"|null,"ground_truth":{..}}
// The generator config is recorded in the run manifest, not in the file.

nlohmann::json instance_to_json(const Instance& inst);
void write_dataset(std::ostream& out, const Dataset& d);

/// An instance line as read back, with its ground truth kept verbatim.
struct InstanceRecord {
  std::size_t id = 0;
  Scenario scenario;
  nlohmann::json ground_truth;
};

struct DatasetFile {
  std::vector<InstanceRecord> instances;
};

/// Reads a dataset against `h`. An empty file is an empty dataset. A line
/// from another hierarchy throws Errc::SchemaMismatch; any other bad line
/// throws Errc::MalformedLine. Both carry the line number.
DatasetFile read_dataset(std::istream& in, const std::shared_ptr<const Hierarchy>& h);
DatasetFile load_dataset(const std::filesystem::path& path,
                         const std::shared_ptr<const Hierarchy>& h);

}  // namespace hcbr
