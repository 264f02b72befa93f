#include "hcbr/scenariogen.hpp"

#include <algorithm>
#include <exception>
#include <fstream>
#include <istream>
#include <ostream>

#include "hcbr/error.hpp"
#include "hcbr/mermaid.hpp"

namespace hcbr {

std::string_view task_focus_name(TaskFocus f) noexcept {
  switch (f) {
    case TaskFocus::Task1: return "1";
    case TaskFocus::Task2: return "2";
    case TaskFocus::Task3: return "3";
    case TaskFocus::Mixed: return "mixed";
  }
  return "mixed";
}

std::optional<TaskFocus> parse_task_focus(std::string_view s) noexcept {
  if (s == "1") return TaskFocus::Task1;
  if (s == "2") return TaskFocus::Task2;
  if (s == "3") return TaskFocus::Task3;
  if (s == "mixed") return TaskFocus::Mixed;
  return std::nullopt;
}

void GenConfig::validate(const Hierarchy& h) const {
  auto fail = [](const std::string& msg) { throw Error(Errc::InvalidConfig, msg); };
  const std::size_t n_factors = h.factors().size();
  if (current_factor_count == 0 || precedent_factor_count == 0) {
    fail("factor counts must be positive");
  }
  if (instance_count == 0) fail("instance count must be positive");
  if (max_rejections == 0) fail("max_rejections must be positive");
  if (current_factor_count > n_factors || precedent_factor_count > n_factors) {
    fail("factor counts exceed the " + std::to_string(n_factors) +
         " factors available in the hierarchy");
  }
  if (task_focus == TaskFocus::Task2 && !constraints.require_distinction) {
    fail("task 2 datasets need a target distinction; require_distinction must stay on");
  }
  const std::size_t max_possible = std::min(current_factor_count, precedent_factor_count);
  const std::size_t min_possible =
      current_factor_count + precedent_factor_count > n_factors
          ? current_factor_count + precedent_factor_count - n_factors
          : 0;
  const std::size_t lo = constraints.min_overlap.value_or(0);
  const std::size_t hi = constraints.max_overlap.value_or(max_possible);
  if (lo > hi || lo > max_possible || hi < min_possible) {
    fail("overlap bounds [" + std::to_string(lo) + ", " + std::to_string(hi) +
         "] are infeasible for these factor counts");
  }
}

nlohmann::json gen_config_to_json(const GenConfig& cfg) {
  nlohmann::json c{
      {"require_distinction", cfg.constraints.require_distinction},
      {"require_blocking_instance", cfg.constraints.require_blocking_instance},
      {"require_emphasis_opportunity", cfg.constraints.require_emphasis_opportunity},
      {"require_downplay_opportunity", cfg.constraints.require_downplay_opportunity},
      {"min_overlap", nullptr},
      {"max_overlap", nullptr},
  };
  if (cfg.constraints.min_overlap) c["min_overlap"] = *cfg.constraints.min_overlap;
  if (cfg.constraints.max_overlap) c["max_overlap"] = *cfg.constraints.max_overlap;
  return {
      {"current_factor_count", cfg.current_factor_count},
      {"precedent_factor_count", cfg.precedent_factor_count},
      {"instance_count", cfg.instance_count},
      {"seed", cfg.seed},
      {"task_focus", std::string(task_focus_name(cfg.task_focus))},
      {"max_rejections", cfg.max_rejections},
      {"constraints", std::move(c)},
  };
}

GenConfig gen_config_from_json(const nlohmann::json& j) {
  try {
    GenConfig cfg;
    cfg.current_factor_count = j.at("current_factor_count").get<std::size_t>();
    cfg.precedent_factor_count = j.at("precedent_factor_count").get<std::size_t>();
    cfg.instance_count = j.at("instance_count").get<std::size_t>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    auto focus = parse_task_focus(j.at("task_focus").get<std::string>());
    if (!focus) throw Error(Errc::SchemaMismatch, "unknown task_focus");
    cfg.task_focus = *focus;
    cfg.max_rejections = j.at("max_rejections").get<std::size_t>();
    const auto& c = j.at("constraints");
    cfg.constraints.require_distinction = c.at("require_distinction").get<bool>();
    cfg.constraints.require_blocking_instance = c.at("require_blocking_instance").get<bool>();
    cfg.constraints.require_emphasis_opportunity = c.at("require_emphasis_opportunity").get<bool>();
    cfg.constraints.require_downplay_opportunity = c.at("require_downplay_opportunity").get<bool>();
    if (!c.at("min_overlap").is_null()) cfg.constraints.min_overlap = c["min_overlap"].get<std::size_t>();
    if (!c.at("max_overlap").is_null()) cfg.constraints.max_overlap = c["max_overlap"].get<std::size_t>();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::SchemaMismatch, std::string("bad generator config: ") + e.what());
  }
}

bool has_blocking_instance(const Hierarchy& h, const Scenario& s) {
  for (const Case* c : {&s.current, &s.precedent}) {
    for (NodeIndex f : c->factors()) {
      for (NodeIndex target : h.ancestors(f)) {
        if (is_blocked(*c, h, f, target)) return true;
      }
    }
  }
  return false;
}

namespace {

std::size_t overlap(const Case& a, const Case& b) {
  std::size_t n = 0;
  for (NodeIndex f : a.factors()) n += b.contains(f) ? 1 : 0;
  return n;
}

enum Constraint : std::size_t {
  kOverlap,
  kDistinction,
  kBlocking,
  kEmphasis,
  kDownplay,
  kConstraintCount,
};

constexpr std::string_view kConstraintNames[kConstraintCount] = {
    "overlap_bounds", "require_distinction", "require_blocking_instance",
    "require_emphasis_opportunity", "require_downplay_opportunity"};

}  // namespace

Instance generate_scenario(const std::shared_ptr<const Hierarchy>& hp, const GenConfig& cfg,
                           RandomStream& stream, std::size_t id) {
  const Hierarchy& h = *hp;
  const std::vector<NodeIndex> pool = h.factors();
  const GenConstraints& want = cfg.constraints;
  std::size_t tally[kConstraintCount] = {};

  for (std::size_t attempt = 0; attempt < cfg.max_rejections; ++attempt) {
    auto cur = stream.sample<NodeIndex>(pool, cfg.current_factor_count);
    auto prec = stream.sample<NodeIndex>(pool, cfg.precedent_factor_count);
    const Side outcome = stream.coin() ? Side::Defendant : Side::Plaintiff;

    Instance inst;
    inst.id = id;
    inst.scenario.hierarchy = hp;
    inst.scenario.current = Case(h, std::move(cur));
    inst.scenario.precedent = Case(h, std::move(prec), outcome);

    bool ok = true;
    const std::size_t shared = overlap(inst.scenario.current, inst.scenario.precedent);
    if ((want.min_overlap && shared < *want.min_overlap) ||
        (want.max_overlap && shared > *want.max_overlap)) {
      ++tally[kOverlap];
      ok = false;
    }
    inst.truth = solve_all(inst.scenario);
    if (want.require_distinction && inst.truth.distinctions.empty()) {
      ++tally[kDistinction];
      ok = false;
    }
    if (want.require_blocking_instance && !has_blocking_instance(h, inst.scenario)) {
      ++tally[kBlocking];
      ok = false;
    }
    const auto any_role = [&](bool RoleAnalysis::*flag) {
      return std::any_of(inst.truth.roles.begin(), inst.truth.roles.end(),
                         [flag](const auto& kv) { return kv.second.*flag; });
    };
    if (want.require_emphasis_opportunity && !any_role(&RoleAnalysis::can_be_emphasized)) {
      ++tally[kEmphasis];
      ok = false;
    }
    if (want.require_downplay_opportunity && !any_role(&RoleAnalysis::can_be_downplayed)) {
      ++tally[kDownplay];
      ok = false;
    }
    if (!ok) continue;

    if (cfg.task_focus == TaskFocus::Task2 ||
        (cfg.task_focus == TaskFocus::Mixed && !inst.truth.distinctions.empty())) {
      const auto& ds = inst.truth.distinctions;
      inst.scenario.target = ds[static_cast<std::size_t>(stream.below(ds.size()))];
    }
    return inst;
  }

  std::string msg = "instance " + std::to_string(id) + ": no scenario satisfied the constraints in " +
                    std::to_string(cfg.max_rejections) + " draws; rejections:";
  std::vector<std::string> details;
  for (std::size_t c = 0; c < kConstraintCount; ++c) {
    if (tally[c] == 0) continue;
    msg += " " + std::string(kConstraintNames[c]) + "=" + std::to_string(tally[c]);
    details.push_back(std::string(kConstraintNames[c]) + "=" + std::to_string(tally[c]));
  }
  throw Error(Errc::ConstraintsUnsatisfiable, msg, 0, std::move(details));
}

Dataset generate_dataset_serial(const std::shared_ptr<const Hierarchy>& h, const GenConfig& cfg) {
  cfg.validate(*h);
  Dataset d;
  d.hierarchy_fingerprint = hierarchy_fingerprint(*h);
  d.config = cfg;
  d.instances.reserve(cfg.instance_count);
  for (std::size_t i = 0; i < cfg.instance_count; ++i) {
    RandomStream stream(cfg.seed, i);
    d.instances.push_back(generate_scenario(h, cfg, stream, i));
  }
  return d;
}

Dataset generate_dataset(const std::shared_ptr<const Hierarchy>& h, const GenConfig& cfg) {
  cfg.validate(*h);
  Dataset d;
  d.hierarchy_fingerprint = hierarchy_fingerprint(*h);
  d.config = cfg;
  d.instances.resize(cfg.instance_count);
  std::vector<std::exception_ptr> errors(cfg.instance_count);
  const auto n = static_cast<std::ptrdiff_t>(cfg.instance_count);

#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      RandomStream stream(cfg.seed, static_cast<std::uint64_t>(i));
      d.instances[i] = generate_scenario(h, cfg, stream, static_cast<std::size_t>(i));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }

  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return d;
}

// ---------------------------------------------------------------------------
// Files

nlohmann::json instance_to_json(const Instance& inst) {
  const Hierarchy& h = *inst.scenario.hierarchy;
  return {{"id", inst.id},
          {"hierarchy", hierarchy_fingerprint(h)},
          {"current", case_to_json(h, inst.scenario.current)},
          {"precedent", case_to_json(h, inst.scenario.precedent)},
          {"target_distinction", inst.scenario.target
                                     ? nlohmann::json(distinction_label(h, *inst.scenario.target))
                                     : nlohmann::json(nullptr)},
          {"ground_truth", ground_truth_to_json(h, inst.truth)}};
}

void write_dataset(std::ostream& out, const Dataset& d) {
  for (const Instance& inst : d.instances) out << instance_to_json(inst).dump() << '\n';
}

DatasetFile read_dataset(std::istream& in, const std::shared_ptr<const Hierarchy>& h) {
  DatasetFile file;
  std::string line;
  std::size_t line_no = 0;
  const std::string fingerprint = hierarchy_fingerprint(*h);

  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

    auto parsed = nlohmann::json::parse(line, nullptr, false);
    if (parsed.is_object() && parsed.contains("hierarchy") && parsed["hierarchy"] != fingerprint) {
      throw Error(Errc::SchemaMismatch,
                  "line " + std::to_string(line_no) +
                      ": instance was generated from a different hierarchy (fingerprint mismatch)",
                  line_no);
    }
    try {
      if (parsed.is_discarded()) throw std::invalid_argument("not valid JSON");
      const auto& j = parsed;
      if (!j.contains("hierarchy")) throw std::invalid_argument("missing hierarchy fingerprint");
      InstanceRecord rec;
      rec.id = j.at("id").get<std::size_t>();
      rec.scenario.hierarchy = h;
      rec.scenario.current = case_from_json(*h, j.at("current"));
      rec.scenario.precedent = case_from_json(*h, j.at("precedent"));
      const auto& target = j.at("target_distinction");
      if (!target.is_null()) {
        rec.scenario.target = find_distinction(*h, rec.scenario.current, rec.scenario.precedent,
                                               target.get<std::string>());
        if (!rec.scenario.target) {
          throw Error(Errc::NotADistinction, "target_distinction is not a distinction");
        }
      }
      rec.ground_truth = j.value("ground_truth", nlohmann::json());
      file.instances.push_back(std::move(rec));
    } catch (const std::exception& e) {
      throw Error(Errc::MalformedLine, "line " + std::to_string(line_no) + ": " + e.what(),
                  line_no);
    }
  }
  return file;
}

DatasetFile load_dataset(const std::filesystem::path& path,
                         const std::shared_ptr<const Hierarchy>& h) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  return read_dataset(in, h);
}

}  // namespace hcbr
