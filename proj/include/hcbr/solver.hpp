#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hcbr/case.hpp"
#include "hcbr/hierarchy.hpp"

namespace hcbr {

enum class DistinctionKind : std::uint8_t {
  /// In the precedent, not in the current case, favors the precedent's winner.
  PresentInPrecedent,
  /// In the current case, not in the precedent, favors the precedent's loser.
  PresentInCurrent,
};

enum class CaseRole : std::uint8_t { Current, Precedent };

struct Distinction {
  NodeIndex factor;
  DistinctionKind kind = DistinctionKind::PresentInPrecedent;
  Side side = Side::Plaintiff;

  CaseRole host() const noexcept {
    return kind == DistinctionKind::PresentInPrecedent ? CaseRole::Precedent : CaseRole::Current;
  }

  friend auto operator<=>(const Distinction&, const Distinction&) = default;
};

struct RoleAnalysis {
  Distinction distinction;
  bool can_be_emphasized = false;
  bool can_be_downplayed = false;
  /// Concerns/issues the distinction effectively supports and the other case
  /// has no same-side effective supporter for.
  std::vector<NodeIndex> emphasis_witnesses;
  /// (concern/issue, alternative factor in the other case).
  std::vector<std::pair<NodeIndex, NodeIndex>> downplay_witnesses;

  bool significant() const noexcept { return can_be_emphasized && !can_be_downplayed; }

  friend bool operator==(const RoleAnalysis&, const RoleAnalysis&) = default;
};

struct GroundTruth {
  std::vector<Distinction> distinctions;            // task 1, sorted
  std::map<Distinction, RoleAnalysis> roles;        // task 2
  std::vector<Distinction> significant;             // task 3, sorted

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

/// A current case, a precedent, the hierarchy they are expressed in, and for
/// task 2 the distinction under analysis.
struct Scenario {
  std::shared_ptr<const Hierarchy> hierarchy;
  Case current;
  Case precedent;
  std::optional<Distinction> target;
};

std::vector<Distinction> identify_distinctions(const Hierarchy& h, const Case& current,
                                               const Case& precedent);

/// Weak support from `factor` to `target` neutralised by an opposing factor of
/// `host` with strong support. Throws Errc::NoPath if `target` is not an
/// ancestor of `factor`.
bool is_blocked(const Case& host, const Hierarchy& h, NodeIndex factor, NodeIndex target);

bool has_effective_support(const Case& host, const Hierarchy& h, NodeIndex factor,
                           NodeIndex target);

/// Factors of `host` favoring `side` with effective support for `target`.
std::vector<NodeIndex> effective_supporters(const Case& host, const Hierarchy& h, NodeIndex target,
                                            Side side);

/// Throws Errc::NotADistinction when `d` is not produced by
/// identify_distinctions for this pair.
RoleAnalysis analyze_distinction(const Hierarchy& h, const Case& current, const Case& precedent,
                                 const Distinction& d);

std::vector<Distinction> significant_distinctions(const Hierarchy& h, const Case& current,
                                                  const Case& precedent);

GroundTruth solve_all(const Scenario& scenario);

/// Solves independent scenarios with an OpenMP parallel loop. Output order
/// matches input order and equals `solve_batch_serial`.
std::vector<GroundTruth> solve_batch(std::span<const Scenario> scenarios);
std::vector<GroundTruth> solve_batch_serial(std::span<const Scenario> scenarios);

/// Resolves a label such as "F6(p)" to a distinction of the scenario.
std::optional<Distinction> find_distinction(const Hierarchy& h, const Case& current,
                                            const Case& precedent, std::string_view label);

std::string distinction_label(const Hierarchy& h, const Distinction& d);

/// {"task1": [...], "task2": {"F6(p)": {"emphasize": true, "downplay": false}},
///  "task3": [...]}; arrays sorted lexicographically.
nlohmann::json ground_truth_to_json(const Hierarchy& h, const GroundTruth& gt);

}  // namespace hcbr
