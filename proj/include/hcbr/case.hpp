#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hcbr/hierarchy.hpp"

namespace hcbr {

/// A set of factors with an optional outcome. The current case has no
/// outcome; a precedent has one. Factor indices refer to the hierarchy the
/// case was constructed against.
class Case {
 public:
  Case() = default;
  /// Throws Errc::ForeignFactor if any index is not a factor of `h`.
  /// Duplicates collapse.
  Case(const Hierarchy& h, std::vector<NodeIndex> factors, std::optional<Side> outcome = {});

  std::span<const NodeIndex> factors() const noexcept { return factors_; }
  std::size_t size() const noexcept { return factors_.size(); }
  bool empty() const noexcept { return factors_.empty(); }
  bool contains(NodeIndex f) const;
  const std::optional<Side>& outcome() const noexcept { return outcome_; }

  friend bool operator==(const Case&, const Case&) = default;

 private:
  std::vector<NodeIndex> factors_;
  std::optional<Side> outcome_;
};

/// Builds a case from labels; full or short canonical forms are accepted.
Case make_case(const Hierarchy& h, std::span<const std::string> labels,
               std::optional<Side> outcome = {});

/// {"factors": ["F6_Security-Measures(p)", ...], "outcome": "p"}; outcome is
/// omitted when absent.
nlohmann::json case_to_json(const Hierarchy& h, const Case& c);
Case case_from_json(const Hierarchy& h, const nlohmann::json& j);

/// "F6_Security-Measures(p), F23_Waiver-of-Confidentiality(d)"
std::string describe_case(const Hierarchy& h, const Case& c);

}  // namespace hcbr
