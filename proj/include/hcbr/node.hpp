#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace hcbr {

/// The party a factor favors.
enum class Side : std::uint8_t { Plaintiff, Defendant };

constexpr Side opposite(Side s) noexcept {
  return s == Side::Plaintiff ? Side::Defendant : Side::Plaintiff;
}

/// "p" or "d".
std::string_view side_code(Side s) noexcept;
std::string_view side_word(Side s) noexcept;
std::optional<Side> parse_side(std::string_view text) noexcept;

/// Abstraction level; declaration order is the sort order (factors first).
enum class Level : std::uint8_t { Factor, Concern, Issue };

char level_letter(Level l) noexcept;

/// Identity of a node within a hierarchy: level + number.
struct NodeKey {
  Level level = Level::Factor;
  std::uint32_t number = 0;

  friend auto operator<=>(const NodeKey&, const NodeKey&) = default;
};

/// A fully described node. `side` is present iff `level == Level::Factor`.
/// `name` may be empty when a document references a node only by number.
struct NodeId {
  Level level = Level::Factor;
  std::uint32_t number = 0;
  std::string name;
  std::optional<Side> side;

  NodeKey key() const noexcept { return {level, number}; }

  /// F6_Security-Measures(p), C102_Efforts-To-Maintain-Secrecy, I101.
  std::string canonical() const;
  /// F6(p), C102, I101. This is the form used in answers and ground truth.
  std::string short_label() const;

  friend bool operator==(const NodeId&, const NodeId&) = default;
};

/// Parses a node identifier of the form `[FCI]<n>(_<name>)?(\((p|d)\))?`.
/// Strict about case and characters; returns nullopt on any mismatch.
/// A side suffix on a concern or issue is rejected.
std::optional<NodeId> parse_node_label(std::string_view text);

/// Dense index of a node inside one Hierarchy.
struct NodeIndex {
  std::uint32_t value = 0;

  friend auto operator<=>(const NodeIndex&, const NodeIndex&) = default;
};

}  // namespace hcbr
