#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hcbr/node.hpp"

namespace hcbr {

enum class EdgeStrength : std::uint8_t { Weak = 1, Strong = 2 };

/// Strength of the best path between two nodes. Ordered: None < Weak < Strong.
enum class Support : std::uint8_t { None = 0, Weak = 1, Strong = 2 };

std::string_view support_name(Support s) noexcept;

struct Edge {
  NodeIndex source;
  NodeIndex target;
  EdgeStrength strength = EdgeStrength::Strong;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// True for F->C, F->I, C->C, C->I, I->I.
bool level_pair_allowed(Level from, Level to) noexcept;

/// Immutable factor/concern/issue DAG.
///
/// Nodes are stored sorted by (level, number) so that a NodeIndex is stable for
/// a given node set. Best-path support between every ordered pair is computed
/// once at construction; `support_strength` and `ancestors` are lookups.
class Hierarchy {
 public:
  class Builder;

  Hierarchy() = default;

  std::size_t size() const noexcept { return nodes_.size(); }
  bool empty() const noexcept { return nodes_.empty(); }

  const NodeId& node(NodeIndex i) const { return nodes_.at(i.value); }
  std::span<const NodeId> nodes() const noexcept { return nodes_; }

  /// Edges sorted by (source, target).
  std::span<const Edge> edges() const noexcept { return edges_; }
  std::span<const Edge> out_edges(NodeIndex i) const;

  std::optional<NodeIndex> find(NodeKey key) const;
  /// Accepts full or short labels ("F6_Security-Measures(p)" or "F6(p)").
  /// A side suffix, when given, must match the node's side.
  std::optional<NodeIndex> find(std::string_view label) const;
  /// As `find`, throwing Errc::UnknownNode.
  NodeIndex index_of(std::string_view label) const;

  std::vector<NodeIndex> factors() const;
  bool is_factor(NodeIndex i) const;
  Side side_of(NodeIndex factor) const;

  /// All nodes reachable through one or more edges, sorted by index.
  std::vector<NodeIndex> ancestors(NodeIndex i) const;
  bool is_ancestor(NodeIndex from, NodeIndex target) const;

  /// Strong if some path is all-strong, Weak if paths exist but none is
  /// all-strong, None otherwise. `from == target` is always None.
  Support support_strength(NodeIndex from, NodeIndex target) const;

  std::vector<NodeIndex> topological_order() const;

  friend bool operator==(const Hierarchy& a, const Hierarchy& b) {
    return a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
  }

 private:
  void check_index(NodeIndex i) const;
  void compute_support();

  std::vector<NodeId> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::uint32_t> edge_offsets_;
  std::map<NodeKey, NodeIndex> by_key_;
  std::vector<std::uint32_t> topo_;
  // size() x size(), row = source.
  std::vector<Support> support_;
};

/// Accumulates nodes and edges, merging repeated node mentions. All errors
/// carry the 1-based source line passed in (0 when built programmatically).
class Hierarchy::Builder {
 public:
  /// Explicit declaration. Merges name/side into any earlier mention.
  Builder& declare(const NodeId& node, std::size_t line = 0);
  /// Adds an edge, implicitly mentioning both endpoints.
  Builder& add_edge(const NodeId& from, const NodeId& to, EdgeStrength strength,
                    std::size_t line = 0);

  /// Validates and freezes. With `require_declared`, every edge endpoint must
  /// have been passed to `declare`.
  Hierarchy build(bool require_declared = false) const;

 private:
  struct Pending {
    NodeId node;
    bool declared = false;
    std::size_t first_line = 0;
  };
  struct PendingEdge {
    NodeKey from;
    NodeKey to;
    EdgeStrength strength;
    std::size_t line;
  };

  void mention(const NodeId& node, bool declared, std::size_t line);

  std::map<NodeKey, Pending> nodes_;
  std::map<std::pair<NodeKey, NodeKey>, PendingEdge> edges_;
};

}  // namespace hcbr
