#include "hcbr/hierarchy.hpp"

#include <algorithm>
#include <functional>

#include "hcbr/error.hpp"

namespace hcbr {

std::string_view support_name(Support s) noexcept {
  switch (s) {
    case Support::None: return "none";
    case Support::Weak: return "weak";
    case Support::Strong: return "strong";
  }
  return "none";
}

bool level_pair_allowed(Level from, Level to) noexcept {
  if (from == Level::Factor) return to != Level::Factor;
  return static_cast<int>(from) <= static_cast<int>(to);
}

// ---------------------------------------------------------------------------
// Builder

void Hierarchy::Builder::mention(const NodeId& node, bool declared, std::size_t line) {
  if (node.level != Level::Factor && node.side) {
    throw Error(Errc::MalformedLine,
                "line " + std::to_string(line) + ": " + node.canonical() +
                    " is not a factor and cannot carry a side",
                line);
  }
  auto [it, inserted] = nodes_.try_emplace(node.key(), Pending{node, declared, line});
  if (inserted) return;

  Pending& p = it->second;
  p.declared = p.declared || declared;
  if (!node.name.empty()) {
    if (p.node.name.empty()) {
      p.node.name = node.name;
    } else if (p.node.name != node.name) {
      throw Error(Errc::MalformedLine,
                  "line " + std::to_string(line) + ": conflicting names for " +
                      node.short_label() + " ('" + p.node.name + "' vs '" + node.name + "')",
                  line);
    }
  }
  if (node.side) {
    if (!p.node.side) {
      p.node.side = node.side;
    } else if (*p.node.side != *node.side) {
      throw Error(Errc::MalformedLine,
                  "line " + std::to_string(line) + ": conflicting sides for F" +
                      std::to_string(node.number),
                  line);
    }
  }
}

Hierarchy::Builder& Hierarchy::Builder::declare(const NodeId& node, std::size_t line) {
  mention(node, true, line);
  return *this;
}

Hierarchy::Builder& Hierarchy::Builder::add_edge(const NodeId& from, const NodeId& to,
                                                 EdgeStrength strength, std::size_t line) {
  if (from.key() == to.key()) {
    throw Error(Errc::CycleDetected,
                "line " + std::to_string(line) + ": self-loop on " + from.short_label(), line,
                {from.short_label()});
  }
  if (!level_pair_allowed(from.level, to.level)) {
    throw Error(Errc::LevelViolation,
                "line " + std::to_string(line) + ": edge " + from.short_label() + " -> " +
                    to.short_label() + " decreases abstraction level",
                line);
  }
  mention(from, false, line);
  mention(to, false, line);

  auto key = std::make_pair(from.key(), to.key());
  auto [it, inserted] = edges_.try_emplace(key, PendingEdge{from.key(), to.key(), strength, line});
  if (!inserted && it->second.strength != strength) {
    throw Error(Errc::DuplicateEdge,
                "line " + std::to_string(line) + ": edge " + from.short_label() + " -> " +
                    to.short_label() + " already declared with a different strength on line " +
                    std::to_string(it->second.line),
                line);
  }
  return *this;
}

Hierarchy Hierarchy::Builder::build(bool require_declared) const {
  if (require_declared) {
    for (const auto& [key, e] : edges_) {
      for (const NodeKey& k : {e.from, e.to}) {
        const Pending& p = nodes_.at(k);
        if (!p.declared) {
          throw Error(Errc::UnknownNode,
                      "line " + std::to_string(e.line) + ": edge references undeclared node " +
                          p.node.short_label(),
                      e.line, {p.node.short_label()});
        }
      }
    }
  }

  Hierarchy h;
  h.nodes_.reserve(nodes_.size());
  for (const auto& [key, p] : nodes_) {
    if (key.level == Level::Factor && !p.node.side) {
      throw Error(Errc::MalformedLine,
                  "line " + std::to_string(p.first_line) + ": factor " + p.node.canonical() +
                      " has no side; write it as " + p.node.canonical() + "(p) or (d)",
                  p.first_line);
    }
    h.by_key_.emplace(key, NodeIndex{static_cast<std::uint32_t>(h.nodes_.size())});
    h.nodes_.push_back(p.node);
  }

  // Map order on (from, to) keys equals (source, target) index order.
  h.edges_.reserve(edges_.size());
  for (const auto& [key, e] : edges_) {
    h.edges_.push_back(Edge{h.by_key_.at(e.from), h.by_key_.at(e.to), e.strength});
  }
  h.edge_offsets_.assign(h.nodes_.size() + 1, 0);
  for (const Edge& e : h.edges_) ++h.edge_offsets_[e.source.value + 1];
  for (std::size_t i = 1; i < h.edge_offsets_.size(); ++i) {
    h.edge_offsets_[i] += h.edge_offsets_[i - 1];
  }

  // Kahn's algorithm; leftovers mean a cycle.
  const std::size_t n = h.nodes_.size();
  std::vector<std::uint32_t> indegree(n, 0);
  for (const Edge& e : h.edges_) ++indegree[e.target.value];
  std::vector<std::uint32_t> queue;
  for (std::uint32_t i = 0; i < n; ++i) {
    if (indegree[i] == 0) queue.push_back(i);
  }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    for (const Edge& e : h.out_edges(NodeIndex{queue[head]})) {
      if (--indegree[e.target.value] == 0) queue.push_back(e.target.value);
    }
  }
  if (queue.size() != n) {
    // Every residual node keeps a residual predecessor, so walking backwards
    // must eventually repeat a node.
    std::vector<int> seen_at(n, -1);
    std::vector<std::uint32_t> walk;
    std::uint32_t cur = 0;
    while (indegree[cur] == 0) ++cur;
    while (seen_at[cur] < 0) {
      seen_at[cur] = static_cast<int>(walk.size());
      walk.push_back(cur);
      for (const Edge& e : h.edges_) {
        if (e.target.value == cur && indegree[e.source.value] > 0) {
          cur = e.source.value;
          break;
        }
      }
    }
    std::vector<std::string> cycle;
    std::string msg = "hierarchy contains a cycle:";
    for (std::size_t i = walk.size(); i-- > static_cast<std::size_t>(seen_at[cur]);) {
      cycle.push_back(h.nodes_[walk[i]].short_label());
      msg += " " + cycle.back() + " ->";
    }
    msg += " " + cycle.front();
    throw Error(Errc::CycleDetected, msg, 0, std::move(cycle));
  }
  h.topo_ = std::move(queue);
  h.compute_support();
  return h;
}

// ---------------------------------------------------------------------------
// Hierarchy

void Hierarchy::compute_support() {
  const std::size_t n = nodes_.size();
  support_.assign(n * n, Support::None);
  // Sinks first, so every successor row is final before it is read.
  for (auto it = topo_.rbegin(); it != topo_.rend(); ++it) {
    const std::uint32_t u = *it;
    Support* row = &support_[u * n];
    for (const Edge& e : out_edges(NodeIndex{u})) {
      const auto via = static_cast<Support>(e.strength);
      const std::uint32_t v = e.target.value;
      row[v] = std::max(row[v], via);
      const Support* next = &support_[v * n];
      for (std::size_t t = 0; t < n; ++t) {
        if (next[t] != Support::None) {
          row[t] = std::max(row[t], std::min(via, next[t]));
        }
      }
    }
  }
}

void Hierarchy::check_index(NodeIndex i) const {
  if (i.value >= nodes_.size()) {
    throw Error(Errc::UnknownNode, "node index " + std::to_string(i.value) + " out of range");
  }
}

std::span<const Edge> Hierarchy::out_edges(NodeIndex i) const {
  check_index(i);
  return std::span<const Edge>(edges_).subspan(edge_offsets_[i.value],
                                                edge_offsets_[i.value + 1] - edge_offsets_[i.value]);
}

std::optional<NodeIndex> Hierarchy::find(NodeKey key) const {
  auto it = by_key_.find(key);
  if (it == by_key_.end()) return std::nullopt;
  return it->second;
}

std::optional<NodeIndex> Hierarchy::find(std::string_view label) const {
  auto parsed = parse_node_label(label);
  if (!parsed) return std::nullopt;
  auto idx = find(parsed->key());
  if (!idx) return std::nullopt;
  const NodeId& n = nodes_[idx->value];
  if (parsed->side && parsed->side != n.side) return std::nullopt;
  if (!parsed->name.empty() && parsed->name != n.name) return std::nullopt;
  return idx;
}

NodeIndex Hierarchy::index_of(std::string_view label) const {
  auto idx = find(label);
  if (!idx) {
    throw Error(Errc::UnknownNode, "unknown node '" + std::string(label) + "'", 0,
                {std::string(label)});
  }
  return *idx;
}

std::vector<NodeIndex> Hierarchy::factors() const {
  std::vector<NodeIndex> out;
  for (std::uint32_t i = 0; i < nodes_.size() && nodes_[i].level == Level::Factor; ++i) {
    out.push_back(NodeIndex{i});
  }
  return out;
}

bool Hierarchy::is_factor(NodeIndex i) const {
  return i.value < nodes_.size() && nodes_[i.value].level == Level::Factor;
}

Side Hierarchy::side_of(NodeIndex factor) const {
  check_index(factor);
  const NodeId& n = nodes_[factor.value];
  if (!n.side) {
    throw Error(Errc::ForeignFactor, n.canonical() + " is not a factor");
  }
  return *n.side;
}

std::vector<NodeIndex> Hierarchy::ancestors(NodeIndex i) const {
  check_index(i);
  const std::size_t n = nodes_.size();
  std::vector<NodeIndex> out;
  for (std::uint32_t t = 0; t < n; ++t) {
    if (support_[i.value * n + t] != Support::None) out.push_back(NodeIndex{t});
  }
  return out;
}

bool Hierarchy::is_ancestor(NodeIndex from, NodeIndex target) const {
  return support_strength(from, target) != Support::None;
}

Support Hierarchy::support_strength(NodeIndex from, NodeIndex target) const {
  check_index(from);
  check_index(target);
  return support_[from.value * nodes_.size() + target.value];
}

std::vector<NodeIndex> Hierarchy::topological_order() const {
  std::vector<NodeIndex> out;
  out.reserve(topo_.size());
  for (auto v : topo_) out.push_back(NodeIndex{v});
  return out;
}

}  // namespace hcbr
