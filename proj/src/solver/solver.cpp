#include "hcbr/solver.hpp"

#include <algorithm>
#include <exception>

#include "hcbr/error.hpp"

namespace hcbr {

namespace {

void check_case_factors(const Hierarchy& h, const Case& c) {
  for (NodeIndex f : c.factors()) {
    if (!h.is_factor(f)) {
      throw Error(Errc::ForeignFactor,
                  "case refers to node index " + std::to_string(f.value) +
                      ", which is not a factor of this hierarchy");
    }
  }
}

void require_member(const Case& host, const Hierarchy& h, NodeIndex factor) {
  if (!host.contains(factor)) {
    throw Error(Errc::ForeignFactor, h.node(factor).short_label() + " is not in the host case");
  }
}

}  // namespace

std::vector<Distinction> identify_distinctions(const Hierarchy& h, const Case& current,
                                               const Case& precedent) {
  if (!precedent.outcome()) {
    throw Error(Errc::MissingOutcome, "precedent has no outcome");
  }
  check_case_factors(h, current);
  check_case_factors(h, precedent);
  const Side winner = *precedent.outcome();

  std::vector<Distinction> out;
  for (NodeIndex f : precedent.factors()) {
    const Side s = h.side_of(f);
    if (!current.contains(f) && s == winner) {
      out.push_back({f, DistinctionKind::PresentInPrecedent, s});
    }
  }
  for (NodeIndex f : current.factors()) {
    const Side s = h.side_of(f);
    if (!precedent.contains(f) && s != winner) {
      out.push_back({f, DistinctionKind::PresentInCurrent, s});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool is_blocked(const Case& host, const Hierarchy& h, NodeIndex factor, NodeIndex target) {
  require_member(host, h, factor);
  const Support own = h.support_strength(factor, target);
  if (own == Support::None) {
    throw Error(Errc::NoPath, h.node(target).short_label() + " is not an ancestor of " +
                                  h.node(factor).short_label());
  }
  if (own == Support::Strong) return false;
  const Side side = h.side_of(factor);
  return std::any_of(host.factors().begin(), host.factors().end(), [&](NodeIndex g) {
    return h.side_of(g) != side && h.support_strength(g, target) == Support::Strong;
  });
}

bool has_effective_support(const Case& host, const Hierarchy& h, NodeIndex factor,
                           NodeIndex target) {
  switch (h.support_strength(factor, target)) {
    case Support::None: return false;
    case Support::Strong: return true;
    case Support::Weak: return !is_blocked(host, h, factor, target);
  }
  return false;
}

std::vector<NodeIndex> effective_supporters(const Case& host, const Hierarchy& h, NodeIndex target,
                                            Side side) {
  if (target.value >= h.size()) {
    throw Error(Errc::UnknownNode, "node index " + std::to_string(target.value) + " out of range");
  }
  std::vector<NodeIndex> out;
  for (NodeIndex f : host.factors()) {
    if (h.side_of(f) == side && has_effective_support(host, h, f, target)) out.push_back(f);
  }
  return out;
}

RoleAnalysis analyze_distinction(const Hierarchy& h, const Case& current, const Case& precedent,
                                 const Distinction& d) {
  const auto all = identify_distinctions(h, current, precedent);
  if (!std::binary_search(all.begin(), all.end(), d)) {
    throw Error(Errc::NotADistinction,
                (d.factor.value < h.size() ? h.node(d.factor).short_label() : std::string("?")) +
                    " is not a distinction of this scenario");
  }
  const Case& host = d.host() == CaseRole::Precedent ? precedent : current;
  const Case& other = d.host() == CaseRole::Precedent ? current : precedent;

  RoleAnalysis r;
  r.distinction = d;
  for (NodeIndex target : h.ancestors(d.factor)) {
    if (!has_effective_support(host, h, d.factor, target)) continue;
    const auto supporters = effective_supporters(other, h, target, d.side);
    if (supporters.empty()) {
      r.emphasis_witnesses.push_back(target);
    }
    for (NodeIndex alt : supporters) {
      if (alt != d.factor) r.downplay_witnesses.emplace_back(target, alt);
    }
  }
  r.can_be_emphasized = !r.emphasis_witnesses.empty();
  r.can_be_downplayed = !r.downplay_witnesses.empty();
  return r;
}

std::vector<Distinction> significant_distinctions(const Hierarchy& h, const Case& current,
                                                  const Case& precedent) {
  std::vector<Distinction> out;
  for (const Distinction& d : identify_distinctions(h, current, precedent)) {
    if (analyze_distinction(h, current, precedent, d).significant()) out.push_back(d);
  }
  return out;
}

GroundTruth solve_all(const Scenario& scenario) {
  if (!scenario.hierarchy) throw Error(Errc::InvalidConfig, "scenario has no hierarchy");
  const Hierarchy& h = *scenario.hierarchy;
  GroundTruth gt;
  gt.distinctions = identify_distinctions(h, scenario.current, scenario.precedent);
  for (const Distinction& d : gt.distinctions) {
    RoleAnalysis r = analyze_distinction(h, scenario.current, scenario.precedent, d);
    if (r.significant()) gt.significant.push_back(d);
    gt.roles.emplace(d, std::move(r));
  }
  return gt;
}

std::vector<GroundTruth> solve_batch_serial(std::span<const Scenario> scenarios) {
  std::vector<GroundTruth> out;
  out.reserve(scenarios.size());
  for (const Scenario& s : scenarios) out.push_back(solve_all(s));
  return out;
}

std::vector<GroundTruth> solve_batch(std::span<const Scenario> scenarios) {
  const auto n = static_cast<std::ptrdiff_t>(scenarios.size());
  std::vector<GroundTruth> out(scenarios.size());
  std::vector<std::exception_ptr> errors(scenarios.size());

#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[i] = solve_all(scenarios[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }

  // Report the lowest failing index so the error is schedule-independent.
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::optional<Distinction> find_distinction(const Hierarchy& h, const Case& current,
                                            const Case& precedent, std::string_view label) {
  auto idx = h.find(label);
  if (!idx) return std::nullopt;
  for (const Distinction& d : identify_distinctions(h, current, precedent)) {
    if (d.factor == *idx) return d;
  }
  return std::nullopt;
}

std::string distinction_label(const Hierarchy& h, const Distinction& d) {
  return h.node(d.factor).short_label();
}

nlohmann::json ground_truth_to_json(const Hierarchy& h, const GroundTruth& gt) {
  auto labels = [&h](const std::vector<Distinction>& ds) {
    std::vector<std::string> v;
    for (const Distinction& d : ds) v.push_back(distinction_label(h, d));
    std::sort(v.begin(), v.end());
    return nlohmann::json(v);
  };
  nlohmann::json roles = nlohmann::json::object();
  for (const auto& [d, r] : gt.roles) {
    roles[distinction_label(h, d)] = {{"emphasize", r.can_be_emphasized},
                                      {"downplay", r.can_be_downplayed}};
  }
  return {{"task1", labels(gt.distinctions)}, {"task2", std::move(roles)},
          {"task3", labels(gt.significant)}};
}

}  // namespace hcbr
