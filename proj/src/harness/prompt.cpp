#include "hcbr/prompt.hpp"

#include <algorithm>

#include "hcbr/error.hpp"
#include "hcbr/hash.hpp"
#include "hcbr/mermaid.hpp"

namespace hcbr {

std::string_view task_name(Task t) noexcept {
  switch (t) {
    case Task::Task1: return "1";
    case Task::Task2: return "2";
    case Task::Task3: return "3";
  }
  return "?";
}

std::optional<Task> parse_task(std::string_view s) noexcept {
  if (s == "1" || s == "task1") return Task::Task1;
  if (s == "2" || s == "task2") return Task::Task2;
  if (s == "3" || s == "task3") return Task::Task3;
  return std::nullopt;
}

std::string_view task2_schema_name(Task2Schema s) noexcept {
  return s == Task2Schema::Pair ? "pair" : "significance";
}

std::optional<Task2Schema> parse_task2_schema(std::string_view s) noexcept {
  if (s == "pair") return Task2Schema::Pair;
  if (s == "significance") return Task2Schema::Significance;
  return std::nullopt;
}

namespace {

constexpr std::string_view kDistinctionDefinition =
    "A distinction is a factor present in only one of the two cases that makes C2 a weaker "
    "analogy for C1. Distinctions come in exactly two types:\n"
    "1. Type 1 distinction: a factor favoring the side that won C2, present in C2 and absent "
    "from C1.\n"
    "2. Type 2 distinction: a factor favoring the side that lost C2, present in C1 and absent "
    "from C2.\n";

constexpr std::string_view kHierarchyDefinitions =
    "- Factors: each factor favors the plaintiff (p) or the defendant (d) and is written "
    "F<number>(p) or F<number>(d), optionally with a descriptive name after an underscore. "
    "Factors form the bottom level of the hierarchy, concerns (C) the middle level and "
    "issues (I) the top level.\n"
    "- Paths: `-->` is a strong edge and `-.->` a weak edge. A path is strong only if every "
    "edge on it is strong; otherwise it is weak.\n"
    "- Blocking: inside one case, a factor's weak path to a node is blocked when a factor of "
    "the opposing side in the same case has a strong path to that node.\n"
    "- Effective support: a factor effectively supports a concern or issue if its path to it "
    "is strong, or weak and not blocked.\n"
    "- Emphasis: a distinction can be emphasized if it effectively supports some concern or "
    "issue for which the other case has no effective support from a factor of the same side.\n"
    "- Downplay: a distinction can be downplayed if it effectively supports some concern or "
    "issue for which the other case has effective support from another factor of the same "
    "side.\n"
    "- Significance: a distinction is significant if it can be emphasized and cannot be "
    "downplayed.\n";

std::string goal(Task task) {
  switch (task) {
    case Task::Task1:
      return "Find every distinction between a current case (C1) and a precedent case (C2).\n";
    case Task::Task2:
      return "Decide the argumentative roles of one given distinction between a current case (C1) "
             "and a precedent case (C2). Cases are sets of factors. The factors, concerns and "
             "issues form a hierarchy, given as a Mermaid flowchart whose edges point from a node "
             "to the node it supports.\n";
    case Task::Task3:
      return "Find every significant distinction between a current case (C1) and a precedent "
             "case (C2). Cases are sets of factors. The factors, concerns and issues form a "
             "hierarchy, given as a Mermaid flowchart whose edges point from a node to the node "
             "it supports.\n";
  }
  return {};
}

std::string definitions(Task task) {
  std::string out(kDistinctionDefinition);
  if (task != Task::Task1) out += kHierarchyDefinitions;
  return out;
}

std::string steps(Task task) {
  switch (task) {
    case Task::Task1:
      return "1. Read which side won C2; the other side lost.\n"
             "2. Collect the Type 1 distinctions: factors in C2 that favor the winner and are not "
             "in C1.\n"
             "3. Collect the Type 2 distinctions: factors in C1 that favor the loser and are not "
             "in C2.\n"
             "4. Report both lists together.\n";
    case Task::Task2:
      return "1. List the concerns and issues the target distinction effectively supports in "
             "its own case.\n"
             "2. For each of them, check whether the other case has effective support from a "
             "factor of the same side.\n"
             "3. Emphasis holds if at least one of them lacks such support; downplay holds if at "
             "least one of them has it.\n"
             "4. The distinction is significant if emphasis holds and downplay does not.\n";
    case Task::Task3:
      return "1. Find all distinctions between C1 and C2.\n"
             "2. For each distinction, list the concerns and issues it effectively supports and "
             "check emphasis and downplay against the other case.\n"
             "3. Keep the distinctions that can be emphasized and cannot be downplayed.\n";
  }
  return {};
}

std::string output_format(Task task, Task2Schema schema) {
  switch (task) {
    case Task::Task1:
      return "Answer with a JSON object: {\"distinctions\": [\"F6(p)\", \"F19(d)\"]}\n";
    case Task::Task2:
      return schema == Task2Schema::Pair
                 ? "Answer with a JSON object: {\"emphasize\": true, \"downplay\": false}\n"
                 : "Answer with a JSON object: {\"significance\": false}\n";
    case Task::Task3:
      return "Answer with a JSON object: {\"significant_distinctions\": [\"F6(p)\"]}\n";
  }
  return {};
}

std::string instruction(Task task, const Hierarchy& h, const std::optional<Distinction>& target) {
  switch (task) {
    case Task::Task1:
      return "Identify all distinctions between C1 and C2. Answer in the specified JSON format.\n";
    case Task::Task2:
      return "Analyze the argumentative roles of the distinction `" + distinction_label(h, *target) +
             "`. Answer in the specified JSON format.\n";
    case Task::Task3:
      return "Identify all significant distinctions between C1 and C2. Answer in the specified "
             "JSON format.\n";
  }
  return {};
}

std::string input_block(Task task, const Scenario& s, const std::optional<Distinction>& target) {
  const Hierarchy& h = *s.hierarchy;
  std::string out = instruction(task, h, target);
  out += "\nFactor Hierarchy:\n```mermaid\n";
  out += serialize_hierarchy(h);
  out += "```\n\nCurrent Case (C1):\n";
  out += describe_case(h, s.current);
  out += "\n\nPrecedent Case (C2):\n";
  out += describe_case(h, s.precedent);
  out += "\nC2 was won by: ";
  out += side_word(*s.precedent.outcome());
  out += " (";
  out += side_code(*s.precedent.outcome());
  out += ")\n";
  return out;
}

std::string join_labels(const Hierarchy& h, const std::vector<NodeIndex>& nodes) {
  std::string out;
  for (NodeIndex n : nodes) {
    if (!out.empty()) out += ", ";
    out += h.node(n).short_label();
  }
  return out.empty() ? "none" : out;
}

std::string json_labels(const Hierarchy& h, std::vector<Distinction> ds) {
  std::vector<std::string> labels;
  for (const Distinction& d : ds) labels.push_back(distinction_label(h, d));
  std::sort(labels.begin(), labels.end());
  return nlohmann::json(labels).dump();
}

/// Explanation of one distinction's roles, built from the solver's witnesses.
std::string explain_roles(const Scenario& s, const Distinction& d, const RoleAnalysis& r) {
  const Hierarchy& h = *s.hierarchy;
  const Case& host = d.host() == CaseRole::Precedent ? s.precedent : s.current;
  std::vector<NodeIndex> scope;
  for (NodeIndex t : h.ancestors(d.factor)) {
    if (has_effective_support(host, h, d.factor, t)) scope.push_back(t);
  }
  const std::string label = distinction_label(h, d);
  const char* other = d.host() == CaseRole::Precedent ? "C1" : "C2";
  std::string out = label + " effectively supports: " + join_labels(h, scope) + ".";
  if (!r.emphasis_witnesses.empty()) {
    out += std::string(" ") + other + " has no same-side effective support for " +
           join_labels(h, r.emphasis_witnesses) + ", so it can be emphasized.";
  } else {
    out += " It cannot be emphasized.";
  }
  if (!r.downplay_witnesses.empty()) {
    out += std::string(" ") + other + " has alternative support:";
    for (const auto& [node, alt] : r.downplay_witnesses) {
      out += " " + h.node(alt).short_label() + " for " + h.node(node).short_label() + ";";
    }
    out.back() = ',';
    out += " so it can be downplayed.";
  } else {
    out += " It cannot be downplayed.";
  }
  out += r.significant() ? " Significant.\n" : " Not significant.\n";
  return out;
}

std::string one_shot_block(Task task, const OneShotExample& ex, Task2Schema schema) {
  const Scenario& s = ex.scenario;
  const Hierarchy& h = *s.hierarchy;
  const GroundTruth gt = solve_all(s);
  std::string out = "Example input:\n";
  out += input_block(task, s, s.target);
  out += "\nExample reasoning:\n";
  switch (task) {
    case Task::Task1: {
      const Side winner = *s.precedent.outcome();
      std::vector<Distinction> t1, t2;
      for (const Distinction& d : gt.distinctions) {
        (d.kind == DistinctionKind::PresentInPrecedent ? t1 : t2).push_back(d);
      }
      out += "C2 was won by " + std::string(side_code(winner)) + ", so " +
             std::string(side_code(opposite(winner))) + " lost. Type 1: " +
             json_labels(h, t1) + ". Type 2: " + json_labels(h, t2) + ".\n";
      out += "Example answer: {\"distinctions\": " + json_labels(h, gt.distinctions) + "}\n";
      break;
    }
    case Task::Task2: {
      const RoleAnalysis& r = gt.roles.at(*s.target);
      out += explain_roles(s, *s.target, r);
      out += schema == Task2Schema::Pair
                 ? std::string("Example answer: {\"emphasize\": ") +
                       (r.can_be_emphasized ? "true" : "false") +
                       ", \"downplay\": " + (r.can_be_downplayed ? "true" : "false") + "}\n"
                 : std::string("Example answer: {\"significance\": ") +
                       (r.significant() ? "true" : "false") + "}\n";
      break;
    }
    case Task::Task3: {
      out += "Distinctions: " + json_labels(h, gt.distinctions) + ".\n";
      for (const auto& [d, r] : gt.roles) out += explain_roles(s, d, r);
      out += "Example answer: {\"significant_distinctions\": " + json_labels(h, gt.significant) +
             "}\n";
      break;
    }
  }
  return out;
}

}  // namespace

const OneShotExample& default_one_shot() {
  static const OneShotExample example = [] {
    auto h = std::make_shared<const Hierarchy>(parse_hierarchy(
        "graph TD\n"
        "F4_Agreed-Not-To-Disclose(p) --> C121_Confidentiality-Agreement\n"
        "F5_Agreement-Not-Specific(d) -.-> C121_Confidentiality-Agreement\n"
        "C121_Confidentiality-Agreement --> C102_Efforts-To-Maintain-Secrecy\n"
        "F6_Security-Measures(p) --> C102_Efforts-To-Maintain-Secrecy\n"
        "F27_Disclosure-In-Public-Forum(d) -.-> C102_Efforts-To-Maintain-Secrecy\n"
        "C102_Efforts-To-Maintain-Secrecy --> I101_Trade-Secret\n"
        "F15_Unique-Product(p) --> C104_Information-Valuable\n"
        "C104_Information-Valuable --> I103_Information-Valuable\n"));
    const std::string current[] = {"F4(p)", "F27(d)"};
    const std::string precedent[] = {"F6(p)", "F5(d)", "F15(p)"};
    Scenario s{h, make_case(*h, current), make_case(*h, precedent, Side::Plaintiff), {}};
    s.target = find_distinction(*h, s.current, s.precedent, "F6(p)");
    return OneShotExample{std::move(s)};
  }();
  return example;
}

std::string build_prompt(Task task, const Scenario& scenario,
                         const std::optional<Distinction>& target, const OneShotExample& one_shot,
                         Task2Schema schema) {
  if (task == Task::Task2 && !target) {
    throw Error(Errc::MissingTarget, "Task 2 prompt needs a target distinction");
  }
  if (!scenario.hierarchy) throw Error(Errc::InvalidConfig, "scenario has no hierarchy");
  if (!scenario.precedent.outcome()) throw Error(Errc::MissingOutcome, "precedent has no outcome");
  if (task == Task::Task2 && !one_shot.scenario.target) {
    throw Error(Errc::MissingTarget, "one-shot example has no Task 2 target");
  }

  std::string out = "## Goal\n" + goal(task);
  out += "\n## Definitions\n" + definitions(task);
  out += "\n## Step-by-Step Process\n" + steps(task);
  out += "\n## One-shot Example\n" + one_shot_block(task, one_shot, schema);
  out += "\n## Output Format\n" + output_format(task, schema);
  out += "\n## Input\n" + input_block(task, scenario, task == Task::Task2 ? target : std::nullopt);
  return out;
}

std::string prompt_hash(std::string_view prompt) { return sha256_hex(prompt); }

}  // namespace hcbr
