#include <gtest/gtest.h>

#include "brute_force.hpp"
#include "hcbr/error.hpp"
#include "hcbr/prompt.hpp"
#include "test_support.hpp"

using namespace hcbr;
using fixture::AppendixB;

namespace {

std::size_t section(const std::string& prompt, const char* heading) {
  return prompt.find(std::string("## ") + heading + "\n");
}

std::string input_section(const std::string& prompt) { return prompt.substr(section(prompt, "Input")); }

}  // namespace

TEST(BuildPrompt, TaskOneHasTwoTypeDefinitionAndEndsWithInput) {
  AppendixB ex;
  const std::string p = build_prompt(Task::Task1, ex.scenario(), std::nullopt, default_one_shot());
  EXPECT_NE(p.find("exactly two types"), std::string::npos);
  EXPECT_NE(p.find("Type 1 distinction"), std::string::npos);
  EXPECT_NE(p.find("Type 2 distinction"), std::string::npos);

  const std::string input = input_section(p);
  EXPECT_NE(input.find("F6_Security-Measures(p) --> C102_Efforts-To-Maintain-Secrecy"),
            std::string::npos);
  EXPECT_NE(input.find("Current Case (C1):\nF19_No-Security-Measures(d)\n"), std::string::npos);
  EXPECT_NE(input.find("F6_Security-Measures(p), F23_Waiver-of-Confidentiality(d)"),
            std::string::npos);
  const std::string tail = "C2 was won by: plaintiff (p)\n";
  ASSERT_GE(p.size(), tail.size());
  EXPECT_EQ(p.substr(p.size() - tail.size()), tail);
}

TEST(BuildPrompt, SectionsAppearInOrder) {
  AppendixB ex;
  for (Task t : {Task::Task1, Task::Task2, Task::Task3}) {
    auto s = ex.scenario();
    const auto target = find_distinction(*ex.h, s.current, s.precedent, "F6(p)");
    const std::string p = build_prompt(t, s, target, default_one_shot());
    std::size_t last = 0;
    for (const char* heading :
         {"Goal", "Definitions", "Step-by-Step Process", "One-shot Example", "Output Format", "Input"}) {
      const std::size_t at = section(p, heading);
      ASSERT_NE(at, std::string::npos) << heading;
      EXPECT_GE(at, last) << heading;
      last = at;
    }
    EXPECT_EQ(p.rfind("## "), section(p, "Input"));
  }
}

TEST(BuildPrompt, Deterministic) {
  AppendixB ex;
  for (Task t : {Task::Task1, Task::Task3}) {
    EXPECT_EQ(build_prompt(t, ex.scenario(), std::nullopt, default_one_shot()),
              build_prompt(t, ex.scenario(), std::nullopt, default_one_shot()));
  }
}

TEST(BuildPrompt, TaskTwoEmbedsTarget) {
  AppendixB ex;
  auto s = ex.scenario();
  const auto target = find_distinction(*ex.h, s.current, s.precedent, "F6(p)");
  ASSERT_TRUE(target);
  const std::string p = build_prompt(Task::Task2, s, target, default_one_shot());
  EXPECT_NE(input_section(p).find("the distinction `F6(p)`"), std::string::npos);
  EXPECT_NE(p.find("{\"emphasize\": true, \"downplay\": false}"), std::string::npos);

  const std::string sig =
      build_prompt(Task::Task2, s, target, default_one_shot(), Task2Schema::Significance);
  EXPECT_NE(sig.find("{\"significance\": false}"), std::string::npos);
  EXPECT_EQ(sig.find("\"emphasize\""), std::string::npos);
}

TEST(BuildPrompt, TaskTwoWithoutTargetThrows) {
  AppendixB ex;
  try {
    build_prompt(Task::Task2, ex.scenario(), std::nullopt, default_one_shot());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MissingTarget);
  }
}

TEST(BuildPrompt, TargetIgnoredOutsideTaskTwo) {
  AppendixB ex;
  auto s = ex.scenario();
  const auto target = find_distinction(*ex.h, s.current, s.precedent, "F19(d)");
  EXPECT_EQ(build_prompt(Task::Task3, s, target, default_one_shot()),
            build_prompt(Task::Task3, s, std::nullopt, default_one_shot()));
}

TEST(BuildPrompt, HierarchyDefinitionsOnlyWhereNeeded) {
  AppendixB ex;
  const std::string t1 = build_prompt(Task::Task1, ex.scenario(), std::nullopt, default_one_shot());
  const std::string t3 = build_prompt(Task::Task3, ex.scenario(), std::nullopt, default_one_shot());
  EXPECT_EQ(t1.find("Effective support:"), std::string::npos);
  EXPECT_NE(t3.find("Effective support:"), std::string::npos);
  EXPECT_NE(t3.find("Blocking:"), std::string::npos);
  EXPECT_NE(t3.find("{\"significant_distinctions\": "), std::string::npos);
}

// ============================================================================
// One-shot example
// ============================================================================

TEST(OneShot, AnswersAgreeWithOracle) {
  const OneShotExample& ex = default_one_shot();
  const auto truth = oracle::oracle_solve(ex.scenario);
  const Hierarchy& h = *ex.scenario.hierarchy;
  const auto role = [&](const char* label) {
    const auto d = find_distinction(h, ex.scenario.current, ex.scenario.precedent, label);
    EXPECT_TRUE(d) << label;
    const auto& r = truth.roles.at(*d);
    return std::pair{r.can_be_emphasized, r.can_be_downplayed};
  };
  EXPECT_EQ(truth.distinctions.size(), 3u);
  EXPECT_EQ(role("F6(p)"), std::pair(false, true));
  EXPECT_EQ(role("F15(p)"), std::pair(true, false));
  EXPECT_EQ(role("F27(d)"), std::pair(false, false));
  ASSERT_EQ(truth.significant.size(), 1u);
  EXPECT_EQ(distinction_label(h, truth.significant[0]), "F15(p)");
  EXPECT_TRUE(is_blocked(ex.scenario.current, h, h.index_of("F27(d)"), h.index_of("C102")));
  ASSERT_TRUE(ex.scenario.target);
  EXPECT_EQ(distinction_label(h, *ex.scenario.target), "F6(p)");
}

TEST(OneShot, RenderedAnswersMatchTasks) {
  AppendixB ex;
  auto s = ex.scenario();
  const auto target = find_distinction(*ex.h, s.current, s.precedent, "F6(p)");
  const std::string t1 = build_prompt(Task::Task1, s, std::nullopt, default_one_shot());
  const std::string t2 = build_prompt(Task::Task2, s, target, default_one_shot());
  const std::string t3 = build_prompt(Task::Task3, s, std::nullopt, default_one_shot());
  EXPECT_NE(t1.find("Example answer: {\"distinctions\": [\"F15(p)\",\"F27(d)\",\"F6(p)\"]}"),
            std::string::npos);
  EXPECT_NE(t2.find("Example answer: {\"emphasize\": false, \"downplay\": true}"), std::string::npos);
  EXPECT_NE(t3.find("Example answer: {\"significant_distinctions\": [\"F15(p)\"]}"),
            std::string::npos);
  EXPECT_NE(t3.find("F27(d) effectively supports: none."), std::string::npos);
}

TEST(PromptHash, Sha256OfBytes) {
  EXPECT_EQ(prompt_hash("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(TaskNames, RoundTrip) {
  for (Task t : {Task::Task1, Task::Task2, Task::Task3}) EXPECT_EQ(parse_task(task_name(t)), t);
  EXPECT_FALSE(parse_task("4"));
  EXPECT_EQ(parse_task2_schema("pair"), Task2Schema::Pair);
  EXPECT_EQ(parse_task2_schema("significance"), Task2Schema::Significance);
  EXPECT_FALSE(parse_task2_schema("both"));
}
