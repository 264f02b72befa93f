// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "brute_force.hpp"
#include "hcbr/answer.hpp"
#include "hcbr/cli.hpp"
#include "hcbr/hash.hpp"
#include "hcbr/scenariogen.hpp"
#include "hcbr/scoring.hpp"
#include "test_support.hpp"

using namespace hcbr;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

/// Records the first failed expectation.
struct Check {
  Outcome o;
  void expect(bool cond, const std::string& what) {
    if (!cond && o.pass) {
      o.pass = false;
      o.detail = what;
    }
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

int cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  return run_cli(args, out, err);
}

std::set<std::string> labels(const Hierarchy& h, const std::vector<Distinction>& ds) {
  std::set<std::string> s;
  for (const auto& d : ds) s.insert(distinction_label(h, d));
  return s;
}

// ---------------------------------------------------------------------------

Outcome worked_example() {
  Check c;
  const auto t0 = Clock::now();
  const fixture::AppendixB ex;
  const Scenario s = ex.scenario();
  const GroundTruth gt = solve_all(s);
  const bool blocked = is_blocked(s.precedent, *ex.h, ex.at("F23"), ex.at("C102"));
  const double secs = seconds_since(t0);

  const std::set<std::string> want{"F6(p)", "F19(d)"};
  c.expect(labels(*ex.h, gt.distinctions) == want, "task 1 set differs");
  c.expect(gt.roles.size() == 2, "task 2 role count");
  for (const auto& [d, r] : gt.roles) {
    c.expect(r.can_be_emphasized && !r.can_be_downplayed,
             "task 2 roles for " + distinction_label(*ex.h, d));
  }
  c.expect(labels(*ex.h, gt.significant) == want, "task 3 set differs");
  c.expect(blocked, "F23 support for C102 not blocked");
  c.expect(secs < 1.0, "took " + std::to_string(secs) + " s");
  if (c.o.pass) c.o.detail = "exact match, F23->C102 blocked, " + fmt2(secs * 1000) + " ms";
  return c.o;
}

Outcome oracle_equivalence() {
  Check c;
  const auto t0 = Clock::now();
  const auto h = fixture::load_shared("cato.mmd");
  GenConfig cfg;
  cfg.seed = 0;
  cfg.instance_count = 1000;
  cfg.task_focus = TaskFocus::Task3;
  cfg.constraints.require_distinction = false;
  const Dataset d = generate_dataset(h, cfg);
  std::size_t agree = 0;
  for (const Instance& inst : d.instances) {
    if (solve_all(inst.scenario) == oracle::oracle_solve(inst.scenario)) ++agree;
  }
  const double secs = seconds_since(t0);
  c.expect(d.instances.size() == 1000, "generated " + std::to_string(d.instances.size()));
  c.expect(agree == d.instances.size(),
           std::to_string(d.instances.size() - agree) + " instances disagree");
  c.expect(secs < 30.0, "took " + std::to_string(secs) + " s");
  if (c.o.pass) c.o.detail = "1000/1000 agree on tasks 1-3, " + fmt2(secs) + " s";
  return c.o;
}

Outcome dataset_shape() {
  Check c;
  const fixture::TempDir dir;
  const std::string cato = fixture::data_path("cato.mmd");
  auto gen = [&](const std::string& seed, const std::string& name) {
    const std::string path = dir.file(name);
    c.expect(cli({"--hierarchy", cato, "--seed", seed, "gen", "--out", path}) == kExitOk,
             "gen failed");
    return path;
  };
  const std::string a = gen("0", "a.jsonl");
  const std::string b = gen("0", "b.jsonl");
  const std::string other = gen("1", "c.jsonl");

  const auto h = fixture::load_shared("cato.mmd");
  const DatasetFile file = load_dataset(a, h);
  const std::string text = fixture::slurp(a);
  c.expect(std::count(text.begin(), text.end(), '\n') == 253, "line count");
  c.expect(file.instances.size() == 253, "instance count");
  for (const auto& rec : file.instances) {
    c.expect(rec.scenario.current.size() == 4 && rec.scenario.precedent.size() == 4,
             "instance " + std::to_string(rec.id) + " is not 4+4");
  }
  c.expect(sha256_file(a) == sha256_file(b), "same seed differs");
  c.expect(sha256_file(a) != sha256_file(other), "different seeds agree");
  if (c.o.pass) c.o.detail = "253 instances of 4+4, sha256 " + sha256_file(a).substr(0, 12);
  return c.o;
}

Outcome metric_fidelity() {
  Check c;
  const fixture::AppendixB ex;
  const Scenario s = ex.scenario();
  const ExpectedAnswers expected = expected_answers(*ex.h, solve_all(s));

  // Two right (one reordered and loosely formatted), two wrong.
  const std::string canned[] = {
      R"j({"distinctions": ["F6(p)", "F19(d)"]})j",
      R"j(so... {"distinctions": ["f19_No-Security-Measures (D)", "F6(p)"]})j",
      R"j({"distinctions": ["F6(p)"]})j",
      R"j({"distinctions": ["F6(p)", "F19(d)", "F23(d)"]})j",
  };
  std::vector<EvalRecord> records;
  for (std::size_t i = 0; i < std::size(canned); ++i) {
    EvalRecord r;
    r.id = i;
    r.model = "canned";
    r.parsed = parse_answer(Task::Task1, canned[i]);
    r.correct = score_instance(Task::Task1, r.parsed, expected, std::nullopt, Task2Schema::Pair);
    r.reasoning_tokens = 100;
    records.push_back(r);
  }
  const Report rep = aggregate(records);
  c.expect(rep.rows.size() == 1 && fmt2(rep.rows[0].accuracy) == "50.00",
           "accuracy " + (rep.rows.empty() ? std::string("none") : fmt2(rep.rows[0].accuracy)));

  // Truth for F6(p) is (emphasize=true, downplay=false).
  auto pair = [&](const char* text) {
    return score_instance(Task::Task2, parse_answer(Task::Task2, text), expected,
                          std::string("F6(p)"), Task2Schema::Pair);
  };
  c.expect(pair(R"j({"emphasize": true, "downplay": false})j"), "matching pair graded wrong");
  c.expect(!pair(R"j({"emphasize": true, "downplay": true})j"), "one-boolean match graded right");
  c.expect(!pair(R"j({"emphasize": false, "downplay": false})j"), "one-boolean match graded right");
  c.expect(!pair(R"j({"emphasize": false, "downplay": true})j"), "inverted pair graded right");
  if (c.o.pass) c.o.detail = "2 of 4 -> 50.00, single-boolean matches graded wrong";
  return c.o;
}

Outcome table_arithmetic() {
  Check c;
  const auto records = load_eval_records(fixture::fixture_path("table3_gpt5_task2.jsonl"));
  const Report rep = aggregate(records);
  c.expect(rep.rows.size() == 1, "expected one row");
  if (!c.o.pass) return c.o;
  const ReportRow& r = rep.rows[0];
  c.expect(r.tokens_correct && fmt2(*r.tokens_correct) == "3081.44",
           "correct mean " + (r.tokens_correct ? fmt2(*r.tokens_correct) : "absent"));
  c.expect(r.tokens_incorrect && fmt2(*r.tokens_incorrect) == "4456.33",
           "incorrect mean " + (r.tokens_incorrect ? fmt2(*r.tokens_incorrect) : "absent"));
  c.expect(fmt2(r.accuracy) == "92.09", "accuracy " + fmt2(r.accuracy));
  if (!c.o.pass) return c.o;

  // The overall mean is the count-weighted combination of the two partitions.
  const double nc = static_cast<double>(r.n_tokens_correct);
  const double ni = static_cast<double>(r.n_tokens_incorrect);
  const double recombined = (nc * *r.tokens_correct + ni * *r.tokens_incorrect) / (nc + ni);
  const double rel = std::abs(recombined - *r.tokens_all) / std::abs(*r.tokens_all);
  c.expect(rel <= 1e-9, "recombination off by " + std::to_string(rel));
  if (c.o.pass) {
    c.o.detail = "3081.44 / 4456.33, overall " + fmt2(*r.tokens_all) + ", identity within 1e-9";
  }
  return c.o;
}

Outcome replay_pipeline() {
  Check c;
  const std::string cato = fixture::data_path("cato.mmd");
  const std::string model = fixture::fixture_path("replay/model.json");
  const std::string transcripts = fixture::fixture_path("replay/transcripts.jsonl");

  auto pipeline = [&](const fixture::TempDir& dir) {
    const std::string ds = dir.file("dataset.jsonl");
    c.expect(cli({"--hierarchy", cato, "--seed", "11", "--out", ds, "gen", "--n", "12"}) == kExitOk,
             "gen failed");
    c.expect(cli({"--hierarchy", cato, "solve", "--dataset", ds}) == kExitOk, "solve failed");
    std::vector<std::string> report = {"--out", dir.file("report.md"), "report", "--format",
                                       "markdown", "--evals"};
    for (const std::string t : {"1", "2", "3"}) {
      const std::string resp = dir.file("responses" + t + ".jsonl");
      const std::string eval = dir.file("evals" + t + ".jsonl");
      c.expect(cli({"--hierarchy", cato, "--out", resp, "run", "--dataset", ds, "--task", t,
                    "--model-config", model, "--replay", transcripts}) == kExitOk,
               "run task " + t + " failed");
      c.expect(cli({"--hierarchy", cato, "--out", eval, "score", "--dataset", ds, "--responses",
                    resp, "--task", t}) == kExitOk,
               "score task " + t + " failed");
      report.push_back(eval);
    }
    c.expect(cli(report) == kExitOk, "report failed");
    std::string digest;
    for (const char* f : {"dataset.jsonl", "responses1.jsonl", "responses2.jsonl",
                          "responses3.jsonl", "evals1.jsonl", "evals2.jsonl", "evals3.jsonl",
                          "report.md"}) {
      digest += sha256_file(dir.file(f));
    }
    return digest;
  };

  const fixture::TempDir first, second;
  const std::string a = pipeline(first);
  const std::string b = pipeline(second);
  if (!c.o.pass) return c.o;
  c.expect(a == b, "two runs differ");
  c.expect(fixture::slurp(first.file("dataset.jsonl")) ==
               fixture::slurp(fixture::fixture_path("replay/dataset.jsonl")),
           "dataset differs from fixture");
  c.expect(fixture::slurp(first.file("report.md")) ==
               fixture::slurp(fixture::fixture_path("replay/golden_report.md")),
           "report differs from golden file");
  if (c.o.pass) c.o.detail = "two runs bit-identical, report matches golden file";
  return c.o;
}

Outcome property_suite() {
  Check c;
  const auto h = fixture::load_shared("cato.mmd");
  GenConfig cfg;
  cfg.seed = 7;
  cfg.instance_count = 1000;
  cfg.task_focus = TaskFocus::Task3;
  cfg.constraints.require_distinction = false;
  const Dataset data = generate_dataset(h, cfg);

  std::size_t strong_pairs = 0, empty_opp = 0;
  for (const Instance& inst : data.instances) {
    for (const Case* cs : {&inst.scenario.current, &inst.scenario.precedent}) {
      for (NodeIndex f : cs->factors()) {
        for (NodeIndex t : h->ancestors(f)) {
          if (h->support_strength(f, t) != Support::Strong) continue;
          ++strong_pairs;
          c.expect(!is_blocked(*cs, *h, f, t) && has_effective_support(*cs, *h, f, t),
                   "strong path blocked in instance " + std::to_string(inst.id));
        }
      }
    }
    const auto& gt = inst.truth;
    c.expect(std::includes(gt.distinctions.begin(), gt.distinctions.end(), gt.significant.begin(),
                           gt.significant.end()),
             "significant not a subset in instance " + std::to_string(inst.id));
    for (const auto& [d, r] : gt.roles) {
      const Case& other =
          d.host() == CaseRole::Precedent ? inst.scenario.current : inst.scenario.precedent;
      if (std::none_of(other.factors().begin(), other.factors().end(),
                       [&](NodeIndex f) { return h->side_of(f) == d.side; })) {
        ++empty_opp;
        c.expect(!r.can_be_downplayed, "downplay without opposition in instance " +
                                           std::to_string(inst.id));
      }
    }
  }
  c.expect(strong_pairs > 0 && empty_opp > 0, "properties not exercised");

  // Set match ignores order.
  std::mt19937_64 rng(3);
  std::size_t perms = 0;
  for (const Instance& inst : data.instances) {
    const ExpectedAnswers want = expected_answers(*h, inst.truth);
    for (Task task : {Task::Task1, Task::Task3}) {
      const auto& truth = task == Task::Task1 ? want.task1 : want.task3;
      std::vector<std::string> answer(truth.begin(), truth.end());
      if (rng() % 2 && !answer.empty()) answer.pop_back();
      for (int k = 0; k < 3; ++k) {
        std::shuffle(answer.begin(), answer.end(), rng);
        ParsedAnswer p;
        p.task = task;
        p.status = ParseStatus::Ok;
        p.factors = answer;
        const bool expect = answer.size() == truth.size();
        c.expect(score_instance(task, p, want, std::nullopt, Task2Schema::Pair) == expect,
                 "set match depends on order");
        ++perms;
      }
    }
  }

  // parse_answer on mutated and random strings.
  const std::string seeds[] = {
      R"j({"distinctions": ["F6(p)", "F19(d)"]})j",
      R"j({"emphasize": true, "downplay": "false"})j",
      R"j({"significant_distinctions": ["F1_Disclosure-In-Negotiations(d)"]})j",
  };
  const std::string alphabet = "{}[]\":,\\ FfCIpd()_-0123456789truefalsenull\n\x01\xff";
  std::size_t parsed = 0;
  for (int i = 0; i < 10'000; ++i) {
    std::string s;
    if (i % 2 == 0) {
      s = seeds[rng() % std::size(seeds)];
      for (int e = 0; e < 1 + static_cast<int>(rng() % 4) && !s.empty(); ++e) {
        s[rng() % s.size()] = alphabet[rng() % alphabet.size()];
      }
    } else {
      for (std::size_t k = rng() % 200; k > 0; --k) s += alphabet[rng() % alphabet.size()];
    }
    for (Task t : {Task::Task1, Task::Task2, Task::Task3}) {
      const ParsedAnswer a = parse_answer(t, s);
      c.expect(a.ok() || (a.factors.empty() && !a.emphasize && !a.downplay && !a.significance),
               "malformed answer carries content");
      ++parsed;
    }
  }
  if (c.o.pass) {
    c.o.detail = std::to_string(strong_pairs) + " strong pairs, " + std::to_string(empty_opp) +
                 " unopposed distinctions, " + std::to_string(perms) + " permutations, " +
                 std::to_string(parsed) + " fuzzed parses";
  }
  return c.o;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"worked-example", worked_example},
      {"oracle-equivalence", oracle_equivalence},
      {"dataset-shape-determinism", dataset_shape},
      {"metric-fidelity", metric_fidelity},
      {"table-arithmetic", table_arithmetic},
      {"replay-pipeline", replay_pipeline},
      {"property-suite", property_suite},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
  }
  return failures;
}
