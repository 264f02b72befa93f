#include "hcbr/cli.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "hcbr/error.hpp"
#include "hcbr/hash.hpp"
#include "hcbr/mermaid.hpp"
#include "hcbr/model.hpp"
#include "hcbr/runner.hpp"
#include "hcbr/scoring.hpp"

namespace hcbr {

namespace {

struct Options {
  // global
  std::string hierarchy;
  std::uint64_t seed = 0;
  std::string out;
  bool strict_hierarchy = false;
  // gen
  std::size_t n = 253;
  std::size_t current_factors = 4;
  std::size_t precedent_factors = 4;
  std::string focus = "mixed";
  bool require_blocking = false;
  bool require_emphasis = false;
  bool require_downplay = false;
  bool allow_no_distinction = false;
  std::optional<std::size_t> min_overlap;
  std::optional<std::size_t> max_overlap;
  std::size_t max_rejections = 10'000;
  // solve / prompt
  std::string dataset;
  std::string current;
  std::string precedent;
  std::string target;
  std::size_t id = 0;
  bool json = false;
  // run / score / report
  std::string task = "1";
  std::string task2_schema = "pair";
  std::string model_config;
  std::string replay;
  std::string record;
  std::size_t max_parallel = 0;
  std::string responses;
  std::vector<std::string> evals;
  std::string format = "markdown";
};

/// Error raised by a stage with an explicit exit code.
struct StageError {
  int code;
  std::string message;
};

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Manifest {
 public:
  Manifest(std::string command, const std::vector<std::string>& args)
      : doc_{{"command", std::move(command)}, {"args", args}, {"started", utc_now()}} {
    doc_["inputs"] = nlohmann::json::object();
  }

  void input(const std::string& role, const std::string& path) {
    if (path.empty()) return;
    doc_["inputs"][role] = {{"path", path},
                            {"sha256", std::filesystem::exists(path) ? sha256_file(path) : ""}};
  }
  void set(const std::string& key, nlohmann::json value) { doc_[key] = std::move(value); }

  void write(const std::string& out) {
    if (out.empty()) return;
    doc_["output"] = {{"path", out}, {"sha256", sha256_file(out)}};
    doc_["finished"] = utc_now();
    std::ofstream file(out + ".manifest.json", std::ios::trunc);
    file << doc_.dump(2) << '\n';
  }

 private:
  nlohmann::json doc_;
};

std::shared_ptr<const Hierarchy> load_hierarchy_arg(const Options& o) {
  if (o.hierarchy.empty()) throw Error(Errc::InvalidConfig, "--hierarchy is required");
  return std::make_shared<const Hierarchy>(
      load_hierarchy(o.hierarchy, ParseOptions{.strict = o.strict_hierarchy}));
}

/// Writes through `out` or a file opened on `path`.
template <typename Fn>
void with_output(const std::string& path, std::ostream& out, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(out);
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(Errc::Io, "cannot write " + path);
  fn(file);
  if (!file) throw Error(Errc::Io, "cannot write " + path);
}

Task task_arg(const Options& o) { return *parse_task(o.task); }
Task2Schema schema_arg(const Options& o) { return *parse_task2_schema(o.task2_schema); }

Case load_case_file(const Hierarchy& h, const std::string& path) {
  auto j = nlohmann::json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw Error(Errc::SchemaMismatch, path + " is not valid JSON");
  return case_from_json(h, j);
}

Scenario scenario_from_case_files(const Options& o, const std::shared_ptr<const Hierarchy>& h) {
  Scenario s{h, load_case_file(*h, o.current), load_case_file(*h, o.precedent), {}};
  if (!o.target.empty()) {
    s.target = find_distinction(*h, s.current, s.precedent, o.target);
    if (!s.target) throw Error(Errc::NotADistinction, o.target + " is not a distinction here");
  }
  return s;
}

// ---------------------------------------------------------------------------

int cmd_gen(const Options& o, const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  Manifest manifest("gen", args);
  manifest.input("hierarchy", o.hierarchy);
  const auto h = load_hierarchy_arg(o);

  GenConfig cfg;
  cfg.seed = o.seed;
  cfg.instance_count = o.n;
  cfg.current_factor_count = o.current_factors;
  cfg.precedent_factor_count = o.precedent_factors;
  cfg.task_focus = *parse_task_focus(o.focus);
  cfg.max_rejections = o.max_rejections;
  cfg.constraints.require_distinction = !o.allow_no_distinction;
  cfg.constraints.require_blocking_instance = o.require_blocking;
  cfg.constraints.require_emphasis_opportunity = o.require_emphasis;
  cfg.constraints.require_downplay_opportunity = o.require_downplay;
  cfg.constraints.min_overlap = o.min_overlap;
  cfg.constraints.max_overlap = o.max_overlap;

  Dataset d;
  try {
    d = generate_dataset(h, cfg);
  } catch (const Error& e) {
    if (e.code() == Errc::ConstraintsUnsatisfiable) throw StageError{kExitGeneration, e.what()};
    throw;
  }
  with_output(o.out, out, [&](std::ostream& s) { write_dataset(s, d); });
  manifest.set("config", gen_config_to_json(cfg));
  manifest.set("hierarchy_fingerprint", d.hierarchy_fingerprint);
  manifest.write(o.out);
  if (!o.out.empty()) err << "wrote " << d.instances.size() << " instances to " << o.out << '\n';
  return kExitOk;
}

void print_truth(std::ostream& out, const Scenario& s, const GroundTruth& gt) {
  const Hierarchy& h = *s.hierarchy;
  auto list = [&h](const std::vector<Distinction>& ds) {
    std::string text;
    for (const Distinction& d : ds) text += (text.empty() ? "" : ", ") + distinction_label(h, d);
    return text.empty() ? std::string("(none)") : text;
  };
  out << "Task 1 distinctions: " << list(gt.distinctions) << '\n';
  out << "Task 2 roles:\n";
  for (const auto& [d, r] : gt.roles) {
    out << "  " << distinction_label(h, d) << ": emphasize=" << (r.can_be_emphasized ? "true" : "false")
        << " downplay=" << (r.can_be_downplayed ? "true" : "false")
        << (r.significant() ? " (significant)" : "") << '\n';
  }
  out << "Task 3 significant distinctions: " << list(gt.significant) << '\n';
  out << "Blocked support:\n";
  bool any = false;
  for (const auto& [name, c] : {std::pair<const char*, const Case*>{"C1", &s.current},
                                {"C2", &s.precedent}}) {
    for (NodeIndex f : c->factors()) {
      for (NodeIndex t : h.ancestors(f)) {
        if (is_blocked(*c, h, f, t)) {
          out << "  " << name << ": " << h.node(f).short_label() << " -> " << h.node(t).short_label()
              << '\n';
          any = true;
        }
      }
    }
  }
  if (!any) out << "  (none)\n";
}

int cmd_solve(const Options& o, const std::vector<std::string>& args, std::ostream& out,
              std::ostream& err) {
  Manifest manifest("solve", args);
  manifest.input("hierarchy", o.hierarchy);
  const auto h = load_hierarchy_arg(o);

  if (o.dataset.empty()) {
    if (o.current.empty() || o.precedent.empty()) {
      throw Error(Errc::InvalidConfig, "solve needs --dataset, or --current and --precedent");
    }
    const Scenario s = scenario_from_case_files(o, h);
    const GroundTruth gt = solve_all(s);
    with_output(o.out, out, [&](std::ostream& stream) {
      if (o.json) {
        stream << ground_truth_to_json(*h, gt).dump() << '\n';
      } else {
        print_truth(stream, s, gt);
      }
    });
    return kExitOk;
  }

  manifest.input("dataset", o.dataset);
  DatasetFile file;
  try {
    file = load_dataset(o.dataset, h);
  } catch (const Error& e) {
    if (e.code() == Errc::Io || e.code() == Errc::SchemaMismatch) throw;
    throw StageError{kExitCorrupt, std::string("corrupt dataset: ") + e.what()};
  }

  std::vector<Scenario> scenarios;
  for (const auto& rec : file.instances) scenarios.push_back(rec.scenario);
  const std::vector<GroundTruth> truths = solve_batch(scenarios);

  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const auto& attached = file.instances[i].ground_truth;
    if (!attached.is_null() && attached != ground_truth_to_json(*h, truths[i])) {
      err << "instance " << file.instances[i].id << ": attached ground truth does not match\n";
      ++mismatches;
    }
  }
  if (!o.out.empty()) {
    Dataset d;
    for (std::size_t i = 0; i < truths.size(); ++i) {
      d.instances.push_back({file.instances[i].id, scenarios[i], truths[i]});
    }
    with_output(o.out, out, [&](std::ostream& s) { write_dataset(s, d); });
    manifest.write(o.out);
  }
  out << truths.size() << " instances solved, " << mismatches << " mismatches\n";
  return mismatches == 0 ? kExitOk : kExitCorrupt;
}

int cmd_prompt(const Options& o, std::ostream& out) {
  const auto h = load_hierarchy_arg(o);
  const Task task = task_arg(o);
  Scenario s;
  if (!o.dataset.empty()) {
    const DatasetFile file = load_dataset(o.dataset, h);
    auto it = std::find_if(file.instances.begin(), file.instances.end(),
                           [&](const InstanceRecord& r) { return r.id == o.id; });
    if (it == file.instances.end()) {
      throw Error(Errc::InvalidConfig, "dataset has no instance with id " + std::to_string(o.id));
    }
    s = it->scenario;
  } else if (!o.current.empty() && !o.precedent.empty()) {
    s = scenario_from_case_files(o, h);
  } else {
    throw Error(Errc::InvalidConfig, "prompt needs --dataset, or --current and --precedent");
  }
  with_output(o.out, out, [&](std::ostream& stream) {
    stream << build_prompt(task, s, s.target, default_one_shot(), schema_arg(o));
  });
  return kExitOk;
}

int cmd_run(const Options& o, const std::vector<std::string>& args, std::ostream& err) {
  Manifest manifest("run", args);
  manifest.input("hierarchy", o.hierarchy);
  manifest.input("dataset", o.dataset);
  manifest.input("model_config", o.model_config);
  manifest.input("replay", o.replay);
  if (o.out.empty()) throw Error(Errc::InvalidConfig, "run needs --out");
  const auto h = load_hierarchy_arg(o);
  ModelConfig cfg = load_model_config(o.model_config);
  if (o.max_parallel > 0) cfg.max_parallel = o.max_parallel;
  const DatasetFile file = load_dataset(o.dataset, h);

  std::shared_ptr<ChatClient> client;
  if (!o.replay.empty()) {
    if (!std::filesystem::exists(o.replay)) throw Error(Errc::Io, o.replay + " does not exist");
    auto store = std::make_shared<const TranscriptStore>(TranscriptStore::load(o.replay));
    client = std::make_shared<ReplayClient>(store, cfg.name, cfg.reasoning_tokens_field);
  } else {
    client = std::make_shared<HttpChatClient>(cfg);
    if (!o.record.empty()) client = std::make_shared<RecordingClient>(client, o.record);
  }

  RunOptions opts;
  opts.task = task_arg(o);
  opts.schema = schema_arg(o);
  opts.workers = cfg.max_parallel;
  const RunStats stats = run_model(file.instances, *client, opts, o.out);
  manifest.set("model", cfg.name);
  manifest.set("task", std::stoi(o.task));
  manifest.write(o.out);
  err << stats.total << " responses (" << stats.reused << " reused, " << stats.queried
      << " queried, " << stats.truncated << " truncated) written to " << o.out << '\n';
  return kExitOk;
}

int cmd_score(const Options& o, const std::vector<std::string>& args, std::ostream& out,
              std::ostream& err) {
  Manifest manifest("score", args);
  manifest.input("hierarchy", o.hierarchy);
  manifest.input("dataset", o.dataset);
  manifest.input("responses", o.responses);
  const auto h = load_hierarchy_arg(o);
  const Task task = task_arg(o);
  const Task2Schema schema = schema_arg(o);
  const DatasetFile file = load_dataset(o.dataset, h);
  if (!std::filesystem::exists(o.responses)) throw Error(Errc::Io, o.responses + " does not exist");
  const std::vector<ResponseRecord> responses = load_responses(o.responses);

  std::map<std::size_t, const InstanceRecord*> by_id;
  for (const auto& rec : file.instances) by_id[rec.id] = &rec;

  std::vector<EvalRecord> evals;
  for (const ResponseRecord& r : responses) {
    auto it = by_id.find(r.id);
    if (it == by_id.end()) {
      throw Error(Errc::SchemaMismatch, "response for unknown instance " + std::to_string(r.id));
    }
    if (r.task != task) {
      throw Error(Errc::SchemaMismatch, "response " + std::to_string(r.id) + " is for task " +
                                            std::string(task_name(r.task)));
    }
    const InstanceRecord& inst = *it->second;
    const GroundTruth gt = solve_all(inst.scenario);
    const nlohmann::json gt_json = ground_truth_to_json(*h, gt);
    if (!inst.ground_truth.is_null() && inst.ground_truth != gt_json) {
      throw StageError{kExitCorrupt, "instance " + std::to_string(inst.id) +
                                         ": attached ground truth does not match the solver"};
    }
    EvalRecord e;
    e.id = r.id;
    e.task = task;
    e.model = r.model;
    e.schema = schema;
    if (task == Task::Task2) {
      if (!inst.scenario.target) {
        throw Error(Errc::MissingTarget, "instance " + std::to_string(inst.id) + " has no target");
      }
      e.target = distinction_label(*h, *inst.scenario.target);
    }
    e.parsed = parse_answer(task, r.response);
    e.truncated = r.truncated;
    e.reasoning_tokens = r.reasoning_tokens;
    e.correct = !r.truncated &&
                score_instance(task, e.parsed, expected_answers_from_json(gt_json), e.target, schema);
    evals.push_back(std::move(e));
  }
  with_output(o.out, out, [&](std::ostream& s) { write_eval_records(s, evals); });
  manifest.set("task", std::stoi(o.task));
  manifest.set("task2_schema", o.task2_schema);
  manifest.write(o.out);
  const auto correct = std::count_if(evals.begin(), evals.end(), [](const EvalRecord& e) { return e.correct; });
  err << "scored " << evals.size() << " responses, " << correct << " correct\n";
  return kExitOk;
}

int cmd_report(const Options& o, const std::vector<std::string>& args, std::ostream& out) {
  Manifest manifest("report", args);
  std::vector<EvalRecord> all;
  for (std::size_t i = 0; i < o.evals.size(); ++i) {
    manifest.input("evals" + std::to_string(i), o.evals[i]);
    try {
      auto part = load_eval_records(o.evals[i]);
      all.insert(all.end(), part.begin(), part.end());
    } catch (const Error& e) {
      if (e.code() == Errc::MalformedLine) throw Error(Errc::SchemaMismatch, e.what(), e.line());
      throw;
    }
  }
  const Report report = aggregate(all);
  const ReportFormat format = *parse_report_format(o.format);
  with_output(o.out, out, [&](std::ostream& s) { s << render_report(report, format); });
  manifest.write(o.out);
  return kExitOk;
}

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::Transport:
    case Errc::RateLimited: return kExitTransport;
    case Errc::ConstraintsUnsatisfiable: return kExitGeneration;
    default: return kExitConfig;
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, bool color) {
  Options o;
  CLI::App app{"Case-based reasoning engine and LLM evaluation pipeline", "hcbr"};
  app.fallthrough();
  app.require_subcommand(1);
  app.add_option("--hierarchy", o.hierarchy, "Mermaid hierarchy file");
  app.add_option("--seed", o.seed, "Random seed");
  app.add_option("--out", o.out, "Output file (default: standard output)");
  app.add_flag("--strict-hierarchy", o.strict_hierarchy, "Require every node to be declared");

  const auto tasks = CLI::IsMember({"1", "2", "3"});
  const auto schemas = CLI::IsMember({"pair", "significance"});

  auto* gen = app.add_subcommand("gen", "Generate a scenario dataset");
  gen->add_option("--n", o.n, "Number of instances")->capture_default_str();
  gen->add_option("--current-factors,--c1-factors", o.current_factors)->capture_default_str();
  gen->add_option("--precedent-factors,--c2-factors", o.precedent_factors)->capture_default_str();
  gen->add_option("--focus,--task", o.focus, "Task focus")->check(CLI::IsMember({"1", "2", "3", "mixed"}))
      ->capture_default_str();
  gen->add_flag("--require-blocking", o.require_blocking);
  gen->add_flag("--require-emphasis", o.require_emphasis);
  gen->add_flag("--require-downplay", o.require_downplay);
  gen->add_flag("--allow-no-distinction", o.allow_no_distinction);
  gen->add_option("--min-overlap", o.min_overlap);
  gen->add_option("--max-overlap", o.max_overlap);
  gen->add_option("--max-rejections", o.max_rejections)->capture_default_str();

  auto* solve = app.add_subcommand("solve", "Compute and verify ground truth");
  solve->add_option("--dataset", o.dataset);
  solve->add_option("--current", o.current, "Current case JSON");
  solve->add_option("--precedent", o.precedent, "Precedent case JSON");
  solve->add_flag("--json", o.json, "Print ground truth as JSON");

  auto* prompt = app.add_subcommand("prompt", "Print the prompt for one instance");
  prompt->add_option("--dataset", o.dataset);
  prompt->add_option("--id", o.id);
  prompt->add_option("--current", o.current);
  prompt->add_option("--precedent", o.precedent);
  prompt->add_option("--target", o.target, "Task 2 target distinction, e.g. F6(p)");
  prompt->add_option("--task", o.task)->check(tasks)->capture_default_str();
  prompt->add_option("--task2-schema", o.task2_schema)->check(schemas)->capture_default_str();
  solve->add_option("--target", o.target);

  auto* run = app.add_subcommand("run", "Query a model, or replay transcripts");
  run->add_option("--dataset", o.dataset)->required();
  run->add_option("--task", o.task)->check(tasks)->capture_default_str();
  run->add_option("--task2-schema", o.task2_schema)->check(schemas)->capture_default_str();
  run->add_option("--model-config", o.model_config)->required();
  run->add_option("--replay", o.replay, "Transcript file to replay instead of calling the model");
  run->add_option("--record", o.record, "Append live transcripts to this file");
  run->add_option("--max-parallel", o.max_parallel, "Override the config's request cap");

  auto* score = app.add_subcommand("score", "Grade responses against ground truth");
  score->add_option("--dataset", o.dataset)->required();
  score->add_option("--responses", o.responses)->required();
  score->add_option("--task", o.task)->check(tasks)->capture_default_str();
  score->add_option("--task2-schema", o.task2_schema)->check(schemas)->capture_default_str();

  auto* report = app.add_subcommand("report", "Aggregate graded records into a table");
  report->add_option("--evals", o.evals, "Graded record files")->required();
  report->add_option("--format", o.format)->check(CLI::IsMember({"csv", "markdown", "jsonl"}))
      ->capture_default_str();

  const std::string red = color ? "\033[31m" : "";
  const std::string reset = color ? "\033[0m" : "";
  auto fail = [&](int code, const std::string& message) {
    err << red << "error:" << reset << ' ' << message << '\n';
    return code;
  };

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    return fail(kExitConfig, e.what());
  }

  try {
    if (gen->parsed()) return cmd_gen(o, args, out, err);
    if (solve->parsed()) return cmd_solve(o, args, out, err);
    if (prompt->parsed()) return cmd_prompt(o, out);
    if (run->parsed()) return cmd_run(o, args, err);
    if (score->parsed()) return cmd_score(o, args, out, err);
    if (report->parsed()) return cmd_report(o, args, out);
  } catch (const StageError& e) {
    return fail(e.code, e.message);
  } catch (const Error& e) {
    return fail(exit_code_for(e.code()), e.what());
  } catch (const std::exception& e) {
    return fail(kExitInternal, e.what());
  }
  return fail(kExitConfig, "no subcommand");
}

}  // namespace hcbr
