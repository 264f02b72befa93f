#include "hcbr/scoring.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <tuple>

#include "hcbr/error.hpp"

namespace hcbr {

namespace {

constexpr const char* kColumns[] = {"model",          "task", "accuracy",  "tokens_all",
                                    "tokens_correct", "tokens_incorrect",  "n",
                                    "n_correct",      "n_malformed",       "n_truncated"};

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

double round2(double v) { return std::stod(fixed2(v)); }

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cell));
      cell.clear();
    } else {
      cell += c;
    }
  }
  out.push_back(std::move(cell));
  return out;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

ExpectedAnswers expected_answers(const Hierarchy& h, const GroundTruth& gt) {
  return expected_answers_from_json(ground_truth_to_json(h, gt));
}

ExpectedAnswers expected_answers_from_json(const nlohmann::json& j) {
  try {
    ExpectedAnswers e;
    for (const auto& s : j.at("task1")) e.task1.insert(s.get<std::string>());
    for (const auto& s : j.at("task3")) e.task3.insert(s.get<std::string>());
    for (const auto& [label, roles] : j.at("task2").items()) {
      e.task2[label] = {roles.at("emphasize").get<bool>(), roles.at("downplay").get<bool>()};
    }
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(Errc::SchemaMismatch, std::string("ground truth: ") + ex.what());
  }
}

bool score_instance(Task task, const ParsedAnswer& parsed, const ExpectedAnswers& expected,
                    const std::optional<std::string>& target, Task2Schema schema) {
  if (task == Task::Task2 && !target) {
    throw Error(Errc::MissingTarget, "Task 2 grading needs a target distinction");
  }
  if (!parsed.ok() || parsed.task != task) return false;
  switch (task) {
    case Task::Task1:
    case Task::Task3: {
      const std::set<std::string> answer(parsed.factors.begin(), parsed.factors.end());
      return answer == (task == Task::Task1 ? expected.task1 : expected.task3);
    }
    case Task::Task2: {
      const auto it = expected.task2.find(*target);
      if (it == expected.task2.end()) {
        throw Error(Errc::NotADistinction, *target + " has no Task 2 ground truth");
      }
      const auto [emphasize, downplay] = it->second;
      if (schema == Task2Schema::Pair) {
        return parsed.emphasize && parsed.downplay && *parsed.emphasize == emphasize &&
               *parsed.downplay == downplay;
      }
      std::optional<bool> sig = parsed.significance;
      if (!sig && parsed.emphasize && parsed.downplay) sig = *parsed.emphasize && !*parsed.downplay;
      return sig && *sig == (emphasize && !downplay);
    }
  }
  return false;
}

bool score_instance(Task task, const ParsedAnswer& parsed, const Hierarchy& h,
                    const GroundTruth& gt, const std::optional<Distinction>& target,
                    Task2Schema schema) {
  std::optional<std::string> label;
  if (target) label = distinction_label(h, *target);
  return score_instance(task, parsed, expected_answers(h, gt), label, schema);
}

// ---------------------------------------------------------------------------

nlohmann::json eval_record_to_json(const EvalRecord& r) {
  return {{"id", r.id},
          {"task", std::stoi(std::string(task_name(r.task)))},
          {"model", r.model},
          {"task2_schema", task2_schema_name(r.schema)},
          {"target", r.target ? nlohmann::json(*r.target) : nlohmann::json()},
          {"parsed", parsed_answer_to_json(r.parsed)},
          {"correct", r.correct},
          {"reasoning_tokens", r.reasoning_tokens ? nlohmann::json(*r.reasoning_tokens) : nlohmann::json()},
          {"truncated", r.truncated}};
}

EvalRecord eval_record_from_json(const nlohmann::json& j) {
  try {
    EvalRecord r;
    r.id = j.at("id").get<std::size_t>();
    const auto task = parse_task(std::to_string(j.at("task").get<int>()));
    const auto schema = parse_task2_schema(j.value("task2_schema", "pair"));
    if (!task || !schema) throw Error(Errc::SchemaMismatch, "eval record: unknown task or schema");
    r.task = *task;
    r.schema = *schema;
    r.model = j.at("model").get<std::string>();
    if (j.contains("target") && !j["target"].is_null()) r.target = j["target"].get<std::string>();
    r.parsed = parsed_answer_from_json(j.at("parsed"));
    r.correct = j.at("correct").get<bool>();
    if (j.contains("reasoning_tokens") && !j["reasoning_tokens"].is_null()) {
      r.reasoning_tokens = j["reasoning_tokens"].get<std::uint64_t>();
    }
    r.truncated = j.value("truncated", false);
    if (!r.parsed.ok() && r.correct) {
      throw Error(Errc::SchemaMismatch, "eval record: malformed answer marked correct");
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::SchemaMismatch, std::string("eval record: ") + e.what());
  }
}

std::vector<EvalRecord> load_eval_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot read " + path.string());
  std::vector<EvalRecord> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw Error(Errc::MalformedLine, path.string() + ": not JSON", number);
    try {
      out.push_back(eval_record_from_json(j));
    } catch (const Error& e) {
      throw Error(Errc::MalformedLine, path.string() + ": " + e.what(), number);
    }
  }
  return out;
}

void write_eval_records(std::ostream& out, std::span<const EvalRecord> records) {
  for (const EvalRecord& r : records) out << eval_record_to_json(r).dump() << '\n';
}

// ---------------------------------------------------------------------------

Report aggregate(std::span<const EvalRecord> records) {
  struct Acc {
    ReportRow row;
    std::uint64_t sum_correct = 0;
    std::uint64_t sum_incorrect = 0;
  };
  std::map<std::pair<std::string, int>, Acc> groups;
  for (const EvalRecord& r : records) {
    Acc& a = groups[{r.model, static_cast<int>(r.task)}];
    a.row.model = r.model;
    a.row.task = r.task;
    ++a.row.n;
    a.row.n_correct += r.correct;
    a.row.n_malformed += !r.parsed.ok();
    a.row.n_truncated += r.truncated;
    if (r.reasoning_tokens) {
      (r.correct ? a.sum_correct : a.sum_incorrect) += *r.reasoning_tokens;
      ++(r.correct ? a.row.n_tokens_correct : a.row.n_tokens_incorrect);
    }
  }
  Report report;
  for (auto& [key, a] : groups) {
    ReportRow& row = a.row;
    row.accuracy = 100.0 * static_cast<double>(row.n_correct) / static_cast<double>(row.n);
    const std::size_t with_tokens = row.n_tokens_correct + row.n_tokens_incorrect;
    if (with_tokens > 0) {
      row.tokens_all = static_cast<double>(a.sum_correct + a.sum_incorrect) /
                       static_cast<double>(with_tokens);
    }
    if (row.n_tokens_correct > 0) {
      row.tokens_correct = static_cast<double>(a.sum_correct) / static_cast<double>(row.n_tokens_correct);
    }
    if (row.n_tokens_incorrect > 0) {
      row.tokens_incorrect =
          static_cast<double>(a.sum_incorrect) / static_cast<double>(row.n_tokens_incorrect);
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::optional<ReportFormat> parse_report_format(std::string_view s) noexcept {
  if (s == "csv") return ReportFormat::Csv;
  if (s == "markdown" || s == "md") return ReportFormat::Markdown;
  if (s == "jsonl") return ReportFormat::Jsonl;
  return std::nullopt;
}

std::string render_report(const Report& report, ReportFormat format) {
  std::ostringstream out;
  auto cells = [](const ReportRow& r, const std::string& absent) {
    auto opt = [&absent](const std::optional<double>& v) { return v ? fixed2(*v) : absent; };
    return std::vector<std::string>{r.model,
                                    std::string(task_name(r.task)),
                                    fixed2(r.accuracy),
                                    opt(r.tokens_all),
                                    opt(r.tokens_correct),
                                    opt(r.tokens_incorrect),
                                    std::to_string(r.n),
                                    std::to_string(r.n_correct),
                                    std::to_string(r.n_malformed),
                                    std::to_string(r.n_truncated)};
  };
  switch (format) {
    case ReportFormat::Csv: {
      for (std::size_t i = 0; i < std::size(kColumns); ++i) out << (i ? "," : "") << kColumns[i];
      out << '\n';
      for (const ReportRow& r : report.rows) {
        const auto c = cells(r, "");
        for (std::size_t i = 0; i < c.size(); ++i) out << (i ? "," : "") << csv_escape(c[i]);
        out << '\n';
      }
      break;
    }
    case ReportFormat::Markdown: {
      out << '|';
      for (const char* col : kColumns) out << ' ' << col << " |";
      out << "\n|---|---|";
      for (std::size_t i = 2; i < std::size(kColumns); ++i) out << "---:|";
      out << '\n';
      for (const ReportRow& r : report.rows) {
        out << '|';
        for (const auto& cell : cells(r, "/")) out << ' ' << cell << " |";
        out << '\n';
      }
      break;
    }
    case ReportFormat::Jsonl: {
      auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(round2(*v)) : nlohmann::json(); };
      for (const ReportRow& r : report.rows) {
        nlohmann::json j;
        j["model"] = r.model;
        j["task"] = std::stoi(std::string(task_name(r.task)));
        j["accuracy"] = round2(r.accuracy);
        j["tokens_all"] = opt(r.tokens_all);
        j["tokens_correct"] = opt(r.tokens_correct);
        j["tokens_incorrect"] = opt(r.tokens_incorrect);
        j["n"] = r.n;
        j["n_correct"] = r.n_correct;
        j["n_malformed"] = r.n_malformed;
        j["n_truncated"] = r.n_truncated;
        out << j.dump() << '\n';
      }
      break;
    }
  }
  return out.str();
}

void emit_report(const Report& report, ReportFormat format, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << render_report(report, format);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
}

Report parse_report_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::SchemaMismatch, "report csv: missing header");
  if (split_csv_line(line) != std::vector<std::string>(std::begin(kColumns), std::end(kColumns))) {
    throw Error(Errc::SchemaMismatch, "report csv: unexpected header");
  }
  Report report;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    const auto c = split_csv_line(line);
    try {
      if (c.size() != std::size(kColumns)) throw std::invalid_argument("column count");
      auto opt = [](const std::string& s) { return s.empty() ? std::nullopt : std::optional(std::stod(s)); };
      ReportRow r;
      r.model = c[0];
      const auto task = parse_task(c[1]);
      if (!task) throw std::invalid_argument("task");
      r.task = *task;
      r.accuracy = std::stod(c[2]);
      r.tokens_all = opt(c[3]);
      r.tokens_correct = opt(c[4]);
      r.tokens_incorrect = opt(c[5]);
      r.n = std::stoul(c[6]);
      r.n_correct = std::stoul(c[7]);
      r.n_malformed = std::stoul(c[8]);
      r.n_truncated = std::stoul(c[9]);
      report.rows.push_back(std::move(r));
    } catch (const std::logic_error& e) {
      throw Error(Errc::SchemaMismatch, std::string("report csv: bad value (") + e.what() + ")", number);
    }
  }
  return report;
}

}  // namespace hcbr
