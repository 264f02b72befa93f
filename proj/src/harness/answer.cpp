#include "hcbr/answer.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "hcbr/error.hpp"

namespace hcbr {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

/// End offset (one past '}') of the balanced object starting at `open`, or
/// npos. Braces inside JSON strings are skipped.
std::size_t match_object(std::string_view text, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
    } else if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

std::optional<bool> coerce_bool(const nlohmann::json& v) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_string()) {
    std::string s(trim(v.get_ref<const std::string&>()));
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s == "true") return true;
    if (s == "false") return false;
  }
  return std::nullopt;
}

bool has_task_key(Task task, const nlohmann::json& obj) {
  switch (task) {
    case Task::Task1: return obj.contains("distinctions");
    case Task::Task2:
      return obj.contains("significance") || (obj.contains("emphasize") && obj.contains("downplay"));
    case Task::Task3: return obj.contains("significant_distinctions");
  }
  return false;
}

/// Fills `out` from a candidate object; false when its payload is unusable.
bool read_payload(Task task, const nlohmann::json& obj, ParsedAnswer& out) {
  if (task == Task::Task2) {
    if (obj.contains("emphasize") && obj.contains("downplay")) {
      out.emphasize = coerce_bool(obj["emphasize"]);
      out.downplay = coerce_bool(obj["downplay"]);
      if (!out.emphasize || !out.downplay) return false;
    }
    if (obj.contains("significance")) {
      out.significance = coerce_bool(obj["significance"]);
      if (!out.significance) return false;
    }
    return true;
  }
  const auto& list = obj[task == Task::Task1 ? "distinctions" : "significant_distinctions"];
  if (!list.is_array()) return false;
  for (const auto& item : list) {
    if (!item.is_string()) return false;
    auto label = normalize_factor_label(item.get_ref<const std::string&>());
    if (!label) return false;
    out.factors.push_back(std::move(*label));
  }
  return true;
}

}  // namespace

std::optional<std::string> normalize_factor_label(std::string_view text) {
  std::string_view s = trim(text);
  if (s.empty() || (s.front() != 'F' && s.front() != 'f')) return std::nullopt;
  s.remove_prefix(1);
  std::uint32_t number = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), number);
  if (ec != std::errc() || ptr == s.data() || number == 0) return std::nullopt;
  s.remove_prefix(static_cast<std::size_t>(ptr - s.data()));
  if (!s.empty() && s.front() == '_') {
    const auto open = s.find('(');
    if (open == std::string_view::npos) return std::nullopt;
    s.remove_prefix(open);
  }
  s = trim(s);
  if (s.size() < 3 || s.front() != '(' || s.back() != ')') return std::nullopt;
  const std::string_view side = trim(s.substr(1, s.size() - 2));
  if (side.size() != 1) return std::nullopt;
  const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(side.front())));
  if (c != 'p' && c != 'd') return std::nullopt;
  return "F" + std::to_string(number) + "(" + c + ")";
}

std::string_view answer_key(Task task, Task2Schema schema) {
  switch (task) {
    case Task::Task1: return "distinctions";
    case Task::Task2: return schema == Task2Schema::Pair ? "emphasize/downplay" : "significance";
    case Task::Task3: return "significant_distinctions";
  }
  return {};
}

ParsedAnswer parse_answer(Task task, std::string_view text) noexcept {
  ParsedAnswer result;
  result.task = task;
  try {
    // Candidates are tried from the last closing brace backwards, so the
    // first usable one is the last object in the text.
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    for (std::size_t open = text.find('{'); open != std::string_view::npos;
         open = text.find('{', open + 1)) {
      const std::size_t end = match_object(text, open);
      if (end != std::string_view::npos) spans.emplace_back(open, end);
    }
    std::stable_sort(spans.begin(), spans.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    for (const auto& [open, end] : spans) {
      auto obj = nlohmann::json::parse(text.substr(open, end - open), nullptr, false);
      if (obj.is_discarded() || !obj.is_object() || !has_task_key(task, obj)) continue;
      ParsedAnswer candidate;
      candidate.task = task;
      if (read_payload(task, obj, candidate)) {
        candidate.status = ParseStatus::Ok;
        return candidate;
      }
      // The last object that carries the key decides; a bad payload there
      // is malformed rather than a reason to fall back to older text.
      return result;
    }
  } catch (...) {
  }
  return result;
}

nlohmann::json parsed_answer_to_json(const ParsedAnswer& a) {
  nlohmann::json j{{"task", std::stoi(std::string(task_name(a.task)))},
                   {"status", a.ok() ? "ok" : "malformed"}};
  if (a.task == Task::Task2) {
    auto opt = [](const std::optional<bool>& b) { return b ? nlohmann::json(*b) : nlohmann::json(); };
    j["emphasize"] = opt(a.emphasize);
    j["downplay"] = opt(a.downplay);
    j["significance"] = opt(a.significance);
  } else {
    j["factors"] = a.factors;
  }
  return j;
}

ParsedAnswer parsed_answer_from_json(const nlohmann::json& j) {
  try {
    ParsedAnswer a;
    const auto task = parse_task(std::to_string(j.at("task").get<int>()));
    if (!task) throw Error(Errc::SchemaMismatch, "unknown task in parsed answer");
    a.task = *task;
    const auto status = j.at("status").get<std::string>();
    if (status != "ok" && status != "malformed") {
      throw Error(Errc::SchemaMismatch, "unknown parse status '" + status + "'");
    }
    a.status = status == "ok" ? ParseStatus::Ok : ParseStatus::Malformed;
    auto opt = [&j](const char* key) -> std::optional<bool> {
      if (!j.contains(key) || j[key].is_null()) return std::nullopt;
      return j[key].get<bool>();
    };
    if (a.task == Task::Task2) {
      a.emphasize = opt("emphasize");
      a.downplay = opt("downplay");
      a.significance = opt("significance");
    } else {
      a.factors = j.at("factors").get<std::vector<std::string>>();
    }
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::SchemaMismatch, std::string("parsed answer: ") + e.what());
  }
}

}  // namespace hcbr
