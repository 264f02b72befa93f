#include "hcbr/runner.hpp"

#include <atomic>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "hcbr/error.hpp"

namespace hcbr {

nlohmann::json response_record_to_json(const ResponseRecord& r) {
  return {{"id", r.id},
          {"task", std::stoi(std::string(task_name(r.task)))},
          {"model", r.model},
          {"prompt_hash", r.prompt_hash},
          {"response", r.response},
          {"reasoning_tokens", r.reasoning_tokens ? nlohmann::json(*r.reasoning_tokens) : nlohmann::json()},
          {"completion_tokens", r.completion_tokens},
          {"latency_ms", r.latency_ms},
          {"finish_reason", r.finish_reason},
          {"truncated", r.truncated}};
}

ResponseRecord response_record_from_json(const nlohmann::json& j) {
  ResponseRecord r;
  r.id = j.at("id").get<std::size_t>();
  const auto task = parse_task(std::to_string(j.at("task").get<int>()));
  if (!task) throw Error(Errc::SchemaMismatch, "unknown task in response record");
  r.task = *task;
  r.model = j.at("model").get<std::string>();
  r.prompt_hash = j.at("prompt_hash").get<std::string>();
  r.response = j.at("response").get<std::string>();
  if (j.contains("reasoning_tokens") && !j["reasoning_tokens"].is_null()) {
    r.reasoning_tokens = j["reasoning_tokens"].get<std::uint64_t>();
  }
  r.completion_tokens = j.value("completion_tokens", std::uint64_t{0});
  r.latency_ms = j.value("latency_ms", std::int64_t{0});
  r.finish_reason = j.value("finish_reason", "");
  r.truncated = j.value("truncated", false);
  return r;
}

std::vector<ResponseRecord> load_responses(const std::filesystem::path& path) {
  std::vector<ResponseRecord> out;
  std::ifstream in(path);
  if (!in) return out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(response_record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::MalformedLine, path.string() + ": " + e.what(), number);
    }
  }
  return out;
}

std::string instance_prompt(const InstanceRecord& inst, const RunOptions& opts) {
  const OneShotExample& shot = opts.one_shot != nullptr ? *opts.one_shot : default_one_shot();
  if (opts.task == Task::Task2 && !inst.scenario.target) {
    throw Error(Errc::MissingTarget,
                "instance " + std::to_string(inst.id) + " has no target distinction for Task 2");
  }
  return build_prompt(opts.task, inst.scenario, inst.scenario.target, shot, opts.schema);
}

RunStats run_model(const std::vector<InstanceRecord>& instances, ChatClient& client,
                   const RunOptions& opts, const std::filesystem::path& out) {
  const std::filesystem::path partial = out.string() + ".partial";
  std::vector<std::string> prompts;
  prompts.reserve(instances.size());
  for (const InstanceRecord& inst : instances) prompts.push_back(instance_prompt(inst, opts));

  std::map<std::string, ResponseRecord> done;
  for (const auto& file : {out, partial}) {
    for (ResponseRecord& r : load_responses(file)) {
      if (r.model == client.model_name() && r.task == opts.task) {
        done.insert_or_assign(r.prompt_hash, std::move(r));
      }
    }
  }

  RunStats stats;
  stats.total = instances.size();
  std::vector<std::optional<ResponseRecord>> results(instances.size());
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const std::string hash = prompt_hash(prompts[i]);
    if (auto it = done.find(hash); it != done.end()) {
      ResponseRecord r = it->second;
      r.id = instances[i].id;
      results[i] = std::move(r);
      ++stats.reused;
    } else {
      pending.push_back(i);
    }
  }

  std::ofstream journal(partial, std::ios::app);
  if (!journal) throw Error(Errc::Io, "cannot open " + partial.string());
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr failure;
  std::size_t failure_index = pending.size();

  auto work = [&] {
    for (std::size_t k = next++; k < pending.size() && !stop; k = next++) {
      const std::size_t i = pending[k];
      try {
        const ModelResponse resp = client.complete(prompts[i]);
        ResponseRecord r{instances[i].id,       opts.task,          client.model_name(),
                         prompt_hash(prompts[i]), resp.text,        resp.reasoning_tokens,
                         resp.completion_tokens,  resp.latency.count(), resp.finish_reason,
                         resp.truncated};
        std::lock_guard lock(mu);
        journal << response_record_to_json(r).dump() << '\n' << std::flush;
        results[i] = std::move(r);
      } catch (...) {
        std::lock_guard lock(mu);
        if (k < failure_index) {
          failure_index = k;
          failure = std::current_exception();
        }
        stop = true;
      }
    }
  };
  {
    const std::size_t n = std::min(std::max<std::size_t>(opts.workers, 1), pending.size());
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(work);
  }
  journal.close();
  if (failure) std::rethrow_exception(failure);

  const std::filesystem::path tmp = out.string() + ".tmp";
  {
    std::ofstream file(tmp, std::ios::trunc);
    for (const auto& r : results) {
      file << response_record_to_json(*r).dump() << '\n';
      stats.truncated += r->truncated;
    }
    if (!file) throw Error(Errc::Io, "cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, out);
  std::filesystem::remove(partial);
  stats.queried = pending.size();
  return stats;
}

}  // namespace hcbr
