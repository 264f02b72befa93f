#include "hcbr/model.hpp"

#include <cstdlib>
#include <ctime>
#include <fstream>
#include <thread>

#include <httplib.h>

#include "hcbr/error.hpp"
#include "hcbr/hash.hpp"
#include "hcbr/prompt.hpp"

namespace hcbr {

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

template <typename T>
std::optional<T> optional_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<T>();
}

}  // namespace

void ModelConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(Errc::InvalidConfig, "model config: " + msg); };
  if (name.empty()) fail("name is empty");
  if (temperature && (*temperature < 0.0 || *temperature > 2.0)) fail("temperature outside [0, 2]");
  if (top_p && (*top_p <= 0.0 || *top_p > 1.0)) fail("top_p outside (0, 1]");
  if (max_tokens && *max_tokens == 0) fail("max_tokens must be positive");
  if (max_parallel == 0) fail("max_parallel must be positive");
  if (timeout.count() <= 0) fail("timeout must be positive");
  if (backoff.count() < 0) fail("backoff must be non-negative");
}

nlohmann::json model_config_to_json(const ModelConfig& cfg) {
  auto opt = [](const auto& o) { return o ? nlohmann::json(*o) : nlohmann::json(); };
  return {{"name", cfg.name},
          {"base_url", cfg.base_url},
          {"api_key_env", cfg.api_key_env},
          {"temperature", opt(cfg.temperature)},
          {"top_p", opt(cfg.top_p)},
          {"max_tokens", opt(cfg.max_tokens)},
          {"reasoning_effort", opt(cfg.reasoning_effort)},
          {"max_parallel", cfg.max_parallel},
          {"retries", cfg.retries},
          {"timeout_ms", cfg.timeout.count()},
          {"backoff_ms", cfg.backoff.count()},
          {"reasoning_tokens_field", cfg.reasoning_tokens_field}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  static const char* const known[] = {"name",         "base_url",   "api_key_env",
                                      "temperature",  "top_p",      "max_tokens",
                                      "reasoning_effort", "max_parallel", "retries",
                                      "timeout_ms",   "backoff_ms", "reasoning_tokens_field"};
  if (!j.is_object()) throw Error(Errc::InvalidConfig, "model config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      throw Error(Errc::InvalidConfig, "model config: unknown key '" + key + "'");
    }
  }
  try {
    ModelConfig cfg;
    cfg.name = j.at("name").get<std::string>();
    cfg.base_url = j.value("base_url", "");
    cfg.api_key_env = j.value("api_key_env", "");
    cfg.temperature = optional_field<double>(j, "temperature");
    cfg.top_p = optional_field<double>(j, "top_p");
    cfg.max_tokens = optional_field<std::uint32_t>(j, "max_tokens");
    cfg.reasoning_effort = optional_field<std::string>(j, "reasoning_effort");
    cfg.max_parallel = j.value("max_parallel", cfg.max_parallel);
    cfg.retries = j.value("retries", cfg.retries);
    cfg.timeout = std::chrono::milliseconds(j.value("timeout_ms", cfg.timeout.count()));
    cfg.backoff = std::chrono::milliseconds(j.value("backoff_ms", cfg.backoff.count()));
    cfg.reasoning_tokens_field = j.value("reasoning_tokens_field", "");
    cfg.validate();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidConfig, std::string("model config: ") + e.what());
  }
}

ModelConfig load_model_config(const std::filesystem::path& path) {
  auto j = nlohmann::json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw Error(Errc::InvalidConfig, path.string() + " is not valid JSON");
  return model_config_from_json(j);
}

std::optional<std::uint64_t> extract_reasoning_tokens(const nlohmann::json& usage,
                                                      const std::string& field) {
  static const char* const layouts[] = {"/completion_tokens_details/reasoning_tokens",
                                        "/reasoning_tokens",
                                        "/output_tokens_details/reasoning_tokens",
                                        "/thoughts_token_count"};
  auto read = [&usage](const std::string& pointer) -> std::optional<std::uint64_t> {
    try {
      const nlohmann::json::json_pointer p(pointer);
      if (!usage.contains(p)) return std::nullopt;
      const auto& v = usage.at(p);
      if (v.is_number_unsigned()) return v.get<std::uint64_t>();
      if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
    } catch (const nlohmann::json::exception&) {
    }
    return std::nullopt;
  };
  if (!usage.is_object()) return std::nullopt;
  if (!field.empty()) return read(field);
  for (const char* layout : layouts) {
    if (auto v = read(layout)) return v;
  }
  return std::nullopt;
}

ModelResponse response_from_body(const nlohmann::json& body, const ModelConfig& cfg) {
  try {
    const auto& choice = body.at("choices").at(0);
    const auto& content = choice.at("message").at("content");
    ModelResponse r;
    r.text = content.is_string() ? content.get<std::string>() : std::string();
    r.finish_reason = choice.contains("finish_reason") && choice["finish_reason"].is_string()
                          ? choice["finish_reason"].get<std::string>()
                          : std::string();
    r.truncated = r.finish_reason == "length";
    if (body.contains("usage") && body["usage"].is_object()) r.usage = body["usage"];
    r.completion_tokens = r.usage.value("completion_tokens", std::uint64_t{0});
    r.reasoning_tokens = extract_reasoning_tokens(r.usage, cfg.reasoning_tokens_field);
    r.raw = body.dump();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::Transport, std::string("unexpected response body: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

HttpChatClient::HttpChatClient(ModelConfig cfg)
    : cfg_(std::move(cfg)), slots_(static_cast<std::ptrdiff_t>(cfg_.max_parallel)) {
  cfg_.validate();
  const auto scheme = cfg_.base_url.find("://");
  if (scheme == std::string::npos ||
      (cfg_.base_url.compare(0, scheme, "http") != 0 && cfg_.base_url.compare(0, scheme, "https") != 0)) {
    throw Error(Errc::InvalidConfig, "base_url must start with http:// or https://");
  }
  const auto slash = cfg_.base_url.find('/', scheme + 3);
  host_ = cfg_.base_url.substr(0, slash);
  std::string prefix = slash == std::string::npos ? "" : cfg_.base_url.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  path_ = prefix + "/chat/completions";
  if (!cfg_.api_key_env.empty()) {
    const char* key = std::getenv(cfg_.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw Error(Errc::AuthMissing, "environment variable " + cfg_.api_key_env + " is not set");
    }
    api_key_ = key;
  }
}

nlohmann::json HttpChatClient::request_body(const std::string& prompt) const {
  nlohmann::json body{{"model", cfg_.name},
                      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})}};
  if (cfg_.temperature) body["temperature"] = *cfg_.temperature;
  if (cfg_.top_p) body["top_p"] = *cfg_.top_p;
  if (cfg_.max_tokens) body["max_tokens"] = *cfg_.max_tokens;
  if (cfg_.reasoning_effort) body["reasoning_effort"] = *cfg_.reasoning_effort;
  return body;
}

ModelResponse HttpChatClient::complete(const std::string& prompt) {
  slots_.acquire();
  struct Release {
    std::counting_semaphore<>& s;
    ~Release() { s.release(); }
  } release{slots_};

  httplib::Client client(host_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(cfg_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
  const std::string payload = request_body(prompt).dump();

  Errc last = Errc::Transport;
  std::string last_message;
  for (std::size_t attempt = 0;; ++attempt) {
    const auto start = std::chrono::steady_clock::now();
    auto res = client.Post(path_, headers, payload, "application/json");
    if (!res) {
      last = Errc::Transport;
      last_message = "request failed: " + httplib::to_string(res.error());
    } else if (res->status == 429) {
      last = Errc::RateLimited;
      last_message = "rate limited (HTTP 429)";
    } else if (res->status >= 500) {
      last = Errc::Transport;
      last_message = "server error (HTTP " + std::to_string(res->status) + ")";
    } else if (res->status != 200) {
      throw Error(Errc::Transport, "HTTP " + std::to_string(res->status) + ": " +
                                       res->body.substr(0, 200));
    } else {
      auto body = nlohmann::json::parse(res->body, nullptr, false);
      if (!body.is_discarded()) {
        ModelResponse r = response_from_body(body, cfg_);
        r.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - start);
        return r;
      }
      last = Errc::Transport;
      last_message = "response body is not JSON";
    }
    if (attempt >= cfg_.retries) break;
    std::this_thread::sleep_for(cfg_.backoff * (std::int64_t{1} << std::min<std::size_t>(attempt, 20)));
  }
  throw Error(last, last_message + " after " + std::to_string(cfg_.retries + 1) + " attempts");
}

// ---------------------------------------------------------------------------

nlohmann::json transcript_to_json(const Transcript& t) {
  return {{"prompt_hash", t.prompt_hash},     {"model", t.model},
          {"response", t.response},           {"usage", t.usage},
          {"finish_reason", t.finish_reason}, {"latency_ms", t.latency_ms},
          {"timestamp", t.timestamp}};
}

Transcript transcript_from_json(const nlohmann::json& j) {
  Transcript t;
  t.prompt_hash = j.at("prompt_hash").get<std::string>();
  t.model = j.at("model").get<std::string>();
  t.response = j.at("response").get<std::string>();
  t.usage = j.value("usage", nlohmann::json::object());
  t.finish_reason = j.value("finish_reason", "");
  t.latency_ms = j.value("latency_ms", std::int64_t{0});
  t.timestamp = j.value("timestamp", "");
  return t;
}

TranscriptStore TranscriptStore::load(const std::filesystem::path& path) {
  TranscriptStore store;
  std::ifstream in(path);
  if (!in) {
    if (std::filesystem::exists(path)) throw Error(Errc::Io, "cannot read " + path.string());
    return store;
  }
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      store.add(transcript_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::MalformedLine, path.string() + ": " + e.what(), number);
    }
  }
  return store;
}

void TranscriptStore::add(Transcript t) {
  auto key = std::make_pair(t.prompt_hash, t.model);
  records_.insert_or_assign(std::move(key), std::move(t));
}

const Transcript* TranscriptStore::find(const std::string& prompt_hash,
                                        const std::string& model) const {
  auto it = records_.find({prompt_hash, model});
  return it == records_.end() ? nullptr : &it->second;
}

ReplayClient::ReplayClient(std::shared_ptr<const TranscriptStore> store, std::string model,
                           std::string reasoning_tokens_field)
    : store_(std::move(store)), model_(std::move(model)), field_(std::move(reasoning_tokens_field)) {}

ModelResponse ReplayClient::complete(const std::string& prompt) {
  const std::string hash = prompt_hash(prompt);
  const Transcript* t = store_->find(hash, model_);
  if (t == nullptr) {
    throw Error(Errc::Transport, "no recorded transcript for prompt " + hash + " and model " + model_);
  }
  ModelResponse r;
  r.text = t->response;
  r.usage = t->usage;
  r.finish_reason = t->finish_reason;
  r.truncated = t->finish_reason == "length";
  r.completion_tokens = t->usage.is_object() ? t->usage.value("completion_tokens", std::uint64_t{0}) : 0;
  r.reasoning_tokens = extract_reasoning_tokens(t->usage, field_);
  r.latency = std::chrono::milliseconds(t->latency_ms);
  r.raw = transcript_to_json(*t).dump();
  return r;
}

RecordingClient::RecordingClient(std::shared_ptr<ChatClient> inner, std::filesystem::path path)
    : inner_(std::move(inner)), path_(std::move(path)) {}

ModelResponse RecordingClient::complete(const std::string& prompt) {
  ModelResponse r = inner_->complete(prompt);
  Transcript t{prompt_hash(prompt), inner_->model_name(), r.text,           r.usage,
               r.finish_reason,     r.latency.count(),    utc_timestamp()};
  std::lock_guard lock(mu_);
  std::ofstream out(path_, std::ios::app);
  out << transcript_to_json(t).dump() << '\n';
  if (!out) throw Error(Errc::Io, "cannot append to " + path_.string());
  return r;
}

}  // namespace hcbr
