#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace hcbr {

struct ModelConfig {
  std::string name;
  std::string base_url;        // e.g. https://api.openai.com/v1
  std::string api_key_env;     // environment variable holding the key; empty = no auth header
  std::optional<double> temperature;
  std::optional<double> top_p;
  std::optional<std::uint32_t> max_tokens;
  std::optional<std::string> reasoning_effort;
  std::size_t max_parallel = 4;
  std::size_t retries = 3;
  std::chrono::milliseconds timeout{300'000};
  std::chrono::milliseconds backoff{1'000};  // first retry delay, doubled each attempt
  /// JSON pointer into `usage` for the reasoning-token count; empty tries
  /// the known provider layouts.
  std::string reasoning_tokens_field;

  /// Throws Errc::InvalidConfig.
  void validate() const;
};

nlohmann::json model_config_to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const nlohmann::json& j);
ModelConfig load_model_config(const std::filesystem::path& path);

/// Reasoning tokens from a provider `usage` object, or empty when the
/// provider did not report any.
std::optional<std::uint64_t> extract_reasoning_tokens(const nlohmann::json& usage,
                                                      const std::string& field = {});

struct ModelResponse {
  std::string text;
  std::optional<std::uint64_t> reasoning_tokens;
  std::uint64_t completion_tokens = 0;
  std::chrono::milliseconds latency{0};
  std::string finish_reason;
  bool truncated = false;  // finish_reason == "length"; text kept
  nlohmann::json usage = nlohmann::json::object();
  std::string raw;  // provider body, archival only

  friend bool operator==(const ModelResponse&, const ModelResponse&) = default;
};

/// Builds a ModelResponse from a chat-completions response body.
ModelResponse response_from_body(const nlohmann::json& body, const ModelConfig& cfg);

class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual const std::string& model_name() const = 0;
  /// Throws Errc::Transport, Errc::RateLimited or Errc::AuthMissing.
  virtual ModelResponse complete(const std::string& prompt) = 0;
};

/// Live client for OpenAI-style /chat/completions endpoints. Safe to call
/// from several threads; at most cfg.max_parallel requests are in flight.
class HttpChatClient final : public ChatClient {
 public:
  explicit HttpChatClient(ModelConfig cfg);
  const std::string& model_name() const override { return cfg_.name; }
  ModelResponse complete(const std::string& prompt) override;

  nlohmann::json request_body(const std::string& prompt) const;

 private:
  ModelConfig cfg_;
  std::string api_key_;
  std::string host_;
  std::string path_;
  std::counting_semaphore<> slots_;
};

// ---------------------------------------------------------------------------
// Transcripts: JSON lines of
//   {"prompt_hash","model","response","usage","finish_reason","latency_ms","timestamp"}
// keyed by (prompt_hash, model).

struct Transcript {
  std::string prompt_hash;
  std::string model;
  std::string response;
  nlohmann::json usage = nlohmann::json::object();
  std::string finish_reason;
  std::int64_t latency_ms = 0;
  std::string timestamp;
};

nlohmann::json transcript_to_json(const Transcript& t);
Transcript transcript_from_json(const nlohmann::json& j);

class TranscriptStore {
 public:
  TranscriptStore() = default;
  /// Missing file = empty store. Malformed lines throw Errc::MalformedLine.
  static TranscriptStore load(const std::filesystem::path& path);

  /// Later records for the same key replace earlier ones.
  void add(Transcript t);
  const Transcript* find(const std::string& prompt_hash, const std::string& model) const;
  std::size_t size() const { return records_.size(); }

 private:
  std::map<std::pair<std::string, std::string>, Transcript> records_;
};

/// Serves recorded transcripts; an unrecorded prompt is Errc::Transport.
class ReplayClient final : public ChatClient {
 public:
  ReplayClient(std::shared_ptr<const TranscriptStore> store, std::string model,
               std::string reasoning_tokens_field = {});
  const std::string& model_name() const override { return model_; }
  ModelResponse complete(const std::string& prompt) override;

 private:
  std::shared_ptr<const TranscriptStore> store_;
  std::string model_;
  std::string field_;
};

/// Forwards to another client and appends every response to a transcript file.
class RecordingClient final : public ChatClient {
 public:
  RecordingClient(std::shared_ptr<ChatClient> inner, std::filesystem::path path);
  const std::string& model_name() const override { return inner_->model_name(); }
  ModelResponse complete(const std::string& prompt) override;

 private:
  std::shared_ptr<ChatClient> inner_;
  std::filesystem::path path_;
  std::mutex mu_;
};

}  // namespace hcbr
