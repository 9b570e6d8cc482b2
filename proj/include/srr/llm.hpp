// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace srr {

/// record: serve hits from the cache, call the provider on a miss and store
///         the answer.
/// replay: cache only; a miss is an error and the network is never touched.
/// passthrough: always call the provider, never read or write the cache.
enum class CacheMode { kRecord, kReplay, kPassthrough };

std::string_view to_string(CacheMode mode);
CacheMode parse_cache_mode(std::string_view text);

/// Content-addressed JSON store, one file per entry: `<dir>/<key>.json`.
/// Reads may run concurrently; writes are serialized and atomic.
class ReplayCache {
 public:
  explicit ReplayCache(std::filesystem::path dir);

  std::optional<nlohmann::json> load(const std::string& key) const;
  void store(const std::string& key, const nlohmann::json& entry);
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::mutex write_mutex_;
};

struct ChatRequest {
  std::string model_name;
  std::string system_text;
  std::string user_text;
  double temperature = 0.0;
  int max_output_tokens = 2048;
};

struct ChatResponse {
  std::string text;
  long input_tokens = 0;
  long output_tokens = 0;
  bool cached = false;
};

struct ModelProfile {
  std::string model_name;
  int context_window_tokens = 8192;
  bool supports_batch_cwe = false;
};

/// supports_batch_cwe is set when the window reaches `batch_threshold`.
ModelProfile make_profile(std::string model_name, int context_window_tokens, int batch_threshold);

/// Conservative token count: ceil(bytes / 3).
long estimate_tokens(std::string_view text);
long estimate_tokens(const ChatRequest& request);

/// SHA-256 over the canonical JSON of every request field.
std::string cache_key(const ChatRequest& request);

/// One round trip to a chat service. Implementations throw
/// TransientProviderError for failures worth retrying, ProviderError otherwise.
class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  virtual ChatResponse send(const ChatRequest& request) = 0;
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
};

/// HTTP transport for `POST <base>/chat`.
std::shared_ptr<ChatTransport> make_http_chat_transport(const std::string& base_url, const std::string& api_key,
                                                        double timeout_seconds, int max_in_flight);

class LlmClient {
 public:
  LlmClient(std::shared_ptr<ChatTransport> transport, CacheMode mode, std::shared_ptr<ReplayCache> cache,
            RetryPolicy retry = {});

  /// Throws ContextOverflowError before any I/O when the prompt estimate
  /// exceeds the profile's window.
  ChatResponse complete(const ChatRequest& request, const ModelProfile& profile);

  CacheMode mode() const { return mode_; }
  std::size_t network_calls() const { return network_calls_.load(); }

 private:
  ChatResponse call_with_retries(const ChatRequest& request);

  std::shared_ptr<ChatTransport> transport_;
  CacheMode mode_;
  std::shared_ptr<ReplayCache> cache_;
  RetryPolicy retry_;
  std::atomic<std::size_t> network_calls_{0};
};

}  // namespace srr
