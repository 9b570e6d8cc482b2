// SPDX-License-Identifier: Apache-2.0
#include "srr/llm.hpp"

#include <thread>

#include "srr/errors.hpp"
#include "srr/io.hpp"

namespace srr {

using nlohmann::json;

std::string_view to_string(CacheMode mode) {
  switch (mode) {
    case CacheMode::kRecord: return "record";
    case CacheMode::kReplay: return "replay";
    case CacheMode::kPassthrough: return "passthrough";
  }
  return "record";
}

CacheMode parse_cache_mode(std::string_view text) {
  if (text == "record") return CacheMode::kRecord;
  if (text == "replay") return CacheMode::kReplay;
  if (text == "passthrough") return CacheMode::kPassthrough;
  throw ValidationError("cache mode must be record, replay or passthrough, got '" + std::string(text) + "'");
}

ReplayCache::ReplayCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::optional<json> ReplayCache::load(const std::string& key) const {
  auto path = dir_ / (key + ".json");
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) return std::nullopt;
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error&) {
    throw IoError("corrupt cache entry '" + path.string() + "'");
  }
}

void ReplayCache::store(const std::string& key, const json& entry) {
  std::lock_guard lock(write_mutex_);
  write_file_atomic(dir_ / (key + ".json"), entry.dump(2) + "\n");
}

ModelProfile make_profile(std::string model_name, int context_window_tokens, int batch_threshold) {
  if (context_window_tokens <= 0) throw ValidationError("context window must be positive");
  return ModelProfile{std::move(model_name), context_window_tokens, context_window_tokens >= batch_threshold};
}

long estimate_tokens(std::string_view text) { return static_cast<long>((text.size() + 2) / 3); }

long estimate_tokens(const ChatRequest& request) {
  return estimate_tokens(request.system_text) + estimate_tokens(request.user_text);
}

namespace {

json request_json(const ChatRequest& r) {
  return json{{"model_name", r.model_name},
              {"system_text", r.system_text},
              {"user_text", r.user_text},
              {"temperature", r.temperature},
              {"max_output_tokens", r.max_output_tokens}};
}

}  // namespace

std::string cache_key(const ChatRequest& request) { return sha256_hex(request_json(request).dump()); }

LlmClient::LlmClient(std::shared_ptr<ChatTransport> transport, CacheMode mode, std::shared_ptr<ReplayCache> cache,
                     RetryPolicy retry)
    : transport_(std::move(transport)), mode_(mode), cache_(std::move(cache)), retry_(retry) {
  if (mode_ != CacheMode::kPassthrough && !cache_)
    throw ConfigError(std::string(to_string(mode_)) + " mode needs a cache directory");
}

ChatResponse LlmClient::complete(const ChatRequest& request, const ModelProfile& profile) {
  if (request.system_text.empty() || request.user_text.empty())
    throw PreconditionError("chat request texts must be non-empty");
  const long estimate = estimate_tokens(request);
  if (estimate > profile.context_window_tokens)
    throw ContextOverflowError("prompt needs ~" + std::to_string(estimate) + " tokens but " + profile.model_name +
                               " has a window of " + std::to_string(profile.context_window_tokens));

  if (mode_ == CacheMode::kPassthrough) return call_with_retries(request);

  const auto key = cache_key(request);
  if (auto hit = cache_->load(key)) {
    ChatResponse out;
    try {
      const auto& resp = hit->at("response");
      out.text = resp.at("text").get<std::string>();
      out.input_tokens = resp.value("input_tokens", 0L);
      out.output_tokens = resp.value("output_tokens", 0L);
    } catch (const json::exception& e) {
      throw IoError("cache entry " + key + " is malformed: " + e.what());
    }
    out.cached = true;
    return out;
  }
  if (mode_ == CacheMode::kReplay)
    throw ReplayMissError("no recorded response for request " + key + " (model " + request.model_name + ")");

  auto response = call_with_retries(request);
  cache_->store(key, json{{"request", request_json(request)},
                          {"response",
                           {{"text", response.text},
                            {"input_tokens", response.input_tokens},
                            {"output_tokens", response.output_tokens}}}});
  return response;
}

ChatResponse LlmClient::call_with_retries(const ChatRequest& request) {
  if (!transport_) throw ConfigError("no chat transport configured");
  auto backoff = retry_.initial_backoff;
  for (int attempt = 1;; ++attempt) {
    ++network_calls_;
    try {
      auto response = transport_->send(request);
      response.cached = false;
      return response;
    } catch (const TransientProviderError&) {
      if (attempt >= retry_.max_attempts) throw;
    }
    std::this_thread::sleep_for(backoff);
    backoff *= 2;
  }
}

}  // namespace srr
