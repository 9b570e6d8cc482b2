// SPDX-License-Identifier: Apache-2.0
// Deterministic stand-in for the summarizer and detection models. It answers
// each of the shipped prompts in the expected reply format.
#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <string>

#include "scripted_server.hpp"
#include "srr/llm.hpp"

namespace srr::testing {

enum class PromptKind { kSummarize, kMerge, kSummaryKeywords, kSnippetPair, kDetection, kUnknown };

PromptKind classify_prompt(const std::string& user_text);

class ScriptedAnalyst {
 public:
  // design_id -> CWE id -> snippet quoted when that CWE is reported FOUND.
  std::map<std::string, std::map<std::string, std::string>> found;
  // Number of leading detection replies that ignore the format.
  int malformed_detections = 0;

  std::string respond(const std::string& system_text, const std::string& user_text);
  std::size_t calls(PromptKind kind) const { return counts_[static_cast<int>(kind)].load(); }
  std::size_t total_calls() const;

 private:
  std::atomic<std::size_t> counts_[6] = {};
  std::atomic<int> malformed_sent_{0};
};

// In-process transport backed by a function.
class FunctionTransport final : public ChatTransport {
 public:
  using Fn = std::function<ChatResponse(const ChatRequest&)>;
  explicit FunctionTransport(Fn fn) : fn_(std::move(fn)) {}
  ChatResponse send(const ChatRequest& request) override {
    ++sent_;
    return fn_(request);
  }
  std::size_t sent() const { return sent_.load(); }

 private:
  Fn fn_;
  std::atomic<std::size_t> sent_{0};
};

std::shared_ptr<FunctionTransport> analyst_transport(ScriptedAnalyst& analyst);

// Serves /chat from the analyst.
ScriptedServer::Handler analyst_handler(ScriptedAnalyst& analyst);

}  // namespace srr::testing
