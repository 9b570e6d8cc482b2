// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "srr/config.hpp"
#include "srr/core_model.hpp"
#include "srr/cwe_kb.hpp"
#include "srr/llm.hpp"
#include "srr/prompts.hpp"
#include "srr/retrieval.hpp"

namespace srr {

/// Attempts per agent request before giving up on malformed output. The
/// second attempt appends a format reminder, which also changes its cache key.
inline constexpr int kAgentAttempts = 2;

enum class Verdict { kFound, kNotFound, kIndeterminate };

std::string_view to_string(Verdict verdict);
Verdict parse_verdict(std::string_view text);

struct DetectionFinding {
  std::string design_id;
  std::string cwe_id;
  Verdict verdict = Verdict::kIndeterminate;
  std::string snippet;  // non-empty iff verdict is found
  std::string rationale;
  std::string raw_response;
  bool snippet_in_source = false;
  int retrieval_rank = 0;  // 1-based

  friend bool operator==(const DetectionFinding&, const DetectionFinding&) = default;
};

nlohmann::json finding_to_json(const DetectionFinding& finding);
DetectionFinding finding_from_json(const nlohmann::json& doc);
std::string findings_to_json_text(const std::vector<DetectionFinding>& findings);
/// Throws SchemaError.
std::vector<DetectionFinding> findings_from_json_text(std::string_view text);

// ---------------------------------------------------------------------------
// Response contracts

struct ParsedDetection {
  Verdict verdict = Verdict::kNotFound;
  std::string cwe_id;
  std::string snippet;
  std::string rationale;
};

/// One verdict block:
///   VERDICT: FOUND|NOT_FOUND
///   CWE: CWE-<n>
///   ```<snippet>```   (required for FOUND)
///   free prose        (rationale)
/// Total over arbitrary bytes: returns a value or throws
/// MalformedAgentOutputError, nothing else.
ParsedDetection parse_detection_response(std::string_view text);

/// Splits a batch reply at each VERDICT line and parses every block.
std::vector<ParsedDetection> parse_detection_blocks(std::string_view text);

struct SummaryAndKeywords {
  std::string summary;
  std::vector<std::string> keywords;  // lowercase, first occurrence order
};
SummaryAndKeywords parse_summary_keywords(std::string_view text);

struct SnippetPair {
  std::string vulnerable;
  std::string secure;
};
SnippetPair parse_snippet_pair(std::string_view text);

/// True when `snippet` occurs in `source` once all whitespace is ignored.
bool occurs_modulo_whitespace(std::string_view snippet, std::string_view source);

// ---------------------------------------------------------------------------
// Agents

/// Summarizer role: RTL summaries and CWE enrichment.
class SummarizerAgent {
 public:
  SummarizerAgent(LlmClient& llm, ModelProfile profile, const PromptSet& prompts, int max_output_tokens);

  /// Designs whose prompt would exceed the window are split (at module
  /// boundaries when the source tokenizes cleanly, else by lines), summarized
  /// part by part, and merged with a final call.
  std::string summarize_rtl(const RtlDesign& design);

  SummaryAndKeywords summarize_cwe(const RawCweEntry& entry);
  SnippetPair snippets_for(const RawCweEntry& entry);

  const ModelProfile& profile() const { return profile_; }

 private:
  std::string summarize_chunk(const std::string& label, std::string_view source);
  std::string merge(const std::string& design_id, const std::vector<std::string>& parts);

  LlmClient& llm_;
  ModelProfile profile_;
  const PromptSet& prompts_;
  int max_output_tokens_;
};

/// Renders the detection requests: one per CWE (iterative) or a single
/// request carrying every CWE (batch). Throws ContextOverflowError when a
/// batch request does not fit the profile's window.
std::vector<ChatRequest> render_detection_prompt(const PromptSet& prompts, const RtlDesign& design,
                                                 std::string_view summary,
                                                 const std::vector<const EnrichedCweRecord*>& cwes,
                                                 DetectionMode mode, const ModelProfile& profile,
                                                 int max_output_tokens);

/// Text block describing one CWE inside the detection prompt.
std::string render_cwe_details(const EnrichedCweRecord& record, int position);

struct DetectionOutcome {
  std::vector<DetectionFinding> findings;  // retrieval order
  DetectionMode mode_used = DetectionMode::kIterative;
  std::size_t llm_requests = 0;
  std::vector<std::string> notes;
};

class DetectionAgent {
 public:
  DetectionAgent(LlmClient& llm, ModelProfile profile, const PromptSet& prompts, int max_output_tokens,
                 DetectionMode mode);

  /// One finding per retrieved CWE. Provider failures and persistent
  /// malformed output become indeterminate findings instead of aborting.
  DetectionOutcome detect(const RtlDesign& design, std::string_view summary, const RetrievalResult& retrieved,
                          const CweKnowledgeBase& kb);

 private:
  bool try_batch(const RtlDesign& design, std::string_view summary,
                 const std::vector<const EnrichedCweRecord*>& cwes, DetectionOutcome& outcome);
  DetectionFinding detect_one(const RtlDesign& design, std::string_view summary, const EnrichedCweRecord& cwe,
                              int rank, DetectionOutcome& outcome);

  LlmClient& llm_;
  ModelProfile profile_;
  const PromptSet& prompts_;
  int max_output_tokens_;
  DetectionMode mode_;
};

}  // namespace srr
