// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "srr/agents.hpp"
#include "srr/config.hpp"
#include "srr/cwe_kb.hpp"
#include "srr/embedder.hpp"
#include "srr/llm.hpp"
#include "srr/prompts.hpp"
#include "srr/retrieval.hpp"
#include "srr/signature.hpp"

namespace srr {

/// Provider clients, caches, prompts and lexicon for one run.
struct Services {
  PipelineConfig config;
  CacheMode cache_mode = CacheMode::kRecord;
  std::unique_ptr<LlmClient> llm;
  std::shared_ptr<Embedder> embedder;
  PromptSet prompts;
  SignatureLexicon lexicon;
  ModelProfile summarizer_profile;
  ModelProfile detector_profile;

  std::size_t network_calls() const;
};

/// Throws ConfigError when passthrough mode has no SRR_LLM_API_KEY.
Services make_services(const PipelineConfig& config, CacheMode mode);

/// Enriches every raw entry (up to `jobs` at a time; output order is by id)
/// and embeds the searchable fields.
CweKnowledgeBase build_kb(Services& services, const std::vector<RawCweEntry>& raw, const std::string& timestamp,
                          int jobs);

struct DesignScan {
  RtlDesign design;  // summary and signature filled in
  EmbeddingVector query;
  RetrievalResult retrieval;
  DetectionOutcome detection;
};

/// summarize -> signature -> weighted query -> top-k -> detect.
DesignScan scan_design(Services& services, const RtlDesign& design, const CweKnowledgeBase& kb);

nlohmann::json scan_trace_json(const DesignScan& scan);

}  // namespace srr
