// SPDX-License-Identifier: Apache-2.0
#include "srr/pipeline.hpp"

#include <atomic>
#include <exception>
#include <thread>

#include "srr/errors.hpp"

namespace srr {

using nlohmann::json;

std::size_t Services::network_calls() const {
  return (llm ? llm->network_calls() : 0) + (embedder ? embedder->network_calls() : 0);
}

Services make_services(const PipelineConfig& config, CacheMode mode) {
  if (mode == CacheMode::kPassthrough && config.llm_api_key.empty())
    throw ConfigError("passthrough mode needs SRR_LLM_API_KEY");

  Services s;
  s.config = config;
  s.cache_mode = mode;
  const std::filesystem::path cache_root(config.cache_dir);
  std::shared_ptr<ReplayCache> llm_cache, embed_cache;
  if (mode != CacheMode::kPassthrough) {
    llm_cache = std::make_shared<ReplayCache>(cache_root / "llm");
    embed_cache = std::make_shared<ReplayCache>(cache_root / "embed");
  }

  std::shared_ptr<ChatTransport> transport;
  if (!config.llm_base_url.empty() && mode != CacheMode::kReplay)
    transport = make_http_chat_transport(config.llm_base_url, config.llm_api_key, config.request_timeout_seconds,
                                         config.max_parallel_requests);
  s.llm = std::make_unique<LlmClient>(transport, mode, llm_cache);

  if (config.embed_provider == EmbedProvider::kHashing) {
    s.embedder = std::make_shared<HashingEmbedder>(config.embedding_dimension);
  } else {
    auto http = make_http_embedder(config.embed_base_url, config.embed_model, config.embedding_dimension,
                                   config.request_timeout_seconds, config.max_parallel_requests);
    s.embedder = std::make_shared<CachingEmbedder>(http, mode, embed_cache);
  }

  s.prompts = config.prompts_dir.empty() ? PromptSet::defaults() : PromptSet::load(config.prompts_dir);
  s.lexicon = config.lexicon_path.empty() ? default_lexicon() : load_lexicon(config.lexicon_path);
  s.summarizer_profile =
      make_profile(config.summarizer_model, config.summarizer_context_window, config.context_window_threshold);
  s.detector_profile =
      make_profile(config.detector_model, config.detector_context_window, config.context_window_threshold);
  return s;
}

CweKnowledgeBase build_kb(Services& services, const std::vector<RawCweEntry>& raw, const std::string& timestamp,
                          int jobs) {
  SummarizerAgent summarizer(*services.llm, services.summarizer_profile, services.prompts,
                             services.config.max_output_tokens);
  std::vector<EnrichedCweRecord> records(raw.size());
  std::vector<std::exception_ptr> errors(raw.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < raw.size(); i = next++) {
      try {
        records[i] = enrich(raw[i], summarizer);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto n = static_cast<std::size_t>(std::max(1, jobs));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < std::min(n, raw.size()); ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return embed_records(std::move(records), *services.embedder, services.summarizer_profile.model_name, timestamp);
}

DesignScan scan_design(Services& services, const RtlDesign& design, const CweKnowledgeBase& kb) {
  if (kb.records.empty()) throw ConfigError("knowledge base is empty");
  DesignScan scan;
  scan.design = design;

  SummarizerAgent summarizer(*services.llm, services.summarizer_profile, services.prompts,
                             services.config.max_output_tokens);
  scan.design.summary = summarizer.summarize_rtl(design);
  scan.design.signature = extract_signature(design, services.lexicon);

  const auto summary_emb = embed_text(*scan.design.summary, *services.embedder, "rtl_summary");
  std::optional<EmbeddingVector> signature_emb;
  if (!scan.design.signature->empty()) {
    try {
      signature_emb = embed_text(scan.design.signature->joined(), *services.embedder, "rtl_signature");
    } catch (const EmbeddingError&) {
      // A signature with no embeddable words behaves like an empty one.
    }
  }
  scan.query = compose_query(summary_emb, signature_emb ? &*signature_emb : nullptr, services.config.alpha,
                             services.config.beta);
  scan.retrieval = retrieve_top_k(kb, scan.query, services.config.top_k, services.config.field_combiner);

  DetectionAgent detector(*services.llm, services.detector_profile, services.prompts,
                          services.config.max_output_tokens, services.config.detection_mode);
  scan.detection = detector.detect(scan.design, *scan.design.summary, scan.retrieval, kb);
  return scan;
}

json scan_trace_json(const DesignScan& scan) {
  json ranked = json::array();
  for (std::size_t i = 0; i < scan.retrieval.ranked.size(); ++i) {
    const auto& r = scan.retrieval.ranked[i];
    ranked.push_back(json{{"rank", i + 1}, {"cwe_id", r.cwe_id}, {"score", r.score}, {"best_field", r.best_field}});
  }
  return json{{"design_id", scan.design.design_id},
              {"summary", scan.design.summary.value_or("")},
              {"signature", scan.design.signature ? scan.design.signature->keywords() : std::vector<std::string>{}},
              {"retrieval", ranked},
              {"detection_mode", to_string(scan.detection.mode_used)},
              {"llm_requests", scan.detection.llm_requests},
              {"notes", scan.detection.notes}};
}

}  // namespace srr
