// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace srr {

using EnvMap = std::map<std::string, std::string>;

enum class DetectionMode { kIterative, kBatch, kAuto };
enum class FieldCombiner { kMax, kMean };
enum class EmbedProvider { kHashing, kHttp };

std::string_view to_string(DetectionMode mode);
std::string_view to_string(FieldCombiner combiner);
std::string_view to_string(EmbedProvider provider);
DetectionMode parse_detection_mode(std::string_view text);
FieldCombiner parse_field_combiner(std::string_view text);
EmbedProvider parse_embed_provider(std::string_view text);

/// Everything a pipeline run needs besides its inputs. The API key is never
/// written back out; it only ever comes from SRR_LLM_API_KEY.
struct PipelineConfig {
  double alpha = 0.7;
  double beta = 0.3;
  int top_k = 10;
  DetectionMode detection_mode = DetectionMode::kAuto;
  int context_window_threshold = 16384;
  int embedding_dimension = 768;
  FieldCombiner field_combiner = FieldCombiner::kMax;
  EmbedProvider embed_provider = EmbedProvider::kHashing;

  std::string llm_base_url;
  std::string embed_base_url;
  std::string embed_model = "all-mpnet-base-v2";
  std::string cache_dir = ".srr-cache";
  std::string prompts_dir;   // empty: compiled-in templates
  std::string lexicon_path;  // empty: compiled-in lexicon

  std::string summarizer_model = "summarizer";
  int summarizer_context_window = 131072;
  std::string detector_model = "detector";
  int detector_context_window = 8192;
  int max_output_tokens = 2048;
  double request_timeout_seconds = 120.0;
  int max_parallel_requests = 4;

  std::string llm_api_key;

  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

/// Throws ValidationError when an invariant is violated.
void validate(const PipelineConfig& config);

/// Applies defaults, then SRR_* overrides from `env`, then validates.
PipelineConfig config_from_json_text(std::string_view text, const EnvMap& env);
PipelineConfig load_config(const std::filesystem::path& path, const EnvMap& env);
PipelineConfig default_config(const EnvMap& env);

/// Fully expanded flat document with stable key order; omits the API key.
std::string config_to_json_text(const PipelineConfig& config);
void save_config(const PipelineConfig& config, const std::filesystem::path& path);

/// Snapshot of the current process environment.
EnvMap environment_map();

}  // namespace srr
