// SPDX-License-Identifier: Apache-2.0
#include "srr/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "srr/errors.hpp"

extern char** environ;

namespace srr {

using nlohmann::json;

std::string_view to_string(DetectionMode mode) {
  switch (mode) {
    case DetectionMode::kIterative: return "iterative";
    case DetectionMode::kBatch: return "batch";
    case DetectionMode::kAuto: return "auto";
  }
  return "auto";
}

std::string_view to_string(FieldCombiner combiner) {
  return combiner == FieldCombiner::kMax ? "max" : "mean";
}

std::string_view to_string(EmbedProvider provider) {
  return provider == EmbedProvider::kHashing ? "hashing" : "http";
}

DetectionMode parse_detection_mode(std::string_view text) {
  if (text == "iterative") return DetectionMode::kIterative;
  if (text == "batch") return DetectionMode::kBatch;
  if (text == "auto") return DetectionMode::kAuto;
  throw ValidationError("detection_mode must be iterative, batch or auto, got '" +
                        std::string(text) + "'");
}

FieldCombiner parse_field_combiner(std::string_view text) {
  if (text == "max") return FieldCombiner::kMax;
  if (text == "mean") return FieldCombiner::kMean;
  throw ValidationError("field_combiner must be max or mean, got '" + std::string(text) + "'");
}

EmbedProvider parse_embed_provider(std::string_view text) {
  if (text == "hashing") return EmbedProvider::kHashing;
  if (text == "http") return EmbedProvider::kHttp;
  throw ValidationError("embed_provider must be hashing or http, got '" + std::string(text) + "'");
}

void validate(const PipelineConfig& c) {
  if (!std::isfinite(c.alpha) || !std::isfinite(c.beta))
    throw ValidationError("alpha and beta must be finite");
  if (c.alpha < 0) throw ValidationError("alpha must be >= 0");
  if (c.beta < 0) throw ValidationError("beta must be >= 0");
  if (!(c.alpha + c.beta > 0)) throw ValidationError("alpha + beta must be > 0");
  if (c.top_k < 1) throw ValidationError("top_k must be >= 1");
  if (c.context_window_threshold < 1) throw ValidationError("context_window_threshold must be >= 1");
  if (c.embedding_dimension < 1) throw ValidationError("embedding_dimension must be >= 1");
  if (c.summarizer_context_window < 1 || c.detector_context_window < 1)
    throw ValidationError("model context windows must be >= 1");
  if (c.max_output_tokens < 1) throw ValidationError("max_output_tokens must be >= 1");
  if (!(c.request_timeout_seconds > 0)) throw ValidationError("request_timeout_seconds must be > 0");
  if (c.max_parallel_requests < 1) throw ValidationError("max_parallel_requests must be >= 1");
  if (c.cache_dir.empty()) throw ValidationError("cache_dir must be non-empty");
  if (c.embed_provider == EmbedProvider::kHttp && c.embed_base_url.empty())
    throw ValidationError("embed_provider http requires embed_base_url");
}

namespace {

template <typename T>
T get_as(const json& doc, const std::string& key) {
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError("config key '" + key + "' has the wrong type: " + e.what());
  }
}

int get_int(const json& doc, const std::string& key) {
  const auto& v = doc.at(key);
  if (!v.is_number_integer()) throw ValidationError("config key '" + key + "' must be an integer");
  return v.get<int>();
}

double get_real(const json& doc, const std::string& key) {
  const auto& v = doc.at(key);
  if (!v.is_number()) throw ValidationError("config key '" + key + "' must be a number");
  return v.get<double>();
}

void apply_env(PipelineConfig& c, const EnvMap& env) {
  auto lookup = [&](const char* name) -> const std::string* {
    auto it = env.find(name);
    return it == env.end() ? nullptr : &it->second;
  };
  if (auto* v = lookup("SRR_LLM_BASE_URL")) c.llm_base_url = *v;
  if (auto* v = lookup("SRR_EMBED_BASE_URL")) c.embed_base_url = *v;
  if (auto* v = lookup("SRR_CACHE_DIR")) c.cache_dir = *v;
  if (auto* v = lookup("SRR_LLM_API_KEY")) c.llm_api_key = *v;
}

}  // namespace

PipelineConfig config_from_json_text(std::string_view text, const EnvMap& env) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("config must be a flat JSON object");

  PipelineConfig c;
  bool embed_provider_given = false;
  for (const auto& [key, value] : doc.items()) {
    if (value.is_object() || value.is_array())
      throw ParseError("config key '" + key + "' must hold a scalar value");
    if (key == "alpha") c.alpha = get_real(doc, key);
    else if (key == "beta") c.beta = get_real(doc, key);
    else if (key == "top_k") c.top_k = get_int(doc, key);
    else if (key == "detection_mode") c.detection_mode = parse_detection_mode(get_as<std::string>(doc, key));
    else if (key == "context_window_threshold") c.context_window_threshold = get_int(doc, key);
    else if (key == "embedding_dimension") c.embedding_dimension = get_int(doc, key);
    else if (key == "field_combiner") c.field_combiner = parse_field_combiner(get_as<std::string>(doc, key));
    else if (key == "embed_provider") {
      c.embed_provider = parse_embed_provider(get_as<std::string>(doc, key));
      embed_provider_given = true;
    }
    else if (key == "llm_base_url") c.llm_base_url = get_as<std::string>(doc, key);
    else if (key == "embed_base_url") c.embed_base_url = get_as<std::string>(doc, key);
    else if (key == "embed_model") c.embed_model = get_as<std::string>(doc, key);
    else if (key == "cache_dir") c.cache_dir = get_as<std::string>(doc, key);
    else if (key == "prompts_dir") c.prompts_dir = get_as<std::string>(doc, key);
    else if (key == "lexicon_path") c.lexicon_path = get_as<std::string>(doc, key);
    else if (key == "summarizer_model") c.summarizer_model = get_as<std::string>(doc, key);
    else if (key == "summarizer_context_window") c.summarizer_context_window = get_int(doc, key);
    else if (key == "detector_model") c.detector_model = get_as<std::string>(doc, key);
    else if (key == "detector_context_window") c.detector_context_window = get_int(doc, key);
    else if (key == "max_output_tokens") c.max_output_tokens = get_int(doc, key);
    else if (key == "request_timeout_seconds") c.request_timeout_seconds = get_real(doc, key);
    else if (key == "max_parallel_requests") c.max_parallel_requests = get_int(doc, key);
    else throw ValidationError("unknown config key '" + key + "'");
  }
  apply_env(c, env);
  if (!embed_provider_given && !c.embed_base_url.empty()) c.embed_provider = EmbedProvider::kHttp;
  validate(c);
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path, const EnvMap& env) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFileError("cannot open config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return config_from_json_text(buf.str(), env);
}

PipelineConfig default_config(const EnvMap& env) { return config_from_json_text("{}", env); }

std::string config_to_json_text(const PipelineConfig& c) {
  json doc = {
      {"alpha", c.alpha},
      {"beta", c.beta},
      {"top_k", c.top_k},
      {"detection_mode", to_string(c.detection_mode)},
      {"context_window_threshold", c.context_window_threshold},
      {"embedding_dimension", c.embedding_dimension},
      {"field_combiner", to_string(c.field_combiner)},
      {"embed_provider", to_string(c.embed_provider)},
      {"llm_base_url", c.llm_base_url},
      {"embed_base_url", c.embed_base_url},
      {"embed_model", c.embed_model},
      {"cache_dir", c.cache_dir},
      {"prompts_dir", c.prompts_dir},
      {"lexicon_path", c.lexicon_path},
      {"summarizer_model", c.summarizer_model},
      {"summarizer_context_window", c.summarizer_context_window},
      {"detector_model", c.detector_model},
      {"detector_context_window", c.detector_context_window},
      {"max_output_tokens", c.max_output_tokens},
      {"request_timeout_seconds", c.request_timeout_seconds},
      {"max_parallel_requests", c.max_parallel_requests},
  };
  return doc.dump(2) + "\n";
}

void save_config(const PipelineConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write config file '" + path.string() + "'");
  out << config_to_json_text(config);
  if (!out) throw IoError("failed writing config file '" + path.string() + "'");
}

EnvMap environment_map() {
  EnvMap env;
  for (char** e = environ; e != nullptr && *e != nullptr; ++e) {
    std::string_view entry(*e);
    auto eq = entry.find('=');
    if (eq == std::string_view::npos) continue;
    env.emplace(std::string(entry.substr(0, eq)), std::string(entry.substr(eq + 1)));
  }
  return env;
}

}  // namespace srr
