// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "srr/embedder.hpp"
#include "srr/embedding.hpp"

namespace srr {

class SummarizerAgent;

struct RawCweEntry {
  std::string cwe_id;
  std::string title;
  std::string description;
  std::string extended_description;
  std::vector<std::string> mitigations;
  std::vector<std::string> modes_of_introduction;

  friend bool operator==(const RawCweEntry&, const RawCweEntry&) = default;
};

/// The three fields compared against a query. The secure snippet is kept
/// for the detection prompt but never searched.
inline constexpr std::array<std::string_view, 3> kSearchableFields = {"summary", "keywords", "vulnerable_snippet"};

struct EnrichedCweRecord {
  std::string cwe_id;
  std::string title;
  std::string summary;
  std::vector<std::string> keywords;
  std::string vulnerable_snippet;
  std::string secure_snippet;
  std::map<std::string, EmbeddingVector> field_embeddings;

  std::string joined_keywords() const;

  friend bool operator==(const EnrichedCweRecord&, const EnrichedCweRecord&) = default;
};

struct KbProvenance {
  std::string enrichment_model;
  std::string embedding_provider;
  std::string build_timestamp;

  friend bool operator==(const KbProvenance&, const KbProvenance&) = default;
};

/// Immutable once built: records sorted by numeric CWE id, unique ids, every
/// searchable field embedded at `embedding_dimension`.
struct CweKnowledgeBase {
  std::vector<EnrichedCweRecord> records;
  int embedding_dimension = 0;
  KbProvenance provenance;

  const EnrichedCweRecord* find(std::string_view cwe_id) const;
  std::size_t vector_count() const;

  friend bool operator==(const CweKnowledgeBase&, const CweKnowledgeBase&) = default;
};

inline constexpr int kKbFormatVersion = 1;

/// Parses the raw export (JSON array of entries); sorted by numeric id.
/// Throws SchemaError, DuplicateIdError.
std::vector<RawCweEntry> parse_raw_cwes(std::string_view json_text);
std::vector<RawCweEntry> ingest_raw(const std::filesystem::path& path);
nlohmann::json raw_to_json(const RawCweEntry& entry);

/// Summary/keywords and the snippet pair from the summarizer; id and title
/// are copied verbatim. The result has no embeddings yet.
EnrichedCweRecord enrich(const RawCweEntry& entry, SummarizerAgent& summarizer);

/// Embeds the searchable fields and assembles the knowledge base.
/// Throws EmbeddingError, DimensionMismatchError, DuplicateIdError.
CweKnowledgeBase embed_records(std::vector<EnrichedCweRecord> records, Embedder& embedder,
                               std::string enrichment_model, std::string build_timestamp);

/// Validates KB invariants; throws DimensionMismatchError / DuplicateIdError /
/// SchemaError.
void validate(const CweKnowledgeBase& kb);

nlohmann::json record_to_json(const EnrichedCweRecord& record);
EnrichedCweRecord record_from_json(const nlohmann::json& doc);

/// Directory with manifest.json and records.jsonl.
void save_kb(const CweKnowledgeBase& kb, const std::filesystem::path& dir);
/// Throws IoError, MissingFileError, VersionError, DimensionMismatchError.
CweKnowledgeBase load_kb(const std::filesystem::path& dir);

}  // namespace srr
