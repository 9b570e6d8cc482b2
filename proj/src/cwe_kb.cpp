// SPDX-License-Identifier: Apache-2.0
#include "srr/cwe_kb.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "srr/core_model.hpp"
#include "srr/errors.hpp"
#include "srr/io.hpp"

namespace srr {

namespace fs = std::filesystem;
using nlohmann::json;

std::string EnrichedCweRecord::joined_keywords() const {
  std::string out;
  for (const auto& k : keywords) {
    if (!out.empty()) out += ' ';
    out += k;
  }
  return out;
}

const EnrichedCweRecord* CweKnowledgeBase::find(std::string_view cwe_id) const {
  for (const auto& r : records) {
    if (r.cwe_id == cwe_id) return &r;
  }
  return nullptr;
}

std::size_t CweKnowledgeBase::vector_count() const {
  std::size_t n = 0;
  for (const auto& r : records) n += r.field_embeddings.size();
  return n;
}

namespace {

std::string required_string(const json& obj, const char* key, std::size_t index) {
  if (!obj.contains(key) || !obj[key].is_string())
    throw SchemaError("raw CWE entry " + std::to_string(index) + ": field '" + key + "' must be a string");
  return obj[key].get<std::string>();
}

std::vector<std::string> string_list(const json& obj, const char* key, std::size_t index) {
  if (!obj.contains(key)) return {};
  const auto& v = obj[key];
  if (!v.is_array()) throw SchemaError("raw CWE entry " + std::to_string(index) + ": '" + key + "' must be an array");
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string())
      throw SchemaError("raw CWE entry " + std::to_string(index) + ": '" + key + "' must hold strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

bool by_cwe_number(const std::string& a, const std::string& b) { return cwe_number(a) < cwe_number(b); }

}  // namespace

std::vector<RawCweEntry> parse_raw_cwes(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("raw CWE file is not valid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw SchemaError("raw CWE file must hold a JSON array");

  std::vector<RawCweEntry> entries;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& obj = doc[i];
    if (!obj.is_object()) throw SchemaError("raw CWE entry " + std::to_string(i) + " is not an object");
    RawCweEntry e;
    e.cwe_id = required_string(obj, "cwe_id", i);
    if (!is_cwe_id(e.cwe_id)) throw SchemaError("raw CWE entry " + std::to_string(i) + ": bad id '" + e.cwe_id + "'");
    e.title = required_string(obj, "title", i);
    e.description = required_string(obj, "description", i);
    if (trim(e.title).empty() || trim(e.description).empty())
      throw SchemaError(e.cwe_id + ": title and description must be non-empty");
    if (obj.contains("extended_description")) e.extended_description = required_string(obj, "extended_description", i);
    e.mitigations = string_list(obj, "mitigations", i);
    e.modes_of_introduction = string_list(obj, "modes_of_introduction", i);
    if (!seen.insert(e.cwe_id).second) throw DuplicateIdError("duplicate raw CWE entry " + e.cwe_id);
    entries.push_back(std::move(e));
  }
  std::sort(entries.begin(), entries.end(),
            [](const RawCweEntry& a, const RawCweEntry& b) { return by_cwe_number(a.cwe_id, b.cwe_id); });
  return entries;
}

std::vector<RawCweEntry> ingest_raw(const fs::path& path) { return parse_raw_cwes(read_file(path)); }

json raw_to_json(const RawCweEntry& e) {
  return json{{"cwe_id", e.cwe_id},
              {"title", e.title},
              {"description", e.description},
              {"extended_description", e.extended_description},
              {"mitigations", e.mitigations},
              {"modes_of_introduction", e.modes_of_introduction}};
}

void validate(const CweKnowledgeBase& kb) {
  if (kb.embedding_dimension < 1 && !kb.records.empty())
    throw SchemaError("knowledge base has no embedding dimension");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < kb.records.size(); ++i) {
    const auto& r = kb.records[i];
    if (!is_cwe_id(r.cwe_id)) throw SchemaError("record has malformed id '" + r.cwe_id + "'");
    if (!seen.insert(r.cwe_id).second) throw DuplicateIdError("duplicate knowledge base record " + r.cwe_id);
    if (i > 0 && !by_cwe_number(kb.records[i - 1].cwe_id, r.cwe_id))
      throw SchemaError("knowledge base records are not sorted by CWE id");
    if (r.field_embeddings.size() != kSearchableFields.size())
      throw SchemaError(r.cwe_id + " must carry exactly the searchable field embeddings");
    for (auto field : kSearchableFields) {
      auto it = r.field_embeddings.find(std::string(field));
      if (it == r.field_embeddings.end()) throw SchemaError(r.cwe_id + " lacks an embedding for " + std::string(field));
      if (it->second.dimension() != kb.embedding_dimension)
        throw DimensionMismatchError(r.cwe_id + "/" + std::string(field) + " has dimension " +
                                     std::to_string(it->second.dimension()) + ", knowledge base uses " +
                                     std::to_string(kb.embedding_dimension));
      if (!all_finite(it->second.values)) throw SchemaError(r.cwe_id + " has non-finite embedding values");
    }
  }
}

CweKnowledgeBase embed_records(std::vector<EnrichedCweRecord> records, Embedder& embedder,
                               std::string enrichment_model, std::string build_timestamp) {
  std::sort(records.begin(), records.end(),
            [](const EnrichedCweRecord& a, const EnrichedCweRecord& b) { return by_cwe_number(a.cwe_id, b.cwe_id); });

  std::vector<std::string> summaries, keywords, snippets;
  for (const auto& r : records) {
    summaries.push_back(r.summary);
    keywords.push_back(r.joined_keywords());
    snippets.push_back(r.vulnerable_snippet);
  }
  auto s = embed_texts(summaries, embedder, "summary");
  auto k = embed_texts(keywords, embedder, "keywords");
  auto v = embed_texts(snippets, embedder, "vulnerable_snippet");
  for (std::size_t i = 0; i < records.size(); ++i) {
    records[i].field_embeddings = {{"summary", std::move(s[i])},
                                   {"keywords", std::move(k[i])},
                                   {"vulnerable_snippet", std::move(v[i])}};
  }
  CweKnowledgeBase kb{std::move(records), embedder.dimension(),
                      KbProvenance{std::move(enrichment_model), embedder.name(), std::move(build_timestamp)}};
  validate(kb);
  return kb;
}

json record_to_json(const EnrichedCweRecord& r) {
  json embeddings = json::object();
  for (const auto& [field, emb] : r.field_embeddings) {
    embeddings[field] = std::vector<double>(emb.values.data(), emb.values.data() + emb.values.size());
  }
  return json{{"cwe_id", r.cwe_id},
              {"title", r.title},
              {"summary", r.summary},
              {"keywords", r.keywords},
              {"vulnerable_snippet", r.vulnerable_snippet},
              {"secure_snippet", r.secure_snippet},
              {"embeddings", embeddings}};
}

EnrichedCweRecord record_from_json(const json& doc) {
  try {
    EnrichedCweRecord r;
    r.cwe_id = doc.at("cwe_id").get<std::string>();
    r.title = doc.at("title").get<std::string>();
    r.summary = doc.at("summary").get<std::string>();
    r.keywords = doc.at("keywords").get<std::vector<std::string>>();
    r.vulnerable_snippet = doc.at("vulnerable_snippet").get<std::string>();
    r.secure_snippet = doc.at("secure_snippet").get<std::string>();
    for (const auto& [field, values] : doc.at("embeddings").items()) {
      auto v = values.get<std::vector<double>>();
      r.field_embeddings[field] =
          EmbeddingVector{Eigen::Map<const DenseVector<double>>(v.data(), static_cast<Eigen::Index>(v.size())), field};
    }
    return r;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed knowledge base record: ") + e.what());
  }
}

void save_kb(const CweKnowledgeBase& kb, const fs::path& dir) {
  validate(kb);
  std::string lines;
  for (const auto& r : kb.records) lines += record_to_json(r).dump() + "\n";
  json manifest = {{"format_version", kKbFormatVersion},
                   {"dimension", kb.embedding_dimension},
                   {"record_count", kb.records.size()},
                   {"provenance",
                    {{"enrichment_model", kb.provenance.enrichment_model},
                     {"embedding_provider", kb.provenance.embedding_provider},
                     {"build_timestamp", kb.provenance.build_timestamp}}}};
  write_file_atomic(dir / "records.jsonl", lines);
  write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

CweKnowledgeBase load_kb(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw MissingFileError("knowledge base directory '" + dir.string() + "' not found");
  json manifest;
  try {
    manifest = json::parse(read_file(dir / "manifest.json"));
  } catch (const json::parse_error& e) {
    throw IoError(std::string("knowledge base manifest is corrupt: ") + e.what());
  }
  CweKnowledgeBase kb;
  std::size_t record_count = 0;
  try {
    const int version = manifest.at("format_version").get<int>();
    if (version != kKbFormatVersion)
      throw VersionError("knowledge base format version " + std::to_string(version) + " is not supported (expected " +
                         std::to_string(kKbFormatVersion) + ")");
    kb.embedding_dimension = manifest.at("dimension").get<int>();
    record_count = manifest.at("record_count").get<std::size_t>();
    const auto& prov = manifest.at("provenance");
    kb.provenance = KbProvenance{prov.at("enrichment_model").get<std::string>(),
                                 prov.at("embedding_provider").get<std::string>(),
                                 prov.at("build_timestamp").get<std::string>()};
  } catch (const json::exception& e) {
    throw SchemaError(std::string("knowledge base manifest is malformed: ") + e.what());
  }

  std::istringstream lines(read_file(dir / "records.jsonl"));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.empty()) continue;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::parse_error& e) {
      throw IoError("records.jsonl line " + std::to_string(line_no) + " is corrupt: " + e.what());
    }
    kb.records.push_back(record_from_json(doc));
  }
  if (kb.records.size() != record_count)
    throw SchemaError("manifest lists " + std::to_string(record_count) + " records but records.jsonl holds " +
                      std::to_string(kb.records.size()));
  validate(kb);
  return kb;
}

}  // namespace srr
