// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>

#include <json.hpp>

#include "fixtures.hpp"
#include "scripted_analyst.hpp"
#include "srr/agents.hpp"
#include "srr/cwe_kb.hpp"
#include "srr/errors.hpp"
#include "srr/io.hpp"
#include "srr/pipeline.hpp"

using namespace srr;
using srr::testing::TempDir;

TEST_CASE("raw CWE ingestion sorts by numeric id and validates") {
  auto entries = parse_raw_cwes(R"([
    {"cwe_id": "CWE-1271", "title": "t", "description": "d"},
    {"cwe_id": "CWE-20", "title": "t", "description": "d", "mitigations": ["m"]}])");
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].cwe_id == "CWE-20");
  CHECK(entries[0].mitigations == std::vector<std::string>{"m"});
  CHECK(parse_raw_cwes(nlohmann::json::array({raw_to_json(entries[1])}).dump())[0] == entries[1]);

  CHECK_THROWS_AS(parse_raw_cwes("{}"), SchemaError);
  CHECK_THROWS_AS(parse_raw_cwes("[{\"cwe_id\": \"X-1\", \"title\": \"t\", \"description\": \"d\"}]"), SchemaError);
  CHECK_THROWS_AS(parse_raw_cwes("[{\"cwe_id\": \"CWE-1\", \"title\": \"t\"}]"), SchemaError);
  CHECK_THROWS_AS(parse_raw_cwes("[{\"cwe_id\": \"CWE-1\", \"title\": \" \", \"description\": \"d\"}]"), SchemaError);
  CHECK_THROWS_AS(parse_raw_cwes(R"([{"cwe_id": "CWE-1", "title": "t", "description": "d"},
                                     {"cwe_id": "CWE-1", "title": "t", "description": "d"}])"),
                  DuplicateIdError);
  CHECK(ingest_raw(srr::testing::sample_dir() / "hw_cwes.json").size() == 6);
}

TEST_CASE("KB save and load is an identity") {
  std::mt19937_64 rng(3);
  auto kb = srr::testing::random_kb(rng, 12, 16);
  TempDir dir;
  save_kb(kb, dir.path());
  auto back = load_kb(dir.path());
  CHECK(back == kb);
  CHECK(back.vector_count() == 36);
}

TEST_CASE("KB load errors") {
  std::mt19937_64 rng(4);
  auto kb = srr::testing::random_kb(rng, 3, 4);
  TempDir dir;
  save_kb(kb, dir.path());
  auto manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));

  SUBCASE("unknown format version") {
    manifest["format_version"] = 99;
    write_file_atomic(dir / "manifest.json", manifest.dump());
    CHECK_THROWS_AS(load_kb(dir.path()), VersionError);
  }
  SUBCASE("dimension disagrees with vectors") {
    manifest["dimension"] = 5;
    write_file_atomic(dir / "manifest.json", manifest.dump());
    CHECK_THROWS_AS(load_kb(dir.path()), DimensionMismatchError);
  }
  SUBCASE("record count disagrees") {
    manifest["record_count"] = 4;
    write_file_atomic(dir / "manifest.json", manifest.dump());
    CHECK_THROWS_AS(load_kb(dir.path()), SchemaError);
  }
  SUBCASE("corrupt records") {
    write_file_atomic(dir / "records.jsonl", "{not json\n");
    CHECK_THROWS_AS(load_kb(dir.path()), IoError);
  }
  SUBCASE("missing directory") { CHECK_THROWS_AS(load_kb(dir / "absent"), MissingFileError); }
}

TEST_CASE("validate rejects duplicates, disorder and missing fields") {
  std::mt19937_64 rng(5);
  auto kb = srr::testing::random_kb(rng, 3, 4);
  auto dup = kb;
  dup.records[1].cwe_id = dup.records[0].cwe_id;
  CHECK_THROWS_AS(validate(dup), DuplicateIdError);
  auto unordered = kb;
  std::swap(unordered.records[0], unordered.records[2]);
  CHECK_THROWS_AS(validate(unordered), SchemaError);
  auto missing = kb;
  missing.records[0].field_embeddings.erase("keywords");
  CHECK_THROWS_AS(validate(missing), SchemaError);
}

TEST_CASE("building the sample KB through the scripted summarizer") {
  TempDir dir;
  srr::testing::ScriptedAnalyst analyst;
  auto config = default_config({});
  config.cache_dir = (dir / "cache").string();
  config.embedding_dimension = 64;
  auto services = make_services(config, CacheMode::kRecord);
  services.llm = std::make_unique<LlmClient>(srr::testing::analyst_transport(analyst), CacheMode::kRecord,
                                             std::make_shared<ReplayCache>(dir / "cache" / "llm"));

  auto raw = ingest_raw(srr::testing::sample_dir() / "hw_cwes.json");
  auto kb = build_kb(services, raw, "1970-01-01T00:00:00Z", 3);
  REQUIRE(kb.records.size() == 6);
  CHECK(kb.vector_count() == 18);
  CHECK(kb.records[0].cwe_id == "CWE-1191");
  CHECK(kb.records[0].keywords.front() == "on-chip");
  CHECK(kb.records[0].vulnerable_snippet == "assign weak_1191 = 1'b1;");
  CHECK(kb.provenance.embedding_provider == "hashing-bow");
  CHECK(analyst.total_calls() == 12);
  for (const auto& r : kb.records)
    for (const auto& [field, emb] : r.field_embeddings) CHECK(emb.values.norm() == doctest::Approx(1.0).epsilon(1e-9));

  // A rebuild in replay mode reuses every recorded reply.
  auto replay = make_services(config, CacheMode::kReplay);
  auto again = build_kb(replay, raw, "1970-01-01T00:00:00Z", 1);
  CHECK(again == kb);
  CHECK(analyst.total_calls() == 12);
}
