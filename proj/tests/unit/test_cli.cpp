// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <sstream>

#include <json.hpp>

#include "fixtures.hpp"
#include "scripted_analyst.hpp"
#include "scripted_server.hpp"
#include "srr/cli.hpp"
#include "srr/io.hpp"

using namespace srr;
using namespace srr::testing;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args, const EnvMap& env) {
  std::ostringstream out, err;
  const int code = run_cli(args, env, out, err);
  return {code, out.str(), err.str()};
}

std::string sample(const std::string& rel) { return (sample_dir() / rel).string(); }

void script_bench_hits(ScriptedAnalyst& a) {
  a.found["debug_unlock"]["CWE-1191"] = read_file(sample_dir() / "bench/debug_unlock/gold_snippet.v");
  a.found["lock_bit_write"]["CWE-1231"] = read_file(sample_dir() / "bench/lock_bit_write/gold_snippet.v");
}

}  // namespace

TEST_CASE("usage errors exit 2, help exits 0") {
  EnvMap env;
  CHECK(run({"--help"}, env).code == kExitOk);
  CHECK(run({}, env).code == kExitUsage);
  CHECK(run({"--bogus", "kb", "inspect", "--kb", "x"}, env).code == kExitUsage);
  CHECK(run({"frobnicate"}, env).code == kExitUsage);
  CHECK(run({"--llm", "sometimes", "kb", "inspect", "--kb", "x"}, env).code == kExitUsage);
  CHECK(run({"bench", "--kb", "k", "--out", "o"}, env).code == kExitUsage);
}

TEST_CASE("configuration problems exit 3") {
  TempDir tmp;
  EnvMap env{{"SRR_CACHE_DIR", (tmp / "cache").string()}};
  auto r = run({"--llm", "passthrough", "kb", "build", "--cwe-input", sample("hw_cwes.json"), "--out",
                (tmp / "kb").string()},
               env);
  CHECK(r.code == kExitConfig);
  CHECK(r.err.find("SRR_LLM_API_KEY") != std::string::npos);

  write_file_atomic(tmp / "bad.json", "{ \"alpha\": ");
  CHECK(run({"--config", (tmp / "bad.json").string(), "kb", "build", "--cwe-input", sample("hw_cwes.json"), "--out",
             (tmp / "kb").string()},
            env)
            .code == kExitConfig);
  write_file_atomic(tmp / "neg.json", R"({"alpha": -1})");
  CHECK(run({"--config", (tmp / "neg.json").string(), "kb", "build", "--cwe-input", sample("hw_cwes.json"), "--out",
             (tmp / "kb").string()},
            env)
            .code == kExitConfig);
  CHECK_FALSE(std::filesystem::exists(tmp / "kb"));
}

TEST_CASE("empty dataset exits 4") {
  TempDir tmp;
  std::filesystem::create_directories(tmp / "empty");
  EnvMap env{{"SRR_CACHE_DIR", (tmp / "cache").string()}};
  auto r = run({"bench", "--kb", (tmp / "kb").string(), "--dataset", (tmp / "empty").string(), "--out",
                (tmp / "out").string()},
               env);
  CHECK(r.code == kExitEmpty);
}

TEST_CASE("provider failure exits 5") {
  TempDir tmp;
  ScriptedServer server([](const std::string&, const json&) { return ScriptedReply{401, {{"error", "denied"}}, 0}; });
  EnvMap env{{"SRR_CACHE_DIR", (tmp / "cache").string()}, {"SRR_LLM_BASE_URL", server.base_url()}};
  auto r = run({"kb", "build", "--cwe-input", sample("hw_cwes.json"), "--out", (tmp / "kb").string()}, env);
  CHECK(r.code == kExitProvider);
  CHECK(server.request_count() >= 1);

  // A replay miss is a provider failure too.
  auto miss = run({"--llm", "replay", "kb", "build", "--cwe-input", sample("hw_cwes.json"), "--out",
                   (tmp / "kb2").string()},
                  env);
  CHECK(miss.code == kExitProvider);
}

TEST_CASE("kb build, inspect, bench and eval end to end") {
  TempDir tmp;
  ScriptedAnalyst analyst;
  script_bench_hits(analyst);
  ScriptedServer server(analyst_handler(analyst));
  EnvMap env{{"SRR_CACHE_DIR", (tmp / "cache").string()}, {"SRR_LLM_BASE_URL", server.base_url()}};
  const auto kb = (tmp / "kb").string();

  auto built = run({"--frozen-time", "kb", "build", "--cwe-input", sample("hw_cwes.json"), "--out", kb}, env);
  REQUIRE_MESSAGE(built.code == kExitOk, built.err);
  CHECK(built.out.find("6 records") != std::string::npos);
  auto kb_manifest = json::parse(read_file(tmp / "kb" / "run_manifest.json"));
  CHECK(kb_manifest["network_calls"] == 12);
  CHECK(kb_manifest["provider_modes"]["llm"] == "record");

  auto listing = run({"kb", "inspect", "--kb", kb}, env);
  CHECK(listing.code == kExitOk);
  CHECK(listing.out.find("records: 6") != std::string::npos);
  auto one = run({"kb", "inspect", "--kb", kb, "--cwe", "CWE-1191"}, env);
  REQUIRE(one.code == kExitOk);
  auto rec = json::parse(one.out);
  CHECK(rec["cwe_id"] == "CWE-1191");
  CHECK(rec["embeddings"]["summary"]["norm"].get<double>() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(run({"kb", "inspect", "--kb", kb, "--cwe", "CWE-9999"}, env).code == kExitUsage);

  const auto out1 = (tmp / "run1").string();
  auto bench = run({"--frozen-time", "bench", "--kb", kb, "--dataset", sample("bench"), "--out", out1}, env);
  REQUIRE_MESSAGE(bench.code == kExitOk, bench.err);
  auto report = json::parse(read_file(tmp / "run1" / "report.json"));
  CHECK(report["detection_accuracy_pct"] == "66.67%");
  CHECK(report["retrieval_hits"]["t10"] == 3);
  const auto served = server.request_count();

  const auto out2 = (tmp / "run2").string();
  auto replay = run({"--llm", "replay", "--frozen-time", "bench", "--kb", kb, "--dataset", sample("bench"), "--out",
                     out2},
                    env);
  REQUIRE_MESSAGE(replay.code == kExitOk, replay.err);
  CHECK(server.request_count() == served);
  CHECK(read_file(tmp / "run2" / "report.json") == read_file(tmp / "run1" / "report.json"));
  CHECK(read_file(tmp / "run2" / "findings.json") == read_file(tmp / "run1" / "findings.json"));
  auto manifest = json::parse(read_file(tmp / "run2" / "manifest.json"));
  CHECK(manifest["network_calls"] == 0);
  CHECK(manifest["provider_modes"]["llm"] == "replay");
  CHECK(manifest["created_at"] == "1970-01-01T00:00:00Z");

  // Per-CWE prompts do not depend on top-k, so a smaller k still replays.
  auto fewer = run({"--llm", "replay", "--top-k", "2", "bench", "--kb", kb, "--dataset", sample("bench"), "--out",
                    (tmp / "run_k2").string()},
                   env);
  CHECK(fewer.code == kExitOk);
  CHECK(json::parse(read_file(tmp / "run_k2" / "retrieval_trace.json"))[0]["retrieval"].size() == 2);

  // Batch prompts were never recorded, so every design misses the cache.
  auto missed = run({"--llm", "replay", "--mode", "batch", "bench", "--kb", kb, "--dataset", sample("bench"), "--out",
                     (tmp / "run3").string()},
                    env);
  CHECK(missed.code == kExitEmpty);
  CHECK(json::parse(read_file(tmp / "run3" / "manifest.json"))["failures"].size() == 3);

  // Offline scoring with a baseline in which nothing was detected.
  write_file_atomic(tmp / "baseline.json", "[]");
  auto eval = run({"--frozen-time", "eval", "--dataset", sample("bench"), "--findings", out1 + "/findings.json",
                   "--retrieval", out1 + "/retrieval_trace.json", "--out", (tmp / "eval").string(), "--compare",
                   (tmp / "baseline.json").string()},
                  env);
  REQUIRE_MESSAGE(eval.code == kExitOk, eval.err);
  auto cmp = json::parse(read_file(tmp / "eval" / "comparison.json"));
  CHECK(cmp["accuracy_before_pct"] == "0.00%");
  CHECK(cmp["increase_pct"] == "66.67%");
  auto eval_report = json::parse(read_file(tmp / "eval" / "report.json"));
  CHECK(eval_report["per_case"] == report["per_case"]);
  CHECK(eval_report["retrieval_hits"] == report["retrieval_hits"]);
  CHECK(read_file(tmp / "eval" / "report.md").find("Before / after") != std::string::npos);

  // scan names designs after the file stem.
  auto scan = run({"--llm", "replay", "scan", "--kb", kb, "--design", sample("bench/debug_unlock/design.v"), "--out",
                   (tmp / "scan").string()},
                  env);
  // The stem "design" was never recorded, so replay cannot answer it.
  CHECK(scan.code == kExitEmpty);
  auto scan_rec = run({"scan", "--kb", kb, "--design", sample("bench/debug_unlock/design.v"), "--out",
                       (tmp / "scan").string()},
                      env);
  REQUIRE_MESSAGE(scan_rec.code == kExitOk, scan_rec.err);
  auto trace = json::parse(read_file(tmp / "scan" / "retrieval_trace.json"));
  REQUIRE(trace.size() == 1);
  CHECK(trace[0]["design_id"] == "design");
  CHECK(trace[0]["retrieval"].size() == 6);
}
