// SPDX-License-Identifier: Apache-2.0
// One line per acceptance criterion; exits nonzero when any fails.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

#include <json.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "scripted_analyst.hpp"
#include "scripted_server.hpp"
#include "srr/agents.hpp"
#include "srr/cli.hpp"
#include "srr/errors.hpp"
#include "srr/evaluation.hpp"
#include "srr/io.hpp"
#include "srr/retrieval.hpp"
#include "srr/signature.hpp"

using namespace srr;
using namespace srr::testing;
using nlohmann::json;

namespace {

struct Failure {
  std::string what;
};

void expect(bool ok, const std::string& what) {
  if (!ok) throw Failure{what};
}

struct Criterion {
  const char* id;
  const char* title;
  double budget_s;  // 0: no time limit
  std::function<void()> body;
};

// ---------------------------------------------------------------------------

std::vector<std::string> random_tokens(std::mt19937_64& rng, int max_len) {
  std::uniform_int_distribution<int> len(0, max_len), sym(0, 9);
  std::vector<std::string> out(static_cast<std::size_t>(len(rng)));
  for (auto& t : out) t = "t" + std::to_string(sym(rng));
  return out;
}

void rouge_agrees_with_oracle() {
  const auto worked = rouge_l(tokenize_snippet("a b c d"), tokenize_snippet("a c d"));
  expect(std::abs(worked.f_lcs - 6.0 / 7.0) < 1e-6, "worked example is not 6/7");
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const auto ref = random_tokens(rng, 50), cand = random_tokens(rng, 50);
    const auto lcs = static_cast<double>(oracle_lcs(ref, cand));
    const double p = cand.empty() ? 0 : lcs / static_cast<double>(cand.size());
    const double r = ref.empty() ? 0 : lcs / static_cast<double>(ref.size());
    const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
    const auto got = rouge_l(ref, cand);
    expect(got.lcs_length == oracle_lcs(ref, cand), "LCS differs on pair " + std::to_string(i));
    expect(std::abs(got.precision - p) < 1e-9 && std::abs(got.recall - r) < 1e-9,
           "P or R differs on pair " + std::to_string(i));
    expect(std::abs(got.f_lcs - f) < 1e-9, "F differs on pair " + std::to_string(i));
  }
}

void retrieval_agrees_with_oracle() {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> size(1, 200), dim(2, 64), top(1, 15);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = dim(rng);
    auto kb = random_kb(rng, size(rng), d, 0.2);
    const auto query = random_vector(rng, d);
    const int k = top(rng);
    const auto combiner = trial % 2 ? FieldCombiner::kMean : FieldCombiner::kMax;
    const auto want = oracle_rank(kb, query, k, combiner);
    const auto got = retrieve_top_k(kb, EmbeddingVector{query, "query"}, k, combiner);
    const auto tag = "trial " + std::to_string(trial);
    expect(got.ranked.size() == want.size(), tag + ": result size");
    for (std::size_t i = 0; i < want.size(); ++i) {
      expect(got.ranked[i].cwe_id == want[i].cwe_id, tag + ": order at " + std::to_string(i));
      expect(std::abs(got.ranked[i].score - want[i].score) < 1e-12, tag + ": score at " + std::to_string(i));
    }
    for (double c : {0.5, 2.0, 10.0}) {
      const auto scaled = retrieve_top_k(kb, EmbeddingVector{DenseVector<double>(c * query), "query"}, k, combiner);
      expect(scaled.ranked.size() == got.ranked.size(), tag + ": scaled size");
      for (std::size_t i = 0; i < got.ranked.size(); ++i)
        expect(scaled.ranked[i].cwe_id == got.ranked[i].cwe_id, tag + ": scaling changed the order");
    }
  }
}

void query_composition() {
  DenseVector<double> s(2), w(2);
  s << 1, 0;
  w << 0, 1;
  const EmbeddingVector es{s, "summary"}, ew{w, "signature"};
  const auto q = compose_query(es, &ew, 0.7, 0.3);
  expect(q.values[0] == 0.7 && q.values[1] == 0.3, "default weights do not give [0.7, 0.3]");

  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const EmbeddingVector a{random_vector(rng, 32), "summary"}, b{random_vector(rng, 32), "signature"};
    const auto only = compose_query(a, &b, 1.0, 0.0);
    expect(only.values == a.values, "alpha=1, beta=0 is not the summary embedding");
    const auto none = compose_query(a, static_cast<const EmbeddingVector*>(nullptr), 0.7, 0.3);
    expect(none.values == a.values, "empty signature does not fall back to the summary embedding");
  }
}

EvaluationReport synthetic_report(int detected, int total) {
  std::vector<BenchmarkCase> cases;
  std::vector<DetectionFinding> findings;
  for (int i = 0; i < total; ++i) {
    const auto id = "case" + std::to_string(100 + i);
    cases.push_back(BenchmarkCase{id, make_design(id, "module m; endmodule"), "x", std::nullopt, "CWE-1", ""});
    if (i < detected) {
      DetectionFinding f;
      f.design_id = id;
      f.cwe_id = "CWE-1";
      f.verdict = Verdict::kFound;
      f.snippet = "x";
      f.retrieval_rank = 1;
      findings.push_back(f);
    }
  }
  return evaluate(cases, findings, nullptr, RunMetadata{});
}

void paper_metrics() {
  const auto after_small = synthetic_report(9, 14), before_small = synthetic_report(3, 14);
  const auto after_large = synthetic_report(14, 14), before_large = synthetic_report(7, 14);
  expect(format_percent(after_small.detection_accuracy) == "64.29%", "9/14 does not render as 64.29%");
  expect(format_percent(before_small.detection_accuracy) == "21.43%", "3/14 does not render as 21.43%");
  expect(format_percent(before_large.detection_accuracy) == "50.00%", "7/14 does not render as 50.00%");
  expect(format_percent(after_large.detection_accuracy) == "100.00%", "14/14 does not render as 100.00%");
  expect(comparison_to_json(before_small, after_small)["increase_pct"] == "42.86%", "increase is not 42.86%");

  const std::vector<int> gold_rank{1, 1, 1, 1, 1, 2, 3, 3, 4, 4, 5, 5, 2, 7};
  std::vector<RankedCase> ranked;
  for (int r : gold_rank) {
    RankedCase c{"CWE-1", {}};
    for (int i = 1; i <= 10; ++i) c.ranked_ids.push_back(i == r ? "CWE-1" : "CWE-" + std::to_string(500 + i));
    ranked.push_back(std::move(c));
  }
  expect(retrieval_hits(ranked) == RetrievalHits{5, 13, 14}, "retrieval hits are not 5/13/14");
}

void signature_corpus() {
  std::vector<std::filesystem::path> files;
  for (const auto& e :
       std::filesystem::directory_iterator(std::filesystem::path(SRR_SOURCE_DIR) / "tests" / "data" / "verilog_corpus"))
    files.push_back(e.path());
  std::sort(files.begin(), files.end());
  expect(files.size() == 10, "corpus should hold 10 files");
  const auto& lex = default_lexicon();
  std::mt19937_64 rng(5);
  for (const auto& f : files) {
    const auto src = read_file(f);
    const auto base = extract_signature(src, lex);
    expect(base.keywords() == oracle_signature(src, lex), f.filename().string() + ": differs from the oracle");
    for (int i = 0; i < 50; ++i) {
      const auto commented = mutate_add_comments(src, rng);
      expect(extract_signature(commented, lex) == base, f.filename().string() + ": comments changed the signature");
      const auto recased = mutate_identifier_case(src, rng);
      expect(extract_signature(recased, lex) == base, f.filename().string() + ": case changed the signature");
    }
  }
}

int run_quiet(const std::vector<std::string>& args, const EnvMap& env, std::string* err_text = nullptr) {
  std::ostringstream out, err;
  const int code = run_cli(args, env, out, err);
  if (err_text) *err_text = err.str();
  return code;
}

void bench_replay() {
  TempDir tmp;
  ScriptedAnalyst analyst;
  analyst.found["debug_unlock"]["CWE-1191"] = read_file(sample_dir() / "bench/debug_unlock/gold_snippet.v");
  analyst.found["lock_bit_write"]["CWE-1231"] = read_file(sample_dir() / "bench/lock_bit_write/gold_snippet.v");
  ScriptedServer server(analyst_handler(analyst));
  const EnvMap env{{"SRR_CACHE_DIR", (tmp / "cache").string()}, {"SRR_LLM_BASE_URL", server.base_url()}};
  const auto kb = (tmp / "kb").string(), dataset = (sample_dir() / "bench").string();

  std::string err;
  expect(run_quiet({"--frozen-time", "kb", "build", "--cwe-input", (sample_dir() / "hw_cwes.json").string(), "--out",
                    kb},
                   env, &err) == kExitOk,
         "kb build failed: " + err);
  expect(run_quiet({"--frozen-time", "bench", "--kb", kb, "--dataset", dataset, "--out", (tmp / "rec").string()}, env,
                   &err) == kExitOk,
         "recording bench failed: " + err);
  const auto served = server.request_count();

  std::string reports[2];
  for (int i = 0; i < 2; ++i) {
    const auto out = tmp / ("replay" + std::to_string(i));
    expect(run_quiet({"--llm", "replay", "--frozen-time", "bench", "--kb", kb, "--dataset", dataset, "--out",
                      out.string()},
                     env, &err) == kExitOk,
           "replay bench failed: " + err);
    reports[i] = read_file(out / "report.json");
    expect(json::parse(read_file(out / "manifest.json"))["network_calls"] == 0, "replay made network calls");
  }
  expect(server.request_count() == served, "replay reached the server");
  expect(reports[0] == reports[1], "replayed reports differ");
  expect(reports[0] == read_file(tmp / "rec" / "report.json"), "replay differs from the recording");
  expect(json::parse(reports[0])["detection_accuracy_pct"] == "66.67%", "accuracy is not 66.67%");
}

void kb_round_trip() {
  TempDir tmp;
  std::mt19937_64 rng(7);
  const auto kb = random_kb(rng, 50, 48);
  expect(kb.vector_count() == 150, "expected 150 vectors");
  save_kb(kb, tmp / "kb");
  const auto back = load_kb(tmp / "kb");
  expect(back == kb, "loaded knowledge base is not identical to the saved one");
  expect(back.records.size() == 50 && back.vector_count() == 150, "record or vector count changed");
  for (std::size_t i = 0; i < kb.records.size(); ++i) {
    const auto& a = kb.records[i];
    const auto& b = back.records[i];
    expect(a.cwe_id == b.cwe_id && a.summary == b.summary && a.keywords == b.keywords, a.cwe_id + ": fields changed");
    for (const auto& [field, emb] : a.field_embeddings) {
      const auto it = b.field_embeddings.find(field);
      expect(it != b.field_embeddings.end(), a.cwe_id + ": lost " + field);
      expect(it->second.dimension() == emb.dimension(), a.cwe_id + ": dimension changed");
      expect(std::abs(it->second.values.norm() - emb.values.norm()) <= 1e-6, a.cwe_id + ": norm drifted");
      expect((it->second.values - emb.values).cwiseAbs().maxCoeff() <= 1e-6, a.cwe_id + ": values drifted");
    }
  }
}

void parser_is_total() {
  std::mt19937_64 rng(8);
  const std::vector<std::string> seeds{"VERDICT: FOUND\nCWE: CWE-1191\n```verilog\nassign a = b;\n```\nREASON: x\n",
                                       "VERDICT: NOT_FOUND\nCWE: CWE-20\nREASON: none\n", "VERDICT: ", "CWE: CWE-",
                                       "```", "\n"};
  std::uniform_int_distribution<int> len(0, 200), byte(0, 255), pick(0, 3);
  std::uniform_int_distribution<std::size_t> seed_pick(0, seeds.size() - 1);
  int valid = 0;
  for (int i = 0; i < 10000; ++i) {
    std::string text;
    const int n = len(rng);
    // Odd inputs mix in fragments of the reply format so both paths are hit.
    const bool structured = i % 2 == 1;
    while (static_cast<int>(text.size()) < n) {
      if (structured && pick(rng) == 0) text += seeds[seed_pick(rng)];
      else text += static_cast<char>(byte(rng));
    }
    if (i % 10 == 1) text = seeds[(i / 10) % 2];
    try {
      const auto parsed = parse_detection_response(text);
      expect(is_cwe_id(parsed.cwe_id), "parsed finding without a valid CWE id");
      expect(parsed.verdict != Verdict::kIndeterminate, "parser produced an indeterminate verdict");
      expect((parsed.verdict == Verdict::kFound) == !parsed.snippet.empty(), "snippet presence disagrees with verdict");
      ++valid;
    } catch (const MalformedAgentOutputError&) {
    } catch (const Failure&) {
      throw;
    } catch (const std::exception& e) {
      throw Failure{std::string("unexpected exception: ") + e.what()};
    }
  }
  expect(valid >= 1000, "too few inputs parsed as valid findings");
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"AC1", "ROUGE-L matches the LCS oracle on 1000 pairs", 5, rouge_agrees_with_oracle},
      {"AC2", "top-k retrieval matches the linear-scan oracle and is scale invariant", 10, retrieval_agrees_with_oracle},
      {"AC3", "query composition weights", 0, query_composition},
      {"AC4", "reported accuracies and retrieval hits", 0, paper_metrics},
      {"AC5", "hardware signature is comment-blind and case-insensitive", 0, signature_corpus},
      {"AC6", "bench replays deterministically without network traffic", 30, bench_replay},
      {"AC7", "knowledge base round-trips through disk", 0, kb_round_trip},
      {"AC8", "detection parser is total over arbitrary bytes", 0, parser_is_total},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = true;
    try {
      c.body();
    } catch (const Failure& f) {
      ok = false;
      detail = f.what;
    } catch (const std::exception& e) {
      ok = false;
      detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (ok && c.budget_s > 0 && secs > c.budget_s) {
      ok = false;
      detail = "exceeded the " + std::to_string(static_cast<int>(c.budget_s)) + " s budget";
    }
    std::printf("%s %s: %s (%.3f s)%s%s\n", ok ? "PASS" : "FAIL", c.id, c.title, secs, ok ? "" : " - ",
                detail.c_str());
    if (!ok) ++failed;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
