// SPDX-License-Identifier: Apache-2.0
#include "srr/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <exception>
#include <map>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "srr/dataset.hpp"
#include "srr/errors.hpp"
#include "srr/evaluation.hpp"
#include "srr/io.hpp"
#include "srr/pipeline.hpp"

namespace srr {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalOptions {
  std::string config_path;
  std::string llm_mode = "record";
  std::string cache_dir;
  int jobs = 1;
  int top_k = 0;
  std::string mode;
  bool frozen_time = false;
};

std::string now_iso8601(bool frozen) {
  if (frozen) return "1970-01-01T00:00:00Z";
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class StageClock {
 public:
  explicit StageClock(bool frozen) : frozen_(frozen) {}
  template <typename F>
  auto time(const std::string& stage, F&& f) {
    const auto start = std::chrono::steady_clock::now();
    struct Record {
      StageClock& self;
      std::string stage;
      std::chrono::steady_clock::time_point start;
      ~Record() {
        const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        self.timings_[stage] = self.frozen_ ? 0.0 : ms;
      }
    } record{*this, stage, start};
    return f();
  }
  json to_json() const { return json(timings_); }

 private:
  bool frozen_;
  std::map<std::string, double> timings_;
};

// Resolves config from file/env plus command-line overrides.
PipelineConfig resolve_config(const GlobalOptions& g, const EnvMap& env) {
  try {
    auto config = g.config_path.empty() ? default_config(env) : load_config(g.config_path, env);
    if (!g.cache_dir.empty()) config.cache_dir = g.cache_dir;
    if (g.top_k != 0) config.top_k = g.top_k;
    if (!g.mode.empty()) config.detection_mode = parse_detection_mode(g.mode);
    validate(config);
    return config;
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
}

struct RunManifest {
  RunManifest(std::string cmd, PipelineConfig cfg, CacheMode mode)
      : command(std::move(cmd)), config(std::move(cfg)), cache_mode(mode) {}

  std::string command;
  PipelineConfig config;
  CacheMode cache_mode;
  std::vector<std::pair<std::string, std::string>> inputs;  // label, content hash
  std::vector<std::string> artifacts;
  std::vector<std::string> notes;
  json failures = json::array();
  std::size_t network_calls = 0;

  std::string run_id() const {
    json doc = {{"command", command}, {"config", json::parse(config_to_json_text(config))}};
    for (const auto& [label, hash] : inputs) doc["inputs"][label] = hash;
    return sha256_hex(doc.dump());
  }

  void write(const fs::path& path, const StageClock& clock, bool frozen) const {
    json doc = {{"run_id", run_id()},
                {"command", command},
                {"config", json::parse(config_to_json_text(config))},
                {"provider_modes", {{"llm", to_string(cache_mode)}, {"embedding", to_string(config.embed_provider)}}},
                {"stage_timings_ms", clock.to_json()},
                {"artifacts", artifacts},
                {"notes", notes},
                {"failures", failures},
                {"network_calls", network_calls},
                {"created_at", now_iso8601(frozen)}};
    for (const auto& [label, hash] : inputs) doc["inputs"][label] = hash;
    write_file_atomic(path, doc.dump(2) + "\n");
  }
};

std::string hash_file(const fs::path& p) { return sha256_hex(read_file(p)); }

std::string hash_tree(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw MissingFileError("'" + dir.string() + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::string acc;
  for (const auto& f : files) acc += fs::relative(f, dir).generic_string() + ":" + hash_file(f) + "\n";
  return sha256_hex(acc);
}

void write_json(const fs::path& path, const json& doc, RunManifest& manifest) {
  write_file_atomic(path, doc.dump(2) + "\n");
  manifest.artifacts.push_back(path.filename().string());
}

void write_text(const fs::path& path, const std::string& text, RunManifest& manifest) {
  write_file_atomic(path, text);
  manifest.artifacts.push_back(path.filename().string());
}

struct ScanResult {
  std::optional<DesignScan> scan;
  std::exception_ptr error;
};

// Scans designs with up to `jobs` workers; result order follows input order.
std::vector<ScanResult> scan_all(Services& services, const std::vector<RtlDesign>& designs,
                                 const CweKnowledgeBase& kb, int jobs) {
  std::vector<ScanResult> results(designs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < designs.size(); i = next++) {
      try {
        results[i].scan = scan_design(services, designs[i], kb);
      } catch (...) {
        results[i].error = std::current_exception();
      }
    }
  };
  const auto n = static_cast<std::size_t>(std::max(1, jobs));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < std::min(n, designs.size()); ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return results;
}

std::string describe(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const std::exception& ex) {
    return ex.what();
  } catch (...) {
    return "unknown error";
  }
}

bool is_provider_failure(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const ProviderError&) {
    return true;
  } catch (...) {
    return false;
  }
}

RunMetadata metadata_for(const PipelineConfig& config, const std::string& embedding_provider, bool frozen) {
  return RunMetadata{config.detector_model,
                     config.summarizer_model,
                     embedding_provider,
                     std::string(to_string(config.field_combiner)),
                     sha256_hex(config_to_json_text(config)),
                     now_iso8601(frozen)};
}

// Per-design failures are recorded; the run fails only when nothing completed.
int completion_code(const std::vector<ScanResult>& results, CacheMode mode) {
  bool any_ok = false, all_provider = !results.empty();
  for (const auto& r : results) {
    if (r.scan) any_ok = true;
    else if (!is_provider_failure(r.error)) all_provider = false;
  }
  if (any_ok) return kExitOk;
  return all_provider && mode != CacheMode::kReplay ? kExitProvider : kExitEmpty;
}

struct ScanBatch {
  std::vector<DetectionFinding> findings;
  json traces = json::array();
};

// Collects findings and traces; failed designs get an empty trace entry.
ScanBatch collect(const std::vector<RtlDesign>& designs, const std::vector<ScanResult>& results,
                  RunManifest& manifest, std::ostream& err) {
  ScanBatch batch;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& id = designs[i].design_id;
    if (results[i].scan) {
      const auto& s = *results[i].scan;
      batch.findings.insert(batch.findings.end(), s.detection.findings.begin(), s.detection.findings.end());
      batch.traces.push_back(scan_trace_json(s));
      for (const auto& n : s.detection.notes) manifest.notes.push_back(id + ": " + n);
    } else {
      const auto what = describe(results[i].error);
      manifest.failures.push_back({{"design_id", id}, {"error", what}});
      err << "scan of " << id << " failed: " << what << "\n";
      batch.traces.push_back({{"design_id", id}, {"retrieval", json::array()}, {"error", what}});
    }
  }
  return batch;
}

// ---------------------------------------------------------------------------

int cmd_kb_build(const GlobalOptions& g, const EnvMap& env, const std::string& input, const std::string& out_dir,
                 std::ostream& out) {
  auto config = resolve_config(g, env);
  auto services = make_services(config, parse_cache_mode(g.llm_mode));
  StageClock clock(g.frozen_time);
  RunManifest manifest("kb build", config, services.cache_mode);
  manifest.inputs.emplace_back("cwe_input", hash_file(input));

  auto raw = clock.time("ingest", [&] { return ingest_raw(input); });
  auto kb = clock.time("enrich_and_embed", [&] { return build_kb(services, raw, now_iso8601(g.frozen_time), g.jobs); });
  save_kb(kb, out_dir);
  manifest.artifacts = {"manifest.json", "records.jsonl"};
  manifest.network_calls = services.network_calls();
  manifest.write(fs::path(out_dir) / "run_manifest.json", clock, g.frozen_time);
  out << "built knowledge base with " << kb.records.size() << " records (" << kb.vector_count() << " vectors, dimension "
      << kb.embedding_dimension << ") in " << out_dir << "\n";
  return kExitOk;
}

int cmd_kb_inspect(const std::string& kb_dir, const std::string& cwe, std::ostream& out) {
  auto kb = load_kb(kb_dir);
  if (cwe.empty()) {
    out << "records: " << kb.records.size() << ", dimension: " << kb.embedding_dimension
        << ", enrichment: " << kb.provenance.enrichment_model << ", embeddings: " << kb.provenance.embedding_provider
        << ", built: " << kb.provenance.build_timestamp << "\n";
    for (const auto& r : kb.records) out << r.cwe_id << "\t" << r.title << "\n";
    return kExitOk;
  }
  const auto* r = kb.find(cwe);
  if (!r) throw ValidationError(cwe + " is not in the knowledge base");
  auto doc = record_to_json(*r);
  json norms;
  for (const auto& [field, emb] : r->field_embeddings)
    norms[field] = {{"dimension", emb.dimension()}, {"norm", emb.values.norm()}};
  doc["embeddings"] = norms;
  out << doc.dump(2) << "\n";
  return kExitOk;
}

int cmd_scan(const GlobalOptions& g, const EnvMap& env, const std::string& kb_dir,
             const std::vector<std::string>& design_paths, const std::string& out_dir, std::ostream& out,
             std::ostream& err) {
  auto config = resolve_config(g, env);
  auto services = make_services(config, parse_cache_mode(g.llm_mode));
  StageClock clock(g.frozen_time);
  RunManifest manifest("scan", config, services.cache_mode);
  manifest.inputs.emplace_back("kb", hash_tree(kb_dir));
  auto kb = clock.time("load_kb", [&] { return load_kb(kb_dir); });

  std::vector<RtlDesign> designs;
  for (const auto& p : design_paths) {
    designs.push_back(make_design(fs::path(p).stem().string(), read_file(p)));
    manifest.inputs.emplace_back("design:" + designs.back().design_id, hash_file(p));
  }
  auto results = clock.time("scan", [&] { return scan_all(services, designs, kb, g.jobs); });
  auto batch = collect(designs, results, manifest, err);

  write_text(fs::path(out_dir) / "findings.json", findings_to_json_text(batch.findings), manifest);
  write_json(fs::path(out_dir) / "retrieval_trace.json", batch.traces, manifest);
  manifest.network_calls = services.network_calls();
  manifest.write(fs::path(out_dir) / "manifest.json", clock, g.frozen_time);

  const auto found = std::count_if(batch.findings.begin(), batch.findings.end(),
                                   [](const DetectionFinding& f) { return f.verdict == Verdict::kFound; });
  out << "scanned " << designs.size() - manifest.failures.size() << "/" << designs.size() << " design(s); " << found
      << " weakness(es) found\n";
  return completion_code(results, services.cache_mode);
}

std::vector<RankedCase> ranked_cases_from_traces(const std::vector<BenchmarkCase>& cases, const json& traces) {
  if (!traces.is_array()) throw SchemaError("retrieval trace must be a JSON array");
  std::map<std::string, std::vector<std::string>> by_design;
  try {
    for (const auto& t : traces) {
      std::vector<std::string> ids;
      for (const auto& r : t.at("retrieval")) ids.push_back(r.at("cwe_id").get<std::string>());
      by_design[t.at("design_id").get<std::string>()] = std::move(ids);
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed retrieval trace: ") + e.what());
  }
  std::vector<RankedCase> ranked;
  for (const auto& c : cases) {
    auto it = by_design.find(c.case_id);
    ranked.push_back(RankedCase{c.gold_cwe_id, it == by_design.end() ? std::vector<std::string>{} : it->second});
  }
  return ranked;
}

void write_reports(const fs::path& out_dir, const EvaluationReport& report, const std::string& compare_path,
                   const std::vector<BenchmarkCase>& cases, RunManifest& manifest) {
  write_json(out_dir / "report.json", report_to_json(report), manifest);
  auto md = report_to_markdown(report);
  if (!compare_path.empty()) {
    auto baseline = evaluate(cases, findings_from_json_text(read_file(compare_path)), nullptr, report.metadata);
    write_json(out_dir / "comparison.json", comparison_to_json(baseline, report), manifest);
    auto cmp = comparison_markdown(baseline, report);
    write_text(out_dir / "comparison.md", cmp, manifest);
    md += "\n" + cmp;
  }
  write_text(out_dir / "report.md", md, manifest);
}

int cmd_bench(const GlobalOptions& g, const EnvMap& env, const std::string& kb_dir, const std::string& dataset_dir,
              const std::string& out_dir, const std::string& compare_path, std::ostream& out, std::ostream& err) {
  auto config = resolve_config(g, env);
  auto services = make_services(config, parse_cache_mode(g.llm_mode));
  StageClock clock(g.frozen_time);
  RunManifest manifest("bench", config, services.cache_mode);

  auto cases = clock.time("load_dataset", [&] { return load_dataset(dataset_dir); });
  if (cases.empty()) throw EmptyDatasetError("dataset '" + dataset_dir + "' has no cases");
  manifest.inputs.emplace_back("kb", hash_tree(kb_dir));
  manifest.inputs.emplace_back("dataset", hash_tree(dataset_dir));
  auto kb = clock.time("load_kb", [&] { return load_kb(kb_dir); });

  std::vector<RtlDesign> designs;
  for (const auto& c : cases) designs.push_back(c.buggy_design);
  auto results = clock.time("scan", [&] { return scan_all(services, designs, kb, g.jobs); });
  auto batch = collect(designs, results, manifest, err);

  const fs::path dir(out_dir);
  write_text(dir / "findings.json", findings_to_json_text(batch.findings), manifest);
  write_json(dir / "retrieval_trace.json", batch.traces, manifest);
  const auto ranked = ranked_cases_from_traces(cases, batch.traces);
  auto report = clock.time("evaluate", [&] {
    return evaluate(cases, batch.findings, &ranked, metadata_for(config, services.embedder->name(), g.frozen_time));
  });
  write_reports(dir, report, compare_path, cases, manifest);
  manifest.network_calls = services.network_calls();
  manifest.write(dir / "manifest.json", clock, g.frozen_time);

  out << "detection accuracy " << format_percent(report.detection_accuracy) << " over " << cases.size()
      << " case(s); T1/T5/T10 = " << report.retrieval_hits.t1 << "/" << report.retrieval_hits.t5 << "/"
      << report.retrieval_hits.t10 << "\n";
  return completion_code(results, services.cache_mode);
}

int cmd_eval(const GlobalOptions& g, const EnvMap& env, const std::string& dataset_dir,
             const std::string& findings_path, const std::string& trace_path, const std::string& out_dir,
             const std::string& compare_path, std::ostream& out) {
  auto config = resolve_config(g, env);
  StageClock clock(g.frozen_time);
  RunManifest manifest("eval", config, parse_cache_mode(g.llm_mode));
  auto cases = load_dataset(dataset_dir);
  if (cases.empty()) throw EmptyDatasetError("dataset '" + dataset_dir + "' has no cases");
  auto findings = findings_from_json_text(read_file(findings_path));
  manifest.inputs.emplace_back("dataset", hash_tree(dataset_dir));
  manifest.inputs.emplace_back("findings", hash_file(findings_path));

  std::optional<std::vector<RankedCase>> ranked;
  if (!trace_path.empty()) {
    json traces;
    try {
      traces = json::parse(read_file(trace_path));
    } catch (const json::parse_error& e) {
      throw SchemaError(std::string("retrieval trace is not valid JSON: ") + e.what());
    }
    ranked = ranked_cases_from_traces(cases, traces);
    manifest.inputs.emplace_back("retrieval_trace", hash_file(trace_path));
  }
  auto report = evaluate(cases, findings, ranked ? &*ranked : nullptr,
                         metadata_for(config, std::string(to_string(config.embed_provider)), g.frozen_time));
  write_reports(out_dir, report, compare_path, cases, manifest);
  manifest.write(fs::path(out_dir) / "manifest.json", clock, g.frozen_time);
  out << "detection accuracy " << format_percent(report.detection_accuracy) << " over " << cases.size()
      << " case(s)\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, const EnvMap& env, std::ostream& out, std::ostream& err) {
  CLI::App app{"Retrieval-augmented hardware weakness detection for RTL designs", "srr"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config_path, "Flat JSON config file")->check(CLI::ExistingFile);
  app.add_option("--llm", g.llm_mode, "Model call mode")
      ->check(CLI::IsMember({"record", "replay", "passthrough"}))
      ->capture_default_str();
  app.add_option("--cache-dir", g.cache_dir, "Record/replay cache directory (overrides config)");
  app.add_option("--jobs", g.jobs, "Designs or CWEs processed concurrently")->check(CLI::PositiveNumber);
  app.add_option("--top-k", g.top_k, "CWEs retrieved per design (overrides config)")->check(CLI::PositiveNumber);
  app.add_option("--mode", g.mode, "Detection mode")->check(CLI::IsMember({"iterative", "batch", "auto"}));
  app.add_flag("--frozen-time", g.frozen_time, "Write fixed timestamps and zero timings");

  auto* kb = app.add_subcommand("kb", "Knowledge base commands");
  kb->require_subcommand(1);
  std::string cwe_input, kb_out, kb_dir, inspect_cwe;
  auto* kb_build = kb->add_subcommand("build", "Enrich and embed a raw CWE export");
  kb_build->add_option("--cwe-input", cwe_input, "Raw CWE JSON export")->required()->check(CLI::ExistingFile);
  kb_build->add_option("--out", kb_out, "Output knowledge base directory")->required();
  auto* kb_inspect = kb->add_subcommand("inspect", "Print knowledge base contents");
  kb_inspect->add_option("--kb", kb_dir, "Knowledge base directory")->required();
  kb_inspect->add_option("--cwe", inspect_cwe, "Dump one enriched record");

  std::string scan_kb, scan_out;
  std::vector<std::string> designs;
  auto* scan = app.add_subcommand("scan", "Retrieve CWEs for RTL designs and run detection");
  scan->add_option("--kb", scan_kb, "Knowledge base directory")->required();
  scan->add_option("--design", designs, "Verilog source file (repeatable)")->required()->check(CLI::ExistingFile);
  scan->add_option("--out", scan_out, "Output directory")->required();

  std::string bench_kb, bench_dataset, bench_out, bench_compare;
  auto* bench = app.add_subcommand("bench", "Scan and score a benchmark dataset");
  bench->add_option("--kb", bench_kb, "Knowledge base directory")->required();
  bench->add_option("--dataset", bench_dataset, "Dataset root")->required();
  bench->add_option("--out", bench_out, "Output directory")->required();
  bench->add_option("--compare", bench_compare, "Baseline findings.json for a before/after table")
      ->check(CLI::ExistingFile);

  std::string eval_dataset, eval_findings, eval_trace, eval_out, eval_compare;
  auto* eval = app.add_subcommand("eval", "Score existing findings against a dataset");
  eval->add_option("--dataset", eval_dataset, "Dataset root")->required();
  eval->add_option("--findings", eval_findings, "findings.json to score")->required()->check(CLI::ExistingFile);
  eval->add_option("--retrieval", eval_trace, "retrieval_trace.json for T1/T5/T10")->check(CLI::ExistingFile);
  eval->add_option("--out", eval_out, "Output directory")->required();
  eval->add_option("--compare", eval_compare, "Baseline findings.json")->check(CLI::ExistingFile);

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (kb_build->parsed()) return cmd_kb_build(g, env, cwe_input, kb_out, out);
    if (kb_inspect->parsed()) return cmd_kb_inspect(kb_dir, inspect_cwe, out);
    if (scan->parsed()) return cmd_scan(g, env, scan_kb, designs, scan_out, out, err);
    if (bench->parsed()) return cmd_bench(g, env, bench_kb, bench_dataset, bench_out, bench_compare, out, err);
    if (eval->parsed()) return cmd_eval(g, env, eval_dataset, eval_findings, eval_trace, eval_out, eval_compare, out);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const EmptyDatasetError& e) {
    err << "error: " << e.what() << "\n";
    return kExitEmpty;
  } catch (const ProviderError& e) {
    err << "provider error: " << e.what() << "\n";
    return kExitProvider;
  } catch (const Error& e) {
    // Remaining library errors describe bad inputs.
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace srr
