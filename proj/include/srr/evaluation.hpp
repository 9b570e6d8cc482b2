// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "srr/agents.hpp"
#include "srr/core_model.hpp"
#include "srr/retrieval.hpp"

namespace srr {

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f_lcs = 0.0;
  std::size_t lcs_length = 0;
  double beta_weight = 1.0;
};

/// Length of the longest common subsequence, O(n*m) time, O(min(n,m)) memory.
std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

/// ROUGE-L: P = lcs/|candidate|, R = lcs/|reference|,
/// F = (1 + b^2) P R / (R + b^2 P), taken as 0 when P = R = 0.
/// Throws ValidationError unless beta_weight > 0.
RougeScore rouge_l(std::span<const std::string> reference, std::span<const std::string> candidate,
                   double beta_weight = 1.0);

/// Whitespace-split tokens of the raw text.
std::vector<std::string> tokenize_snippet(std::string_view text);

struct CaseScore {
  std::string case_id;
  std::string gold_cwe_id;
  bool detected = false;
  std::optional<int> matched_cwe_rank;     // retrieval rank of the scored finding
  std::optional<RougeScore> rouge;         // only when detected
  std::vector<std::string> other_found_cwes;  // found verdicts for non-gold CWEs
  std::optional<int> gold_retrieval_rank;  // from the retrieval trace, when known
};

/// Detected iff some finding is `found` for the gold CWE; the best-ranked such
/// finding is scored against the gold snippet.
CaseScore score_case(const BenchmarkCase& bench_case, const std::vector<DetectionFinding>& findings);

/// detected / total. Throws EmptyDatasetError for an empty list.
double detection_accuracy(const std::vector<CaseScore>& cases);

/// Two-decimal percentage, e.g. 0.642857 -> "64.29%".
std::string format_percent(double fraction);

struct RetrievalHits {
  int t1 = 0;
  int t5 = 0;
  int t10 = 0;

  friend bool operator==(const RetrievalHits&, const RetrievalHits&) = default;
};

struct RankedCase {
  std::string gold_cwe_id;
  std::vector<std::string> ranked_ids;
};

/// tN counts cases whose gold CWE sits within the first N ranked ids.
RetrievalHits retrieval_hits(const std::vector<RankedCase>& cases);

struct RunMetadata {
  std::string detector_model;
  std::string summarizer_model;
  std::string embedding_provider;
  std::string field_combiner;
  std::string config_hash;
  std::string generated_at;
};

struct EvaluationReport {
  std::vector<CaseScore> per_case;  // sorted by case_id
  double detection_accuracy = 0.0;
  RetrievalHits retrieval_hits;
  bool has_retrieval = false;
  RunMetadata metadata;
};

/// Scores every case against its findings (grouped by design_id == case_id)
/// and, when traces are given, computes T1/T5/T10.
EvaluationReport evaluate(const std::vector<BenchmarkCase>& cases, const std::vector<DetectionFinding>& findings,
                          const std::vector<RankedCase>* retrieval, RunMetadata metadata);

nlohmann::json report_to_json(const EvaluationReport& report);
std::string report_to_markdown(const EvaluationReport& report);

/// Before/after table: accuracy of both runs, the increase, and per-case
/// ROUGE-L F percentages as "before/after".
std::string comparison_markdown(const EvaluationReport& before, const EvaluationReport& after);
nlohmann::json comparison_to_json(const EvaluationReport& before, const EvaluationReport& after);

}  // namespace srr
