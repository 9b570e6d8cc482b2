// SPDX-License-Identifier: Apache-2.0
#include "srr/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>

#include "srr/errors.hpp"

namespace srr {

using nlohmann::json;

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.size() < b.size()) std::swap(a, b);
  // Rolling row over the shorter sequence.
  std::vector<std::size_t> row(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = 0;  // row[j-1] from the previous i
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = a[i - 1] == b[j - 1] ? diag + 1 : std::max(up, row[j - 1]);
      diag = up;
    }
  }
  return row[b.size()];
}

RougeScore rouge_l(std::span<const std::string> reference, std::span<const std::string> candidate,
                   double beta_weight) {
  if (!(beta_weight > 0)) throw ValidationError("ROUGE-L beta weight must be > 0");
  RougeScore s;
  s.beta_weight = beta_weight;
  s.lcs_length = lcs_length(reference, candidate);
  const auto lcs = static_cast<double>(s.lcs_length);
  s.precision = candidate.empty() ? 0.0 : lcs / static_cast<double>(candidate.size());
  s.recall = reference.empty() ? 0.0 : lcs / static_cast<double>(reference.size());
  const double b2 = beta_weight * beta_weight;
  const double denom = s.recall + b2 * s.precision;
  s.f_lcs = denom > 0 ? (1.0 + b2) * s.precision * s.recall / denom : 0.0;
  return s;
}

std::vector<std::string> tokenize_snippet(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
    } else {
      cur += static_cast<char>(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

CaseScore score_case(const BenchmarkCase& c, const std::vector<DetectionFinding>& findings) {
  CaseScore s;
  s.case_id = c.case_id;
  s.gold_cwe_id = c.gold_cwe_id;

  const DetectionFinding* best = nullptr;
  for (const auto& f : findings) {
    if (f.verdict != Verdict::kFound) continue;
    if (f.cwe_id == c.gold_cwe_id) {
      if (!best || f.retrieval_rank < best->retrieval_rank) best = &f;
    } else if (std::find(s.other_found_cwes.begin(), s.other_found_cwes.end(), f.cwe_id) ==
               s.other_found_cwes.end()) {
      s.other_found_cwes.push_back(f.cwe_id);
    }
  }
  if (best) {
    s.detected = true;
    if (best->retrieval_rank > 0) s.matched_cwe_rank = best->retrieval_rank;
    const auto ref = tokenize_snippet(c.gold_snippet);
    const auto cand = tokenize_snippet(best->snippet);
    s.rouge = rouge_l(ref, cand, 1.0);
  }
  return s;
}

double detection_accuracy(const std::vector<CaseScore>& cases) {
  if (cases.empty()) throw EmptyDatasetError("detection accuracy needs at least one case");
  const auto detected = std::count_if(cases.begin(), cases.end(), [](const CaseScore& c) { return c.detected; });
  return static_cast<double>(detected) / static_cast<double>(cases.size());
}

std::string format_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", fraction * 100.0);
  return buf;
}

RetrievalHits retrieval_hits(const std::vector<RankedCase>& cases) {
  RetrievalHits h;
  for (const auto& c : cases) {
    const auto it = std::find(c.ranked_ids.begin(), c.ranked_ids.end(), c.gold_cwe_id);
    if (it == c.ranked_ids.end()) continue;
    const auto rank = (it - c.ranked_ids.begin()) + 1;
    if (rank <= 1) ++h.t1;
    if (rank <= 5) ++h.t5;
    if (rank <= 10) ++h.t10;
  }
  return h;
}

EvaluationReport evaluate(const std::vector<BenchmarkCase>& cases, const std::vector<DetectionFinding>& findings,
                          const std::vector<RankedCase>* retrieval, RunMetadata metadata) {
  if (cases.empty()) throw EmptyDatasetError("the dataset has no cases");
  std::map<std::string, std::vector<DetectionFinding>> by_design;
  for (const auto& f : findings) by_design[f.design_id].push_back(f);

  EvaluationReport report;
  report.metadata = std::move(metadata);
  std::map<std::string, const RankedCase*> ranking_by_case;
  if (retrieval && retrieval->size() != cases.size())
    throw PreconditionError("retrieval traces and cases differ in count");
  for (std::size_t i = 0; i < cases.size(); ++i) {
    auto it = by_design.find(cases[i].case_id);
    auto s = score_case(cases[i], it == by_design.end() ? std::vector<DetectionFinding>{} : it->second);
    if (retrieval) {
      const auto& ids = (*retrieval)[i].ranked_ids;
      auto pos = std::find(ids.begin(), ids.end(), cases[i].gold_cwe_id);
      if (pos != ids.end()) s.gold_retrieval_rank = static_cast<int>(pos - ids.begin()) + 1;
    }
    report.per_case.push_back(std::move(s));
  }
  std::sort(report.per_case.begin(), report.per_case.end(),
            [](const CaseScore& a, const CaseScore& b) { return a.case_id < b.case_id; });
  report.detection_accuracy = detection_accuracy(report.per_case);
  if (retrieval) {
    report.has_retrieval = true;
    report.retrieval_hits = retrieval_hits(*retrieval);
  }
  return report;
}

namespace {

json rouge_json(const std::optional<RougeScore>& r) {
  if (!r) return nullptr;
  return json{{"precision", r->precision},
              {"recall", r->recall},
              {"f_lcs", r->f_lcs},
              {"lcs_length", r->lcs_length},
              {"beta_weight", r->beta_weight}};
}

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

std::string percent_number(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", fraction * 100.0);
  return buf;
}

std::string rouge_cell(const CaseScore& c) { return c.rouge ? percent_number(c.rouge->f_lcs) : "-"; }

std::size_t detected_count(const EvaluationReport& r) {
  return static_cast<std::size_t>(
      std::count_if(r.per_case.begin(), r.per_case.end(), [](const CaseScore& c) { return c.detected; }));
}

}  // namespace

json report_to_json(const EvaluationReport& r) {
  json cases = json::array();
  double rouge_sum_detected = 0, rouge_sum_all = 0;
  for (const auto& c : r.per_case) {
    const double f = c.rouge ? c.rouge->f_lcs : 0.0;
    if (c.rouge) rouge_sum_detected += f;
    rouge_sum_all += f;
    cases.push_back(json{{"case_id", c.case_id},
                         {"gold_cwe_id", c.gold_cwe_id},
                         {"detected", c.detected},
                         {"matched_cwe_rank", optional_json(c.matched_cwe_rank)},
                         {"gold_retrieval_rank", optional_json(c.gold_retrieval_rank)},
                         {"rouge", rouge_json(c.rouge)},
                         {"rouge_f_zero_filled", f},
                         {"other_found_cwes", c.other_found_cwes}});
  }
  const auto detected = detected_count(r);
  json out = {
      {"per_case", cases},
      {"case_count", r.per_case.size()},
      {"detected_count", detected},
      {"detection_accuracy", r.detection_accuracy},
      {"detection_accuracy_pct", format_percent(r.detection_accuracy)},
      {"rouge_l_mean_detected", detected ? json(rouge_sum_detected / static_cast<double>(detected)) : json(nullptr)},
      {"rouge_l_mean_zero_filled", r.per_case.empty() ? 0.0 : rouge_sum_all / static_cast<double>(r.per_case.size())},
      {"retrieval_hits", r.has_retrieval ? json{{"t1", r.retrieval_hits.t1},
                                                {"t5", r.retrieval_hits.t5},
                                                {"t10", r.retrieval_hits.t10}}
                                         : json(nullptr)},
      {"metadata",
       {{"detector_model", r.metadata.detector_model},
        {"summarizer_model", r.metadata.summarizer_model},
        {"embedding_provider", r.metadata.embedding_provider},
        {"field_combiner", r.metadata.field_combiner},
        {"config_hash", r.metadata.config_hash},
        {"generated_at", r.metadata.generated_at}}},
  };
  return out;
}

std::string report_to_markdown(const EvaluationReport& r) {
  std::string md = "# Detection report\n\n";
  md += "Detector: `" + r.metadata.detector_model + "`, summarizer: `" + r.metadata.summarizer_model +
        "`, embeddings: `" + r.metadata.embedding_provider + "`, field combiner: `" + r.metadata.field_combiner +
        "`\n\n";
  md += "| Case | Gold CWE | Detected | Finding rank | Gold retrieval rank | ROUGE-L F (%) | Other found CWEs |\n";
  md += "|---|---|---|---|---|---|---|\n";
  for (const auto& c : r.per_case) {
    std::string others;
    for (const auto& o : c.other_found_cwes) others += (others.empty() ? "" : ", ") + o;
    md += "| " + c.case_id + " | " + c.gold_cwe_id + " | " + (c.detected ? "yes" : "no") + " | " +
          (c.matched_cwe_rank ? std::to_string(*c.matched_cwe_rank) : "-") + " | " +
          (c.gold_retrieval_rank ? std::to_string(*c.gold_retrieval_rank) : "-") + " | " + rouge_cell(c) + " | " +
          (others.empty() ? "-" : others) + " |\n";
  }
  md += "\n**Detection accuracy:** " + format_percent(r.detection_accuracy) + " (" +
        std::to_string(detected_count(r)) + "/" + std::to_string(r.per_case.size()) + ")\n";
  if (r.has_retrieval) {
    md += "\n| T1 | T5 | T10 |\n|---|---|---|\n| " + std::to_string(r.retrieval_hits.t1) + " | " +
          std::to_string(r.retrieval_hits.t5) + " | " + std::to_string(r.retrieval_hits.t10) + " |\n";
  }
  return md;
}

json comparison_to_json(const EvaluationReport& before, const EvaluationReport& after) {
  json cases = json::array();
  std::map<std::string, const CaseScore*> prior;
  for (const auto& c : before.per_case) prior[c.case_id] = &c;
  for (const auto& c : after.per_case) {
    const auto it = prior.find(c.case_id);
    const CaseScore* b = it == prior.end() ? nullptr : it->second;
    cases.push_back(json{{"case_id", c.case_id},
                         {"detected_before", b ? json(b->detected) : json(nullptr)},
                         {"detected_after", c.detected},
                         {"rouge_f_before", b && b->rouge ? json(b->rouge->f_lcs) : json(0.0)},
                         {"rouge_f_after", c.rouge ? c.rouge->f_lcs : 0.0}});
  }
  return json{{"accuracy_before", before.detection_accuracy},
              {"accuracy_after", after.detection_accuracy},
              {"increase", after.detection_accuracy - before.detection_accuracy},
              {"accuracy_before_pct", format_percent(before.detection_accuracy)},
              {"accuracy_after_pct", format_percent(after.detection_accuracy)},
              {"increase_pct", format_percent(after.detection_accuracy - before.detection_accuracy)},
              {"per_case", cases}};
}

std::string comparison_markdown(const EvaluationReport& before, const EvaluationReport& after) {
  std::string md = "## Before / after\n\n";
  md += "| Run | Accuracy (Before) | Accuracy (After) | Increase |\n|---|---|---|---|\n";
  md += "| " + after.metadata.detector_model + " | " + format_percent(before.detection_accuracy) + " | " +
        format_percent(after.detection_accuracy) + " | " +
        format_percent(after.detection_accuracy - before.detection_accuracy) + " |\n\n";
  md += "ROUGE-L F (%), before/after; undetected cases count as 0.\n\n| Case | ROUGE-L |\n|---|---|\n";
  std::map<std::string, const CaseScore*> prior;
  for (const auto& c : before.per_case) prior[c.case_id] = &c;
  for (const auto& c : after.per_case) {
    const auto it = prior.find(c.case_id);
    const double b = it != prior.end() && it->second->rouge ? it->second->rouge->f_lcs : 0.0;
    const double a = c.rouge ? c.rouge->f_lcs : 0.0;
    md += "| " + c.case_id + " | " + percent_number(b) + "/" + percent_number(a) + " |\n";
  }
  return md;
}

}  // namespace srr
