// SPDX-License-Identifier: Apache-2.0
#include "srr/agents.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "srr/errors.hpp"
#include "srr/hdl_lexer.hpp"

namespace srr {

using nlohmann::json;

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::kFound: return "found";
    case Verdict::kNotFound: return "not_found";
    case Verdict::kIndeterminate: return "indeterminate";
  }
  return "indeterminate";
}

Verdict parse_verdict(std::string_view text) {
  if (text == "found") return Verdict::kFound;
  if (text == "not_found") return Verdict::kNotFound;
  if (text == "indeterminate") return Verdict::kIndeterminate;
  throw SchemaError("unknown verdict '" + std::string(text) + "'");
}

json finding_to_json(const DetectionFinding& f) {
  return json{{"design_id", f.design_id},     {"cwe_id", f.cwe_id},
              {"verdict", to_string(f.verdict)}, {"snippet", f.snippet},
              {"rationale", f.rationale},     {"raw_response", f.raw_response},
              {"snippet_in_source", f.snippet_in_source}, {"retrieval_rank", f.retrieval_rank}};
}

DetectionFinding finding_from_json(const json& doc) {
  try {
    DetectionFinding f;
    f.design_id = doc.at("design_id").get<std::string>();
    f.cwe_id = doc.at("cwe_id").get<std::string>();
    f.verdict = parse_verdict(doc.at("verdict").get<std::string>());
    f.snippet = doc.value("snippet", "");
    f.rationale = doc.value("rationale", "");
    f.raw_response = doc.value("raw_response", "");
    f.snippet_in_source = doc.value("snippet_in_source", false);
    f.retrieval_rank = doc.value("retrieval_rank", 0);
    if (f.verdict == Verdict::kFound && f.snippet.empty())
      throw SchemaError("finding " + f.design_id + "/" + f.cwe_id + " is found but has no snippet");
    if (f.verdict == Verdict::kNotFound && !f.snippet.empty())
      throw SchemaError("finding " + f.design_id + "/" + f.cwe_id + " is not_found but has a snippet");
    return f;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed finding: ") + e.what());
  }
}

std::string findings_to_json_text(const std::vector<DetectionFinding>& findings) {
  json arr = json::array();
  for (const auto& f : findings) arr.push_back(finding_to_json(f));
  return arr.dump(2) + "\n";
}

std::vector<DetectionFinding> findings_from_json_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("findings file is not valid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw SchemaError("findings file must hold a JSON array");
  std::vector<DetectionFinding> out;
  for (const auto& item : doc) out.push_back(finding_from_json(item));
  return out;
}

// ---------------------------------------------------------------------------
// Response parsing

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return lines;
}

// Matches "KEY:" at the start of a trimmed line, ignoring case and markdown
// emphasis; returns the trimmed remainder.
std::optional<std::string> keyed_value(std::string_view line, std::string_view key) {
  std::string t = trim(line);
  std::string stripped;
  for (char c : t) {
    if (c != '*' && c != '`') stripped += c;
  }
  t = trim(stripped);
  if (t.size() < key.size() + 1) return std::nullopt;
  if (to_upper(t.substr(0, key.size())) != key || t[key.size()] != ':') return std::nullopt;
  return trim(std::string_view(t).substr(key.size() + 1));
}

bool is_fence(std::string_view line) {
  auto t = trim(line);
  return t.size() >= 3 && t.compare(0, 3, "```") == 0;
}

std::string join_lines(const std::vector<std::string_view>& lines, std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (i > begin) out += '\n';
    out.append(lines[i]);
  }
  return out;
}

struct Fenced {
  std::string body;
  std::size_t open_line;
  std::size_t close_line;
};

// First complete fenced block at or after `from`.
std::optional<Fenced> find_fenced(const std::vector<std::string_view>& lines, std::size_t from) {
  for (std::size_t i = from; i < lines.size(); ++i) {
    if (!is_fence(lines[i])) continue;
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      if (is_fence(lines[j])) return Fenced{join_lines(lines, i + 1, j), i, j};
    }
    return std::nullopt;
  }
  return std::nullopt;
}

std::optional<Verdict> verdict_value(std::string_view value) {
  std::string v = to_upper(trim(value));
  std::replace(v.begin(), v.end(), ' ', '_');
  std::replace(v.begin(), v.end(), '-', '_');
  if (v == "FOUND") return Verdict::kFound;
  if (v == "NOT_FOUND") return Verdict::kNotFound;
  return std::nullopt;
}

}  // namespace

ParsedDetection parse_detection_response(std::string_view text) {
  const auto lines = split_lines(text);
  std::optional<std::size_t> verdict_line;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (keyed_value(lines[i], "VERDICT")) {
      verdict_line = i;
      break;
    }
  }
  if (!verdict_line) throw MalformedAgentOutputError("response has no VERDICT line");

  ParsedDetection out;
  const auto verdict = verdict_value(*keyed_value(lines[*verdict_line], "VERDICT"));
  if (!verdict) throw MalformedAgentOutputError("VERDICT must be FOUND or NOT_FOUND");
  out.verdict = *verdict;

  std::optional<std::size_t> cwe_line;
  for (std::size_t i = *verdict_line + 1; i < lines.size(); ++i) {
    if (auto v = keyed_value(lines[i], "CWE")) {
      std::string id = to_upper(*v);
      if (!is_cwe_id(id)) throw MalformedAgentOutputError("CWE line does not hold a CWE-<n> id");
      out.cwe_id = id;
      cwe_line = i;
      break;
    }
  }
  if (!cwe_line) throw MalformedAgentOutputError("response has no CWE line after its VERDICT");

  auto fenced = find_fenced(lines, *verdict_line + 1);
  if (out.verdict == Verdict::kFound) {
    if (!fenced) throw MalformedAgentOutputError("FOUND verdict without a fenced snippet");
    if (trim(fenced->body).empty()) throw MalformedAgentOutputError("FOUND verdict with an empty snippet");
    out.snippet = fenced->body;
  }

  std::string rationale;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i == *verdict_line || i == *cwe_line) continue;
    if (fenced && i >= fenced->open_line && i <= fenced->close_line) continue;
    std::string piece;
    if (auto r = keyed_value(lines[i], "REASON")) piece = *r;
    else piece = trim(lines[i]);
    if (piece.empty()) continue;
    if (!rationale.empty()) rationale += '\n';
    rationale += piece;
  }
  out.rationale = std::move(rationale);
  return out;
}

std::vector<ParsedDetection> parse_detection_blocks(std::string_view text) {
  const auto lines = split_lines(text);
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (keyed_value(lines[i], "VERDICT")) starts.push_back(i);
  }
  if (starts.empty()) throw MalformedAgentOutputError("response has no VERDICT line");
  std::vector<ParsedDetection> blocks;
  for (std::size_t b = 0; b < starts.size(); ++b) {
    const auto end = b + 1 < starts.size() ? starts[b + 1] : lines.size();
    blocks.push_back(parse_detection_response(join_lines(lines, starts[b], end)));
  }
  return blocks;
}

SummaryAndKeywords parse_summary_keywords(std::string_view text) {
  const auto lines = split_lines(text);
  std::optional<std::size_t> summary_line, keywords_line;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!summary_line && keyed_value(lines[i], "SUMMARY")) summary_line = i;
    else if (summary_line && keyed_value(lines[i], "KEYWORDS")) {
      keywords_line = i;
      break;
    }
  }
  if (!summary_line) throw MalformedAgentOutputError("response has no SUMMARY section");
  if (!keywords_line) throw MalformedAgentOutputError("response has no KEYWORDS line after its SUMMARY");

  SummaryAndKeywords out;
  std::string summary = *keyed_value(lines[*summary_line], "SUMMARY");
  for (std::size_t i = *summary_line + 1; i < *keywords_line; ++i) {
    auto piece = trim(lines[i]);
    if (piece.empty()) continue;
    if (!summary.empty()) summary += ' ';
    summary += piece;
  }
  out.summary = trim(summary);
  if (out.summary.empty()) throw MalformedAgentOutputError("SUMMARY is empty");

  const std::string kw_text = *keyed_value(lines[*keywords_line], "KEYWORDS");
  std::size_t pos = 0;
  while (pos <= kw_text.size()) {
    auto comma = kw_text.find(',', pos);
    auto word = to_lower(trim(std::string_view(kw_text).substr(pos, comma == std::string::npos ? std::string::npos : comma - pos)));
    if (!word.empty() && std::find(out.keywords.begin(), out.keywords.end(), word) == out.keywords.end())
      out.keywords.push_back(std::move(word));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.keywords.empty()) throw MalformedAgentOutputError("KEYWORDS is empty");
  return out;
}

SnippetPair parse_snippet_pair(std::string_view text) {
  const auto lines = split_lines(text);
  std::optional<std::size_t> vul_line, sec_line;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!vul_line && keyed_value(lines[i], "VULNERABLE")) vul_line = i;
    else if (vul_line && keyed_value(lines[i], "SECURE")) {
      sec_line = i;
      break;
    }
  }
  if (!vul_line || !sec_line) throw MalformedAgentOutputError("response needs VULNERABLE: and SECURE: sections");
  auto vul = find_fenced(lines, *vul_line + 1);
  if (!vul || vul->close_line >= *sec_line)
    throw MalformedAgentOutputError("VULNERABLE section has no fenced snippet");
  auto sec = find_fenced(lines, *sec_line + 1);
  if (!sec) throw MalformedAgentOutputError("SECURE section has no fenced snippet");
  if (trim(vul->body).empty() || trim(sec->body).empty()) throw MalformedAgentOutputError("empty snippet");
  return SnippetPair{vul->body, sec->body};
}

bool occurs_modulo_whitespace(std::string_view snippet, std::string_view source) {
  auto squash = [](std::string_view s) {
    std::string out;
    for (unsigned char c : s) {
      if (!std::isspace(c)) out += static_cast<char>(c);
    }
    return out;
  };
  const auto needle = squash(snippet);
  return !needle.empty() && squash(source).find(needle) != std::string::npos;
}

// ---------------------------------------------------------------------------
// Agents

namespace {

std::string bullet_list(const std::vector<std::string>& items) {
  if (items.empty()) return "(none recorded)";
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out += '\n';
    out += "- " + item;
  }
  return out;
}

PromptVars cwe_vars(const RawCweEntry& e) {
  return PromptVars{{"cwe_id", e.cwe_id},
                    {"title", e.title},
                    {"description", e.description},
                    {"extended_description", e.extended_description.empty() ? "(none)" : e.extended_description},
                    {"mitigations", bullet_list(e.mitigations)},
                    {"modes_of_introduction", bullet_list(e.modes_of_introduction)}};
}

std::string format_reminder(const std::string& problem) {
  return "\n\nYour previous reply could not be used (" + problem +
         "). Reply again following the required format exactly.";
}

// Runs `request` up to kAgentAttempts times until `parse` accepts the reply.
template <typename Parse>
auto complete_structured(LlmClient& llm, const ModelProfile& profile, ChatRequest request, Parse parse,
                         std::string* raw_out = nullptr, std::size_t* calls = nullptr) {
  const std::string base_user = request.user_text;
  std::string problem;
  for (int attempt = 1; attempt <= kAgentAttempts; ++attempt) {
    if (attempt > 1) request.user_text = base_user + format_reminder(problem);
    auto response = llm.complete(request, profile);
    if (calls) ++*calls;
    if (raw_out) *raw_out = response.text;
    try {
      return parse(response.text);
    } catch (const MalformedAgentOutputError& e) {
      problem = e.what();
    }
  }
  throw MalformedAgentOutputError("agent output still malformed after " + std::to_string(kAgentAttempts) +
                                  " attempts: " + problem);
}

// Byte offsets where a module (or macromodule) declaration begins.
std::optional<std::vector<std::size_t>> module_starts(std::string_view source) {
  auto scan = tokenize(source);
  if (scan.error) return std::nullopt;
  std::vector<std::size_t> starts;
  std::size_t offset = 0;
  for (const auto& t : scan.tokens) {
    if (t.kind == TokenKind::kKeyword && (t.text == "module" || t.text == "macromodule")) starts.push_back(offset);
    offset += t.text.size();
  }
  return starts;
}

void split_lines_into(std::string_view text, std::size_t max_bytes, std::vector<std::string>& out) {
  std::string current;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos + 1);
    pos += line.size();
    while (line.size() > max_bytes) {  // single overlong line: hard split
      if (!current.empty()) out.push_back(std::move(current)), current.clear();
      out.emplace_back(line.substr(0, max_bytes));
      line.remove_prefix(max_bytes);
    }
    if (current.size() + line.size() > max_bytes) out.push_back(std::move(current)), current.clear();
    current.append(line);
  }
  if (!current.empty()) out.push_back(std::move(current));
}

// Greedy packing of segments into chunks of at most max_bytes.
std::vector<std::string> chunk_source(std::string_view source, std::size_t max_bytes) {
  std::vector<std::string_view> segments;
  if (auto starts = module_starts(source); starts && starts->size() > 1) {
    std::size_t prev = 0;
    for (std::size_t i = 1; i < starts->size(); ++i) {
      segments.push_back(source.substr(prev, (*starts)[i] - prev));
      prev = (*starts)[i];
    }
    segments.push_back(source.substr(prev));
  } else {
    segments.push_back(source);
  }

  std::vector<std::string> chunks;
  std::string current;
  for (auto seg : segments) {
    if (seg.size() > max_bytes) {
      if (!current.empty()) chunks.push_back(std::move(current)), current.clear();
      split_lines_into(seg, max_bytes, chunks);
      continue;
    }
    if (current.size() + seg.size() > max_bytes) chunks.push_back(std::move(current)), current.clear();
    current.append(seg);
  }
  if (!current.empty()) chunks.push_back(std::move(current));
  return chunks;
}

}  // namespace

SummarizerAgent::SummarizerAgent(LlmClient& llm, ModelProfile profile, const PromptSet& prompts,
                                 int max_output_tokens)
    : llm_(llm), profile_(std::move(profile)), prompts_(prompts), max_output_tokens_(max_output_tokens) {}

std::string SummarizerAgent::summarize_chunk(const std::string& label, std::string_view source) {
  ChatRequest req{profile_.model_name, prompts_.summarize.system_text,
                  prompts_.summarize.render_user({{"design_id", label}, {"rtl_source", std::string(source)}}), 0.0,
                  max_output_tokens_};
  auto text = trim(llm_.complete(req, profile_).text);
  if (text.empty()) throw AgentError("summarizer returned an empty summary for " + label);
  return text;
}

std::string SummarizerAgent::merge(const std::string& design_id, const std::vector<std::string>& parts) {
  auto render = [&](const std::vector<std::string>& group, std::size_t first, std::size_t total) {
    std::string body;
    for (std::size_t i = 0; i < group.size(); ++i) {
      body += "Part " + std::to_string(first + i + 1) + " of " + std::to_string(total) + ":\n" + group[i] + "\n\n";
    }
    return ChatRequest{profile_.model_name, prompts_.merge_summaries.system_text,
                       prompts_.merge_summaries.render_user({{"design_id", design_id}, {"partial_summaries", body}}),
                       0.0, max_output_tokens_};
  };
  auto fits = [&](const ChatRequest& r) { return estimate_tokens(r) <= profile_.context_window_tokens; };

  std::vector<std::string> level = parts;
  while (true) {
    auto whole = render(level, 0, level.size());
    if (fits(whole)) {
      auto text = trim(llm_.complete(whole, profile_).text);
      if (text.empty()) throw AgentError("summarizer returned an empty merged summary for " + design_id);
      return text;
    }
    // Too many partial summaries for one call: merge them in groups first.
    std::vector<std::string> next;
    std::size_t i = 0;
    while (i < level.size()) {
      std::vector<std::string> group{level[i]};
      std::size_t j = i + 1;
      while (j < level.size()) {
        group.push_back(level[j]);
        if (!fits(render(group, i, level.size()))) {
          group.pop_back();
          break;
        }
        ++j;
      }
      if (group.size() == 1) {
        if (!fits(render(group, i, level.size())))
          throw ContextOverflowError("a partial summary of " + design_id + " does not fit the merge prompt");
        next.push_back(level[i]);
      } else {
        auto text = trim(llm_.complete(render(group, i, level.size()), profile_).text);
        if (text.empty()) throw AgentError("summarizer returned an empty merged summary for " + design_id);
        next.push_back(std::move(text));
      }
      i = j;
    }
    if (next.size() >= level.size())
      throw ContextOverflowError("partial summaries of " + design_id + " cannot be merged within the window");
    level = std::move(next);
  }
}

std::string SummarizerAgent::summarize_rtl(const RtlDesign& design) {
  if (design.source_text.empty()) throw PreconditionError("design '" + design.design_id + "' has empty source");
  ChatRequest whole{profile_.model_name, prompts_.summarize.system_text,
                    prompts_.summarize.render_user({{"design_id", design.design_id}, {"rtl_source", design.source_text}}),
                    0.0, max_output_tokens_};
  if (estimate_tokens(whole) <= profile_.context_window_tokens) return summarize_chunk(design.design_id, design.source_text);

  // Room left for source bytes once the template and a part label are paid for.
  constexpr std::size_t kLabelReserve = 64;
  const auto empty_user =
      prompts_.summarize.render_user({{"design_id", design.design_id}, {"rtl_source", ""}}).size() + kLabelReserve;
  const long budget_tokens = profile_.context_window_tokens - estimate_tokens(prompts_.summarize.system_text);
  const long max_bytes = 3 * budget_tokens - static_cast<long>(empty_user);
  if (max_bytes <= 0)
    throw ContextOverflowError("context window of " + profile_.model_name + " cannot hold the summary prompt");

  const auto chunks = chunk_source(design.source_text, static_cast<std::size_t>(max_bytes));
  std::vector<std::string> partial;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    const auto label = design.design_id + " (part " + std::to_string(i + 1) + " of " + std::to_string(chunks.size()) + ")";
    partial.push_back(summarize_chunk(label, chunks[i]));
  }
  return merge(design.design_id, partial);
}

SummaryAndKeywords SummarizerAgent::summarize_cwe(const RawCweEntry& entry) {
  ChatRequest req{profile_.model_name, prompts_.summary_keywords.system_text,
                  prompts_.summary_keywords.render_user(cwe_vars(entry)), 0.0, max_output_tokens_};
  return complete_structured(llm_, profile_, req, parse_summary_keywords);
}

SnippetPair SummarizerAgent::snippets_for(const RawCweEntry& entry) {
  ChatRequest req{profile_.model_name, prompts_.snippet_pair.system_text,
                  prompts_.snippet_pair.render_user(cwe_vars(entry)), 0.0, max_output_tokens_};
  return complete_structured(llm_, profile_, req, parse_snippet_pair);
}

EnrichedCweRecord enrich(const RawCweEntry& entry, SummarizerAgent& summarizer) {
  auto sk = summarizer.summarize_cwe(entry);
  auto vs = summarizer.snippets_for(entry);
  EnrichedCweRecord r;
  r.cwe_id = entry.cwe_id;
  r.title = entry.title;
  r.summary = std::move(sk.summary);
  r.keywords = std::move(sk.keywords);
  r.vulnerable_snippet = std::move(vs.vulnerable);
  r.secure_snippet = std::move(vs.secure);
  return r;
}

std::string render_cwe_details(const EnrichedCweRecord& r, int position) {
  std::string out;
  out += "[" + std::to_string(position) + "] " + r.cwe_id + ": " + r.title + "\n";
  out += "Summary: " + r.summary + "\n";
  out += "Keywords: ";
  for (std::size_t i = 0; i < r.keywords.size(); ++i) out += (i ? ", " : "") + r.keywords[i];
  out += "\nVulnerable example:\n```verilog\n" + r.vulnerable_snippet + "\n```\n";
  out += "Secure example:\n```verilog\n" + r.secure_snippet + "\n```\n";
  return out;
}

std::vector<ChatRequest> render_detection_prompt(const PromptSet& prompts, const RtlDesign& design,
                                                 std::string_view summary,
                                                 const std::vector<const EnrichedCweRecord*>& cwes,
                                                 DetectionMode mode, const ModelProfile& profile,
                                                 int max_output_tokens) {
  if (cwes.empty()) throw PreconditionError("detection needs at least one CWE");
  if (mode == DetectionMode::kAuto) throw PreconditionError("render_detection_prompt needs iterative or batch mode");

  auto make = [&](const std::vector<const EnrichedCweRecord*>& group) {
    std::string details;
    for (std::size_t i = 0; i < group.size(); ++i) {
      if (i) details += '\n';
      details += render_cwe_details(*group[i], static_cast<int>(i) + 1);
    }
    return ChatRequest{profile.model_name, prompts.detection.system_text,
                       prompts.detection.render_user({{"design_id", design.design_id},
                                                      {"rtl_source", design.source_text},
                                                      {"rtl_summary", std::string(summary)},
                                                      {"cwe_count", std::to_string(group.size())},
                                                      {"cwe_details", details}}),
                       0.0, max_output_tokens};
  };

  std::vector<ChatRequest> requests;
  if (mode == DetectionMode::kIterative) {
    for (const auto* cwe : cwes) requests.push_back(make({cwe}));
    return requests;
  }
  requests.push_back(make(cwes));
  const long need = estimate_tokens(requests.front());
  if (need > profile.context_window_tokens)
    throw ContextOverflowError("batch detection prompt needs ~" + std::to_string(need) + " tokens, window is " +
                               std::to_string(profile.context_window_tokens));
  return requests;
}

DetectionAgent::DetectionAgent(LlmClient& llm, ModelProfile profile, const PromptSet& prompts, int max_output_tokens,
                               DetectionMode mode)
    : llm_(llm), profile_(std::move(profile)), prompts_(prompts), max_output_tokens_(max_output_tokens), mode_(mode) {}

DetectionFinding DetectionAgent::detect_one(const RtlDesign& design, std::string_view summary,
                                            const EnrichedCweRecord& cwe, int rank, DetectionOutcome& outcome) {
  DetectionFinding f;
  f.design_id = design.design_id;
  f.cwe_id = cwe.cwe_id;
  f.retrieval_rank = rank;
  try {
    auto request = render_detection_prompt(prompts_, design, summary, {&cwe}, DetectionMode::kIterative, profile_,
                                           max_output_tokens_)
                       .front();
    auto parsed = complete_structured(
        llm_, profile_, request,
        [&](std::string_view text) {
          auto p = parse_detection_response(text);
          if (p.cwe_id != cwe.cwe_id)
            throw MalformedAgentOutputError("reply names " + p.cwe_id + " instead of " + cwe.cwe_id);
          return p;
        },
        &f.raw_response, &outcome.llm_requests);
    f.verdict = parsed.verdict;
    f.snippet = std::move(parsed.snippet);
    f.rationale = std::move(parsed.rationale);
  } catch (const ProviderError&) {
    throw;
  } catch (const Error& e) {
    f.verdict = Verdict::kIndeterminate;
    f.snippet.clear();
    f.rationale = e.what();
  }
  f.snippet_in_source = f.verdict == Verdict::kFound && occurs_modulo_whitespace(f.snippet, design.source_text);
  return f;
}

bool DetectionAgent::try_batch(const RtlDesign& design, std::string_view summary,
                               const std::vector<const EnrichedCweRecord*>& cwes, DetectionOutcome& outcome) {
  ChatRequest request;
  try {
    request = render_detection_prompt(prompts_, design, summary, cwes, DetectionMode::kBatch, profile_,
                                      max_output_tokens_)
                  .front();
  } catch (const ContextOverflowError& e) {
    outcome.notes.push_back(std::string("batch prompt does not fit; using iterative mode: ") + e.what());
    return false;
  }

  std::map<std::string, ParsedDetection> by_id;
  std::string raw;
  try {
    by_id = complete_structured(
        llm_, profile_, request,
        [&](std::string_view text) {
          std::map<std::string, ParsedDetection> found;
          for (auto& block : parse_detection_blocks(text)) found.emplace(block.cwe_id, std::move(block));
          for (const auto* cwe : cwes) {
            if (!found.count(cwe->cwe_id)) throw MalformedAgentOutputError("no verdict block for " + cwe->cwe_id);
          }
          return found;
        },
        &raw, &outcome.llm_requests);
  } catch (const ProviderError&) {
    throw;
  } catch (const Error& e) {
    outcome.notes.push_back(std::string("batch detection failed; retrying in iterative mode: ") + e.what());
    return false;
  }

  for (std::size_t i = 0; i < cwes.size(); ++i) {
    auto& p = by_id.at(cwes[i]->cwe_id);
    DetectionFinding f;
    f.design_id = design.design_id;
    f.cwe_id = cwes[i]->cwe_id;
    f.retrieval_rank = static_cast<int>(i) + 1;
    f.verdict = p.verdict;
    f.snippet = std::move(p.snippet);
    f.rationale = std::move(p.rationale);
    f.raw_response = raw;
    f.snippet_in_source = f.verdict == Verdict::kFound && occurs_modulo_whitespace(f.snippet, design.source_text);
    outcome.findings.push_back(std::move(f));
  }
  outcome.mode_used = DetectionMode::kBatch;
  return true;
}

DetectionOutcome DetectionAgent::detect(const RtlDesign& design, std::string_view summary,
                                        const RetrievalResult& retrieved, const CweKnowledgeBase& kb) {
  if (retrieved.ranked.empty()) throw ConfigError("no CWEs retrieved for " + design.design_id + " (empty knowledge base?)");
  std::vector<const EnrichedCweRecord*> cwes;
  for (const auto& r : retrieved.ranked) {
    const auto* rec = kb.find(r.cwe_id);
    if (!rec) throw PreconditionError("retrieved " + r.cwe_id + " is not in the knowledge base");
    cwes.push_back(rec);
  }

  DetectionOutcome outcome;
  bool want_batch = mode_ == DetectionMode::kBatch || (mode_ == DetectionMode::kAuto && profile_.supports_batch_cwe);
  if (want_batch && try_batch(design, summary, cwes, outcome)) return outcome;

  outcome.mode_used = DetectionMode::kIterative;
  for (std::size_t i = 0; i < cwes.size(); ++i)
    outcome.findings.push_back(detect_one(design, summary, *cwes[i], static_cast<int>(i) + 1, outcome));
  return outcome;
}

}  // namespace srr
