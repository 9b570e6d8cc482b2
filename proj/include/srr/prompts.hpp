// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace srr {

using PromptVars = std::map<std::string, std::string, std::less<>>;

/// Substitutes `{{name}}` placeholders in one pass; substituted values are
/// never rescanned. Throws ValidationError for an unbound placeholder or an
/// empty result.
std::string render_template(std::string_view text, const PromptVars& vars);

struct PromptTemplate {
  std::string name;
  std::string system_text;
  std::string user_template;

  std::string render_user(const PromptVars& vars) const { return render_template(user_template, vars); }
};

/// Template files hold a `### SYSTEM` section followed by a `### USER` section.
/// Throws ParseError when either is missing or empty.
PromptTemplate parse_prompt_template(std::string name, std::string_view text);

struct PromptSet {
  PromptTemplate summarize;         // p_s
  PromptTemplate merge_summaries;   // p_merge
  PromptTemplate summary_keywords;  // p_sk
  PromptTemplate snippet_pair;      // p_vs
  PromptTemplate detection;         // p_det

  static PromptSet defaults();
  /// Reads p_s.txt, p_merge.txt, p_sk.txt, p_vs.txt and p_det.txt.
  static PromptSet load(const std::filesystem::path& dir);
};

}  // namespace srr
