// SPDX-License-Identifier: Apache-2.0
#include "srr/prompts.hpp"

#include "srr/core_model.hpp"
#include "srr/embedded_text.hpp"
#include "srr/errors.hpp"
#include "srr/io.hpp"

namespace srr {

std::string render_template(std::string_view text, const PromptVars& vars) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto open = text.find("{{", pos);
    if (open == std::string_view::npos) {
      out.append(text.substr(pos));
      break;
    }
    auto close = text.find("}}", open + 2);
    if (close == std::string_view::npos) {
      out.append(text.substr(pos));
      break;
    }
    auto name = text.substr(open + 2, close - open - 2);
    auto it = vars.find(name);
    if (it == vars.end()) throw ValidationError("unbound prompt placeholder '{{" + std::string(name) + "}}'");
    out.append(text.substr(pos, open - pos));
    out.append(it->second);
    pos = close + 2;
  }
  if (trim(out).empty()) throw ValidationError("prompt rendered to empty text");
  return out;
}

PromptTemplate parse_prompt_template(std::string name, std::string_view text) {
  constexpr std::string_view kSystem = "### SYSTEM\n";
  constexpr std::string_view kUser = "\n### USER\n";
  auto sys = text.find(kSystem);
  auto user = text.find(kUser);
  if (sys == std::string_view::npos || user == std::string_view::npos || user < sys)
    throw ParseError("prompt template '" + name + "' needs '### SYSTEM' and '### USER' sections");
  PromptTemplate t;
  t.name = std::move(name);
  t.system_text = trim(text.substr(sys + kSystem.size(), user - sys - kSystem.size()));
  std::string body(text.substr(user + kUser.size()));
  while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) body.pop_back();
  t.user_template = std::move(body);
  if (t.system_text.empty() || trim(t.user_template).empty())
    throw ParseError("prompt template '" + t.name + "' has an empty section");
  return t;
}

PromptSet PromptSet::defaults() {
  return PromptSet{parse_prompt_template("p_s", embedded::p_s), parse_prompt_template("p_merge", embedded::p_merge),
                   parse_prompt_template("p_sk", embedded::p_sk), parse_prompt_template("p_vs", embedded::p_vs),
                   parse_prompt_template("p_det", embedded::p_det)};
}

PromptSet PromptSet::load(const std::filesystem::path& dir) {
  auto one = [&](const char* name) {
    return parse_prompt_template(name, read_file(dir / (std::string(name) + ".txt")));
  };
  return PromptSet{one("p_s"), one("p_merge"), one("p_sk"), one("p_vs"), one("p_det")};
}

}  // namespace srr
