// SPDX-License-Identifier: Apache-2.0
#include "srr/core_model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "srr/errors.hpp"

namespace srr {

HardwareSignature::HardwareSignature(std::vector<std::string> keywords) {
  for (auto& k : keywords) k = to_lower(k);
  std::sort(keywords.begin(), keywords.end());
  keywords.erase(std::unique(keywords.begin(), keywords.end()), keywords.end());
  keywords_ = std::move(keywords);
}

bool HardwareSignature::contains(std::string_view keyword) const {
  return std::binary_search(keywords_.begin(), keywords_.end(), keyword);
}

std::string HardwareSignature::joined() const {
  std::string out;
  for (const auto& k : keywords_) {
    if (!out.empty()) out += ' ';
    out += k;
  }
  return out;
}

RtlDesign make_design(std::string design_id, std::string source_text) {
  if (design_id.empty()) throw PreconditionError("design id must be non-empty");
  if (source_text.empty())
    throw PreconditionError("design '" + design_id + "' has empty source text");
  return RtlDesign{std::move(design_id), std::move(source_text), std::nullopt, std::nullopt};
}

bool is_cwe_id(std::string_view id) {
  constexpr std::string_view prefix = "CWE-";
  if (id.size() <= prefix.size() || id.substr(0, prefix.size()) != prefix) return false;
  return std::all_of(id.begin() + prefix.size(), id.end(),
                     [](unsigned char c) { return std::isdigit(c) != 0; });
}

long cwe_number(std::string_view id) {
  if (!is_cwe_id(id)) throw ValidationError("malformed CWE id '" + std::string(id) + "'");
  long value = 0;
  auto digits = id.substr(4);
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc{}) throw ValidationError("CWE id out of range '" + std::string(id) + "'");
  return value;
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string to_upper(std::string_view text) {
  std::string out(text);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view text) {
  const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  std::size_t b = 0, e = text.size();
  while (b < e && is_space(text[b])) ++b;
  while (e > b && is_space(text[e - 1])) --e;
  return std::string(text.substr(b, e - b));
}

}  // namespace srr
