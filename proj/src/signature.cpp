// SPDX-License-Identifier: Apache-2.0
#include "srr/signature.hpp"

#include <set>

#include "srr/embedded_text.hpp"
#include "srr/errors.hpp"
#include "srr/hdl_lexer.hpp"
#include "srr/io.hpp"

namespace srr {

SignatureLexicon::SignatureLexicon(std::vector<LexiconEntry> entries) {
  std::set<std::string> seen;
  for (auto& e : entries) {
    e.canonical = to_lower(trim(e.canonical));
    if (e.canonical.empty()) throw ValidationError("lexicon canonical keyword is empty");
    if (!seen.insert(e.canonical).second)
      throw ValidationError("duplicate lexicon keyword '" + e.canonical + "'");
    if (e.patterns.empty()) throw ValidationError("lexicon keyword '" + e.canonical + "' has no patterns");
    for (auto& p : e.patterns) {
      p = to_lower(trim(p));
      if (p.empty()) throw ValidationError("lexicon keyword '" + e.canonical + "' has an empty pattern");
    }
  }
  entries_ = std::move(entries);
}

SignatureLexicon parse_lexicon(std::string_view text) {
  std::vector<LexiconEntry> entries;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto colon = line.find(':');
    if (colon == std::string::npos)
      throw ParseError("lexicon line " + std::to_string(line_no) + ": expected 'canonical: patterns'");
    LexiconEntry entry;
    entry.canonical = line.substr(0, colon);
    std::string_view rest = std::string_view(line).substr(colon + 1);
    std::size_t p = 0;
    while (p <= rest.size()) {
      auto comma = rest.find(',', p);
      entry.patterns.push_back(std::string(rest.substr(p, comma == std::string_view::npos ? std::string_view::npos : comma - p)));
      if (comma == std::string_view::npos) break;
      p = comma + 1;
    }
    entries.push_back(std::move(entry));
  }
  return SignatureLexicon(std::move(entries));
}

SignatureLexicon load_lexicon(const std::filesystem::path& path) { return parse_lexicon(read_file(path)); }

const SignatureLexicon& default_lexicon() {
  static const SignatureLexicon lexicon = parse_lexicon(embedded::signature_lexicon);
  return lexicon;
}

HardwareSignature extract_signature(std::string_view source, const SignatureLexicon& lexicon) {
  const auto scan = tokenize(source);
  std::vector<std::string> identifiers;
  for (const auto& t : scan.tokens) {
    if (t.kind == TokenKind::kIdentifier) identifiers.push_back(to_lower(t.text));
  }
  std::vector<std::string> hits;
  for (const auto& entry : lexicon.entries()) {
    bool hit = false;
    for (const auto& id : identifiers) {
      for (const auto& pattern : entry.patterns) {
        if (id.find(pattern) != std::string::npos) {
          hit = true;
          break;
        }
      }
      if (hit) break;
    }
    if (hit) hits.push_back(entry.canonical);
  }
  return HardwareSignature(std::move(hits));
}

HardwareSignature extract_signature(const RtlDesign& design, const SignatureLexicon& lexicon) {
  return extract_signature(design.source_text, lexicon);
}

}  // namespace srr
