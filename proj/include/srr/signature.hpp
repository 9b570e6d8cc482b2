// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "srr/core_model.hpp"

namespace srr {

struct LexiconEntry {
  std::string canonical;
  std::vector<std::string> patterns;

  friend bool operator==(const LexiconEntry&, const LexiconEntry&) = default;
};

/// Canonical keywords are unique and every pattern is non-empty; both are
/// stored lowercase.
class SignatureLexicon {
 public:
  SignatureLexicon() = default;
  explicit SignatureLexicon(std::vector<LexiconEntry> entries);

  const std::vector<LexiconEntry>& entries() const { return entries_; }

 private:
  std::vector<LexiconEntry> entries_;
};

/// Parses `canonical: p1,p2` lines; `#` lines and blank lines are skipped.
/// Throws ParseError (bad line) or ValidationError (duplicate / empty).
SignatureLexicon parse_lexicon(std::string_view text);
SignatureLexicon load_lexicon(const std::filesystem::path& path);
const SignatureLexicon& default_lexicon();

/// Canonical keywords whose patterns occur inside an identifier token of the
/// source. Comments, strings and keywords never contribute.
HardwareSignature extract_signature(std::string_view source, const SignatureLexicon& lexicon);
HardwareSignature extract_signature(const RtlDesign& design, const SignatureLexicon& lexicon);

}  // namespace srr
