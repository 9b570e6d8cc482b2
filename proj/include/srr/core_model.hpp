// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace srr {

/// Ordered set of lowercase keywords extracted from an RTL design.
/// Always sorted and duplicate-free so its serialization is deterministic.
class HardwareSignature {
 public:
  HardwareSignature() = default;
  explicit HardwareSignature(std::vector<std::string> keywords);

  const std::vector<std::string>& keywords() const { return keywords_; }
  bool empty() const { return keywords_.empty(); }
  std::size_t size() const { return keywords_.size(); }
  bool contains(std::string_view keyword) const;

  /// Space-joined keyword list, the text that gets embedded.
  std::string joined() const;

  friend bool operator==(const HardwareSignature&, const HardwareSignature&) = default;

 private:
  std::vector<std::string> keywords_;
};

struct RtlDesign {
  std::string design_id;
  std::string source_text;
  std::optional<std::string> summary;
  std::optional<HardwareSignature> signature;

  friend bool operator==(const RtlDesign&, const RtlDesign&) = default;
};

/// Throws PreconditionError when the id or source is empty.
RtlDesign make_design(std::string design_id, std::string source_text);

struct BenchmarkCase {
  std::string case_id;
  RtlDesign buggy_design;
  std::string gold_snippet;
  std::optional<std::string> fixed_design;
  std::string gold_cwe_id;
  std::string description;

  friend bool operator==(const BenchmarkCase&, const BenchmarkCase&) = default;
};

/// True for strings of the form "CWE-<digits>".
bool is_cwe_id(std::string_view id);

/// Numeric part of a CWE id; throws ValidationError on malformed ids.
long cwe_number(std::string_view id);

std::string to_lower(std::string_view text);
std::string to_upper(std::string_view text);
std::string trim(std::string_view text);

}  // namespace srr
