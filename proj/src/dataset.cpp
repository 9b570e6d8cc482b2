// SPDX-License-Identifier: Apache-2.0
#include "srr/dataset.hpp"

#include <algorithm>

#include <json.hpp>

#include "srr/errors.hpp"
#include "srr/io.hpp"

namespace srr {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string required_file(const fs::path& dir, const char* name, const std::string& case_id) {
  auto path = dir / name;
  if (!fs::is_regular_file(path))
    throw MissingFileError("case '" + case_id + "' is missing " + name);
  return read_file(path);
}

std::string meta_string(const json& meta, const char* key, const std::string& case_id) {
  if (!meta.contains(key) || !meta[key].is_string())
    throw SchemaError("case '" + case_id + "': meta.json field '" + key + "' must be a string");
  return meta[key].get<std::string>();
}

BenchmarkCase load_case(const fs::path& dir) {
  const std::string dir_name = dir.filename().string();
  auto source = required_file(dir, "design.v", dir_name);
  auto gold = required_file(dir, "gold_snippet.v", dir_name);
  auto meta_text = required_file(dir, "meta.json", dir_name);

  json meta;
  try {
    meta = json::parse(meta_text);
  } catch (const json::parse_error& e) {
    throw SchemaError("case '" + dir_name + "': meta.json is not valid JSON: " + e.what());
  }
  if (!meta.is_object()) throw SchemaError("case '" + dir_name + "': meta.json must be an object");

  BenchmarkCase c;
  c.case_id = meta_string(meta, "case_id", dir_name);
  if (c.case_id != dir_name)
    throw SchemaError("case '" + dir_name + "': meta.json case_id '" + c.case_id +
                      "' does not match its directory");
  c.gold_cwe_id = meta_string(meta, "gold_cwe_id", dir_name);
  if (!is_cwe_id(c.gold_cwe_id))
    throw SchemaError("case '" + dir_name + "': gold_cwe_id '" + c.gold_cwe_id +
                      "' is not of the form CWE-<n>");
  c.description = meta.contains("description") ? meta_string(meta, "description", dir_name) : "";

  if (source.empty()) throw SchemaError("case '" + dir_name + "': design.v is empty");
  if (trim(gold).empty()) throw SchemaError("case '" + dir_name + "': gold_snippet.v is empty");
  c.buggy_design = make_design(c.case_id, std::move(source));
  c.gold_snippet = std::move(gold);
  if (fs::is_regular_file(dir / "fixed.v")) c.fixed_design = read_file(dir / "fixed.v");
  return c;
}

}  // namespace

std::vector<BenchmarkCase> load_dataset(const fs::path& root) {
  if (!fs::is_directory(root)) throw MissingFileError("dataset root '" + root.string() + "' is not a directory");
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) dirs.push_back(entry.path());
  }
  std::vector<BenchmarkCase> cases;
  cases.reserve(dirs.size());
  for (const auto& d : dirs) cases.push_back(load_case(d));
  std::sort(cases.begin(), cases.end(),
            [](const BenchmarkCase& a, const BenchmarkCase& b) { return a.case_id < b.case_id; });
  return cases;
}

void save_case(const BenchmarkCase& c, const fs::path& root) {
  auto dir = root / c.case_id;
  write_file_atomic(dir / "design.v", c.buggy_design.source_text);
  write_file_atomic(dir / "gold_snippet.v", c.gold_snippet);
  if (c.fixed_design) write_file_atomic(dir / "fixed.v", *c.fixed_design);
  json meta = {{"case_id", c.case_id}, {"gold_cwe_id", c.gold_cwe_id}, {"description", c.description}};
  write_file_atomic(dir / "meta.json", meta.dump(2) + "\n");
}

}  // namespace srr
