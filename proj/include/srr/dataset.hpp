// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <vector>

#include "srr/core_model.hpp"

namespace srr {

/// Loads every `<root>/<case_id>/` directory holding design.v, gold_snippet.v,
/// meta.json and optionally fixed.v. Result is sorted by case_id.
/// Throws MissingFileError or SchemaError naming the offending case.
std::vector<BenchmarkCase> load_dataset(const std::filesystem::path& root);

/// Writes one case in the layout load_dataset reads.
void save_case(const BenchmarkCase& bench_case, const std::filesystem::path& root);

}  // namespace srr
