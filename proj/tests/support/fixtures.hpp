// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "srr/cwe_kb.hpp"
#include "srr/llm.hpp"

namespace srr::testing {

// Directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::filesystem::path sample_dir();

// Random KB of `n` records with ids CWE-<1000+i> and unit-norm vectors.
// With `duplicate_fraction` > 0 some records copy another record's vectors so
// scores tie exactly.
CweKnowledgeBase random_kb(std::mt19937_64& rng, int n, int dim, double duplicate_fraction = 0.0);

DenseVector<double> random_vector(std::mt19937_64& rng, int dim);

// Services-free ModelProfile shortcut.
ModelProfile profile(const std::string& name, int window, int threshold = 16384);

}  // namespace srr::testing
