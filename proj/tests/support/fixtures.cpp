// SPDX-License-Identifier: Apache-2.0
#include "fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <unistd.h>

namespace srr::testing {

namespace fs = std::filesystem;

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  std::random_device rd;
  path_ = fs::temp_directory_path() /
          ("srr-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" + std::to_string(rd()));
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

fs::path sample_dir() { return fs::path(SRR_SOURCE_DIR) / "data" / "sample"; }

DenseVector<double> random_vector(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  DenseVector<double> v(dim);
  do {
    for (int i = 0; i < dim; ++i) v[i] = normal(rng);
  } while (v.norm() == 0.0);
  return v;
}

CweKnowledgeBase random_kb(std::mt19937_64& rng, int n, int dim, double duplicate_fraction) {
  CweKnowledgeBase kb;
  kb.embedding_dimension = dim;
  kb.provenance = {"random", "random", "1970-01-01T00:00:00Z"};
  std::bernoulli_distribution dup(duplicate_fraction);
  for (int i = 0; i < n; ++i) {
    EnrichedCweRecord r;
    r.cwe_id = "CWE-" + std::to_string(1000 + i);
    r.title = "weakness " + std::to_string(i);
    r.summary = "summary " + std::to_string(i);
    r.keywords = {"kw" + std::to_string(i)};
    r.vulnerable_snippet = "assign a = b;";
    r.secure_snippet = "assign a = c;";
    if (i > 0 && dup(rng)) {
      std::uniform_int_distribution<int> pick(0, i - 1);
      r.field_embeddings = kb.records[static_cast<std::size_t>(pick(rng))].field_embeddings;
    } else {
      for (auto f : kSearchableFields) {
        r.field_embeddings[std::string(f)] = EmbeddingVector{normalized(random_vector(rng, dim)), std::string(f)};
      }
    }
    kb.records.push_back(std::move(r));
  }
  return kb;
}

ModelProfile profile(const std::string& name, int window, int threshold) {
  return make_profile(name, window, threshold);
}

}  // namespace srr::testing
