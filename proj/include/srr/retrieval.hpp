// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "srr/config.hpp"
#include "srr/cwe_kb.hpp"
#include "srr/embedding.hpp"

namespace srr {

struct RankedCwe {
  std::string cwe_id;
  double score = 0.0;
  std::string best_field;

  friend bool operator==(const RankedCwe&, const RankedCwe&) = default;
};

/// Sorted by score descending, ties by ascending numeric CWE id; at most k
/// entries, no duplicate ids.
struct RetrievalResult {
  std::vector<RankedCwe> ranked;

  /// 1-based rank of `cwe_id`, or 0 when it was not retrieved.
  int rank_of(const std::string& cwe_id) const;
};

/// Exhaustive scan. A record's score combines the cosines between the query
/// and its searchable field embeddings (max by default); best_field is the
/// field with the highest cosine. Throws DimensionMismatchError,
/// ZeroVectorError, ValidationError (k < 1).
RetrievalResult retrieve_top_k(const CweKnowledgeBase& kb, const EmbeddingVector& query, int k,
                               FieldCombiner combiner = FieldCombiner::kMax);

}  // namespace srr
