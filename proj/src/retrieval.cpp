// SPDX-License-Identifier: Apache-2.0
#include "srr/retrieval.hpp"

#include <algorithm>

#include "srr/core_model.hpp"
#include "srr/errors.hpp"

namespace srr {

int RetrievalResult::rank_of(const std::string& cwe_id) const {
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (ranked[i].cwe_id == cwe_id) return static_cast<int>(i) + 1;
  }
  return 0;
}

RetrievalResult retrieve_top_k(const CweKnowledgeBase& kb, const EmbeddingVector& query, int k,
                               FieldCombiner combiner) {
  if (k < 1) throw ValidationError("top-k must be >= 1");
  if (query.dimension() != kb.embedding_dimension && !kb.records.empty())
    throw DimensionMismatchError("query has dimension " + std::to_string(query.dimension()) +
                                 ", knowledge base uses " + std::to_string(kb.embedding_dimension));
  if (!all_finite(query.values)) throw ValidationError("query has non-finite values");
  const DenseVector<double> unit_query = normalized(query.values);

  struct Scored {
    long number;
    RankedCwe entry;
  };
  std::vector<Scored> scored;
  scored.reserve(kb.records.size());
  for (const auto& record : kb.records) {
    double best = -2.0, sum = 0.0;
    std::string best_field;
    for (auto field : kSearchableFields) {
      const auto& emb = record.field_embeddings.at(std::string(field));
      const double c = cosine(unit_query, emb.values);
      sum += c;
      if (c > best) {
        best = c;
        best_field = field;
      }
    }
    const double score =
        combiner == FieldCombiner::kMax ? best : sum / static_cast<double>(kSearchableFields.size());
    scored.push_back(Scored{cwe_number(record.cwe_id), RankedCwe{record.cwe_id, score, std::move(best_field)}});
  }

  const auto better = [](const Scored& a, const Scored& b) {
    if (a.entry.score != b.entry.score) return a.entry.score > b.entry.score;
    return a.number < b.number;
  };
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(), better);

  RetrievalResult result;
  result.ranked.reserve(take);
  for (std::size_t i = 0; i < take; ++i) result.ranked.push_back(std::move(scored[i].entry));
  return result;
}

}  // namespace srr
