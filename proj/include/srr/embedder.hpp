// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "srr/embedding.hpp"
#include "srr/llm.hpp"

namespace srr {

/// Text embedding provider. Returned vectors are raw (not yet normalized);
/// embed_text() validates and normalizes them.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<DenseVector<double>> embed(const std::vector<std::string>& texts) = 0;
  virtual std::string name() const = 0;
  virtual int dimension() const = 0;
  virtual std::size_t network_calls() const { return 0; }
};

/// Unit-normalized embedding of one non-empty text tagged with `field`.
/// Throws EmbeddingError, DimensionMismatchError.
EmbeddingVector embed_text(std::string_view text, Embedder& embedder, std::string field = "text");

/// Same contract over a batch; one provider round trip.
std::vector<EmbeddingVector> embed_texts(const std::vector<std::string>& texts, Embedder& embedder,
                                         const std::string& field);

/// Deterministic, network-free bag-of-words embedder. Each lowercase
/// alphanumeric word is hashed (FNV-1a) into one of `dimension` buckets, so
/// cosine between two texts tracks their word overlap.
class HashingEmbedder final : public Embedder {
 public:
  explicit HashingEmbedder(int dimension);

  std::vector<DenseVector<double>> embed(const std::vector<std::string>& texts) override;
  std::string name() const override { return "hashing-bow"; }
  int dimension() const override { return dimension_; }

  static std::vector<std::string> words(std::string_view text);

 private:
  int dimension_;
};

/// `POST <base>/embed` with {"texts": [...]} -> {"vectors": [[...]], "dimension": n}.
/// `model_name` only labels provenance and cache keys; it is not sent.
std::shared_ptr<Embedder> make_http_embedder(const std::string& base_url, const std::string& model_name, int dimension,
                                             double timeout_seconds, int max_in_flight);

/// Wraps another embedder with the record/replay cache, keyed per text.
class CachingEmbedder final : public Embedder {
 public:
  CachingEmbedder(std::shared_ptr<Embedder> inner, CacheMode mode, std::shared_ptr<ReplayCache> cache);

  std::vector<DenseVector<double>> embed(const std::vector<std::string>& texts) override;
  std::string name() const override { return inner_->name(); }
  int dimension() const override { return inner_->dimension(); }
  std::size_t network_calls() const override { return inner_->network_calls(); }

 private:
  std::shared_ptr<Embedder> inner_;
  CacheMode mode_;
  std::shared_ptr<ReplayCache> cache_;
};

}  // namespace srr
