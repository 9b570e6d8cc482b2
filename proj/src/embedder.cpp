// SPDX-License-Identifier: Apache-2.0
#include "srr/embedder.hpp"

#include <cctype>
#include <cstdint>

#include "srr/errors.hpp"
#include "srr/io.hpp"

namespace srr {

using nlohmann::json;

namespace {

void check_vector(const DenseVector<double>& v, int dimension) {
  if (v.size() != dimension)
    throw DimensionMismatchError("provider returned a vector of dimension " + std::to_string(v.size()) +
                                 ", expected " + std::to_string(dimension));
  if (!all_finite(v)) throw EmbeddingError("provider returned non-finite vector values");
}

EmbeddingVector finish(DenseVector<double> raw, int dimension, const std::string& field) {
  check_vector(raw, dimension);
  if (raw.norm() == 0.0) throw EmbeddingError("text has no embeddable content (zero vector)");
  return EmbeddingVector{normalized(raw), field};
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

EmbeddingVector embed_text(std::string_view text, Embedder& embedder, std::string field) {
  if (text.empty()) throw EmbeddingError("cannot embed empty text");
  auto raw = embedder.embed({std::string(text)});
  if (raw.size() != 1) throw EmbeddingError("provider returned " + std::to_string(raw.size()) + " vectors for 1 text");
  return finish(std::move(raw.front()), embedder.dimension(), field);
}

std::vector<EmbeddingVector> embed_texts(const std::vector<std::string>& texts, Embedder& embedder,
                                         const std::string& field) {
  if (texts.empty()) return {};
  for (const auto& t : texts) {
    if (t.empty()) throw EmbeddingError("cannot embed empty text");
  }
  auto raw = embedder.embed(texts);
  if (raw.size() != texts.size())
    throw EmbeddingError("provider returned " + std::to_string(raw.size()) + " vectors for " +
                         std::to_string(texts.size()) + " texts");
  std::vector<EmbeddingVector> out;
  out.reserve(raw.size());
  for (auto& v : raw) out.push_back(finish(std::move(v), embedder.dimension(), field));
  return out;
}

HashingEmbedder::HashingEmbedder(int dimension) : dimension_(dimension) {
  if (dimension < 1) throw ValidationError("embedding dimension must be >= 1");
}

std::vector<std::string> HashingEmbedder::words(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<DenseVector<double>> HashingEmbedder::embed(const std::vector<std::string>& texts) {
  std::vector<DenseVector<double>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    DenseVector<double> v = DenseVector<double>::Zero(dimension_);
    for (const auto& w : words(t)) v[static_cast<Eigen::Index>(fnv1a(w) % static_cast<std::uint64_t>(dimension_))] += 1.0;
    out.push_back(std::move(v));
  }
  return out;
}

CachingEmbedder::CachingEmbedder(std::shared_ptr<Embedder> inner, CacheMode mode, std::shared_ptr<ReplayCache> cache)
    : inner_(std::move(inner)), mode_(mode), cache_(std::move(cache)) {
  if (mode_ != CacheMode::kPassthrough && !cache_)
    throw ConfigError(std::string(to_string(mode_)) + " mode needs a cache directory");
}

std::vector<DenseVector<double>> CachingEmbedder::embed(const std::vector<std::string>& texts) {
  if (mode_ == CacheMode::kPassthrough) return inner_->embed(texts);

  std::vector<DenseVector<double>> out(texts.size());
  std::vector<std::string> keys(texts.size());
  std::vector<std::size_t> missing;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    keys[i] = sha256_hex(json{{"provider", inner_->name()}, {"dimension", inner_->dimension()}, {"text", texts[i]}}.dump());
    if (auto hit = cache_->load(keys[i])) {
      const auto values = hit->at("vector").get<std::vector<double>>();
      out[i] = Eigen::Map<const DenseVector<double>>(values.data(), static_cast<Eigen::Index>(values.size()));
    } else {
      missing.push_back(i);
    }
  }
  if (missing.empty()) return out;
  if (mode_ == CacheMode::kReplay)
    throw ReplayMissError("no recorded embedding for " + std::to_string(missing.size()) + " text(s)");

  std::vector<std::string> batch;
  batch.reserve(missing.size());
  for (auto i : missing) batch.push_back(texts[i]);
  auto fresh = inner_->embed(batch);
  if (fresh.size() != batch.size()) throw EmbeddingError("provider returned the wrong number of vectors");
  for (std::size_t j = 0; j < missing.size(); ++j) {
    check_vector(fresh[j], inner_->dimension());
    const auto i = missing[j];
    std::vector<double> values(fresh[j].data(), fresh[j].data() + fresh[j].size());
    cache_->store(keys[i], json{{"text", texts[i]}, {"vector", values}});
    out[i] = std::move(fresh[j]);
  }
  return out;
}

}  // namespace srr
