// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "srr/errors.hpp"

namespace srr {

template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// A dense embedding plus the name of the field (or query role) it encodes.
template <typename Scalar>
struct BasicEmbedding {
  DenseVector<Scalar> values;
  std::string source_field;

  Eigen::Index dimension() const { return values.size(); }

  friend bool operator==(const BasicEmbedding& a, const BasicEmbedding& b) {
    return a.source_field == b.source_field && a.values.size() == b.values.size() &&
           a.values == b.values;
  }
};

using EmbeddingVector = BasicEmbedding<double>;

template <typename DerivedA, typename DerivedB>
void require_same_dimension(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  if (a.size() != b.size())
    throw DimensionMismatchError("vector dimensions differ: " + std::to_string(a.size()) + " vs " +
                                 std::to_string(b.size()));
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v.coeff(i))) return false;
  }
  return true;
}

/// dot(a, b) / (|a| |b|), clamped to [-1, 1].
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  require_same_dimension(a, b);
  const Scalar na = a.norm();
  const Scalar nb = b.norm();
  if (na == Scalar(0) || nb == Scalar(0)) throw ZeroVectorError("cosine of a zero vector is undefined");
  const Scalar c = a.dot(b) / (na * nb);
  return std::clamp(c, Scalar(-1), Scalar(1));
}

template <typename Scalar>
Scalar cosine(const BasicEmbedding<Scalar>& a, const BasicEmbedding<Scalar>& b) {
  return cosine(a.values, b.values);
}

/// Unit-length copy; throws ZeroVectorError for the zero vector.
template <typename Derived>
DenseVector<typename Derived::Scalar> normalized(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const Scalar n = v.norm();
  if (n == Scalar(0)) throw ZeroVectorError("cannot normalize a zero vector");
  return v / n;
}

/// Weighted query `alpha * summary + beta * signature`. Without a signature
/// (empty hardware signature) the summary embedding is returned unchanged, as
/// it is when beta is zero.
template <typename Scalar>
BasicEmbedding<Scalar> compose_query(const BasicEmbedding<Scalar>& summary,
                                     const BasicEmbedding<Scalar>* signature, Scalar alpha,
                                     Scalar beta) {
  if (!(alpha >= 0) || !(beta >= 0) || !(alpha + beta > 0))
    throw ValidationError("query weights must satisfy alpha >= 0, beta >= 0, alpha + beta > 0");
  if (signature != nullptr) require_same_dimension(summary.values, signature->values);
  if (signature == nullptr) return BasicEmbedding<Scalar>{summary.values, "query"};
  if (beta == Scalar(0)) {
    if (alpha == Scalar(1)) return BasicEmbedding<Scalar>{summary.values, "query"};
    return BasicEmbedding<Scalar>{alpha * summary.values, "query"};
  }
  return BasicEmbedding<Scalar>{alpha * summary.values + beta * signature->values, "query"};
}

}  // namespace srr
