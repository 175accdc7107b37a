#include <algorithm>
#include <cmath>

#include "cliplab/statlab.hpp"

namespace cliplab::stats {

namespace {

template <typename T>
double cosine_impl(std::span<const T> u, std::span<const T> v) {
  if (u.size() != v.size()) throw Error(ErrorKind::DimMismatch, "vectors differ in dimension");
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = u[i];
    const double b = v[i];
    dot += a * b;
    nu += a * a;
    nv += b * b;
  }
  if (!(nu > 0.0) || !(nv > 0.0)) throw Error(ErrorKind::ZeroNormVector, "cosine of a zero vector");
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

}  // namespace

double cosine(std::span<const double> u, std::span<const double> v) { return cosine_impl(u, v); }

double cosine(std::span<const float> u, std::span<const float> v) { return cosine_impl(u, v); }

CosineAggregate pairwise_cosine_aggregate(std::span<const TokenId> tokens, const EmbeddingTable& embeddings) {
  if (tokens.size() < 2) throw Error(ErrorKind::TooFewTokens, "need at least two tokens");

  // Normalize each row once so every pair costs a single dot product.
  const std::size_t dim = embeddings.dim();
  std::vector<double> unit(tokens.size() * dim);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto row = embeddings.row(tokens[i]);
    double norm = 0.0;
    for (float x : row) norm += static_cast<double>(x) * x;
    if (!(norm > 0.0)) {
      throw Error(ErrorKind::ZeroNormVector, "token " + std::to_string(tokens[i]) + " has a zero embedding");
    }
    norm = std::sqrt(norm);
    for (std::size_t d = 0; d < dim; ++d) unit[i * dim + d] = row[d] / norm;
  }

  CosineAggregate out;
  out.n_tokens = tokens.size();
  out.n_pairs = tokens.size() * (tokens.size() - 1) / 2;
  out.values.reserve(out.n_pairs);
  double sum = 0.0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const double* ui = &unit[i * dim];
    for (std::size_t j = i + 1; j < tokens.size(); ++j) {
      const double* uj = &unit[j * dim];
      double dot = 0.0;
      for (std::size_t d = 0; d < dim; ++d) dot += ui[d] * uj[d];
      dot = std::clamp(dot, -1.0, 1.0);
      out.values.push_back(dot);
      sum += dot;
    }
  }
  out.mean_cos = sum / static_cast<double>(out.n_pairs);
  return out;
}

}  // namespace cliplab::stats
