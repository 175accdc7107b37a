#include <algorithm>
#include <cmath>

#include <spdlog/spdlog.h>

#include "cliplab/dimred.hpp"

namespace cliplab::dimred {

namespace {

// Columns whose spread is negligible relative to their magnitude.
bool is_constant(const Eigen::Ref<const Vector>& col) {
  const double lo = col.minCoeff();
  const double hi = col.maxCoeff();
  return hi - lo <= 1e-12 * std::max(1.0, std::max(std::fabs(lo), std::fabs(hi)));
}

void fill_embeddings(DesignMatrix& m, std::span<const TokenId> tokens, const EmbeddingTable& emb) {
  const std::size_t d = emb.dim();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto row = emb.row(tokens[i]);
    for (std::size_t j = 0; j < d; ++j) m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
  }
  for (std::size_t j = 0; j < d; ++j) {
    m.col_weights.push_back(1.0);
    m.col_kinds.push_back(ColumnKind::Embedding);
    m.col_names.push_back("e" + std::to_string(j));
  }
  m.row_tokens.assign(tokens.begin(), tokens.end());
}

}  // namespace

std::vector<std::size_t> DesignMatrix::constant_columns() const {
  std::vector<std::size_t> out;
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    if (values.rows() == 0 || is_constant(values.col(j))) out.push_back(static_cast<std::size_t>(j));
  }
  return out;
}

std::optional<std::size_t> DesignMatrix::column_of(ColumnKind kind) const {
  const auto it = std::ranges::find(col_kinds, kind);
  if (it == col_kinds.end()) return std::nullopt;
  return static_cast<std::size_t>(it - col_kinds.begin());
}

DesignMatrix build_design_matrix(const TakenLeftPartition& partition, const EmbeddingTable& emb,
                                 double indicator_weight_pct) {
  if (!(indicator_weight_pct >= 0.0) || !std::isfinite(indicator_weight_pct)) {
    throw Error(ErrorKind::InvalidArgument, "indicator weight must be a finite non-negative percentage");
  }
  const auto tokens = partition.core();
  const std::size_t d = emb.dim();
  DesignMatrix m;
  m.values.resize(static_cast<Eigen::Index>(tokens.size()), static_cast<Eigen::Index>(d + 2));
  fill_embeddings(m, tokens, emb);

  const double w = indicator_weight_pct == 0.0 ? 1.0 : indicator_weight_pct / 100.0 * static_cast<double>(d);
  const auto tc = static_cast<Eigen::Index>(d);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const bool is_taken = i < partition.taken.size();
    m.values(static_cast<Eigen::Index>(i), tc) = is_taken ? 1.0 : 0.0;
    m.values(static_cast<Eigen::Index>(i), tc + 1) = is_taken ? 0.0 : 1.0;
  }
  m.col_weights.insert(m.col_weights.end(), {w, w});
  m.col_kinds.insert(m.col_kinds.end(), {ColumnKind::TakenIndicator, ColumnKind::LeftIndicator});
  m.col_names.insert(m.col_names.end(), {"taken", "left"});
  return m;
}

DesignMatrix embedding_matrix(std::span<const TokenId> tokens, const EmbeddingTable& emb) {
  DesignMatrix m;
  m.values.resize(static_cast<Eigen::Index>(tokens.size()), static_cast<Eigen::Index>(emb.dim()));
  fill_embeddings(m, tokens, emb);
  return m;
}

Matrix correlation_matrix(const Matrix& x) {
  if (x.rows() < 3) throw Error(ErrorKind::DegenerateMatrix, "correlation needs at least 3 rows");
  Matrix z = x.rowwise() - x.colwise().mean();
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    if (is_constant(x.col(j))) {
      throw Error(ErrorKind::DegenerateMatrix, "column " + std::to_string(j) + " is constant");
    }
    z.col(j) /= z.col(j).norm();
  }
  Matrix r = z.transpose() * z;
  r.diagonal().setOnes();
  return r;
}

double PcaModel::correlation(std::size_t var, std::size_t factor) const {
  const auto i = static_cast<Eigen::Index>(var);
  const double sd = std::sqrt(variable_variance(i));
  return sd > 0.0 ? loadings(i, static_cast<Eigen::Index>(factor)) / sd : 0.0;
}

std::size_t count_kaiser(const Vector& eigenvalues) {
  return static_cast<std::size_t>((eigenvalues.array() > 1.0).count());
}

std::size_t count_variance(const Vector& eigenvalues, double share) {
  const double total = eigenvalues.cwiseMax(0.0).sum();
  if (!(total > 0.0)) return 0;
  double acc = 0.0;
  for (Eigen::Index k = 0; k < eigenvalues.size(); ++k) {
    acc += std::max(0.0, eigenvalues(k));
    if (acc / total >= share - 1e-12) return static_cast<std::size_t>(k + 1);
  }
  return static_cast<std::size_t>(eigenvalues.size());
}

PcaModel pca(const DesignMatrix& m, bool standardize, Retention retain) {
  const Eigen::Index n = m.values.rows();
  if (n < 3) throw Error(ErrorKind::DegenerateMatrix, "PCA needs at least 3 rows");
  if (!m.values.allFinite()) throw Error(ErrorKind::NonFiniteValue, "design matrix has non-finite entries");
  if (m.col_weights.size() != m.cols()) throw Error(ErrorKind::DimMismatch, "one weight per column is required");

  PcaModel model;
  model.dropped = m.constant_columns();
  for (std::size_t j = 0; j < m.cols(); ++j) {
    if (std::ranges::binary_search(model.dropped, j)) continue;
    model.variables.push_back(j);
    model.names.push_back(j < m.col_names.size() ? m.col_names[j] : "v" + std::to_string(j));
    model.kinds.push_back(j < m.col_kinds.size() ? m.col_kinds[j] : ColumnKind::Embedding);
  }
  if (!model.dropped.empty()) {
    spdlog::warn("pca: dropped {} constant column(s)", model.dropped.size());
  }
  if (model.variables.empty()) throw Error(ErrorKind::DegenerateMatrix, "every column is constant");

  // Weighted, centred (and optionally unit-variance) data scaled so that
  // Z^T Z is the matrix being decomposed.
  const auto p = static_cast<Eigen::Index>(model.variables.size());
  const double denom = std::sqrt(static_cast<double>(n - 1));
  Matrix z(n, p);
  for (Eigen::Index k = 0; k < p; ++k) {
    const auto j = static_cast<Eigen::Index>(model.variables[static_cast<std::size_t>(k)]);
    Vector col = m.values.col(j).array() - m.values.col(j).mean();
    if (standardize) col /= col.norm() / denom;
    z.col(k) = col * (m.col_weights[static_cast<std::size_t>(j)] / denom);
  }

  Vector lambda;
  Matrix vectors;
  if (p <= n) {
    const Matrix c = z.transpose() * z;
    auto eig = jacobi_eigen(c);
    lambda = eig.values;
    vectors = std::move(eig.vectors);
  } else {
    // Dual route: the non-zero spectrum of Z^T Z equals that of Z Z^T.
    const Matrix g = z * z.transpose();
    auto eig = jacobi_eigen(g);
    lambda = Vector::Zero(n);
    vectors = Matrix::Zero(p, n);
    const double cutoff = 1e-12 * std::max(1.0, eig.values(0));
    for (Eigen::Index k = 0; k < n; ++k) {
      if (eig.values(k) <= cutoff) continue;
      lambda(k) = eig.values(k);
      Vector v = z.transpose() * eig.vectors.col(k) / std::sqrt(eig.values(k));
      Eigen::Index arg = 0;
      v.cwiseAbs().maxCoeff(&arg);
      vectors.col(k) = v(arg) < 0.0 ? Vector(-v) : v;
    }
  }
  lambda = lambda.unaryExpr([](double v) { return std::fabs(v) < 1e-13 ? 0.0 : v; });
  const double trace = z.squaredNorm();
  if (!(lambda(0) > 1e-12 * std::max(1.0, trace))) throw Error(ErrorKind::DegenerateMatrix, "matrix has rank 0");

  model.eigenvalues = lambda;
  model.variable_variance = z.colwise().squaredNorm().transpose();
  model.loadings = vectors * lambda.cwiseMax(0.0).cwiseSqrt().asDiagonal();
  model.scores = z * denom * vectors;
  model.variance_explained.resize(static_cast<std::size_t>(lambda.size()));
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    model.variance_explained[static_cast<std::size_t>(k)] = std::max(0.0, lambda(k)) / trace;
  }

  switch (retain.rule) {
    case Retention::Rule::Kaiser: model.n_retained = count_kaiser(lambda); break;
    case Retention::Rule::Variance: model.n_retained = count_variance(lambda, retain.threshold); break;
    case Retention::Rule::Fixed:
      if (retain.k >= static_cast<std::size_t>(n) || retain.k > static_cast<std::size_t>(lambda.size())) {
        throw Error(ErrorKind::InvalidArgument, "cannot retain " + std::to_string(retain.k) + " factors");
      }
      model.n_retained = retain.k;
      break;
  }

  model.communalities.assign(static_cast<std::size_t>(p), 0.0);
  for (Eigen::Index i = 0; i < p; ++i) {
    double h = 0.0;
    for (std::size_t k = 0; k < model.n_retained; ++k) {
      const double r = model.correlation(static_cast<std::size_t>(i), k);
      h += r * r;
    }
    model.communalities[static_cast<std::size_t>(i)] = h;
  }
  return model;
}

}  // namespace cliplab::dimred
