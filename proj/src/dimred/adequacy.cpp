#include <algorithm>
#include <cmath>

#include "cliplab/dimred.hpp"

namespace cliplab::dimred {

namespace {

void require_square(const Matrix& corr) {
  if (corr.rows() != corr.cols() || corr.rows() < 2) {
    throw Error(ErrorKind::DimMismatch, "correlation matrix must be square with p >= 2");
  }
  if (!corr.allFinite()) throw Error(ErrorKind::NonFiniteValue, "correlation matrix has non-finite entries");
}

// Centred columns scaled to unit norm.
Matrix correlation_data(const Matrix& x) {
  if (x.rows() < 3) throw Error(ErrorKind::DegenerateMatrix, "correlation needs at least 3 rows");
  if (!x.allFinite()) throw Error(ErrorKind::NonFiniteValue, "data has non-finite entries");
  Matrix z = x.rowwise() - x.colwise().mean();
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    const double lo = x.col(j).minCoeff();
    const double hi = x.col(j).maxCoeff();
    const double norm = z.col(j).norm();
    if (hi - lo <= 1e-12 * std::max(1.0, std::max(std::fabs(lo), std::fabs(hi))) || !(norm > 0.0)) {
      throw Error(ErrorKind::DegenerateMatrix, "column " + std::to_string(j) + " is constant");
    }
    z.col(j) /= norm;
  }
  return z;
}

// Relative eigenvalue floor below which the matrix is treated as singular.
constexpr double kSingularTol = 1e-10;

}  // namespace

double kmo(const Matrix& corr, bool pseudo_inverse) {
  require_square(corr);
  const auto eig = jacobi_eigen(corr);
  const double top = std::max(eig.values(0), 0.0);
  const double floor = kSingularTol * std::max(1.0, top);
  const Eigen::Index p = corr.rows();

  Vector inv = Vector::Zero(p);
  for (Eigen::Index k = 0; k < p; ++k) {
    if (eig.values(k) > floor) {
      inv(k) = 1.0 / eig.values(k);
    } else if (!pseudo_inverse) {
      throw Error(ErrorKind::SingularCorrelation, "correlation matrix is singular");
    }
  }
  const Matrix s = eig.vectors * inv.asDiagonal() * eig.vectors.transpose();

  double r2 = 0.0;
  double q2 = 0.0;
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index i = 0; i < p; ++i) {
      if (i == j) continue;
      const double d = s(i, i) * s(j, j);
      if (!(d > 0.0)) throw Error(ErrorKind::SingularCorrelation, "anti-image has a zero diagonal");
      const double q = -s(i, j) / std::sqrt(d);
      r2 += corr(i, j) * corr(i, j);
      q2 += q * q;
    }
  }
  if (!(r2 + q2 > 0.0)) throw Error(ErrorKind::DegenerateMatrix, "no off-diagonal correlation");
  return r2 / (r2 + q2);
}

double kmo_data(const Matrix& x, bool pseudo_inverse) {
  if (x.cols() < 2) throw Error(ErrorKind::DimMismatch, "KMO needs at least two variables");
  if (x.cols() < x.rows()) return kmo(correlation_matrix(x), pseudo_inverse);
  if (!pseudo_inverse) throw Error(ErrorKind::SingularCorrelation, "more variables than units");

  // Unit-norm centred columns, so R = Z^T Z. Both R and its pseudo-inverse
  // are reached through the n x n Gram matrix Z Z^T.
  Matrix z = correlation_data(x);
  const Matrix g = z * z.transpose();
  const auto eig = jacobi_eigen(g);
  const double floor = kSingularTol * std::max(1.0, eig.values(0));
  Eigen::Index rank = 0;
  while (rank < eig.values.size() && eig.values(rank) > floor) ++rank;
  if (rank == 0) throw Error(ErrorKind::DegenerateMatrix, "correlation matrix has rank 0");
  const Vector inv = eig.values.head(rank).cwiseInverse();
  Matrix w = z.transpose() * eig.vectors.leftCols(rank) * inv.asDiagonal();  // pinv(R) = W W^T

  double diag4 = 0.0;
  for (Eigen::Index j = 0; j < z.cols(); ++j) diag4 += std::pow(z.col(j).squaredNorm(), 2);
  const double r2 = g.squaredNorm() - diag4;
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    const double norm = w.row(i).norm();
    if (!(norm > 0.0)) throw Error(ErrorKind::SingularCorrelation, "anti-image has a zero diagonal");
    w.row(i) /= norm;
  }
  const double q2 = (w.transpose() * w).squaredNorm() - static_cast<double>(w.rows());
  if (!(r2 + q2 > 0.0)) throw Error(ErrorKind::DegenerateMatrix, "no off-diagonal correlation");
  return r2 / (r2 + q2);
}

stats::TestResult bartlett_sphericity(const Matrix& corr, std::size_t n) {
  require_square(corr);
  const auto eig = jacobi_eigen(corr);
  const double floor = kSingularTol * std::max(1.0, eig.values(0));
  double log_det = 0.0;
  for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
    if (!(eig.values(k) > floor)) throw Error(ErrorKind::SingularCorrelation, "correlation matrix is singular");
    log_det += std::log(eig.values(k));
  }
  const double p = static_cast<double>(corr.rows());
  const double factor = static_cast<double>(n) - 1.0 - (2.0 * p + 5.0) / 6.0;
  if (!(factor > 0.0)) throw Error(ErrorKind::InsufficientData, "too few units for the sphericity test");

  stats::TestResult r;
  r.method = stats::TestMethod::BartlettSphericity;
  r.statistic = std::max(0.0, -factor * log_det);
  if (std::fabs(log_det) < 1e-13 * p) r.statistic = 0.0;
  r.df = p * (p - 1.0) / 2.0;
  r.p_value = stats::chi2_sf(r.statistic, *r.df);
  return r;
}

}  // namespace cliplab::dimred
