#include <cmath>

#include "cliplab/dimred.hpp"

namespace cliplab::dimred {

namespace {

Vector row_norms(const Matrix& l) {
  Vector h = l.rowwise().norm();
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    if (!(h(i) > 0.0)) h(i) = 1.0;  // all-zero rows stay zero
  }
  return h;
}

double criterion_of(const Matrix& normalized) {
  const double p = static_cast<double>(normalized.rows());
  const Matrix sq = normalized.array().square().matrix();
  double v = 0.0;
  for (Eigen::Index j = 0; j < sq.cols(); ++j) {
    const double s2 = sq.col(j).sum();
    v += sq.col(j).squaredNorm() / p - s2 * s2 / (p * p);
  }
  return v;
}

}  // namespace

double varimax_criterion(const Matrix& loadings) {
  if (loadings.rows() == 0) return 0.0;
  return criterion_of(row_norms(loadings).cwiseInverse().asDiagonal() * loadings);
}

VarimaxResult varimax(const Matrix& loadings, double tol, int max_sweeps) {
  if (!loadings.allFinite()) throw Error(ErrorKind::NonFiniteValue, "loadings have non-finite entries");
  const Eigen::Index m = loadings.cols();
  VarimaxResult out;
  out.rotation = Matrix::Identity(m, m);
  out.loadings = loadings;
  if (m < 2 || loadings.rows() == 0) {
    out.criterion.push_back(varimax_criterion(loadings));
    return out;
  }

  const Vector h = row_norms(loadings);
  Matrix l = h.cwiseInverse().asDiagonal() * loadings;
  const double p = static_cast<double>(l.rows());
  out.criterion.push_back(criterion_of(l));

  while (out.sweeps < max_sweeps) {
    ++out.sweeps;
    for (Eigen::Index a = 0; a < m - 1; ++a) {
      for (Eigen::Index b = a + 1; b < m; ++b) {
        double sa = 0.0, sb = 0.0, sc = 0.0, sd = 0.0;
        for (Eigen::Index i = 0; i < l.rows(); ++i) {
          const double x = l(i, a);
          const double y = l(i, b);
          const double u = x * x - y * y;
          const double v = 2.0 * x * y;
          sa += u;
          sb += v;
          sc += u * u - v * v;
          sd += 2.0 * u * v;
        }
        const double phi = 0.25 * std::atan2(sd - 2.0 * sa * sb / p, sc - (sa * sa - sb * sb) / p);
        if (phi == 0.0) continue;
        const double c = std::cos(phi);
        const double s = std::sin(phi);
        for (Eigen::Index i = 0; i < l.rows(); ++i) {
          const double x = l(i, a);
          const double y = l(i, b);
          l(i, a) = c * x + s * y;
          l(i, b) = -s * x + c * y;
        }
        for (Eigen::Index i = 0; i < m; ++i) {
          const double x = out.rotation(i, a);
          const double y = out.rotation(i, b);
          out.rotation(i, a) = c * x + s * y;
          out.rotation(i, b) = -s * x + c * y;
        }
      }
    }
    out.criterion.push_back(criterion_of(l));
    const auto k = out.criterion.size();
    if (out.criterion[k - 1] - out.criterion[k - 2] < tol) break;
  }
  out.loadings = loadings * out.rotation;
  return out;
}

PcaModel rotate_retained(const PcaModel& model) {
  PcaModel out = model;
  const auto r = static_cast<Eigen::Index>(model.n_retained);
  if (r < 2) return out;
  const auto rot = varimax(model.loadings.leftCols(r));
  out.loadings.leftCols(r) = rot.loadings;
  out.scores.leftCols(r) = model.scores.leftCols(r) * rot.rotation;
  const double trace = model.variable_variance.sum();
  for (Eigen::Index k = 0; k < r; ++k) {
    out.variance_explained[static_cast<std::size_t>(k)] = out.loadings.col(k).squaredNorm() / trace;
  }
  out.rotated = true;
  return out;
}

}  // namespace cliplab::dimred
