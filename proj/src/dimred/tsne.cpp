#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "cliplab/dimred.hpp"
#include "cliplab/rng.hpp"

namespace cliplab::dimred {

namespace {

constexpr double kEntropyTol = 1e-5;
constexpr int kMaxBisection = 200;
constexpr double kFloor = 1e-12;

Matrix squared_distances(const Matrix& x) {
  const Eigen::Index n = x.rows();
  Matrix d(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    d(j, j) = 0.0;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double v = (x.row(i) - x.row(j)).squaredNorm();
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}

// Fills row i of the conditional affinities for precision beta and returns
// the Shannon entropy (nats) of that row.
double conditional_row(const Matrix& d, Eigen::Index i, double beta, Matrix& p) {
  const Eigen::Index n = d.rows();
  // Shift by the nearest-neighbour distance so exp() cannot underflow to 0.
  double dmin = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j != i) dmin = std::min(dmin, d(i, j));
  }
  double sum = 0.0;
  double weighted = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j == i) {
      p(i, j) = 0.0;
      continue;
    }
    const double e = std::exp(-beta * (d(i, j) - dmin));
    p(i, j) = e;
    sum += e;
    weighted += e * (d(i, j) - dmin);
  }
  for (Eigen::Index j = 0; j < n; ++j) p(i, j) /= sum;
  return std::log(sum) + beta * weighted / sum;
}

// Index of the first row identical to each row (itself when unique).
std::vector<Eigen::Index> first_twin(const Matrix& x) {
  std::vector<Eigen::Index> twin(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    auto& t = twin[static_cast<std::size_t>(i)];
    t = i;
    for (Eigen::Index j = 0; j < i && t == i; ++j) {
      if (x.row(j) == x.row(i)) t = j;
    }
  }
  return twin;
}

}  // namespace

Matrix tsne_affinities(const Matrix& x, double perplexity) {
  const Eigen::Index n = x.rows();
  if (!(perplexity > 0.0)) throw Error(ErrorKind::InvalidArgument, "perplexity must be positive");
  if (!(3.0 * perplexity < static_cast<double>(n))) {
    throw Error(ErrorKind::PerplexityTooLarge,
                "perplexity " + std::to_string(perplexity) + " needs more than " +
                    std::to_string(static_cast<long>(3.0 * perplexity)) + " points, got " + std::to_string(n));
  }
  if (!x.allFinite()) throw Error(ErrorKind::NonFiniteValue, "t-SNE input has non-finite entries");

  const Matrix d = squared_distances(x);
  const double target = std::log(perplexity);
  const auto twin = first_twin(x);
  Matrix p = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    // A duplicate copies its twin's row so both rows agree to the bit.
    const Eigen::Index t = twin[static_cast<std::size_t>(i)];
    if (t != i) {
      p.row(i) = p.row(t);
      std::swap(p(i, i), p(i, t));
      continue;
    }
    double beta = 1.0;
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    for (int it = 0; it < kMaxBisection; ++it) {
      const double h = conditional_row(d, i, beta, p);
      const double diff = h - target;
      if (std::fabs(diff) < kEntropyTol) break;
      if (diff > 0.0) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
      } else {
        hi = beta;
        beta = 0.5 * (beta + lo);
      }
    }
  }
  Matrix joint = (p + p.transpose()) / (2.0 * static_cast<double>(n));
  joint /= joint.sum();
  return joint;
}

double tsne_kl(const Matrix& p, const Matrix& y) {
  const Eigen::Index n = y.rows();
  Matrix num(n, n);
  double z = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i == j) {
        num(i, j) = 0.0;
        continue;
      }
      num(i, j) = 1.0 / (1.0 + (y.row(i) - y.row(j)).squaredNorm());
      z += num(i, j);
    }
  }
  double kl = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i == j || p(i, j) <= 0.0) continue;
      const double q = std::max(num(i, j) / z, kFloor);
      kl += p(i, j) * std::log(std::max(p(i, j), kFloor) / q);
    }
  }
  return kl;
}

TsneEmbedding tsne(const Matrix& x, std::uint64_t seed, const TsneOptions& opt) {
  if (opt.iters < 250) throw Error(ErrorKind::InvalidArgument, "t-SNE needs at least 250 iterations");
  const Eigen::Index n = x.rows();
  const Matrix p = tsne_affinities(x, opt.perplexity);
  const double lr = opt.learning_rate > 0.0 ? opt.learning_rate : std::max(static_cast<double>(n) / 12.0, 50.0);

  // Rows identical to an earlier row reuse its starting point; identical P
  // rows then keep the two trajectories identical.
  const auto twin = first_twin(x);
  Rng rng(seed);
  Matrix y(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index t = twin[static_cast<std::size_t>(i)];
    if (t != i) {
      y.row(i) = y.row(t);
      continue;
    }
    y(i, 0) = rng.normal() * opt.init_sd;
    y(i, 1) = rng.normal() * opt.init_sd;
  }
  Matrix update = Matrix::Zero(n, 2);
  Matrix gains = Matrix::Ones(n, 2);
  Matrix num(n, n);
  Matrix grad(n, 2);

  TsneEmbedding out;
  out.seed = seed;
  out.perplexity = opt.perplexity;

  for (int iter = 0; iter < opt.iters; ++iter) {
    const double exag = iter < opt.exaggeration_iters ? opt.exaggeration : 1.0;
    const double momentum = iter < opt.momentum_switch ? opt.momentum_start : opt.momentum_final;

    double z = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      num(j, j) = 0.0;
      for (Eigen::Index i = j + 1; i < n; ++i) {
        const double dx = y(i, 0) - y(j, 0);
        const double dy = y(i, 1) - y(j, 1);
        const double v = 1.0 / (1.0 + dx * dx + dy * dy);
        num(i, j) = v;
        num(j, i) = v;
        z += 2.0 * v;
      }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      double gx = 0.0;
      double gy = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        const double w = (exag * p(i, j) - num(i, j) / z) * num(i, j);
        gx += w * (y(i, 0) - y(j, 0));
        gy += w * (y(i, 1) - y(j, 1));
      }
      grad(i, 0) = 4.0 * gx;
      grad(i, 1) = 4.0 * gy;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index c = 0; c < 2; ++c) {
        const bool same_sign = (grad(i, c) > 0.0) == (update(i, c) > 0.0);
        gains(i, c) = same_sign ? std::max(gains(i, c) * 0.8, opt.min_gain) : gains(i, c) + 0.2;
        update(i, c) = momentum * update(i, c) - lr * gains(i, c) * grad(i, c);
        y(i, c) += update(i, c);
      }
    }
    y.rowwise() -= y.colwise().mean();

    if (iter + 1 == opt.exaggeration_iters) out.kl_after_exaggeration = tsne_kl(p, y);
  }
  if (opt.exaggeration_iters <= 0 || opt.exaggeration_iters > opt.iters) out.kl_after_exaggeration = tsne_kl(p, y);

  out.final_kl = tsne_kl(p, y);
  out.coords = std::move(y);
  if (!out.coords.allFinite()) throw Error(ErrorKind::DegenerateMatrix, "t-SNE diverged");
  return out;
}

}  // namespace cliplab::dimred
