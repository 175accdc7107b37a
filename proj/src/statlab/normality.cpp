#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "cliplab/rng.hpp"
#include "cliplab/statlab.hpp"

namespace cliplab::stats {

namespace {

void require_finite(std::span<const double> s) {
  for (double v : s) {
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteValue, "sample contains a non-finite value");
  }
}

void require_non_constant(std::span<const double> s) {
  const auto [lo, hi] = std::ranges::minmax_element(s);
  if (*lo == *hi) throw Error(ErrorKind::ConstantSample, "sample is constant");
}

template <std::size_t N>
double poly(const std::array<double, N>& c, double x) {
  double r = 0.0;
  for (std::size_t i = N; i-- > 0;) r = r * x + c[i];
  return r;
}

// Two-sided sup distance between the empirical CDF of `sorted` and `cdf`.
template <typename Cdf>
double ks_distance(std::span<const double> sorted, Cdf&& cdf) {
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double standardized_ks(std::vector<double>& x) {
  std::ranges::sort(x);
  const double m = mean(x);
  const double sd = std::sqrt(variance(x));
  return ks_distance(x, [&](double v) { return normal_cdf((v - m) / sd); });
}

}  // namespace

// ---------------------------------------------------------------------------
// Shapiro-Wilk (Royston 1995, AS R94)

TestResult shapiro_wilk(std::span<const double> sample) {
  const std::size_t n = sample.size();
  if (n < 3 || n > 5000) {
    throw Error(ErrorKind::SampleSizeOutOfRange, "Shapiro-Wilk needs 3 <= n <= 5000, got " + std::to_string(n));
  }
  require_finite(sample);
  require_non_constant(sample);

  std::vector<double> x(sample.begin(), sample.end());
  std::ranges::sort(x);
  const std::size_t half = n / 2;
  const double an = static_cast<double>(n);

  // Coefficients a_1..a_half for the upper half of the order statistics.
  std::vector<double> a(half);
  if (n == 3) {
    a[0] = std::numbers::sqrt2 / 2.0;
  } else {
    static constexpr std::array<double, 6> c1 = {0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056};
    static constexpr std::array<double, 6> c2 = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
    std::vector<double> m(half);
    double summ2 = 0.0;
    for (std::size_t i = 0; i < half; ++i) {
      m[i] = normal_quantile((static_cast<double>(i + 1) - 0.375) / (an + 0.25));
      summ2 += m[i] * m[i];
    }
    summ2 *= 2.0;
    const double ssumm2 = std::sqrt(summ2);
    const double rsn = 1.0 / std::sqrt(an);
    const double a1 = poly(c1, rsn) - m[0] / ssumm2;

    std::size_t first = 1;
    double fac = 0.0;
    if (n > 5) {
      first = 2;
      const double a2 = -m[1] / ssumm2 + poly(c2, rsn);
      fac = std::sqrt((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) /
                      (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
      a[1] = a2;
    } else {
      fac = std::sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1));
    }
    a[0] = a1;
    for (std::size_t i = first; i < half; ++i) a[i] = -m[i] / fac;
  }

  const double xbar = mean(x);
  double ssq = 0.0;
  for (double v : x) ssq += (v - xbar) * (v - xbar);
  double num = 0.0;
  for (std::size_t i = 0; i < half; ++i) num += a[i] * (x[n - 1 - i] - x[i]);
  const double w = std::min(1.0, num * num / ssq);

  TestResult r;
  r.method = TestMethod::ShapiroWilk;
  r.statistic = w;

  if (n == 3) {
    constexpr double pi6 = 6.0 / std::numbers::pi;
    constexpr double stqr = std::numbers::pi / 3.0;
    r.p_value = std::clamp(pi6 * (std::asin(std::sqrt(w)) - stqr), 0.0, 1.0);
    return r;
  }
  if (1.0 - w <= 0.0) {
    r.p_value = 1.0;
    return r;
  }

  static constexpr std::array<double, 2> g = {-2.273, 0.459};
  static constexpr std::array<double, 4> c3 = {0.544, -0.39978, 0.025054, -6.714e-4};
  static constexpr std::array<double, 4> c4 = {1.3822, -0.77857, 0.062767, -0.0020322};
  static constexpr std::array<double, 4> c5 = {-1.5861, -0.31082, -0.083751, 0.0038915};
  static constexpr std::array<double, 3> c6 = {-0.4803, -0.082676, 0.0030302};

  double y = std::log(1.0 - w);
  double m = 0.0;
  double s = 0.0;
  if (n <= 11) {
    const double gamma = poly(g, an);
    if (y >= gamma) {
      r.p_value = 1e-99;
      return r;
    }
    y = -std::log(gamma - y);
    m = poly(c3, an);
    s = std::exp(poly(c4, an));
  } else {
    const double xx = std::log(an);
    m = poly(c5, xx);
    s = std::exp(poly(c6, xx));
  }
  r.p_value = std::clamp(normal_sf((y - m) / s), 0.0, 1.0);
  return r;
}

// ---------------------------------------------------------------------------
// Lilliefors

LillieforsNull::LillieforsNull(std::size_t n, std::size_t reps, std::uint64_t seed) : n_(n) {
  if (n < 4) throw Error(ErrorKind::SampleSizeOutOfRange, "Lilliefors needs n >= 4");
  if (reps == 0) throw Error(ErrorKind::InvalidArgument, "Lilliefors needs at least one replicate");
  Rng rng(derive_seed(seed, n, reps));
  sorted_.reserve(reps);
  std::vector<double> x(n);
  for (std::size_t r = 0; r < reps; ++r) {
    for (auto& v : x) v = rng.normal();
    sorted_.push_back(standardized_ks(x));
  }
  std::ranges::sort(sorted_);
}

double LillieforsNull::p_value(double d) const {
  const auto first = std::ranges::lower_bound(sorted_, d);
  const auto at_least = static_cast<double>(sorted_.end() - first);
  return (at_least + 1.0) / (static_cast<double>(sorted_.size()) + 1.0);
}

double lilliefors_statistic(std::span<const double> sample) {
  if (sample.size() < 4) throw Error(ErrorKind::SampleSizeOutOfRange, "Lilliefors needs n >= 4");
  require_finite(sample);
  require_non_constant(sample);
  std::vector<double> x(sample.begin(), sample.end());
  return standardized_ks(x);
}

TestResult lilliefors(std::span<const double> sample, const LillieforsNull& null) {
  if (null.n() != sample.size()) {
    throw Error(ErrorKind::LengthMismatch, "null distribution was simulated for a different n");
  }
  TestResult r;
  r.method = TestMethod::Lilliefors;
  r.statistic = lilliefors_statistic(sample);
  r.p_value = null.p_value(r.statistic);
  return r;
}

TestResult lilliefors(std::span<const double> sample, std::size_t reps, std::uint64_t seed) {
  // Validate before paying for the simulation.
  lilliefors_statistic(sample);
  return lilliefors(sample, LillieforsNull(sample.size(), reps, seed));
}

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov against a fully specified normal

TestResult ks_normal(std::span<const double> sample, double mu, double sigma) {
  if (sample.size() < 4) throw Error(ErrorKind::SampleSizeOutOfRange, "KS needs n >= 4");
  if (!(sigma > 0.0) || !std::isfinite(mu)) {
    throw Error(ErrorKind::InvalidArgument, "KS reference needs finite mu and sigma > 0");
  }
  require_finite(sample);
  require_non_constant(sample);
  std::vector<double> x(sample.begin(), sample.end());
  std::ranges::sort(x);

  TestResult r;
  r.method = TestMethod::Ks;
  r.statistic = ks_distance(x, [&](double v) { return normal_cdf((v - mu) / sigma); });
  r.p_value = kolmogorov_sf(std::sqrt(static_cast<double>(x.size())) * r.statistic);
  return r;
}

// ---------------------------------------------------------------------------
// Jarque-Bera

TestResult jarque_bera(std::span<const double> sample) {
  if (sample.size() < 8) throw Error(ErrorKind::SampleSizeOutOfRange, "Jarque-Bera needs n >= 8");
  require_finite(sample);
  require_non_constant(sample);
  const Moments mo = moments(sample);
  const double n = static_cast<double>(sample.size());

  TestResult r;
  r.method = TestMethod::JarqueBera;
  r.statistic = n / 6.0 * (mo.skewness * mo.skewness + mo.excess_kurtosis * mo.excess_kurtosis / 4.0);
  r.df = 2.0;
  r.p_value = chi2_sf(r.statistic, 2.0);
  return r;
}

}  // namespace cliplab::stats
