#include <algorithm>
#include <cmath>
#include <limits>

#include "cliplab/statlab.hpp"

namespace cliplab::stats {

namespace {

void require_finite(std::span<const double> s) {
  for (double v : s) {
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteValue, "sample contains a non-finite value");
  }
}

}  // namespace

double mean(std::span<const double> s) {
  if (s.empty()) throw Error(ErrorKind::InsufficientData, "empty sample");
  double sum = 0.0;
  for (double v : s) sum += v;
  return sum / static_cast<double>(s.size());
}

double variance(std::span<const double> s) {
  if (s.size() < 2) throw Error(ErrorKind::InsufficientData, "variance needs n >= 2");
  const double m = mean(s);
  double ss = 0.0;
  for (double v : s) ss += (v - m) * (v - m);
  return ss / static_cast<double>(s.size() - 1);
}

double median(std::span<const double> s) {
  if (s.empty()) throw Error(ErrorKind::InsufficientData, "empty sample");
  std::vector<double> v(s.begin(), s.end());
  std::ranges::sort(v);
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Moments moments(std::span<const double> s) {
  if (s.size() < 2) throw Error(ErrorKind::InsufficientData, "moments need n >= 2");
  require_finite(s);
  const double n = static_cast<double>(s.size());
  Moments out;
  out.mean = mean(s);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : s) {
    const double d = v - out.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  out.variance = m2 / (n - 1.0);
  m2 /= n;
  m3 /= n;
  m4 /= n;
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  out.skewness = (s.size() >= 3 && m2 > 0.0) ? m3 / std::pow(m2, 1.5) : nan;
  out.excess_kurtosis = (s.size() >= 4 && m2 > 0.0) ? m4 / (m2 * m2) - 3.0 : nan;
  return out;
}

std::vector<QqPoint> qq_points(std::span<const double> s) {
  if (s.size() < 2) throw Error(ErrorKind::InsufficientData, "QQ plot needs n >= 2");
  require_finite(s);
  std::vector<double> sorted(s.begin(), s.end());
  std::ranges::sort(sorted);
  const double n = static_cast<double>(sorted.size());
  std::vector<QqPoint> out;
  out.reserve(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double pos = (static_cast<double>(i + 1) - 0.375) / (n + 0.25);
    out.push_back({normal_quantile(pos), sorted[i]});
  }
  return out;
}

}  // namespace cliplab::stats
