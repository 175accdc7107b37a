#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "cliplab/statlab.hpp"

namespace cliplab::stats {

namespace bm = boost::math;

std::string_view to_string(TestMethod method) {
  switch (method) {
    case TestMethod::ShapiroWilk: return "shapiro_wilk";
    case TestMethod::Lilliefors: return "lilliefors";
    case TestMethod::Ks: return "ks";
    case TestMethod::JarqueBera: return "jarque_bera";
    case TestMethod::Bartlett: return "bartlett";
    case TestMethod::Levene: return "levene";
    case TestMethod::KruskalWallis: return "kruskal_wallis";
    case TestMethod::StudentT: return "student_t";
    case TestMethod::Chi2Gof: return "chi2_gof";
    case TestMethod::Chi2Independence: return "chi2_independence";
    case TestMethod::BartlettSphericity: return "bartlett_sphericity";
  }
  return "unknown";
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorKind::InvalidArgument, "normal quantile needs 0 < p < 1");
  return bm::quantile(bm::normal_distribution<double>(), p);
}

double chi2_sf(double x, double df) {
  if (!(x > 0.0)) return 1.0;
  if (std::isinf(x)) return 0.0;
  return bm::cdf(bm::complement(bm::chi_squared_distribution<double>(df), x));
}

double f_sf(double x, double df1, double df2) {
  if (!(x > 0.0)) return 1.0;
  if (std::isinf(x)) return 0.0;
  return bm::cdf(bm::complement(bm::fisher_f_distribution<double>(df1, df2), x));
}

double t_two_sided(double t, double df) {
  if (std::isinf(t)) return 0.0;
  const double tail = bm::cdf(bm::complement(bm::students_t_distribution<double>(df), std::fabs(t)));
  return std::min(1.0, 2.0 * tail);
}

double kolmogorov_sf(double lambda) {
  constexpr double kTol = 1e-12;
  if (!(lambda > 0.04)) return 1.0;
  if (lambda < 1.0) {
    // Dual (theta-function) form converges fast for small lambda:
    // P(K <= l) = sqrt(2 pi)/l * sum_k exp(-(2k-1)^2 pi^2 / (8 l^2)).
    const double c = -std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double sum = 0.0;
    for (int k = 1; k < 1000; ++k) {
      const double odd = 2.0 * k - 1.0;
      const double term = std::exp(c * odd * odd);
      sum += term;
      if (term < kTol) break;
    }
    const double cdf = std::sqrt(2.0 * std::numbers::pi) / lambda * sum;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k < 1000; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < kTol) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace cliplab::stats
