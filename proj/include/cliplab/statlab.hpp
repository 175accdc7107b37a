#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "cliplab/model_store.hpp"

namespace cliplab::stats {

// ---------------------------------------------------------------------------
// Reference distributions

double normal_cdf(double x);
double normal_sf(double x);
double normal_quantile(double p);
double chi2_sf(double x, double df);
double f_sf(double x, double df1, double df2);
/// Two-sided tail P(|T| >= |t|) of Student's t.
double t_two_sided(double t, double df);
/// Limiting Kolmogorov survival P(K >= lambda). Series are truncated once a
/// term drops below 1e-12.
double kolmogorov_sf(double lambda);

// ---------------------------------------------------------------------------
// Results

enum class TestMethod {
  ShapiroWilk,
  Lilliefors,
  Ks,
  JarqueBera,
  Bartlett,
  Levene,
  KruskalWallis,
  StudentT,
  Chi2Gof,
  Chi2Independence,
  BartlettSphericity,
};

std::string_view to_string(TestMethod method);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::optional<double> df;
  std::optional<double> df2;  // second degrees of freedom for F-based tests
  TestMethod method = TestMethod::StudentT;
};

// ---------------------------------------------------------------------------
// Descriptive statistics

/// g1 and g2 use the biased (population) central moments:
/// g1 = m3 / m2^1.5, g2 = m4 / m2^2 - 3.
struct Moments {
  double mean = 0.0;
  double variance = 0.0;  // n - 1 denominator
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};

/// Needs n >= 2 (InsufficientData otherwise). Skewness is NaN below n = 3,
/// kurtosis below n = 4, and both for a constant sample.
Moments moments(std::span<const double> sample);
double mean(std::span<const double> sample);
/// Unbiased variance; InsufficientData for n < 2.
double variance(std::span<const double> sample);
double median(std::span<const double> sample);

struct QqPoint {
  double theoretical = 0.0;
  double observed = 0.0;
};

/// Blom plotting positions Phi^-1((i - 0.375) / (n + 0.25)) against the sorted sample.
std::vector<QqPoint> qq_points(std::span<const double> sample);

// ---------------------------------------------------------------------------
// Normality

/// Royston's AS R94 approximation; 3 <= n <= 5000.
TestResult shapiro_wilk(std::span<const double> sample);

/// Simulated null distribution of the Lilliefors statistic for one sample size.
class LillieforsNull {
 public:
  LillieforsNull(std::size_t n, std::size_t reps, std::uint64_t seed);

  std::size_t n() const { return n_; }
  std::size_t reps() const { return sorted_.size(); }
  /// (#{D_sim >= d} + 1) / (reps + 1)
  double p_value(double d) const;

 private:
  std::size_t n_;
  std::vector<double> sorted_;
};

inline constexpr std::size_t kLillieforsReps = 10'000;
inline constexpr std::uint64_t kLillieforsSeed = 0x6c696c6c6965ULL;

/// Kolmogorov-Smirnov statistic of the standardized sample (mean and n-1 sd
/// estimated from the data); n >= 4.
double lilliefors_statistic(std::span<const double> sample);
TestResult lilliefors(std::span<const double> sample, const LillieforsNull& null);
TestResult lilliefors(std::span<const double> sample, std::size_t reps = kLillieforsReps,
                      std::uint64_t seed = kLillieforsSeed);

/// One-sample KS against N(mu, sigma^2) with the asymptotic Kolmogorov p-value.
TestResult ks_normal(std::span<const double> sample, double mu, double sigma);

/// JB = n/6 (g1^2 + g2^2/4) with an asymptotic chi2(2) p-value; n >= 8.
TestResult jarque_bera(std::span<const double> sample);

// ---------------------------------------------------------------------------
// Group comparisons

using Groups = std::span<const std::vector<double>>;

TestResult bartlett(Groups groups);

enum class LeveneCenter { Mean, Median };
TestResult levene(Groups groups, LeveneCenter center = LeveneCenter::Mean);

/// H with midranks and the tie correction; chi2(k - 1) p-value.
TestResult kruskal_wallis(Groups groups);

/// Two-sample t; pooled variance by default, Welch otherwise.
TestResult student_t(std::span<const double> a, std::span<const double> b, bool pooled = true);

// ---------------------------------------------------------------------------
// Chi-square

struct Chi2GofResult {
  TestResult test;
  std::vector<double> weighted_residuals;  // (O - E) / E
};

Chi2GofResult chi2_gof(std::span<const double> observed, std::span<const double> expected);

struct Chi2IndependenceResult {
  TestResult test;
  std::vector<std::vector<double>> expected;
  std::vector<std::vector<double>> weighted_residuals;  // (O - E) / E
};

Chi2IndependenceResult chi2_independence(const std::vector<std::vector<double>>& table);

// ---------------------------------------------------------------------------
// Shares of significant results

/// Fraction of results with p < alpha (strict). Throws EmptyInput.
double share_below_alpha(std::span<const TestResult> results, double alpha);
/// Fraction of results with p > alpha (strict). Throws EmptyInput.
double share_above_alpha(std::span<const TestResult> results, double alpha);

// ---------------------------------------------------------------------------
// Cosine similarity

double cosine(std::span<const double> u, std::span<const double> v);
double cosine(std::span<const float> u, std::span<const float> v);

struct CosineAggregate {
  std::size_t n_tokens = 0;
  std::size_t n_pairs = 0;
  double mean_cos = 0.0;
  std::vector<double> values;  // unordered pairs (i < j) in input order
};

/// Cosines over all unordered pairs of distinct tokens. Throws TooFewTokens,
/// MissingEmbedding or ZeroNormVector.
CosineAggregate pairwise_cosine_aggregate(std::span<const TokenId> tokens,
                                          const EmbeddingTable& embeddings);

}  // namespace cliplab::stats
