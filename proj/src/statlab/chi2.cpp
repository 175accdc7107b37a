#include <cmath>

#include "cliplab/statlab.hpp"

namespace cliplab::stats {

Chi2GofResult chi2_gof(std::span<const double> observed, std::span<const double> expected) {
  if (observed.size() != expected.size()) {
    throw Error(ErrorKind::LengthMismatch, "observed and expected counts differ in length");
  }
  if (observed.size() < 2) throw Error(ErrorKind::InsufficientData, "goodness of fit needs at least two cells");

  Chi2GofResult out;
  out.weighted_residuals.reserve(observed.size());
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double o = observed[i];
    const double e = expected[i];
    if (!std::isfinite(o) || !std::isfinite(e)) throw Error(ErrorKind::NonFiniteValue, "non-finite count");
    if (!(e > 0.0)) throw Error(ErrorKind::NonPositiveExpected, "expected counts must be positive");
    stat += (o - e) * (o - e) / e;
    out.weighted_residuals.push_back((o - e) / e);
  }
  out.test.method = TestMethod::Chi2Gof;
  out.test.statistic = stat;
  out.test.df = static_cast<double>(observed.size()) - 1.0;
  out.test.p_value = chi2_sf(stat, *out.test.df);
  return out;
}

Chi2IndependenceResult chi2_independence(const std::vector<std::vector<double>>& table) {
  const std::size_t rows = table.size();
  if (rows < 2 || table.front().size() < 2) {
    throw Error(ErrorKind::InsufficientData, "independence test needs at least a 2x2 table");
  }
  const std::size_t cols = table.front().size();
  std::vector<double> row_sum(rows, 0.0);
  std::vector<double> col_sum(cols, 0.0);
  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (table[r].size() != cols) throw Error(ErrorKind::LengthMismatch, "ragged contingency table");
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = table[r][c];
      if (!std::isfinite(v) || v < 0.0) throw Error(ErrorKind::NonFiniteValue, "counts must be finite and >= 0");
      row_sum[r] += v;
      col_sum[c] += v;
      total += v;
    }
  }
  for (double s : row_sum) {
    if (!(s > 0.0)) throw Error(ErrorKind::DegenerateMargins, "contingency table has an empty row");
  }
  for (double s : col_sum) {
    if (!(s > 0.0)) throw Error(ErrorKind::DegenerateMargins, "contingency table has an empty column");
  }

  Chi2IndependenceResult out;
  out.expected.assign(rows, std::vector<double>(cols));
  out.weighted_residuals.assign(rows, std::vector<double>(cols));
  double stat = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double e = row_sum[r] * col_sum[c] / total;
      const double d = table[r][c] - e;
      out.expected[r][c] = e;
      out.weighted_residuals[r][c] = d / e;
      stat += d * d / e;
    }
  }
  out.test.method = TestMethod::Chi2Independence;
  out.test.statistic = stat;
  out.test.df = static_cast<double>((rows - 1) * (cols - 1));
  out.test.p_value = chi2_sf(stat, *out.test.df);
  return out;
}

}  // namespace cliplab::stats
