#include <algorithm>
#include <unordered_map>

#include "cliplab/dimred.hpp"

namespace cliplab::dimred {

std::string_view to_string(Quadrant q) {
  switch (q) {
    case Quadrant::Q1: return "Q1";
    case Quadrant::Q2: return "Q2";
    case Quadrant::Q3: return "Q3";
    case Quadrant::Q4: return "Q4";
  }
  return "?";
}

Quadrant quadrant_of(double x, double y) {
  if (x >= 0.0) return y >= 0.0 ? Quadrant::Q1 : Quadrant::Q4;
  return y >= 0.0 ? Quadrant::Q2 : Quadrant::Q3;
}

QuadrantSummary quadrant_summary(const TsneEmbedding& embedding, std::span<const TokenId> row_tokens,
                                 const TakenLeftPartition& partition, QuadrantOrigin origin) {
  const Matrix& y = embedding.coords;
  if (static_cast<std::size_t>(y.rows()) != row_tokens.size() || y.cols() != 2) {
    throw Error(ErrorKind::DimMismatch, "embedding rows do not match the token list");
  }
  if (partition.taken.empty() || partition.left.empty()) {
    throw Error(ErrorKind::EmptyGroup, "both taken and left groups need at least one token");
  }
  std::unordered_map<TokenId, Eigen::Index> row_of;
  for (std::size_t i = 0; i < row_tokens.size(); ++i) row_of.emplace(row_tokens[i], static_cast<Eigen::Index>(i));

  double ox = 0.0;
  double oy = 0.0;
  if (origin == QuadrantOrigin::Median) {
    std::vector<double> xs(y.col(0).begin(), y.col(0).end());
    std::vector<double> ys(y.col(1).begin(), y.col(1).end());
    ox = stats::median(xs);
    oy = stats::median(ys);
  }

  auto centroid = [&](const std::vector<TokenId>& group, double& cx, double& cy) {
    cx = 0.0;
    cy = 0.0;
    for (TokenId t : group) {
      const auto it = row_of.find(t);
      if (it == row_of.end()) {
        throw Error(ErrorKind::MissingEmbedding, "token " + std::to_string(t) + " has no embedded row");
      }
      cx += y(it->second, 0);
      cy += y(it->second, 1);
    }
    cx = cx / static_cast<double>(group.size()) - ox;
    cy = cy / static_cast<double>(group.size()) - oy;
  };

  QuadrantSummary s;
  centroid(partition.taken, s.taken_x, s.taken_y);
  centroid(partition.left, s.left_x, s.left_y);
  s.taken_quadrant = quadrant_of(s.taken_x, s.taken_y);
  s.left_quadrant = quadrant_of(s.left_x, s.left_y);
  s.same_quadrant = s.taken_quadrant == s.left_quadrant;
  return s;
}

QuadrantCounts quadrant_counts(std::span<const QuadrantSummary> summaries) {
  if (summaries.empty()) throw Error(ErrorKind::EmptyInput, "no quadrant summaries");
  QuadrantCounts counts(4, std::vector<double>(4, 0.0));
  for (const auto& s : summaries) {
    counts[static_cast<std::size_t>(s.taken_quadrant) - 1][static_cast<std::size_t>(s.left_quadrant) - 1] += 1.0;
  }
  return counts;
}

QuadrantCrosstab quadrant_crosstab(std::span<const QuadrantSummary> summaries) {
  QuadrantCrosstab out;
  out.counts = quadrant_counts(summaries);
  out.n = summaries.size();
  const auto different = std::ranges::count_if(summaries, [](const auto& s) { return !s.same_quadrant; });
  out.share_different = static_cast<double>(different) / static_cast<double>(out.n);
  out.chi2 = stats::chi2_independence(out.counts);
  return out;
}

}  // namespace cliplab::dimred
