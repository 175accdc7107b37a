#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cliplab/model_store.hpp"
#include "cliplab/partition.hpp"
#include "cliplab/statlab.hpp"

namespace cliplab::dimred {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Symmetric eigensolver

struct SymmetricEigen {
  Vector values;   // descending
  Matrix vectors;  // column k pairs with values[k]; largest |component| made positive
  int sweeps = 0;
};

/// Cyclic Jacobi rotations. Off-diagonal mass is driven below
/// tol * ||A||_F or the solver stops after max_sweeps.
SymmetricEigen jacobi_eigen(const Matrix& a, double tol = 1e-14, int max_sweeps = 100);

// ---------------------------------------------------------------------------
// Design matrix

enum class ColumnKind { Embedding, TakenIndicator, LeftIndicator };

struct DesignMatrix {
  Matrix values;                    // rows = tokens, cols = variables
  std::vector<double> col_weights;  // applied after standardization
  std::vector<ColumnKind> col_kinds;
  std::vector<std::string> col_names;
  std::vector<TokenId> row_tokens;

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }
  std::vector<std::size_t> constant_columns() const;
  std::optional<std::size_t> column_of(ColumnKind kind) const;
};

/// Rows follow partition.core() (taken first). Embedding columns are named
/// "e0".."e{d-1}"; the two 0/1 indicators "taken" and "left" get weight
/// pct / 100 * d, or 1 when pct is 0.
DesignMatrix build_design_matrix(const TakenLeftPartition& partition, const EmbeddingTable& emb,
                                 double indicator_weight_pct);

/// Embedding columns only, in the given token order.
DesignMatrix embedding_matrix(std::span<const TokenId> tokens, const EmbeddingTable& emb);

/// Pearson correlation of the columns. Throws DegenerateMatrix on a constant
/// column or fewer than 3 rows.
Matrix correlation_matrix(const Matrix& x);

// ---------------------------------------------------------------------------
// PCA

struct Retention {
  enum class Rule { Kaiser, Variance, Fixed };
  Rule rule = Rule::Kaiser;
  double threshold = 0.6;  // cumulative share for Rule::Variance
  std::size_t k = 2;       // for Rule::Fixed

  static Retention kaiser() { return {}; }
  static Retention variance(double share) { return {Rule::Variance, share, 0}; }
  static Retention fixed(std::size_t k) { return {Rule::Fixed, 0.0, k}; }
};

struct PcaModel {
  Vector eigenvalues;                      // all components, descending
  Matrix loadings;                         // variables x components
  Matrix scores;                           // units x components
  Vector variable_variance;                // diagonal of the decomposed matrix
  std::vector<double> variance_explained;  // per component
  std::vector<double> communalities;       // cos^2 over the retained factors
  std::size_t n_retained = 0;
  std::vector<std::size_t> variables;      // surviving design-matrix columns
  std::vector<std::size_t> dropped;        // constant columns
  std::vector<std::string> names;          // of the surviving columns
  std::vector<ColumnKind> kinds;
  bool rotated = false;

  /// Loading scaled to a correlation with the factor.
  double correlation(std::size_t var, std::size_t factor) const;
};

std::size_t count_kaiser(const Vector& eigenvalues);
std::size_t count_variance(const Vector& eigenvalues, double share);

/// Decomposes the weighted correlation (standardize) or weighted covariance
/// matrix. Constant columns are dropped with a warning. When variables
/// outnumber units the n x n Gram matrix is decomposed instead.
/// Throws DegenerateMatrix when nothing of rank survives and
/// InvalidArgument when a fixed retention is not below n_rows.
PcaModel pca(const DesignMatrix& m, bool standardize, Retention retain);

// ---------------------------------------------------------------------------
// Varimax

struct VarimaxResult {
  Matrix loadings;
  Matrix rotation;  // loadings = input * rotation
  int sweeps = 0;
  std::vector<double> criterion;  // after each sweep, starting with the input
};

inline constexpr double kVarimaxTol = 1e-9;
inline constexpr int kVarimaxMaxSweeps = 500;

/// Kaiser-normalized varimax by pairwise planar rotations. A single column
/// is returned unchanged.
VarimaxResult varimax(const Matrix& loadings, double tol = kVarimaxTol, int max_sweeps = kVarimaxMaxSweeps);

/// Raw varimax criterion of Kaiser-normalized loadings.
double varimax_criterion(const Matrix& loadings);

/// Rotates the retained factors of a model. Communalities are unchanged;
/// variance_explained of the retained factors is recomputed from the new columns.
PcaModel rotate_retained(const PcaModel& model);

// ---------------------------------------------------------------------------
// Sampling adequacy

/// Throws SingularCorrelation when corr is not invertible, unless
/// pseudo_inverse is set.
double kmo(const Matrix& corr, bool pseudo_inverse = false);

/// KMO of the column correlations of x. When variables outnumber units the
/// pseudo-inverse is formed through the n x n Gram matrix; without
/// pseudo_inverse that case throws SingularCorrelation.
double kmo_data(const Matrix& x, bool pseudo_inverse = false);

/// -(n - 1 - (2p + 5) / 6) ln det R on p(p - 1) / 2 degrees of freedom.
stats::TestResult bartlett_sphericity(const Matrix& corr, std::size_t n);

// ---------------------------------------------------------------------------
// Correlation circle

struct CirclePoint {
  std::size_t variable = 0;  // index into PcaModel::variables
  std::string name;
  ColumnKind kind = ColumnKind::Embedding;
  double x = 0.0;
  double y = 0.0;
  double cos2 = 0.0;  // x^2 + y^2
};

struct CorrelationCircle {
  std::size_t f_x = 0;
  std::size_t f_y = 1;
  double cos2_min = 0.0;
  std::vector<CirclePoint> points;  // embedding variables with cos2 > cos2_min
  std::optional<CirclePoint> taken;
  std::optional<CirclePoint> left;
  std::size_t n_embedding = 0;
  double kept_fraction = 0.0;
};

/// Indicators are always reported; embedding variables are filtered on cos^2.
CorrelationCircle correlation_circle(const PcaModel& model, std::size_t f_x, std::size_t f_y, double cos2_min);

enum class Axis { X, Y };

inline constexpr double kAxisCos2Min = 0.5;

/// The circle axis carrying the larger |taken| coordinate. Throws
/// AxisNotFound when there is no taken indicator or its squared coordinate on
/// that axis is below min_cos2.
Axis indicator_axis(const CorrelationCircle& circle, double min_cos2 = kAxisCos2Min);

struct GroupProjection {
  std::size_t n_variables = 0;
  double pct_variables = 0.0;
  double mean_cos = 0.0;
  double mean_scalar_product = 0.0;
};

struct ProjectionStats {
  Axis axis = Axis::X;
  GroupProjection taken;
  GroupProjection left;
  std::vector<bool> assigned_taken;  // per circle point
};

/// A variable joins the group whose indicator pole shares the sign of its
/// coordinate on the axis. mean_cos averages |coordinate on the axis|;
/// mean_scalar_product averages |<(x, y), u>| with u the unit vector toward
/// the taken indicator.
ProjectionStats projection_stats(const CorrelationCircle& circle, Axis axis);

struct AlignedMeans {
  std::size_t n_cases = 0;
  double taken_x = 0.0, taken_y = 0.0;  // mean variable coordinates per group
  double left_x = 0.0, left_y = 0.0;
  double taken_indicator_x = 0.0, taken_indicator_y = 0.0;
  double left_indicator_x = 0.0, left_indicator_y = 0.0;
  std::size_t n_taken_vars = 0;
  std::size_t n_left_vars = 0;
};

/// Rotates each circle so its taken indicator lies on +x, then averages the
/// variable coordinates of each group across all cases.
AlignedMeans aligned_group_means(std::span<const CorrelationCircle> circles,
                                 std::span<const ProjectionStats> stats);

// ---------------------------------------------------------------------------
// t-SNE

struct TsneOptions {
  double perplexity = 30.0;
  int iters = 1000;
  double exaggeration = 12.0;
  int exaggeration_iters = 250;
  double momentum_start = 0.5;
  double momentum_final = 0.8;
  int momentum_switch = 250;
  double learning_rate = 0.0;  // 0 means max(n / 12, 50)
  double min_gain = 0.01;
  double init_sd = 1e-4;
};

struct TsneEmbedding {
  Matrix coords;  // n x 2, mean removed
  double perplexity = 0.0;
  double final_kl = 0.0;
  double kl_after_exaggeration = 0.0;
  std::uint64_t seed = 0;
};

/// Exact t-SNE on the rows of x. Throws PerplexityTooLarge when
/// 3 * perplexity >= n and InvalidArgument when iters < 250.
TsneEmbedding tsne(const Matrix& x, std::uint64_t seed, const TsneOptions& options = {});

/// Joint affinities P (symmetric, zero diagonal, summing to 1).
Matrix tsne_affinities(const Matrix& x, double perplexity);

double tsne_kl(const Matrix& p, const Matrix& y);

// ---------------------------------------------------------------------------
// Quadrants

enum class Quadrant { Q1 = 1, Q2, Q3, Q4 };

std::string_view to_string(Quadrant q);

/// Axis-touching points resolve toward the non-negative side.
Quadrant quadrant_of(double x, double y);

enum class QuadrantOrigin { Zero, Median };

struct QuadrantSummary {
  double taken_x = 0.0, taken_y = 0.0;
  double left_x = 0.0, left_y = 0.0;
  Quadrant taken_quadrant = Quadrant::Q1;
  Quadrant left_quadrant = Quadrant::Q1;
  bool same_quadrant = false;
};

/// Rows of `embedding` correspond to `row_tokens`. Centroids are reported
/// relative to the origin. Throws EmptyGroup or MissingEmbedding.
QuadrantSummary quadrant_summary(const TsneEmbedding& embedding, std::span<const TokenId> row_tokens,
                                 const TakenLeftPartition& partition,
                                 QuadrantOrigin origin = QuadrantOrigin::Zero);

using QuadrantCounts = std::vector<std::vector<double>>;  // [taken quadrant][left quadrant]

/// 4 x 4 taken-by-left quadrant counts. Throws EmptyInput.
QuadrantCounts quadrant_counts(std::span<const QuadrantSummary> summaries);

struct QuadrantCrosstab {
  QuadrantCounts counts;
  std::size_t n = 0;
  double share_different = 0.0;
  stats::Chi2IndependenceResult chi2;
};

/// Errors from the independence test (e.g. an empty quadrant margin)
/// propagate. Throws EmptyInput.
QuadrantCrosstab quadrant_crosstab(std::span<const QuadrantSummary> summaries);

}  // namespace cliplab::dimred
