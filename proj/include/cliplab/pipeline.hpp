#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cliplab/category_graph.hpp"
#include "cliplab/dimred.hpp"
#include "cliplab/model_store.hpp"
#include "cliplab/partition.hpp"
#include "cliplab/statlab.hpp"

namespace cliplab::pipeline {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Configuration

struct TsneParams {
  double perplexity = 30.0;
  int iters = 1000;
};

struct RunConfig {
  std::filesystem::path manifest;
  int layer = 0;  // the pair analysed is (layer, layer + 1)
  std::size_t k_precursors = 10;
  std::size_t core_k = kDefaultCoreTokens;
  std::size_t min_cluster = 6;
  double band_lo = 0.15;
  double band_hi = 0.85;
  double alpha = 0.05;
  double indicator_weight_pct = 1.0;
  double cos2_min = 0.6;
  double kmo_min = 0.5;
  TsneParams tsne;
  std::uint64_t master_seed = 0;
  std::vector<std::string> embeddings;  // empty: every table of the store
  std::filesystem::path output_dir;
  ConnectionOrdering ordering = ConnectionOrdering::Signed;
  double null_fraction = 0.05;
  std::size_t size_threshold = 6;
  std::size_t lilliefors_reps = stats::kLillieforsReps;
  stats::LeveneCenter levene_center = stats::LeveneCenter::Mean;
  bool kmo_pseudo_inverse = true;
  dimred::QuadrantOrigin quadrant_origin = dimred::QuadrantOrigin::Zero;
  std::size_t plot_pairs = 3;  // per-pair figures for the first N pairs
  std::size_t threads = 0;     // 0: hardware concurrency
};

/// Throws ConfigError naming the first offending field.
void validate(const RunConfig& config);

/// Strict: unknown keys and wrong types are ConfigErrors. Relative paths
/// resolve against base_dir.
RunConfig config_from_json(const Json& j, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);
Json config_to_json(const RunConfig& config);

// ---------------------------------------------------------------------------
// Run context

struct RunContext {
  RunConfig config;
  Store store;
  PartitionSweep sweep;
  std::vector<std::string> embeddings;  // resolved table names
};

/// Loads the manifest named by the config and enumerates the sweep.
RunContext prepare_run(const RunConfig& config);
RunContext prepare_run(const RunConfig& config, Store store);

/// Stable identifier "l:n>l:n" (precursor > target).
std::string pair_id(const TakenLeftPartition& p);
std::uint64_t pair_seed(std::uint64_t master, NeuronId target, NeuronId precursor);

// ---------------------------------------------------------------------------
// Per-pair building blocks

struct ClusterComparison {
  std::string pair;
  double mean_cos_taken = 0.0;
  double mean_cos_core = 0.0;
  double mean_cos_left = 0.0;
  double d_core = 0.0;  // mean_cos_taken - mean_cos_core
  double d_left = 0.0;  // mean_cos_taken - mean_cos_left
  double p_t_core = 1.0;
  double p_kw_core = 1.0;
  double p_t_left = 1.0;
  double p_kw_left = 1.0;
};

/// Left-side fields are NaN when the pair has fewer than two left-tokens.
ClusterComparison compare_clusters(const TakenLeftPartition& p, const EmbeddingTable& emb);

struct SelectivityCounts {
  std::size_t below = 0;        // |taken| < threshold
  std::size_t at_or_above = 0;
  std::size_t missing = 0;      // pairs whose precursor has no record
};

SelectivityCounts selectivity_counts(const PartitionSweep& sweep, std::size_t threshold);

/// Goodness of fit of [below, at_or_above] against [f, 1 - f] of the total.
stats::Chi2GofResult selectivity_test(double below, double at_or_above, double null_fraction);

struct PairPca {
  std::string pair;
  double kmo = 0.0;
  bool kmo_ok = false;
  std::size_t n_kaiser = 0;
  std::vector<double> variance_explained;  // of the two rotated factors
  dimred::CorrelationCircle circle;
  std::optional<dimred::ProjectionStats> projection;  // empty when no axis was found
  std::string axis_error;
  std::optional<dimred::PcaModel> model;  // rotated model, kept on request
};

/// KMO on the embedding columns, then weighted PCA of the design matrix,
/// varimax on two factors, correlation circle and projection statistics.
/// The PCA stages are skipped when KMO is at or below kmo_min.
PairPca pair_pca(const TakenLeftPartition& p, const EmbeddingTable& emb, const RunConfig& config,
                 bool keep_model = false);

struct PairTsne {
  std::string pair;
  std::vector<TokenId> rows;
  dimred::TsneEmbedding embedding;
  dimred::QuadrantSummary quadrants;
};

PairTsne pair_tsne(const TakenLeftPartition& p, const EmbeddingTable& emb, const RunConfig& config);

// ---------------------------------------------------------------------------
// Analyses

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Json>> rows;
};

struct Figure {
  std::string name;
  std::string svg;
};

struct PairFailure {
  std::string pair;
  std::string embedding;
  ErrorKind kind = ErrorKind::InvalidArgument;
  std::string message;
};

struct AnalysisResult {
  std::string id;  // "A".."E"
  std::string title;
  Json summary = Json::object();
  std::vector<Table> tables;
  std::vector<Figure> figures;
  std::vector<PairFailure> failures;
};

/// Normality of taken-cluster cosines and homoscedasticity of taken vs left.
AnalysisResult analysis_normality(const RunContext& ctx);
/// Taken vs core and taken vs left mean-cosine comparisons.
AnalysisResult analysis_reduction(const RunContext& ctx);
/// Share of taken-clusters below the size threshold over the whole sweep.
AnalysisResult analysis_selectivity(const RunContext& ctx);
/// PCA separation of taken and left groups on band pairs.
AnalysisResult analysis_pca(const RunContext& ctx);
/// t-SNE centroid quadrants on band pairs.
AnalysisResult analysis_tsne(const RunContext& ctx);

/// Dispatches "A".."E". Throws ConfigError for an unknown id.
AnalysisResult run_analysis(const RunContext& ctx, std::string_view id);

// ---------------------------------------------------------------------------
// Report

struct AnalysisOutcome {
  std::string id;
  std::optional<AnalysisResult> result;
  std::optional<ErrorKind> error;  // set when the analysis failed
  std::string message;
};

struct RunReport {
  RunConfig config;
  Json counts = Json::object();
  std::vector<AnalysisOutcome> analyses;
};

/// Runs each requested analysis; typed failures are recorded, not thrown.
RunReport run_all(const RunContext& ctx, const std::vector<std::string>& ids);

Json counts_ledger(const RunContext& ctx);
Json report_json(const RunReport& report);

/// Writes report.json, one CSV per table, one SVG per figure and
/// MANIFEST.sha256 into dir, replacing it. The bundle is assembled in a
/// sibling directory first, so a failure leaves no partial output.
/// Throws InvalidArgument when no analysis is present and IoError on I/O failure.
void write_report_bundle(const RunReport& report, const std::filesystem::path& dir);

std::string sha256_hex(std::string_view bytes);

struct ManifestCheck {
  std::size_t files = 0;
  std::vector<std::string> mismatched;  // missing or altered files
};

ManifestCheck verify_manifest(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Exit codes

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitAnalysis = 4;

/// kExitConfig for configuration and spec errors, kExitData for unreadable
/// or invalid inputs, kExitAnalysis for everything raised by an analysis.
int exit_code_for(ErrorKind kind);

// ---------------------------------------------------------------------------
// Synthetic stores

enum class PlantedStructure { Cone, Separable, Null };

struct SynthSpec {
  std::size_t d_model = 64;
  std::size_t n_neurons = 64;  // per layer; two layers are written
  std::size_t vocab = 2080;
  std::size_t embedding_dim = 64;
  PlantedStructure structure = PlantedStructure::Cone;
  std::uint64_t seed = 1;
  std::size_t contributors = 4;    // precursors whose topic each target absorbs
  double cone_half_angle = 0.5;    // radians
  std::size_t separable_dims = 16;
  double separation = 3.0;         // shift on the separable dims
};

SynthSpec synth_spec_from_json(const Json& j);
Json synth_spec_to_json(const SynthSpec& spec);

/// Deterministic in-memory store. Throws SpecTooSmall when vocab < 24 or
/// d_model < 4.
Store synth_store(const SynthSpec& spec);

/// synth_store written to dir; returns the manifest path.
std::filesystem::path synth_fixture(const SynthSpec& spec, const std::filesystem::path& dir);

}  // namespace cliplab::pipeline
