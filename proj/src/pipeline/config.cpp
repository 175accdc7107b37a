#include <cmath>
#include <fstream>
#include <set>

#include "cliplab/pipeline.hpp"

namespace cliplab::pipeline {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& why) {
  throw Error(ErrorKind::ConfigError, field + ": " + why);
}

template <class T>
T get(const Json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    bad(key, e.what());
  }
}

std::size_t get_count(const Json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) bad(key, "expected a non-negative integer");
  return v.get<std::size_t>();
}

fs::path resolve(const fs::path& p, const fs::path& base) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

void check_range(const char* field, double v, double lo, double hi, bool lo_open, bool hi_open) {
  const bool ok = std::isfinite(v) && (lo_open ? v > lo : v >= lo) && (hi_open ? v < hi : v <= hi);
  if (!ok) bad(field, "value " + std::to_string(v) + " is out of range");
}

}  // namespace

void validate(const RunConfig& c) {
  if (c.layer < 0) bad("layer_pair", "layers must be non-negative");
  if (c.k_precursors == 0) bad("k_precursors", "must be at least 1");
  if (c.core_k == 0) bad("core_k", "must be at least 1");
  if (c.min_cluster == 0) bad("min_cluster", "must be at least 1");
  if (!(c.band_lo > 0.0 && c.band_lo < c.band_hi && c.band_hi < 1.0)) bad("band", "need 0 < lo < hi < 1");
  check_range("alpha", c.alpha, 0.0, 1.0, true, true);
  if (!(c.indicator_weight_pct >= 0.0) || !std::isfinite(c.indicator_weight_pct)) {
    bad("indicator_weight_pct", "must be a finite non-negative percentage");
  }
  check_range("cos2_min", c.cos2_min, 0.0, 1.0, false, true);
  check_range("kmo_min", c.kmo_min, 0.0, 1.0, false, true);
  if (!(c.tsne.perplexity > 0.0) || !std::isfinite(c.tsne.perplexity)) bad("tsne.perplexity", "must be positive");
  if (c.tsne.iters < 250) bad("tsne.iters", "must be at least 250");
  check_range("null_fraction", c.null_fraction, 0.0, 1.0, true, true);
  if (c.size_threshold == 0) bad("size_threshold", "must be at least 1");
  if (c.lilliefors_reps == 0) bad("lilliefors_reps", "must be at least 1");
}

RunConfig config_from_json(const Json& j, const fs::path& base_dir) {
  if (!j.is_object()) bad("config", "expected a JSON object");
  static const std::set<std::string> known{
      "manifest",      "layer_pair",   "k_precursors",  "core_k",          "min_cluster",
      "band",          "alpha",        "indicator_weight_pct", "cos2_min", "kmo_min",
      "tsne",          "master_seed",  "embeddings",    "output_dir",      "ordering",
      "null_fraction", "size_threshold", "lilliefors_reps", "levene_center", "kmo_pseudo_inverse",
      "quadrant_origin", "plot_pairs", "threads"};
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) bad(key, "unknown field");
  }

  RunConfig c;
  if (!j.contains("manifest")) bad("manifest", "required");
  c.manifest = resolve(get<std::string>(j, "manifest"), base_dir);
  if (j.contains("layer_pair")) {
    const auto lp = get<std::vector<int>>(j, "layer_pair");
    if (lp.size() != 2 || lp[1] != lp[0] + 1) bad("layer_pair", "expected [l, l + 1]");
    c.layer = lp[0];
  }
  if (j.contains("k_precursors")) c.k_precursors = get_count(j, "k_precursors");
  if (j.contains("core_k")) c.core_k = get_count(j, "core_k");
  if (j.contains("min_cluster")) c.min_cluster = get_count(j, "min_cluster");
  if (j.contains("band")) {
    const auto band = get<std::vector<double>>(j, "band");
    if (band.size() != 2) bad("band", "expected [lo, hi]");
    c.band_lo = band[0];
    c.band_hi = band[1];
  }
  if (j.contains("alpha")) c.alpha = get<double>(j, "alpha");
  if (j.contains("indicator_weight_pct")) c.indicator_weight_pct = get<double>(j, "indicator_weight_pct");
  if (j.contains("cos2_min")) c.cos2_min = get<double>(j, "cos2_min");
  if (j.contains("kmo_min")) c.kmo_min = get<double>(j, "kmo_min");
  if (j.contains("tsne")) {
    const auto& t = j.at("tsne");
    if (!t.is_object()) bad("tsne", "expected an object");
    for (const auto& [key, _] : t.items()) {
      if (key != "perplexity" && key != "iters") bad("tsne." + key, "unknown field");
    }
    if (t.contains("perplexity")) c.tsne.perplexity = get<double>(t, "perplexity");
    if (t.contains("iters")) c.tsne.iters = get<int>(t, "iters");
  }
  if (j.contains("master_seed")) {
    if (!j.at("master_seed").is_number_unsigned()) bad("master_seed", "expected a non-negative integer");
    c.master_seed = j.at("master_seed").get<std::uint64_t>();
  }
  if (j.contains("embeddings")) c.embeddings = get<std::vector<std::string>>(j, "embeddings");
  if (j.contains("output_dir")) c.output_dir = resolve(get<std::string>(j, "output_dir"), base_dir);
  if (j.contains("ordering")) {
    const auto o = get<std::string>(j, "ordering");
    if (o == "signed") {
      c.ordering = ConnectionOrdering::Signed;
    } else if (o == "absolute") {
      c.ordering = ConnectionOrdering::Absolute;
    } else {
      bad("ordering", "expected \"signed\" or \"absolute\"");
    }
  }
  if (j.contains("null_fraction")) c.null_fraction = get<double>(j, "null_fraction");
  if (j.contains("size_threshold")) c.size_threshold = get_count(j, "size_threshold");
  if (j.contains("lilliefors_reps")) c.lilliefors_reps = get_count(j, "lilliefors_reps");
  if (j.contains("levene_center")) {
    const auto v = get<std::string>(j, "levene_center");
    if (v == "mean") {
      c.levene_center = stats::LeveneCenter::Mean;
    } else if (v == "median") {
      c.levene_center = stats::LeveneCenter::Median;
    } else {
      bad("levene_center", "expected \"mean\" or \"median\"");
    }
  }
  if (j.contains("kmo_pseudo_inverse")) c.kmo_pseudo_inverse = get<bool>(j, "kmo_pseudo_inverse");
  if (j.contains("quadrant_origin")) {
    const auto v = get<std::string>(j, "quadrant_origin");
    if (v == "zero") {
      c.quadrant_origin = dimred::QuadrantOrigin::Zero;
    } else if (v == "median") {
      c.quadrant_origin = dimred::QuadrantOrigin::Median;
    } else {
      bad("quadrant_origin", "expected \"zero\" or \"median\"");
    }
  }
  if (j.contains("plot_pairs")) c.plot_pairs = get_count(j, "plot_pairs");
  if (j.contains("threads")) c.threads = get_count(j, "threads");
  validate(c);
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot open config " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigError, path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

Json config_to_json(const RunConfig& c) {
  Json j;
  j["manifest"] = c.manifest.generic_string();
  j["layer_pair"] = {c.layer, c.layer + 1};
  j["k_precursors"] = c.k_precursors;
  j["core_k"] = c.core_k;
  j["min_cluster"] = c.min_cluster;
  j["band"] = {c.band_lo, c.band_hi};
  j["alpha"] = c.alpha;
  j["indicator_weight_pct"] = c.indicator_weight_pct;
  j["cos2_min"] = c.cos2_min;
  j["kmo_min"] = c.kmo_min;
  j["tsne"] = {{"perplexity", c.tsne.perplexity}, {"iters", c.tsne.iters}};
  j["master_seed"] = c.master_seed;
  j["embeddings"] = c.embeddings;
  j["output_dir"] = c.output_dir.generic_string();
  j["ordering"] = c.ordering == ConnectionOrdering::Signed ? "signed" : "absolute";
  j["null_fraction"] = c.null_fraction;
  j["size_threshold"] = c.size_threshold;
  j["lilliefors_reps"] = c.lilliefors_reps;
  j["levene_center"] = c.levene_center == stats::LeveneCenter::Mean ? "mean" : "median";
  j["kmo_pseudo_inverse"] = c.kmo_pseudo_inverse;
  j["quadrant_origin"] = c.quadrant_origin == dimred::QuadrantOrigin::Zero ? "zero" : "median";
  j["plot_pairs"] = c.plot_pairs;
  j["threads"] = c.threads;
  return j;
}

}  // namespace cliplab::pipeline
