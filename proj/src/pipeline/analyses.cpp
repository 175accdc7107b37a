#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <optional>

#include <spdlog/spdlog.h>

#include "cliplab/pipeline.hpp"
#include "parallel.hpp"
#include "svg.hpp"

namespace cliplab::pipeline {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Json jnum(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::string file_token(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') {
      out += c;
    } else if (c == ':') {
      out += '-';
    } else {
      out += '_';
    }
  }
  return out;
}

std::vector<const PartitionSweepItem*> select_pairs(const RunContext& ctx, bool band) {
  std::vector<const PartitionSweepItem*> out;
  for (const auto& item : ctx.sweep.items) {
    if (item.precursor_missing) continue;
    if (band ? item.flags.band_15_85 : item.flags.min6_both) out.push_back(&item);
  }
  return out;
}

template <class F>
bool guarded(F&& f, PairFailure& failure) {
  try {
    f();
    return true;
  } catch (const Error& e) {
    failure.kind = e.kind();
    failure.message = e.what();
    return false;
  }
}

void log_failures(const AnalysisResult& r) {
  for (const auto& f : r.failures) {
    spdlog::warn("analysis {}: pair {} on {} excluded ({}: {})", r.id, f.pair, f.embedding, to_string(f.kind),
                 f.message);
  }
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  std::size_t n = 0;
  for (double x : v) {
    if (std::isfinite(x)) s += x, ++n;
  }
  return n == 0 ? kNaN : s / static_cast<double>(n);
}

double median_of(std::vector<double> v) {
  std::erase_if(v, [](double x) { return !std::isfinite(x); });
  return v.empty() ? kNaN : stats::median(v);
}

double pct_above(const std::vector<stats::TestResult>& r, double alpha) {
  return r.empty() ? kNaN : 100.0 * stats::share_above_alpha(r, alpha);
}

double pct_below(const std::vector<stats::TestResult>& r, double alpha) {
  return r.empty() ? kNaN : 100.0 * stats::share_below_alpha(r, alpha);
}

std::string_view axis_name(dimred::Axis a) { return a == dimred::Axis::X ? "x" : "y"; }

std::string_view kind_name(dimred::ColumnKind k) {
  switch (k) {
    case dimred::ColumnKind::TakenIndicator: return "taken";
    case dimred::ColumnKind::LeftIndicator: return "left";
    default: return "embedding";
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Per-pair building blocks

ClusterComparison compare_clusters(const TakenLeftPartition& p, const EmbeddingTable& emb) {
  ClusterComparison c;
  c.pair = pair_id(p);
  const auto core_tokens = p.core();
  const auto taken = stats::pairwise_cosine_aggregate(p.taken, emb);
  const auto core = stats::pairwise_cosine_aggregate(core_tokens, emb);
  c.mean_cos_taken = taken.mean_cos;
  c.mean_cos_core = core.mean_cos;
  c.d_core = taken.mean_cos - core.mean_cos;
  c.p_t_core = stats::student_t(taken.values, core.values).p_value;
  const std::vector<std::vector<double>> vs_core{taken.values, core.values};
  c.p_kw_core = stats::kruskal_wallis(vs_core).p_value;

  if (p.left.size() < 2) {
    c.mean_cos_left = c.d_left = c.p_t_left = c.p_kw_left = kNaN;
    return c;
  }
  const auto left = stats::pairwise_cosine_aggregate(p.left, emb);
  c.mean_cos_left = left.mean_cos;
  c.d_left = taken.mean_cos - left.mean_cos;
  c.p_t_left = stats::student_t(taken.values, left.values).p_value;
  const std::vector<std::vector<double>> vs_left{taken.values, left.values};
  c.p_kw_left = stats::kruskal_wallis(vs_left).p_value;
  return c;
}

SelectivityCounts selectivity_counts(const PartitionSweep& sweep, std::size_t threshold) {
  SelectivityCounts c;
  for (const auto& item : sweep.items) {
    if (item.precursor_missing) {
      ++c.missing;
    } else if (item.partition.taken.size() < threshold) {
      ++c.below;
    } else {
      ++c.at_or_above;
    }
  }
  return c;
}

stats::Chi2GofResult selectivity_test(double below, double at_or_above, double null_fraction) {
  const double n = below + at_or_above;
  const std::vector<double> observed{below, at_or_above};
  const std::vector<double> expected{null_fraction * n, (1.0 - null_fraction) * n};
  return stats::chi2_gof(observed, expected);
}

PairPca pair_pca(const TakenLeftPartition& p, const EmbeddingTable& emb, const RunConfig& config, bool keep_model) {
  PairPca r;
  r.pair = pair_id(p);
  const auto core = p.core();
  const auto x = dimred::embedding_matrix(core, emb);
  r.kmo = dimred::kmo_data(x.values, config.kmo_pseudo_inverse);
  r.kmo_ok = r.kmo > config.kmo_min;
  if (!r.kmo_ok) return r;

  const auto design = dimred::build_design_matrix(p, emb, config.indicator_weight_pct);
  const auto model = dimred::pca(design, true, dimred::Retention::fixed(2));
  r.n_kaiser = dimred::count_kaiser(model.eigenvalues);
  auto rotated = dimred::rotate_retained(model);
  r.variance_explained = {rotated.variance_explained.at(0), rotated.variance_explained.at(1)};
  r.circle = dimred::correlation_circle(rotated, 0, 1, config.cos2_min);
  try {
    const auto axis = dimred::indicator_axis(r.circle);
    r.projection = dimred::projection_stats(r.circle, axis);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::AxisNotFound) throw;
    r.axis_error = e.what();
  }
  if (keep_model) r.model = std::move(rotated);
  return r;
}

PairTsne pair_tsne(const TakenLeftPartition& p, const EmbeddingTable& emb, const RunConfig& config) {
  PairTsne r;
  r.pair = pair_id(p);
  r.rows = p.core();
  const auto x = dimred::embedding_matrix(r.rows, emb);
  dimred::TsneOptions options;
  options.perplexity = config.tsne.perplexity;
  options.iters = config.tsne.iters;
  r.embedding = dimred::tsne(x.values, pair_seed(config.master_seed, p.target, p.precursor), options);
  r.quadrants = dimred::quadrant_summary(r.embedding, r.rows, p, config.quadrant_origin);
  return r;
}

// ---------------------------------------------------------------------------
// A: normality and homoscedasticity

AnalysisResult analysis_normality(const RunContext& ctx) {
  const auto& cfg = ctx.config;
  const auto pairs = select_pairs(ctx, false);
  if (pairs.empty()) throw Error(ErrorKind::NoEligibleClusters, "no pair has both clusters of the minimum size");

  // One simulated Lilliefors null per distinct sample size.
  std::vector<std::size_t> sizes;
  for (const auto* item : pairs) {
    const std::size_t t = item->partition.taken.size();
    if (t * (t - 1) / 2 >= 4) sizes.push_back(t * (t - 1) / 2);
  }
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  std::vector<std::optional<stats::LillieforsNull>> nulls(sizes.size());
  parallel_for(sizes.size(), cfg.threads, [&](std::size_t i) {
    nulls[i].emplace(sizes[i], cfg.lilliefors_reps, stats::kLillieforsSeed);
  });
  auto null_for = [&](std::size_t n) -> const stats::LillieforsNull& {
    const auto it = std::lower_bound(sizes.begin(), sizes.end(), n);
    if (it == sizes.end() || *it != n) throw Error(ErrorKind::InsufficientData, "too few cosines for Lilliefors");
    return *nulls[static_cast<std::size_t>(it - sizes.begin())];
  };

  struct Row {
    bool ok = false;
    std::size_t n_cos = 0;
    double mean_cos = 0.0;
    stats::TestResult sw, lf, ks, jb, levene, bartlett;
    PairFailure failure;
  };

  AnalysisResult r;
  r.id = "A";
  r.title = "Normality and homoscedasticity of cluster cosine similarities";
  Table normality{"normality",
                  {"embedding", "n_pairs", "pct_normal_shapiro_wilk", "pct_normal_lilliefors", "pct_normal_ks",
                   "pct_normal_jarque_bera", "mean_cos_taken_mean", "mean_cos_taken_median"},
                  {}};
  Table homo{"homoscedasticity", {"embedding", "n_pairs", "pct_equal_levene", "pct_equal_bartlett"}, {}};
  Table per_pair{"normality_pairs",
                 {"embedding", "pair", "n_taken", "n_left", "n_cosines", "mean_cos_taken", "p_shapiro_wilk",
                  "p_lilliefors", "p_ks", "p_jarque_bera", "p_levene", "p_bartlett"},
                 {}};
  std::size_t usable = 0;

  for (const auto& name : ctx.embeddings) {
    const auto& emb = ctx.store.embedding(name);
    std::vector<Row> rows(pairs.size());
    parallel_for(pairs.size(), cfg.threads, [&](std::size_t i) {
      const auto& p = pairs[i]->partition;
      Row& row = rows[i];
      row.failure = {pair_id(p), name, ErrorKind::InvalidArgument, ""};
      row.ok = guarded(
          [&] {
            const auto taken = stats::pairwise_cosine_aggregate(p.taken, emb);
            const auto left = stats::pairwise_cosine_aggregate(p.left, emb);
            const auto& x = taken.values;
            row.n_cos = x.size();
            row.mean_cos = taken.mean_cos;
            row.sw = stats::shapiro_wilk(x);
            row.lf = stats::lilliefors(x, null_for(x.size()));
            const auto m = stats::moments(x);
            row.ks = stats::ks_normal(x, m.mean, std::sqrt(m.variance));
            row.jb = stats::jarque_bera(x);
            const std::vector<std::vector<double>> groups{taken.values, left.values};
            row.levene = stats::levene(groups, cfg.levene_center);
            row.bartlett = stats::bartlett(groups);
          },
          row.failure);
    });

    std::vector<stats::TestResult> sw, lf, ks, jb, lev, bart;
    std::vector<double> means;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Row& row = rows[i];
      if (!row.ok) {
        r.failures.push_back(row.failure);
        continue;
      }
      sw.push_back(row.sw), lf.push_back(row.lf), ks.push_back(row.ks), jb.push_back(row.jb);
      lev.push_back(row.levene), bart.push_back(row.bartlett);
      means.push_back(row.mean_cos);
      const auto& p = pairs[i]->partition;
      per_pair.rows.push_back({name, pair_id(p), p.taken.size(), p.left.size(), row.n_cos, jnum(row.mean_cos),
                               jnum(row.sw.p_value), jnum(row.lf.p_value), jnum(row.ks.p_value),
                               jnum(row.jb.p_value), jnum(row.levene.p_value), jnum(row.bartlett.p_value)});
    }
    usable += means.size();
    normality.rows.push_back({name, means.size(), jnum(pct_above(sw, cfg.alpha)), jnum(pct_above(lf, cfg.alpha)),
                              jnum(pct_above(ks, cfg.alpha)), jnum(pct_above(jb, cfg.alpha)), jnum(mean_of(means)),
                              jnum(median_of(means))});
    homo.rows.push_back({name, means.size(), jnum(pct_above(lev, cfg.alpha)), jnum(pct_above(bart, cfg.alpha))});
    if (!means.empty()) {
      r.figures.push_back({"normality_" + file_token(name) + "_mean_cos_taken",
                           svg::histogram("Mean taken-cluster cosine (" + name + ")", "mean cosine", means, 20,
                                          svg::kTaken)});
    }
  }
  if (usable == 0) throw Error(ErrorKind::NoEligibleClusters, "every eligible pair was excluded");

  r.summary = {{"n_eligible_pairs", pairs.size()},
               {"n_excluded", r.failures.size()},
               {"alpha", cfg.alpha},
               {"share_reported", "p > alpha"},
               {"lilliefors_reps", cfg.lilliefors_reps},
               {"lilliefors_seed", stats::kLillieforsSeed}};
  r.tables = {std::move(normality), std::move(homo), std::move(per_pair)};
  log_failures(r);
  return r;
}

// ---------------------------------------------------------------------------
// B: categorical reduction

AnalysisResult analysis_reduction(const RunContext& ctx) {
  const auto& cfg = ctx.config;
  const auto pairs = select_pairs(ctx, false);
  if (pairs.empty()) throw Error(ErrorKind::NoEligibleClusters, "no pair has both clusters of the minimum size");

  AnalysisResult r;
  r.id = "B";
  r.title = "Mean cosine of taken-clusters against core and left clusters";
  Table agg{"reduction",
            {"embedding", "reference", "n_pairs", "mean_d", "pct_d_positive", "chi2_d_positive", "p_chi2_d_positive",
             "pct_p_t_below_alpha", "pct_p_kw_below_alpha", "mean_cos_taken", "mean_cos_reference"},
            {}};
  Table per_pair{"reduction_pairs",
                 {"embedding", "pair", "mean_cos_taken", "mean_cos_core", "mean_cos_left", "d_core", "d_left",
                  "p_t_core", "p_kw_core", "p_t_left", "p_kw_left"},
                 {}};
  std::size_t usable = 0;

  for (const auto& name : ctx.embeddings) {
    const auto& emb = ctx.store.embedding(name);
    std::vector<std::optional<ClusterComparison>> rows(pairs.size());
    std::vector<PairFailure> fails(pairs.size());
    parallel_for(pairs.size(), cfg.threads, [&](std::size_t i) {
      const auto& p = pairs[i]->partition;
      fails[i] = {pair_id(p), name, ErrorKind::InvalidArgument, ""};
      guarded([&] { rows[i] = compare_clusters(p, emb); }, fails[i]);
    });

    std::vector<ClusterComparison> ok;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!rows[i]) {
        r.failures.push_back(fails[i]);
        continue;
      }
      const auto& c = *rows[i];
      ok.push_back(c);
      per_pair.rows.push_back({name, c.pair, jnum(c.mean_cos_taken), jnum(c.mean_cos_core), jnum(c.mean_cos_left),
                               jnum(c.d_core), jnum(c.d_left), jnum(c.p_t_core), jnum(c.p_kw_core),
                               jnum(c.p_t_left), jnum(c.p_kw_left)});
    }
    usable += ok.size();

    std::vector<double> taken_means, core_means, left_means, d_core, d_left;
    for (const auto& c : ok) {
      taken_means.push_back(c.mean_cos_taken);
      core_means.push_back(c.mean_cos_core);
      left_means.push_back(c.mean_cos_left);
      d_core.push_back(c.d_core);
      d_left.push_back(c.d_left);
    }

    for (const bool vs_core : {true, false}) {
      std::vector<double> d, taken, ref;
      std::vector<stats::TestResult> t_tests, kw_tests;
      for (const auto& c : ok) {
        const double dv = vs_core ? c.d_core : c.d_left;
        if (!std::isfinite(dv)) continue;
        d.push_back(dv);
        taken.push_back(c.mean_cos_taken);
        ref.push_back(vs_core ? c.mean_cos_core : c.mean_cos_left);
        stats::TestResult t, kw;
        t.p_value = vs_core ? c.p_t_core : c.p_t_left;
        kw.p_value = vs_core ? c.p_kw_core : c.p_kw_left;
        t_tests.push_back(t);
        kw_tests.push_back(kw);
      }
      Json chi2 = nullptr, p_chi2 = nullptr, pct_pos = nullptr;
      if (!d.empty()) {
        const double pos = static_cast<double>(std::count_if(d.begin(), d.end(), [](double x) { return x > 0.0; }));
        const double n = static_cast<double>(d.size());
        const auto gof = selectivity_test(pos, n - pos, 0.5);
        chi2 = jnum(gof.test.statistic);
        p_chi2 = jnum(gof.test.p_value);
        pct_pos = jnum(100.0 * pos / n);
      }
      agg.rows.push_back({name, vs_core ? "core" : "left", d.size(), jnum(mean_of(d)), pct_pos, chi2, p_chi2,
                          jnum(pct_below(t_tests, cfg.alpha)), jnum(pct_below(kw_tests, cfg.alpha)),
                          jnum(mean_of(taken)), jnum(mean_of(ref))});
    }

    if (!ok.empty()) {
      const std::string token = file_token(name);
      r.figures.push_back({"reduction_" + token + "_means",
                           svg::bars("Mean pairwise cosine (" + name + ")", "mean cosine",
                                     {{"taken", mean_of(taken_means), svg::kTaken},
                                      {"core", mean_of(core_means), svg::kNeutral},
                                      {"left", mean_of(left_means), svg::kLeft}})});
      r.figures.push_back({"reduction_" + token + "_d_core",
                           svg::histogram("d against core (" + name + ")", "d", d_core, 20, svg::kTaken)});
      r.figures.push_back({"reduction_" + token + "_d_left",
                           svg::histogram("d against left (" + name + ")", "d", d_left, 20, svg::kLeft)});
    }
  }
  if (usable == 0) throw Error(ErrorKind::NoEligibleClusters, "every eligible pair was excluded");

  r.summary = {{"n_eligible_pairs", pairs.size()},
               {"n_excluded", r.failures.size()},
               {"alpha", cfg.alpha},
               {"d_positive_null", "50/50 goodness of fit on the counts of d > 0 and d <= 0"},
               {"t_test", "pooled two-sample t on pairwise cosines"}};
  r.tables = {std::move(agg), std::move(per_pair)};
  log_failures(r);
  return r;
}

// ---------------------------------------------------------------------------
// C: selectivity

AnalysisResult analysis_selectivity(const RunContext& ctx) {
  const auto& cfg = ctx.config;
  const auto counts = selectivity_counts(ctx.sweep, cfg.size_threshold);
  const auto gof = selectivity_test(static_cast<double>(counts.below), static_cast<double>(counts.at_or_above),
                                    cfg.null_fraction);
  const double n = static_cast<double>(counts.below + counts.at_or_above);

  AnalysisResult r;
  r.id = "C";
  r.title = "Taken-clusters below the size threshold";
  Table t{"selectivity", {"category", "observed", "expected", "weighted_residual"}, {}};
  t.rows.push_back({"below_threshold", counts.below, jnum(cfg.null_fraction * n), jnum(gof.weighted_residuals[0])});
  t.rows.push_back({"at_or_above_threshold", counts.at_or_above, jnum((1.0 - cfg.null_fraction) * n),
                    jnum(gof.weighted_residuals[1])});
  r.tables.push_back(std::move(t));
  r.summary = {{"size_threshold", cfg.size_threshold},
               {"null_fraction", cfg.null_fraction},
               {"n_pairs", counts.below + counts.at_or_above},
               {"n_missing_precursor", counts.missing},
               {"chi2", jnum(gof.test.statistic)},
               {"df", jnum(gof.test.df.value_or(kNaN))},
               {"p_value", jnum(gof.test.p_value)}};
  r.figures.push_back({"selectivity_counts",
                       svg::bars("Taken-cluster sizes", "pairs",
                                 {{"observed below", static_cast<double>(counts.below), svg::kTaken},
                                  {"expected below", cfg.null_fraction * n, svg::kNeutral},
                                  {"observed above", static_cast<double>(counts.at_or_above), svg::kLeft},
                                  {"expected above", (1.0 - cfg.null_fraction) * n, svg::kNeutral}})});
  return r;
}

// ---------------------------------------------------------------------------
// D: PCA projection

AnalysisResult analysis_pca(const RunContext& ctx) {
  const auto& cfg = ctx.config;
  const auto pairs = select_pairs(ctx, true);
  if (pairs.empty()) throw Error(ErrorKind::NoEligibleClusters, "no pair falls in the taken-fraction band");

  AnalysisResult r;
  r.id = "D";
  r.title = "PCA separation of taken and left groups";
  Table adequacy{"pca_adequacy",
                 {"embedding", "n_band_pairs", "n_failed", "mean_kmo", "n_kmo_ok", "mean_kmo_retained"},
                 {}};
  Table factors{"pca_factors",
                {"embedding", "n_pairs", "mean_n_kaiser", "mean_variance_f1", "mean_variance_f2", "mean_kept_fraction",
                 "n_axis_found"},
                {}};
  Table projection{"pca_projection",
                   {"embedding", "n_pairs", "taken_pct_variables", "left_pct_variables", "taken_mean_cos",
                    "left_mean_cos", "taken_mean_scalar_product", "left_mean_scalar_product"},
                   {}};
  Table aligned{"pca_aligned_means",
                {"embedding", "n_cases", "taken_x", "taken_y", "left_x", "left_y", "taken_indicator_x",
                 "taken_indicator_y", "left_indicator_x", "left_indicator_y"},
                {}};
  Table per_pair{"pca_pairs",
                 {"embedding", "pair", "kmo", "kmo_ok", "n_kaiser", "variance_f1", "variance_f2", "kept_fraction",
                  "axis", "taken_pct_variables", "left_pct_variables", "taken_mean_cos", "left_mean_cos"},
                 {}};
  std::vector<Table> pair_tables;
  std::size_t n_kmo_total = 0, n_kmo_ok_total = 0, n_axis_total = 0;

  for (const auto& name : ctx.embeddings) {
    const auto& emb = ctx.store.embedding(name);
    const std::string token = file_token(name);
    std::vector<std::optional<PairPca>> rows(pairs.size());
    std::vector<PairFailure> fails(pairs.size());
    parallel_for(pairs.size(), cfg.threads, [&](std::size_t i) {
      const auto& p = pairs[i]->partition;
      fails[i] = {pair_id(p), name, ErrorKind::InvalidArgument, ""};
      guarded([&] { rows[i] = pair_pca(p, emb, cfg, i < cfg.plot_pairs); }, fails[i]);
    });

    std::vector<double> kmo_all, kmo_ok, kaiser, var1, var2, kept;
    std::vector<dimred::CorrelationCircle> circles;
    std::vector<dimred::ProjectionStats> projections;
    std::size_t n_failed = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!rows[i]) {
        r.failures.push_back(fails[i]);
        ++n_failed;
        continue;
      }
      const auto& pp = *rows[i];
      kmo_all.push_back(pp.kmo);
      std::vector<Json> row{name, pp.pair, jnum(pp.kmo), pp.kmo_ok};
      if (!pp.kmo_ok) {
        row.insert(row.end(), 9, nullptr);
        per_pair.rows.push_back(std::move(row));
        continue;
      }
      kmo_ok.push_back(pp.kmo);
      kaiser.push_back(static_cast<double>(pp.n_kaiser));
      var1.push_back(pp.variance_explained[0]);
      var2.push_back(pp.variance_explained[1]);
      kept.push_back(pp.circle.kept_fraction);
      row.insert(row.end(), {pp.n_kaiser, jnum(pp.variance_explained[0]), jnum(pp.variance_explained[1]),
                             jnum(pp.circle.kept_fraction)});
      if (pp.projection) {
        const auto& s = *pp.projection;
        circles.push_back(pp.circle);
        projections.push_back(s);
        row.insert(row.end(), {std::string(axis_name(s.axis)), jnum(s.taken.pct_variables),
                               jnum(s.left.pct_variables), jnum(s.taken.mean_cos), jnum(s.left.mean_cos)});
      } else {
        row.insert(row.end(), 5, nullptr);
      }
      per_pair.rows.push_back(std::move(row));

      if (pp.model && pp.projection) {
        const std::string fid = token + "_" + file_token(pp.pair);
        const auto& s = *pp.projection;
        Table circle{"pca_circle_" + fid, {"variable", "kind", "x", "y", "cos2", "group"}, {}};
        svg::Scatter plot{"Correlation circle " + pp.pair + " (" + name + ")", "F1", "F2", true, {}, {}, {}};
        for (std::size_t k = 0; k < pp.circle.points.size(); ++k) {
          const auto& pt = pp.circle.points[k];
          const bool is_taken = s.assigned_taken[k];
          circle.rows.push_back({pt.name, std::string(kind_name(pt.kind)), jnum(pt.x), jnum(pt.y), jnum(pt.cos2),
                                 is_taken ? "taken" : "left"});
          plot.markers.push_back({pt.x, pt.y, is_taken ? svg::kTaken : svg::kLeft, 2.5, ""});
        }
        for (const auto& ind : {pp.circle.taken, pp.circle.left}) {
          if (!ind) continue;
          const bool is_taken = ind->kind == dimred::ColumnKind::TakenIndicator;
          circle.rows.push_back({ind->name, std::string(kind_name(ind->kind)), jnum(ind->x), jnum(ind->y),
                                 jnum(ind->cos2), is_taken ? "taken" : "left"});
          plot.arrows.push_back({ind->x, ind->y, is_taken ? svg::kTakenDark : svg::kLeftDark, ind->name});
        }
        plot.legend = {{svg::kTaken, "taken group"}, {svg::kLeft, "left group"}};
        pair_tables.push_back(std::move(circle));
        r.figures.push_back({"pca_circle_" + fid, svg::scatter(plot)});

        Table eig{"pca_eigen_" + fid, {"component", "eigenvalue", "variance_explained"}, {}};
        const auto& m = *pp.model;
        for (Eigen::Index k = 0; k < m.eigenvalues.size(); ++k) {
          const auto kk = static_cast<std::size_t>(k);
          eig.rows.push_back({kk + 1, jnum(m.eigenvalues(k)),
                              jnum(kk < m.variance_explained.size() ? m.variance_explained[kk] : kNaN)});
        }
        pair_tables.push_back(std::move(eig));
      }
    }
    n_kmo_total += kmo_all.size();
    n_kmo_ok_total += kmo_ok.size();
    n_axis_total += projections.size();

    adequacy.rows.push_back(
        {name, pairs.size(), n_failed, jnum(mean_of(kmo_all)), kmo_ok.size(), jnum(mean_of(kmo_ok))});
    factors.rows.push_back({name, kmo_ok.size(), jnum(mean_of(kaiser)), jnum(mean_of(var1)), jnum(mean_of(var2)),
                            jnum(mean_of(kept)), projections.size()});
    std::vector<double> tp, lp, tc, lc, ts, ls;
    for (const auto& s : projections) {
      tp.push_back(s.taken.pct_variables), lp.push_back(s.left.pct_variables);
      tc.push_back(s.taken.mean_cos), lc.push_back(s.left.mean_cos);
      ts.push_back(s.taken.mean_scalar_product), ls.push_back(s.left.mean_scalar_product);
    }
    projection.rows.push_back({name, projections.size(), jnum(mean_of(tp)), jnum(mean_of(lp)), jnum(mean_of(tc)),
                               jnum(mean_of(lc)), jnum(mean_of(ts)), jnum(mean_of(ls))});

    if (!projections.empty()) {
      const auto a = dimred::aligned_group_means(circles, projections);
      aligned.rows.push_back({name, a.n_cases, jnum(a.taken_x), jnum(a.taken_y), jnum(a.left_x), jnum(a.left_y),
                              jnum(a.taken_indicator_x), jnum(a.taken_indicator_y), jnum(a.left_indicator_x),
                              jnum(a.left_indicator_y)});
      svg::Scatter plot{"Aligned group means (" + name + ")", "axis of the taken indicator", "orthogonal", true,
                        {}, {}, {}};
      plot.arrows = {{a.taken_x, a.taken_y, svg::kTaken, "taken variables"},
                     {a.left_x, a.left_y, svg::kLeft, "left variables"},
                     {a.taken_indicator_x, a.taken_indicator_y, svg::kTakenDark, "taken"},
                     {a.left_indicator_x, a.left_indicator_y, svg::kLeftDark, "left"}};
      r.figures.push_back({"pca_" + token + "_aligned_means", svg::scatter(plot)});
    }
  }

  r.summary = {{"n_band_pairs", pairs.size()},
               {"n_kmo_computed", n_kmo_total},
               {"n_kmo_ok", n_kmo_ok_total},
               {"n_axis_found", n_axis_total},
               {"n_failed", r.failures.size()},
               {"kmo_min", cfg.kmo_min},
               {"kmo_variables", "embedding columns of the core tokens"},
               {"kmo_pseudo_inverse", cfg.kmo_pseudo_inverse},
               {"retained_factors", 2},
               {"rotation", "varimax"},
               {"cos2_min", cfg.cos2_min},
               {"axis_cos2_min", dimred::kAxisCos2Min},
               {"indicator_weight_pct", cfg.indicator_weight_pct}};
  r.tables = {std::move(adequacy), std::move(factors), std::move(projection), std::move(aligned),
              std::move(per_pair)};
  for (auto& t : pair_tables) r.tables.push_back(std::move(t));
  log_failures(r);
  return r;
}

// ---------------------------------------------------------------------------
// E: t-SNE quadrants

AnalysisResult analysis_tsne(const RunContext& ctx) {
  const auto& cfg = ctx.config;
  const auto pairs = select_pairs(ctx, true);
  if (pairs.empty()) throw Error(ErrorKind::NoEligibleClusters, "no pair falls in the taken-fraction band");

  AnalysisResult r;
  r.id = "E";
  r.title = "t-SNE centroid quadrants of taken and left groups";
  Table summary{"tsne_summary",
                {"embedding", "n_pairs", "n_failed", "pct_different_quadrant", "pct_same_quadrant", "chi2", "df",
                 "p_value"},
                {}};
  Table crosstab{"tsne_crosstab", {"embedding", "taken_quadrant", "left_Q1", "left_Q2", "left_Q3", "left_Q4"}, {}};
  Table residuals{"tsne_residuals", {"embedding", "taken_quadrant", "left_Q1", "left_Q2", "left_Q3", "left_Q4"}, {}};
  Table per_pair{"tsne_pairs",
                 {"embedding", "pair", "seed", "final_kl", "taken_x", "taken_y", "left_x", "left_y", "taken_quadrant",
                  "left_quadrant", "same_quadrant"},
                 {}};
  std::vector<Table> pair_tables;

  for (const auto& name : ctx.embeddings) {
    const auto& emb = ctx.store.embedding(name);
    const std::string token = file_token(name);
    std::vector<std::optional<PairTsne>> rows(pairs.size());
    std::vector<PairFailure> fails(pairs.size());
    parallel_for(pairs.size(), cfg.threads, [&](std::size_t i) {
      const auto& p = pairs[i]->partition;
      fails[i] = {pair_id(p), name, ErrorKind::InvalidArgument, ""};
      guarded([&] { rows[i] = pair_tsne(p, emb, cfg); }, fails[i]);
    });

    std::vector<dimred::QuadrantSummary> quads;
    svg::Scatter centroids{"Group centroids (" + name + ")", "t-SNE 1", "t-SNE 2", false, {}, {}, {}};
    std::size_t n_failed = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!rows[i]) {
        r.failures.push_back(fails[i]);
        ++n_failed;
        continue;
      }
      const auto& t = *rows[i];
      const auto& q = t.quadrants;
      quads.push_back(q);
      per_pair.rows.push_back({name, t.pair, t.embedding.seed, jnum(t.embedding.final_kl), jnum(q.taken_x),
                               jnum(q.taken_y), jnum(q.left_x), jnum(q.left_y),
                               std::string(dimred::to_string(q.taken_quadrant)),
                               std::string(dimred::to_string(q.left_quadrant)), q.same_quadrant});
      centroids.markers.push_back({q.taken_x, q.taken_y, svg::kTaken, 3.0, ""});
      centroids.markers.push_back({q.left_x, q.left_y, svg::kLeft, 3.0, ""});

      if (i < cfg.plot_pairs) {
        const std::string fid = token + "_" + file_token(t.pair);
        const auto& p = pairs[i]->partition;
        Table coords{"tsne_coords_" + fid, {"token", "group", "x", "y"}, {}};
        svg::Scatter plot{"t-SNE " + t.pair + " (" + name + ")", "t-SNE 1", "t-SNE 2", false, {}, {}, {}};
        for (std::size_t k = 0; k < t.rows.size(); ++k) {
          const bool is_taken = k < p.taken.size();
          const double x = t.embedding.coords(static_cast<Eigen::Index>(k), 0);
          const double y = t.embedding.coords(static_cast<Eigen::Index>(k), 1);
          coords.rows.push_back({t.rows[k], is_taken ? "taken" : "left", jnum(x), jnum(y)});
          plot.markers.push_back({x, y, is_taken ? svg::kTaken : svg::kLeft, 2.5, ""});
        }
        // Centroids relative to the origin used for quadrants; shown in raw coordinates.
        double ox = 0.0, oy = 0.0;
        if (cfg.quadrant_origin == dimred::QuadrantOrigin::Median) {
          std::vector<double> xs, ys;
          for (Eigen::Index k = 0; k < t.embedding.coords.rows(); ++k) {
            xs.push_back(t.embedding.coords(k, 0));
            ys.push_back(t.embedding.coords(k, 1));
          }
          ox = stats::median(xs);
          oy = stats::median(ys);
        }
        plot.markers.push_back({q.taken_x + ox, q.taken_y + oy, svg::kTakenDark, 6.0, "taken centroid"});
        plot.markers.push_back({q.left_x + ox, q.left_y + oy, svg::kLeftDark, 6.0, "left centroid"});
        plot.legend = {{svg::kTaken, "taken tokens"}, {svg::kLeft, "left tokens"}};
        pair_tables.push_back(std::move(coords));
        r.figures.push_back({"tsne_" + fid, svg::scatter(plot)});
      }
    }
    if (quads.empty()) {
      summary.rows.push_back({name, 0, n_failed, nullptr, nullptr, nullptr, nullptr, nullptr});
      continue;
    }
    const auto ct = dimred::quadrant_crosstab(quads);
    summary.rows.push_back({name, ct.n, n_failed, jnum(100.0 * ct.share_different),
                            jnum(100.0 * (1.0 - ct.share_different)), jnum(ct.chi2.test.statistic),
                            jnum(ct.chi2.test.df.value_or(kNaN)), jnum(ct.chi2.test.p_value)});
    for (std::size_t a = 0; a < 4; ++a) {
      const std::string label = "Q" + std::to_string(a + 1);
      std::vector<Json> counts{name, label}, res{name, label};
      for (std::size_t b = 0; b < 4; ++b) {
        counts.push_back(jnum(ct.counts[a][b]));
        res.push_back(jnum(ct.chi2.weighted_residuals[a][b]));
      }
      crosstab.rows.push_back(std::move(counts));
      residuals.rows.push_back(std::move(res));
    }
    centroids.legend = {{svg::kTaken, "taken centroid"}, {svg::kLeft, "left centroid"}};
    r.figures.push_back({"tsne_" + token + "_centroids", svg::scatter(centroids)});
  }
  if (per_pair.rows.empty()) throw Error(ErrorKind::NoEligibleClusters, "every band pair was excluded");

  r.summary = {{"n_band_pairs", pairs.size()},
               {"n_failed", r.failures.size()},
               {"perplexity", cfg.tsne.perplexity},
               {"iters", cfg.tsne.iters},
               {"quadrant_origin", cfg.quadrant_origin == dimred::QuadrantOrigin::Zero ? "zero" : "median"},
               {"seed_rule", "derive_seed(master_seed, target, precursor)"}};
  r.tables = {std::move(summary), std::move(crosstab), std::move(residuals), std::move(per_pair)};
  for (auto& t : pair_tables) r.tables.push_back(std::move(t));
  log_failures(r);
  return r;
}

AnalysisResult run_analysis(const RunContext& ctx, std::string_view id) {
  if (id == "A") return analysis_normality(ctx);
  if (id == "B") return analysis_reduction(ctx);
  if (id == "C") return analysis_selectivity(ctx);
  if (id == "D") return analysis_pca(ctx);
  if (id == "E") return analysis_tsne(ctx);
  throw Error(ErrorKind::ConfigError, "unknown analysis \"" + std::string(id) + "\"");
}

}  // namespace cliplab::pipeline
