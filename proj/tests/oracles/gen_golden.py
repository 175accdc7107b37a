#!/usr/bin/env python3
"""Regenerates the frozen statistics fixtures in tests/golden/ from scipy/statsmodels.

The C++ suite never runs this script; it only reads the JSON it produced.
Re-run by hand when a fixture is added:  python3 tests/oracles/gen_golden.py
"""
import json
import math
import os

import numpy as np
from scipy import special, stats
from statsmodels.stats.diagnostic import lilliefors

OUT = os.path.join(os.path.dirname(__file__), "..", "golden")

rng = np.random.default_rng(20240611)
CHICKS = [156, 162, 168, 182, 186, 190, 190, 196, 202, 210,
          214, 220, 226, 230, 230, 236, 236, 242, 246, 270]
NORMAL20 = [float(stats.norm.ppf((i - 0.375) / 20.25)) for i in range(1, 21)]
RAND50 = [round(float(v), 6) for v in rng.normal(3.0, 2.0, 50)]
EXP30 = [round(float(v), 6) for v in rng.exponential(1.0, 30)]
SKEW12 = [round(float(v), 6) for v in rng.gamma(2.0, 1.0, 12)]
UNIF200 = [round(float(v), 6) for v in rng.uniform(-1, 1, 200)]


def case(name, inp, statistic, p=None, df=None, **extra):
    exp = {"statistic": float(statistic)}
    if p is not None:
        exp["p"] = float(p)
    if df is not None:
        exp["df"] = float(df)
    exp.update({k: float(v) for k, v in extra.items()})
    return {"name": name, "input": inp, "expected": exp}


def dump(family, cases):
    with open(os.path.join(OUT, family + ".json"), "w") as f:
        json.dump(cases, f, indent=1)
        f.write("\n")


def moments_cases():
    out = []
    for name, xs in [("one_to_ten", [1, 2, 3, 4, 10]), ("chicks", CHICKS),
                     ("rand50", RAND50), ("exp30", EXP30)]:
        a = np.asarray(xs, float)
        out.append(case(name, {"values": xs}, a.mean(),
                        variance=a.var(ddof=1),
                        skewness=stats.skew(a, bias=True),
                        excess_kurtosis=stats.kurtosis(a, fisher=True, bias=True)))
    dump("moments", out)


def shapiro_cases():
    out = []
    for name, xs in [("normal_quantiles_20", NORMAL20), ("chicks", CHICKS),
                     ("three", [1.0, 2.0, 4.0]), ("seven", [2.1, 3.4, 1.9, 5.6, 2.2, 8.7, 3.3]),
                     ("one_to_ten", [1, 2, 3, 4, 10]), ("rand50", RAND50), ("exp30", EXP30),
                     ("skew12", SKEW12), ("unif200", UNIF200)]:
        r = stats.shapiro(xs)
        out.append(case(name, {"values": xs}, r.statistic, r.pvalue))
    dump("shapiro_wilk", out)


def lilliefors_null_p(x, reps=4_000_000, chunk=200_000, seed=7):
    """Monte-Carlo p-value of the Lilliefors statistic with a large replicate count."""
    n = len(x)
    d_obs = lilliefors(x, dist="norm", pvalmethod="table")[0]
    g = np.random.default_rng(seed)
    hits = 0
    done = 0
    cdf_hi = np.arange(1, n + 1) / n
    cdf_lo = np.arange(0, n) / n
    while done < reps:
        m = min(chunk, reps - done)
        z = np.sort(g.standard_normal((m, n)), axis=1)
        z = (z - z.mean(axis=1, keepdims=True)) / z.std(axis=1, ddof=1, keepdims=True)
        f = special.ndtr(z)
        d = np.maximum((cdf_hi - f).max(axis=1), (f - cdf_lo).max(axis=1))
        hits += int((d >= d_obs).sum())
        done += m
    return d_obs, hits / reps


def lilliefors_cases():
    out = []
    for name, xs in [("chicks", CHICKS), ("exp30", EXP30), ("skew12", SKEW12)]:
        d, p = lilliefors_null_p(np.asarray(xs, float))
        out.append(case(name, {"values": xs}, d, p,
                        p_table=lilliefors(xs, dist="norm", pvalmethod="table")[1]))
    dump("lilliefors", out)


def ks_cases():
    out = []
    grid = [float(stats.norm.ppf((i - 0.5) / 10)) for i in range(1, 11)]
    for name, xs, mu, sd in [("quantile_grid_10", grid, 0.0, 1.0),
                             ("rand50", RAND50, 3.0, 2.0),
                             ("exp30_vs_std", EXP30, 0.0, 1.0),
                             ("chicks_fitted", CHICKS, float(np.mean(CHICKS)),
                              float(np.std(CHICKS, ddof=1)))]:
        d = stats.kstest(xs, "norm", args=(mu, sd), method="asymp").statistic
        p = special.kolmogorov(math.sqrt(len(xs)) * d)
        out.append(case(name, {"values": xs, "mu": mu, "sigma": sd}, d, p))
    dump("ks_normal", out)


def jb_cases():
    out = []
    for name, xs in [("rand50", RAND50), ("exp30", EXP30), ("chicks", CHICKS),
                     ("unif200", UNIF200)]:
        r = stats.jarque_bera(xs)
        out.append(case(name, {"values": xs}, r.statistic, r.pvalue, 2))
    dump("jarque_bera", out)


def group_cases():
    families = {"bartlett": [], "levene": [], "levene_median": [], "kruskal_wallis": [],
                "student_t": [], "welch_t": []}
    groups = [
        ("doubling", [[1, 2, 3, 4], [2, 4, 6, 8]]),
        ("three_groups", [CHICKS[:7], CHICKS[7:14], CHICKS[14:]]),
        ("rand_exp", [RAND50[:20], EXP30]),
        ("ties", [[1, 1, 2, 3, 3, 3], [2, 2, 3, 4, 5, 5, 5], [1, 4, 4, 6, 6]]),
        ("kw_textbook", [[1, 2, 3], [4, 5, 6]]),
    ]
    for name, gs in groups:
        inp = {"groups": gs}
        # Integer arrays make scipy accumulate the pooled variance in int64.
        b = stats.bartlett(*[np.asarray(g, float) for g in gs])
        families["bartlett"].append(case(name, inp, b.statistic, b.pvalue, len(gs) - 1))
        lv = stats.levene(*gs, center="mean")
        n = sum(len(g) for g in gs)
        families["levene"].append(case(name, inp, lv.statistic, lv.pvalue, len(gs) - 1,
                                       df2=n - len(gs)))
        lm = stats.levene(*gs, center="median")
        families["levene_median"].append(case(name, inp, lm.statistic, lm.pvalue,
                                              len(gs) - 1, df2=n - len(gs)))
        kw = stats.kruskal(*gs)
        families["kruskal_wallis"].append(case(name, inp, kw.statistic, kw.pvalue, len(gs) - 1))
        if len(gs) == 2:
            t = stats.ttest_ind(gs[0], gs[1], equal_var=True)
            families["student_t"].append(case(name, inp, t.statistic, t.pvalue,
                                              len(gs[0]) + len(gs[1]) - 2))
            w = stats.ttest_ind(gs[0], gs[1], equal_var=False)
            a, c = np.asarray(gs[0], float), np.asarray(gs[1], float)
            va, vc = a.var(ddof=1) / len(a), c.var(ddof=1) / len(c)
            dfw = (va + vc) ** 2 / (va ** 2 / (len(a) - 1) + vc ** 2 / (len(c) - 1))
            families["welch_t"].append(case(name, inp, w.statistic, w.pvalue, dfw))
    t = stats.ttest_ind([1, 2, 3], [2, 3, 4])
    families["student_t"].append(case("shifted_by_one", {"groups": [[1, 2, 3], [2, 3, 4]]},
                                      t.statistic, t.pvalue, 4))
    for fam, cases in families.items():
        dump(fam, cases)


def chi2_cases():
    gof = []
    for name, o, e in [("selectivity_split", [54993, 9007], [3200, 60800]),
                       ("three_cells", [10, 20, 30], [20, 20, 20]),
                       ("dice", [16, 18, 16, 14, 12, 24], [16.666666666666668] * 6)]:
        r = stats.chisquare(o, e)
        gof.append(case(name, {"observed": o, "expected": e}, r.statistic, r.pvalue,
                        len(o) - 1))
    dump("chi2_gof", gof)
    ind = []
    for name, t in [("two_by_two", [[10, 20], [20, 10]]),
                    ("four_by_four", [[12, 30, 5, 9], [7, 3, 25, 11], [14, 9, 8, 30],
                                      [22, 6, 13, 4]]),
                    ("three_by_two", [[5, 15], [10, 10], [20, 5]])]:
        chi2, p, df, _ = stats.chi2_contingency(t, correction=False)
        ind.append(case(name, {"table": t}, chi2, p, df))
    dump("chi2_independence", ind)


if __name__ == "__main__":
    os.makedirs(OUT, exist_ok=True)
    moments_cases()
    shapiro_cases()
    ks_cases()
    jb_cases()
    group_cases()
    chi2_cases()
    lilliefors_cases()
