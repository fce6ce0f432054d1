#!/usr/bin/env python3
"""Reference values for the unit tests, computed with numpy/scipy/scikit-learn
and the pure-Python generator in mt64.py. Writes tests/oracle_values.hpp.

Regenerate only when a fixture changes; the header is committed so the C++
build never needs Python.

usage: python3 tests/oracles/generate.py
"""

import json
import math
from pathlib import Path

import numpy as np
from scipy.optimize import minimize
from sklearn.isotonic import IsotonicRegression
from sklearn.linear_model import LogisticRegression
from sklearn.metrics import average_precision_score, brier_score_loss, roc_auc_score
from sklearn.naive_bayes import GaussianNB

import mt64

HERE = Path(__file__).resolve().parent
OUT = HERE.parent / "oracle_values.hpp"

out = []


def emit_scalar(name, v, kind="double"):
    if kind == "double":
        out.append(f"inline constexpr double {name} = {float(v)!r};")
    else:
        suffix = "ULL" if kind == "std::uint64_t" else ""
        out.append(f"inline constexpr {kind} {name} = {v}{suffix};")


def emit_array(name, vals, kind="double"):
    if kind == "double":
        body = ", ".join(repr(float(v)) for v in vals)
    else:
        suffix = "ULL" if kind == "std::uint64_t" else ""
        body = ", ".join(f"{int(v)}{suffix}" for v in vals)
    out.append(f"inline constexpr std::array<{kind}, {len(vals)}> {name} = {{{body}}};")


def section(title):
    out.append("")
    out.append(f"// {title}")


# ---- generator ------------------------------------------------------------

section("mt19937_64")
g = mt64.MT64(5489)
for _ in range(9999):
    g.next()
assert g.next() == 9981545732273789042  # 10000th output for the default seed
g = mt64.MT64(42)
emit_array("kMt64Seed42", [g.next() for _ in range(3)], "std::uint64_t")
emit_scalar("kStreamSeed42_3", mt64.stream_seed(42, 3), "std::uint64_t")
g = mt64.MT64(9)
emit_array("kBelow7Seed9", [g.below(7) for _ in range(8)], "std::uint64_t")
perm = list(range(10))
mt64.MT64(3).shuffle(perm)
emit_array("kShuffle10Seed3", perm, "std::size_t")

# ---- split and folds ------------------------------------------------------

section("stratified split: 20 labels, test 5, valid 4, seed 7")
split_labels = [1 if (i * 7) % 5 < 3 else 0 for i in range(20)]
emit_array("kSplitLabels", split_labels, "int")
tr, va, te = mt64.stratified_split(split_labels, 5, 4, 7)
emit_array("kSplitTrain", tr, "std::size_t")
emit_array("kSplitValid", va, "std::size_t")
emit_array("kSplitTest", te, "std::size_t")

section("stratified folds: 13 labels, k = 3, seed 11")
fold_labels = [1, 0, 1, 1, 0, 1, 0, 1, 1, 0, 1, 0, 1]
emit_array("kFoldLabels", fold_labels, "int")
emit_array("kFolds", mt64.stratified_folds(fold_labels, 3, 11), "std::size_t")

# ---- metrics --------------------------------------------------------------

section("metric fixture (15 rows, ties included)")
mp = np.array([0.05, 0.1, 0.1, 0.22, 0.35, 0.35, 0.4, 0.51, 0.6, 0.6, 0.72, 0.8, 0.9, 0.97, 1.0])
my = np.array([0, 0, 1, 0, 0, 1, 1, 0, 1, 0, 1, 1, 0, 1, 1])
emit_array("kMetricProbs", mp)
emit_array("kMetricLabels", my, "int")
emit_scalar("kMetricAuroc", roc_auc_score(my, mp))
emit_scalar("kMetricAuprc", average_precision_score(my, mp))
emit_scalar("kMetricBrier", brier_score_loss(my, mp))
base = my.mean() * (1 - my.mean())
emit_scalar("kMetricBrierSkill", 1 - brier_score_loss(my, mp) / base)


def ece_mce(p, y, n_bins):
    idx = np.minimum(np.floor(p * n_bins).astype(int), n_bins - 1)
    e, m = 0.0, 0.0
    for b in range(n_bins):
        sel = idx == b
        if sel.any():
            gap = abs(p[sel].mean() - y[sel].mean())
            e += sel.sum() / len(p) * gap
            m = max(m, gap)
    return e, m


e10, m10 = ece_mce(mp, my, 10)
e5, m5 = ece_mce(mp, my, 5)
emit_scalar("kMetricEce10", e10)
emit_scalar("kMetricMce10", m10)
emit_scalar("kMetricEce5", e5)

section("bootstrap: AUROC on the metric fixture, 200 resamples, level 0.9, seed 5")


def bootstrap(p, y, n_res, level, seed, fn):
    vals, redraws = [], 0
    n = len(p)
    for r in range(n_res):
        g = mt64.MT64(mt64.stream_seed(seed, r))
        while True:
            rows = [g.below(n) for _ in range(n)]
            yy = y[rows]
            if yy.min() == yy.max():
                redraws += 1
                continue
            vals.append(fn(yy, p[rows]))
            break
    vals.sort()

    def q(level):
        h = (len(vals) - 1) * level
        lo = math.floor(h)
        hi = min(lo + 1, len(vals) - 1)
        return vals[lo] + (h - lo) * (vals[hi] - vals[lo])

    return q((1 - level) / 2), q((1 + level) / 2), redraws


lo, hi, redraws = bootstrap(mp, my, 200, 0.9, 5, roc_auc_score)
emit_scalar("kBootAurocLo", lo)
emit_scalar("kBootAurocHi", hi)
emit_scalar("kBootAurocRedraws", redraws, "std::size_t")

section("bootstrap redraws: 6 rows with one positive, 50 resamples, seed 1")
rp = np.array([0.1, 0.2, 0.3, 0.4, 0.5, 0.9])
ry = np.array([0, 0, 0, 0, 0, 1])
lo, hi, redraws = bootstrap(rp, ry, 50, 0.95, 1, roc_auc_score)
emit_array("kRedrawProbs", rp)
emit_array("kRedrawLabels", ry, "int")
emit_scalar("kRedrawLo", lo)
emit_scalar("kRedrawHi", hi)
emit_scalar("kRedrawCount", redraws, "std::size_t")

# ---- logistic regression --------------------------------------------------

section("logistic regression: 20 rows x 3 features, balanced weights, c = 0.5")
rng = np.random.default_rng(1234)
lx = np.round(rng.normal(0, 1, (20, 3)) * [1.0, 2.0, 0.5] + [0.0, 1.0, -0.5], 3)
ly = (lx[:, 0] - 0.5 * lx[:, 1] + rng.normal(0, 1.2, 20) > -0.3).astype(int)
assert 0 < ly.sum() < 20
emit_array("kLrX", lx.ravel())
emit_array("kLrY", ly, "int")
lr = LogisticRegression(C=0.5, class_weight="balanced", tol=1e-12, max_iter=100000)
lr.fit(lx, ly)
emit_array("kLrWeights", lr.coef_[0])
emit_scalar("kLrIntercept", lr.intercept_[0])
lq = np.array([[0.3, -1.0, 0.2], [-1.5, 2.5, -0.9]])
emit_array("kLrQuery", lq.ravel())
emit_array("kLrQueryProb", lr.predict_proba(lq)[:, 1])

mu = lx.mean(axis=0)
sd = lx.std(axis=0)
lrs = LogisticRegression(C=0.5, class_weight="balanced", tol=1e-12, max_iter=100000)
lrs.fit((lx - mu) / sd, ly)
emit_array("kLrStdWeights", lrs.coef_[0])
emit_scalar("kLrStdIntercept", lrs.intercept_[0])
emit_array("kLrStdQueryProb", lrs.predict_proba((lq - mu) / sd)[:, 1])

# ---- gaussian naive bayes -------------------------------------------------

section("gaussian naive Bayes: 6 rows x 2 features, var_smoothing 1e-9")
gx = np.array([[1.0, 2.0], [1.5, 1.8], [0.8, 2.4], [3.0, 0.5], [3.4, 0.9], [2.6, 0.2]])
gy = np.array([1, 1, 1, 0, 0, 0])
emit_array("kGnbX", gx.ravel())
emit_array("kGnbY", gy, "int")
gnb = GaussianNB(var_smoothing=1e-9).fit(gx, gy)
gq = np.array([[2.0, 1.2], [1.2, 2.0], [2.9, 0.6]])
emit_array("kGnbQuery", gq.ravel())
emit_array("kGnbQueryProb", gnb.predict_proba(gq)[:, 1])
emit_scalar("kGnbEpsilon", gnb.epsilon_)

# ---- platt ----------------------------------------------------------------

section("Platt scaling: 8 rows")
pf = np.array([0.1, 0.3, 0.35, 0.5, 0.55, 0.7, 0.8, 0.95])
py = np.array([0, 0, 1, 0, 1, 1, 0, 1])
npos, nneg = py.sum(), len(py) - py.sum()
t = np.where(py == 1, (npos + 1) / (npos + 2), 1 / (nneg + 2))


def platt_nll(ab):
    z = ab[0] * pf + ab[1]
    # -log p where p = 1/(1+exp(z)), in a stable form
    return np.sum(t * z + np.logaddexp(0, -z))


res = minimize(platt_nll, x0=[0.0, 0.0], method="BFGS", options={"gtol": 1e-12})
emit_array("kPlattF", pf)
emit_array("kPlattY", py, "int")
emit_scalar("kPlattA", res.x[0])
emit_scalar("kPlattB", res.x[1])

# ---- isotonic -------------------------------------------------------------

section("isotonic regression: 10 rows with tied scores; fitted values at the inputs")
ix = np.array([0.1, 0.2, 0.2, 0.3, 0.45, 0.5, 0.5, 0.7, 0.8, 0.9])
iy = np.array([0, 1, 0, 0, 1, 0, 1, 1, 0, 1])
iso = IsotonicRegression(out_of_bounds="clip", y_min=0.0, y_max=1.0).fit(ix, iy)
emit_array("kIsoX", ix)
emit_array("kIsoY", iy, "int")
emit_array("kIsoFitted", iso.predict(ix))

# ---- CKD-EPI --------------------------------------------------------------

section("CKD-EPI 2021: (sex, age, creatinine) -> eGFR")


def egfr(female, age, scr):
    kappa, alpha = (0.7, -0.241) if female else (0.9, -0.302)
    x = scr / kappa
    v = 142 * min(x, 1) ** alpha * max(x, 1) ** -1.2 * 0.9938**age
    return v * (1.012 if female else 1.0)


points = [(1, 50, 0.7), (0, 70, 2.2), (1, 30, 0.5), (0, 45, 0.9), (1, 80, 1.4), (0, 20, 0.6)]
emit_array("kEgfrFemale", [p[0] for p in points], "int")
emit_array("kEgfrAge", [p[1] for p in points])
emit_array("kEgfrScr", [p[2] for p in points])
emit_array("kEgfr", [egfr(*p) for p in points])

# ---- split of the committed development file ------------------------------

arff = HERE.parents[1] / "data" / "synthetic" / "ckd_development_synthetic.arff"
rows = arff.read_text().split("@data", 1)[1].split("\n")
classes = [r.rstrip(",\t ").rsplit(",", 1)[-1].strip() for r in rows if r.strip() and not r.startswith("%")]
dev_labels = [1 if c == "ckd" else 0 for c in classes]
tr, va, te = mt64.stratified_split(dev_labels, 61, 60, 42)
golden = HERE.parent / "golden" / "development_split_seed42.json"
golden.write_text(json.dumps({"seed": 42, "train": tr, "valid": va, "test": te}, separators=(",", ":")) + "\n")

header = [
    "// Generated by tests/oracles/generate.py. Do not edit by hand.",
    "#pragma once",
    "",
    "#include <array>",
    "#include <cstddef>",
    "#include <cstdint>",
    "",
    "namespace oracle {",
]
OUT.write_text("\n".join(header + out + ["", "} // namespace oracle", ""]))
print(f"wrote {OUT}")
