#!/usr/bin/env python3
"""Generate the synthetic development ARFF and external cohort CSV.

The public CKD benchmark file and the hospital demo extract are not
redistributed here. These stand-ins keep their shape: 400 development rows
(250 ckd / 150 notckd) with the benchmark's 24 attributes, per-class marginals
and missingness rates close to the published file; and a 97-row inpatient
cohort whose creatinine yields exactly 23 eGFR < 60 cases under CKD-EPI 2021.

Per-class marginals are independent draws, so feature correlations are not
reproduced. Outputs are written once and committed; the C++ tests read the
committed files, not this script.

usage: make_synthetic_cohorts.py [--seed 20240601] [--out data/synthetic]
"""

import argparse
import csv
import math
from pathlib import Path

import numpy as np

NOMINAL = {
    "sg": ["1.005", "1.010", "1.015", "1.020", "1.025"],
    "al": ["0", "1", "2", "3", "4", "5"],
    "su": ["0", "1", "2", "3", "4", "5"],
    "rbc": ["normal", "abnormal"],
    "pc": ["normal", "abnormal"],
    "pcc": ["present", "notpresent"],
    "ba": ["present", "notpresent"],
    "htn": ["yes", "no"],
    "dm": ["yes", "no"],
    "cad": ["yes", "no"],
    "appet": ["good", "poor"],
    "pe": ["yes", "no"],
    "ane": ["yes", "no"],
}

ATTRIBUTES = [
    ("age", "age"), ("bp", "blood pressure"), ("sg", "specific gravity"), ("al", "albumin"),
    ("su", "sugar"), ("rbc", "red blood cells"), ("pc", "pus cell"), ("pcc", "pus cell clumps"),
    ("ba", "bacteria"), ("bgr", "blood glucose random"), ("bu", "blood urea"), ("sc", "serum creatinine"),
    ("sod", "sodium"), ("pot", "potassium"), ("hemo", "hemoglobin"), ("pcv", "packed cell volume"),
    ("wbcc", "white blood cell count"), ("rbcc", "red blood cell count"), ("htn", "hypertension"),
    ("dm", "diabetes mellitus"), ("cad", "coronary artery disease"), ("appet", "appetite"),
    ("pe", "pedal edema"), ("ane", "anemia"),
]

# Missing-cell counts out of 400, as in the benchmark file.
MISSING = {
    "age": 9, "bp": 12, "sg": 47, "al": 46, "su": 49, "rbc": 152, "pc": 65, "pcc": 4, "ba": 4,
    "bgr": 44, "bu": 19, "sc": 17, "sod": 87, "pot": 88, "hemo": 52, "pcv": 71, "wbcc": 106,
    "rbcc": 131, "htn": 2, "dm": 2, "cad": 2, "appet": 1, "pe": 1, "ane": 1,
}

# (mean, sd, lo, hi, decimals) per class: ckd, notckd.
CONTINUOUS = {
    "age": ((54.5, 17.4, 2, 90, 0), (46.5, 15.6, 12, 80, 0)),
    "bp": ((79.6, 15.2, 50, 180, -1), (71.4, 8.5, 60, 80, -1)),
    "bgr": ((175.0, 92.0, 22, 490, 0), (107.7, 18.5, 70, 140, 0)),
    "bu": ((72.4, 58.0, 10, 391, 0), (32.8, 11.5, 10, 50, 0)),
    "sod": ((133.9, 12.4, 104, 163, 0), (141.7, 4.8, 135, 150, 0)),
    "pot": ((4.9, 1.3, 2.5, 12.0, 1), (4.3, 0.6, 3.3, 5.0, 1)),
    "hemo": ((10.6, 2.2, 3.1, 16.1, 1), (15.2, 1.3, 13.0, 17.8, 1)),
    "pcv": ((32.9, 7.2, 9, 52, 0), (46.3, 4.1, 40, 54, 0)),
    "wbcc": ((9070.0, 3580.0, 2200, 26400, -2), (7700.0, 1830.0, 4300, 11000, -2)),
    "rbcc": ((3.95, 0.85, 2.1, 8.0, 1), (5.38, 0.58, 4.4, 6.5, 1)),
}

# Category probabilities per class (ckd, notckd), in NOMINAL order.
CATEGORICAL = {
    "sg": ([0.17, 0.48, 0.30, 0.05, 0.00], [0.0, 0.0, 0.0, 0.49, 0.51]),
    "al": ([0.30, 0.22, 0.21, 0.20, 0.105, 0.005], [1.0, 0, 0, 0, 0, 0]),
    "su": ([0.73, 0.06, 0.08, 0.06, 0.06, 0.01], [1.0, 0, 0, 0, 0, 0]),
    "rbc": ([0.65, 0.35], [1.0, 0.0]),
    "pc": ([0.55, 0.45], [1.0, 0.0]),
    "pcc": ([0.17, 0.83], [0.0, 1.0]),
    "ba": ([0.09, 0.91], [0.0, 1.0]),
    "htn": ([0.59, 0.41], [0.0, 1.0]),
    "dm": ([0.55, 0.45], [0.0, 1.0]),
    "cad": ([0.14, 0.86], [0.0, 1.0]),
    "appet": ([0.67, 0.33], [1.0, 0.0]),
    "pe": ([0.30, 0.70], [0.0, 1.0]),
    "ane": ([0.24, 0.76], [0.0, 1.0]),
}


def draw_continuous(rng, spec, n):
    mean, sd, lo, hi, dec = spec
    v = np.clip(rng.normal(mean, sd, n), lo, hi)
    return np.round(v, dec)


def creatinine(rng, is_ckd, n):
    # Right-skewed: log-normal around the class median.
    if is_ckd:
        v = np.exp(rng.normal(math.log(2.3), 0.85, n))
        return np.round(np.clip(v, 0.5, 76.0), 1)
    v = rng.normal(0.87, 0.27, n)
    return np.round(np.clip(v, 0.4, 1.2), 1)


def fmt(x, dec):
    if dec <= 0:
        return str(int(round(x)))
    return f"{x:.{dec}f}"


def make_development(rng):
    n_ckd, n_not = 250, 150
    columns = {}
    for name, _ in ATTRIBUTES:
        cells = []
        for is_ckd, n in ((True, n_ckd), (False, n_not)):
            k = 0 if is_ckd else 1
            if name == "sc":
                cells += [fmt(v, 1) for v in creatinine(rng, is_ckd, n)]
            elif name in CONTINUOUS:
                spec = CONTINUOUS[name][k]
                cells += [fmt(v, spec[4]) for v in draw_continuous(rng, spec, n)]
            else:
                levels = NOMINAL[name]
                p = np.array(CATEGORICAL[name][k], dtype=float)
                cells += list(rng.choice(levels, size=n, p=p / p.sum()))
        missing = rng.choice(400, size=MISSING[name], replace=False)
        for i in missing:
            cells[i] = "?"
        columns[name] = cells
    labels = ["ckd"] * n_ckd + ["notckd"] * n_not
    return columns, labels


def write_arff(path, columns, labels):
    lines = [
        "% Synthetic chronic kidney disease development set.",
        "% Generated by tools/fixtures/make_synthetic_cohorts.py; not patient data.",
        "",
        "@relation Chronic_Kidney_Disease",
        "",
    ]
    for name, desc in ATTRIBUTES:
        if name in NOMINAL:
            lines.append(f"@attribute '{name}' {{{','.join(NOMINAL[name])}}}")
        else:
            lines.append(f"@attribute '{name}' numeric")
    lines.append("@attribute 'class' {ckd,notckd}")
    lines += ["", "@data"]
    n = len(labels)
    for r in range(n):
        row = [columns[name][r] for name, _ in ATTRIBUTES] + [labels[r]]
        # Stray whitespace and a trailing comma occur in the public file.
        if r % 37 == 5:
            row[19] = "\t" + row[19]
        if r % 53 == 11:
            row[-1] = row[-1] + "\t"
        if r % 61 == 7:
            row[18] = " " + row[18]
        line = ",".join(row)
        if r == 369:
            line += ","
        lines.append(line)
    path.write_text("\n".join(lines) + "\n")


def inverse_egfr(target, age, female):
    kappa, alpha = (0.7, -0.241) if female else (0.9, -0.302)
    factor = 142.0 * (0.9938 ** age) * (1.012 if female else 1.0)
    ratio = target / factor
    # Below the knot eGFR = factor * x^alpha, above it factor * x^-1.2.
    x = ratio ** (1.0 / alpha)
    if x > 1.0:
        x = ratio ** (1.0 / -1.2)
    return x * kappa


def egfr(scr, age, female):
    kappa, alpha = (0.7, -0.241) if female else (0.9, -0.302)
    x = scr / kappa
    v = 142.0 * min(x, 1.0) ** alpha * max(x, 1.0) ** -1.2 * 0.9938 ** age
    return v * (1.012 if female else 1.0)


def make_external(rng):
    n, n_pos = 97, 23
    n_young = 55
    age = np.concatenate([rng.uniform(25, 64.5, n_young), rng.uniform(65, 91, n - n_young)])
    age = np.round(age)
    female = rng.random(n) < 0.45

    # CKD is commoner in older patients: 8 of 55 younger, 15 of 42 older.
    pos = np.zeros(n, dtype=bool)
    pos[rng.choice(np.arange(n_young), 8, replace=False)] = True
    pos[n_young + rng.choice(np.arange(n - n_young), 15, replace=False)] = True

    scr = np.empty(n)
    for i in range(n):
        while True:
            target = rng.uniform(12, 58) if pos[i] else rng.uniform(62, 125)
            v = round(inverse_egfr(target, age[i], female[i]), 2)
            if (egfr(v, age[i], female[i]) < 60.0) == pos[i]:
                scr[i] = v
                break

    # Inpatient labs, already averaged over the first admission. bp is systolic.
    bp = np.round(rng.normal(122, 19, n))
    al = np.round(np.clip(rng.normal(3.2, 0.6, n), 1.5, 4.8), 1)  # serum albumin, g/dL
    bgr = np.round(np.clip(rng.normal(136, 42, n), 60, 380))
    bu = np.round(np.clip(rng.normal(22, 10, n) + 14 * pos, 5, 140))  # urea nitrogen, mg/dL
    sod = np.round(np.clip(rng.normal(138.5, 3.8, n), 125, 150))
    pot = np.round(np.clip(rng.normal(4.2, 0.5, n) + 0.3 * pos, 2.8, 6.5), 1)
    hemo = np.round(np.clip(rng.normal(10.9, 1.9, n) - 0.8 * pos, 6.0, 16.5), 1)
    pcv = np.round(np.clip(hemo * 3.0 + rng.normal(0, 1.5, n), 18, 50))
    wbcc = np.round(np.clip(rng.normal(9.4, 3.6, n), 2.0, 28.0), 1) * 1000
    rbcc = np.round(np.clip(hemo / 3.0 + rng.normal(0, 0.2, n), 2.0, 5.8), 2)
    rbc = np.where(rbcc < 3.9, "abnormal", "normal")
    ane = np.where(hemo < np.where(female, 12.0, 13.5), "yes", "no")

    # ICD-10-only comorbidity flags are sparse in the demo extract.
    htn = np.array(["no"] * n, dtype=object)
    dm = np.array(["no"] * n, dtype=object)
    cad = np.array(["no"] * n, dtype=object)
    htn[rng.choice(n, 8, replace=False)] = "yes"
    dm[rng.choice(n, 7, replace=False)] = "yes"
    cad[rng.choice(n, 11, replace=False)] = "yes"

    rows = []
    for i in range(n):
        rows.append({
            "subject_id": str(10000001 + i),
            "age": fmt(age[i], 0),
            "sex": "F" if female[i] else "M",
            "bp": fmt(bp[i], 0),
            "al": fmt(al[i], 1),
            "bgr": fmt(bgr[i], 0),
            "bu": fmt(bu[i], 0),
            "sc": f"{scr[i]:.2f}",
            "sod": fmt(sod[i], 0),
            "pot": fmt(pot[i], 1),
            "hemo": fmt(hemo[i], 1),
            "pcv": fmt(pcv[i], 0),
            "wbcc": fmt(wbcc[i], 0),
            "rbcc": f"{rbcc[i]:.2f}",
            "rbc": rbc[i],
            "htn": htn[i],
            "dm": dm[i],
            "cad": cad[i],
            "ane": ane[i],
        })
    # bp unresolved for 3 patients; albumin not drawn for some admissions.
    for i in rng.choice(n, 3, replace=False):
        rows[i]["bp"] = ""
    for i in rng.choice(n, 21, replace=False):
        rows[i]["al"] = ""
    for i in rng.choice(n, 2, replace=False):
        rows[i]["pot"] = ""
    order = rng.permutation(n)
    return [rows[i] for i in order], int(pos.sum())


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=20240601)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[2] / "data" / "synthetic"))
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)

    columns, labels = make_development(rng)
    write_arff(out / "ckd_development_synthetic.arff", columns, labels)

    rows, n_pos = make_external(rng)
    with open(out / "external_cohort_synthetic.csv", "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=list(rows[0].keys()), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    print(f"development: {len(labels)} rows; external: {len(rows)} rows, {n_pos} eGFR<60")


if __name__ == "__main__":
    main()
