#!/usr/bin/env python3
"""Build the bundled benchmark CSVs under data/ from raw UCI/KEEL source files.

Usage: prepare_datasets.py RAW_DIR OUT_DIR

RAW_DIR must contain:
  biopsy.csv            Wisconsin breast cancer (original, 699 rows, R MASS copy)
  pima.dat bupa.dat heart.dat saheart.dat   KEEL copies of the UCI sets
  hepatitis.data.txt    UCI hepatitis (class first, '?' for missing)
  SPECTF.train.txt SPECTF.test.txt           UCI SPECTF (class first)

Every dataset is re-split into train/test with the row counts of the
benchmark table, stratified by class, using a fixed seed.
"""
import csv
import os
import sys

import numpy as np

SEED = 2020
MISSING = "?"


def read_rows(path, sep=","):
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("@"):
                continue
            rows.append([c.strip() for c in line.split(sep)])
    return rows


def wisconsin(raw):
    rows = []
    with open(os.path.join(raw, "biopsy.csv")) as fh:
        reader = csv.reader(fh)
        next(reader)
        for r in reader:
            feats = [MISSING if v == "NA" else v for v in r[2:11]]
            rows.append(feats + [r[11]])
    names = ["clump_thickness", "cell_size", "cell_shape", "adhesion",
             "epithelial_size", "bare_nuclei", "bland_chromatin",
             "normal_nucleoli", "mitoses"]
    return names, rows


def keel(raw, name, names, encode=None):
    rows = read_rows(os.path.join(raw, name + ".dat"))
    if encode:
        rows = [encode(r) for r in rows]
    return names, rows


def saheart_encode(r):
    r = list(r)
    r[4] = {"Present": "1", "Absent": "0"}[r[4]]
    return r


def class_first(raw, files, names):
    rows = []
    for f in files:
        for r in read_rows(os.path.join(raw, f)):
            rows.append(r[1:] + [r[0]])
    return names, rows


def split(rows, n_train, n_test, rng):
    labels = sorted({r[-1] for r in rows})
    total = len(rows)
    assert total == n_train + n_test, (total, n_train, n_test)
    by_label = {lab: [i for i, r in enumerate(rows) if r[-1] == lab] for lab in labels}
    # largest-remainder allocation of training rows per class
    quotas = {lab: len(ix) * n_train / total for lab, ix in by_label.items()}
    alloc = {lab: int(q) for lab, q in quotas.items()}
    rest = n_train - sum(alloc.values())
    for lab in sorted(labels, key=lambda l: quotas[l] - alloc[l], reverse=True)[:rest]:
        alloc[lab] += 1
    train, test = [], []
    for lab in labels:
        ix = np.array(by_label[lab])
        rng.shuffle(ix)
        train.extend(ix[: alloc[lab]].tolist())
        test.extend(ix[alloc[lab]:].tolist())
    train.sort()
    test.sort()
    return [rows[i] for i in train], [rows[i] for i in test]


def write(path, names, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names + ["class"])
        w.writerows(rows)


def main():
    raw, out = sys.argv[1], sys.argv[2]
    sets = {
        "wisconsin": (wisconsin(raw), 499, 200),
        "pima": (keel(raw, "pima", ["preg", "plas", "pres", "skin", "insu", "mass", "pedi", "age"]), 576, 192),
        "bupa": (keel(raw, "bupa", ["mcv", "alkphos", "sgpt", "sgot", "gammagt", "drinks"]), 200, 145),
        "hepatitis": (class_first(raw, ["hepatitis.data.txt"],
                                  ["age", "sex", "steroid", "antivirals", "fatigue", "malaise",
                                   "anorexia", "liver_big", "liver_firm", "spleen_palpable",
                                   "spiders", "ascites", "varices", "bilirubin", "alk_phosphate",
                                   "sgot", "albumin", "protime", "histology"]), 80, 75),
        "heart": (keel(raw, "heart", ["age", "sex", "chest_pain", "rest_bp", "chol", "fbs",
                                      "rest_ecg", "max_hr", "ex_angina", "oldpeak", "slope",
                                      "major_vessels", "thal"]), 180, 90),
        "spectf": (class_first(raw, ["SPECTF.train.txt", "SPECTF.test.txt"],
                               [f"f{i}{s}" for i in range(1, 23) for s in ("r", "s")]), 176, 91),
        "saheart": (keel(raw, "saheart", ["sbp", "tobacco", "ldl", "adiposity", "famhist",
                                          "typea", "obesity", "alcohol", "age"], saheart_encode), 304, 158),
    }
    for name, ((names, rows), n_train, n_test) in sets.items():
        rng = np.random.RandomState(SEED)
        train, test = split(rows, n_train, n_test, rng)
        os.makedirs(os.path.join(out, name), exist_ok=True)
        write(os.path.join(out, name, "train.csv"), names, train)
        write(os.path.join(out, name, "test.csv"), names, test)
        print(f"{name}: {len(names)} features, {len(train)} train, {len(test)} test")


if __name__ == "__main__":
    main()
