#!/usr/bin/env python3
"""Freezes tests/data/hdbscan_golden.jsonl from scikit-learn's HDBSCAN on
precomputed Euclidean distances (min_samples = min_cluster_size, excess of
mass, single clusters not allowed).

Point sets are random Gaussian blobs. Cases whose spanning tree has two
edges of equal weight are skipped: the reference sorts tree edges with an
unstable sort, so its merge order among ties is not defined. Labels are renumbered by smallest member index; noise stays -1.
"""
import json
import os
import sys

import numpy as np
from sklearn.cluster import HDBSCAN
from sklearn.cluster._hdbscan._linkage import mst_from_mutual_reachability

HERE = os.path.dirname(os.path.abspath(__file__))
ROOT = os.path.dirname(os.path.dirname(HERE))


def distances(points):
    n = len(points)
    d = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d[i, j] = d[j, i] = np.sqrt(sum((a - b) * (a - b) for a, b in zip(points[i], points[j])))
    return d


def renumber(labels):
    ids, out = {}, []
    for lab in labels:
        if lab < 0:
            out.append(-1)
        else:
            out.append(ids.setdefault(int(lab), len(ids)))
    return out


def make_case(rng):
    dim = int(rng.integers(2, 9))
    blobs = int(rng.integers(1, 6))
    n = int(rng.integers(3, 61))
    centers = rng.normal(0.0, 6.0, size=(blobs, dim))
    spread = rng.uniform(0.2, 2.0, size=blobs)
    pts = [centers[k] + rng.normal(0.0, spread[k], size=dim) for k in rng.integers(0, blobs, size=n)]
    return [[float(round(x, 6)) for x in p] for p in pts], int(rng.integers(2, 7))


def tree_has_ties(points, mcs):
    d = distances(points)
    core = np.sort(d, axis=1)[:, mcs - 1]
    m = np.maximum(np.maximum(core[:, None], core[None, :]), d)
    weights = [e["distance"] for e in mst_from_mutual_reachability(m)]
    return len(set(weights)) != len(weights)


def main():
    out_path = sys.argv[1] if len(sys.argv) > 1 else os.path.join(ROOT, "tests", "data", "hdbscan_golden.jsonl")
    rng = np.random.default_rng(20240611)
    with open(out_path, "w", encoding="utf-8", newline="\n") as out:
        written = 0
        while written < 100:
            points, mcs = make_case(rng)
            if len(points) >= mcs and tree_has_ties(points, mcs):
                continue
            written += 1
            if len(points) < mcs:
                labels = [-1] * len(points)
            else:
                model = HDBSCAN(min_cluster_size=mcs, min_samples=mcs, metric="precomputed",
                                cluster_selection_method="eom", allow_single_cluster=False)
                labels = renumber(model.fit_predict(distances(points)))
            out.write(json.dumps({"min_cluster_size": mcs, "points": points, "labels": labels}) + "\n")


if __name__ == "__main__":
    main()
