"""Labeled feature-vector collections used by all classifiers."""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np


class Dataset:
    """Instances as an (n, d) float64 matrix plus canonical label codes.

    Labels are kept as a tuple sorted by string order; ``y`` holds the code
    of each instance into that tuple. Canonical ordering is the tie-break
    basis for every classifier, so it is fixed here once.
    """

    def __init__(self, X: np.ndarray, labels: Sequence[str]):
        X = np.ascontiguousarray(np.asarray(X, dtype=np.float64))
        if X.ndim != 2:
            raise ValueError("X must be a 2-D array")
        if X.shape[0] != len(labels):
            raise ValueError(f"{X.shape[0]} rows but {len(labels)} labels")
        self.X = X
        self.labels: tuple[str, ...] = tuple(sorted(set(labels)))
        index = {lab: i for i, lab in enumerate(self.labels)}
        self.y = np.fromiter((index[lab] for lab in labels), dtype=np.int32, count=len(labels))

    @classmethod
    def from_pairs(cls, instances: Iterable[tuple[Sequence[float], str]]) -> "Dataset":
        rows, labs = [], []
        for vec, lab in instances:
            rows.append(vec)
            labs.append(lab)
        if not rows:
            raise ValueError("cannot infer feature_dim from zero instances")
        return cls(np.asarray(rows, dtype=np.float64), labs)

    @property
    def feature_dim(self) -> int:
        return self.X.shape[1]

    @property
    def n_labels(self) -> int:
        return len(self.labels)

    def __len__(self) -> int:
        return self.X.shape[0]

    def label_of(self, code: int) -> str:
        return self.labels[code]

    def label_strings(self) -> list[str]:
        return [self.labels[c] for c in self.y]

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.X[idx], [self.labels[c] for c in self.y[idx]])


def rank_encode(X: np.ndarray):
    """Per-feature dense rank codes over sorted distinct values.

    Returns (codes_t, vals, voff): codes_t is (d, n) int32; feature f's
    distinct values sit in vals[voff[f]:voff[f+1]] ascending, and
    vals[voff[f] + codes_t[f, i]] == X[i, f] exactly.
    """
    n, d = X.shape
    codes_t = np.empty((d, n), dtype=np.int32)
    vals_parts = []
    voff = np.zeros(d + 1, dtype=np.int64)
    for f in range(d):
        uniq, inv = np.unique(X[:, f], return_inverse=True)
        codes_t[f] = inv.astype(np.int32)
        vals_parts.append(uniq)
        voff[f + 1] = voff[f] + len(uniq)
    vals = np.concatenate(vals_parts) if vals_parts else np.empty(0, dtype=np.float64)
    return codes_t, vals, voff
