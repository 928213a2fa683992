"""One-vs-one linear SVM trained by stochastic subgradient descent.

One separator per unordered label pair (a, b) with a < b in canonical code
order; the positive class is a. Pair p trains from the splitmix-derived
sub-seed ``mix64(seed XOR p)`` with pairs enumerated (0,1), (0,2), ...,
(L-2, L-1). Prediction: each separator votes a when w.x + b >= 0, else b;
majority wins, ties to the canonically smaller label.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import SingleClass
from ..rng import derive_seed
from .dataset import Dataset
from .kernels import pegasos_pair


@dataclass
class SvmPayload:
    pairs: list[tuple[int, int]]  # label-code pairs, a < b
    W: np.ndarray  # (n_pairs, d)
    B: np.ndarray  # (n_pairs,)
    lam: float
    epochs: int


def make_svm_payload(data: Dataset, lam: float, epochs: int, seed: int) -> SvmPayload:
    if data.n_labels < 2:
        raise SingleClass("one-vs-one SVM needs at least two labels")
    if lam <= 0 or epochs < 1:
        raise ValueError("lambda must be > 0 and epochs >= 1")
    pairs = [
        (a, b)
        for a in range(data.n_labels)
        for b in range(a + 1, data.n_labels)
    ]
    W = np.zeros((len(pairs), data.feature_dim))
    B = np.zeros(len(pairs))
    for p, (a, b) in enumerate(pairs):
        mask = (data.y == a) | (data.y == b)
        Xp = np.ascontiguousarray(data.X[mask])
        ysign = np.where(data.y[mask] == a, 1.0, -1.0)
        w, bias = pegasos_pair(Xp, ysign, lam, epochs, np.uint64(derive_seed(seed, p)))
        W[p] = w
        B[p] = bias
    return SvmPayload(pairs, W, B, lam, epochs)


def svm_votes(payload: SvmPayload, X: np.ndarray, n_labels: int) -> np.ndarray:
    margins = X @ payload.W.T + payload.B
    votes = np.zeros((X.shape[0], n_labels), dtype=np.int32)
    for p, (a, b) in enumerate(payload.pairs):
        pos = margins[:, p] >= 0
        votes[pos, a] += 1
        votes[~pos, b] += 1
    return votes
