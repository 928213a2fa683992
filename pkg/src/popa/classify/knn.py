"""k-nearest-neighbors: a lazy model storing the training set.

Prediction is brute-force euclidean distance; equal distances resolve to the
smaller training-instance index, vote ties to the canonically smaller label.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import KTooLarge
from .dataset import Dataset


@dataclass
class KnnPayload:
    X: np.ndarray
    y: np.ndarray
    k: int


def make_knn_payload(data: Dataset, k: int) -> KnnPayload:
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > len(data):
        raise KTooLarge(f"k={k} exceeds {len(data)} training instances")
    return KnnPayload(data.X, data.y, k)
