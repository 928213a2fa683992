"""Random forest of CART trees.

Reproducibility contract: tree i of a forest uses the splitmix-derived
sub-seed ``mix64(seed XOR i)``. Its stream first yields the n bootstrap
draws, then the per-node candidate-feature draws in depth-first order
(left child first). ``bootstrap_indices`` replays the bootstrap part in
pure Python so tests can reconstruct out-of-bag sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..rng import SplitMix64, derive_seed
from .dataset import Dataset, rank_encode
from .kernels import build_tree as _build_tree_kernel


@dataclass
class DecisionTree:
    """Flat-array binary CART tree.

    Internal nodes have feature >= 0; children indices point into the same
    arrays. Leaves carry label-count maps (sparse, codes into the training
    label tuple) and a precomputed majority code (ties to the canonically
    smaller label).
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    leaf_majority: np.ndarray
    cnt_off: np.ndarray
    cnt_len: np.ndarray
    cnt_lab: np.ndarray
    cnt_val: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def is_leaf(self, node: int) -> bool:
        return self.feature[node] < 0

    def leaf_counts(self, node: int) -> dict[int, int]:
        off = int(self.cnt_off[node])
        ln = int(self.cnt_len[node])
        return {
            int(self.cnt_lab[off + j]): int(self.cnt_val[off + j]) for j in range(ln)
        }

    def predict_code(self, x) -> int:
        node = 0
        while self.feature[node] >= 0:
            if x[self.feature[node]] < self.threshold[node]:
                node = int(self.left[node])
            else:
                node = int(self.right[node])
        return int(self.leaf_majority[node])

    def depth(self) -> int:
        depths = {0: 0}
        best = 0
        for node in range(self.n_nodes):
            d = depths[node]
            best = max(best, d)
            if self.feature[node] >= 0:
                depths[int(self.left[node])] = d + 1
                depths[int(self.right[node])] = d + 1
        return best

    def validate(self, feature_dim: int) -> None:
        for node in range(self.n_nodes):
            if self.feature[node] >= 0:
                if not 0 <= self.feature[node] < feature_dim:
                    raise AssertionError(f"feature index out of range at node {node}")
                if self.left[node] < 0 or self.right[node] < 0:
                    raise AssertionError(f"internal node {node} missing a child")
            else:
                if sum(self.leaf_counts(node).values()) < 1:
                    raise AssertionError(f"leaf {node} has empty counts")


def default_mtry(feature_dim: int) -> int:
    return math.ceil(math.sqrt(feature_dim))


def per_tree_seed(seed: int, index: int) -> int:
    return derive_seed(seed, index)


def bootstrap_indices(tree_seed: int, n: int) -> list[int]:
    """The n with-replacement draws tree building performs first."""
    stream = SplitMix64(tree_seed)
    return [stream.rand_below(n) for _ in range(n)]


def _train_tree_encoded(codes_t, vals, voff, y, n_labels, mtry, max_depth, min_leaf, seed, bootstrap) -> DecisionTree:
    out = _build_tree_kernel(
        codes_t,
        vals,
        voff,
        np.ascontiguousarray(y, dtype=np.int32),
        n_labels,
        mtry,
        max_depth,
        min_leaf,
        np.uint64(seed),
        bootstrap,
    )
    return DecisionTree(*out)


def train_tree(
    data: Dataset,
    max_depth: int = 16,
    min_leaf: int = 1,
    mtry: int | None = None,
    seed: int = 0,
) -> DecisionTree:
    """Recursive CART on the given data (no bootstrap).

    At each node mtry candidate features are drawn without replacement from
    the seeded stream; the best split follows splitting.best_split semantics.
    """
    if len(data) == 0:
        raise ValueError("train_tree needs a nonempty dataset")
    if mtry is None:
        mtry = default_mtry(data.feature_dim)
    if not 1 <= mtry <= data.feature_dim:
        raise ValueError(f"mtry {mtry} outside 1..{data.feature_dim}")
    if max_depth < 1 or min_leaf < 1:
        raise ValueError("max_depth and min_leaf must be >= 1")
    codes_t, vals, voff = rank_encode(data.X)
    return _train_tree_encoded(
        codes_t, vals, voff, data.y, data.n_labels, mtry, max_depth, min_leaf, seed, False
    )


@dataclass
class ForestPayload:
    trees: list[DecisionTree]
    # concatenated arrays for fast batch prediction (child indices globalized)
    _flat: tuple | None = field(default=None, repr=False, compare=False)

    def flat(self):
        if self._flat is None:
            offs = [0]
            for t in self.trees:
                offs.append(offs[-1] + t.n_nodes)
            tree_off = np.asarray(offs, dtype=np.int64)
            feature = np.concatenate([t.feature for t in self.trees])
            thr = np.concatenate([t.threshold for t in self.trees])
            left = np.concatenate(
                [t.left + off for t, off in zip(self.trees, offs)]
            ).astype(np.int32)
            right = np.concatenate(
                [t.right + off for t, off in zip(self.trees, offs)]
            ).astype(np.int32)
            leaf_maj = np.concatenate([t.leaf_majority for t in self.trees])
            self._flat = (feature, thr, left, right, leaf_maj, tree_off)
        return self._flat


def train_forest_payload(
    data: Dataset,
    n_trees: int,
    mtry: int | None,
    max_depth: int,
    min_leaf: int,
    seed: int,
) -> ForestPayload:
    if len(data) == 0:
        raise ValueError("train_forest needs a nonempty dataset")
    if mtry is None:
        mtry = default_mtry(data.feature_dim)
    if not 1 <= mtry <= data.feature_dim:
        raise ValueError(f"mtry {mtry} outside 1..{data.feature_dim}")
    if n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    codes_t, vals, voff = rank_encode(data.X)
    trees = []
    for i in range(n_trees):
        trees.append(
            _train_tree_encoded(
                codes_t,
                vals,
                voff,
                data.y,
                data.n_labels,
                mtry,
                max_depth,
                min_leaf,
                per_tree_seed(seed, i),
                True,
            )
        )
    return ForestPayload(trees)
