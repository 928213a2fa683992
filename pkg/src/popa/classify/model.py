"""Trained-model container, prediction, and versioned text serialization.

All three classifier families sit behind TrainedModel; prediction resolves
vote ties to the canonically smaller label (labels are stored sorted).
Model files are byte-stable: floats are written with repr() (shortest
round-trip form) and every sequence has a fixed order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import DimensionMismatch, MalformedRow
from .dataset import Dataset
from .forest import DecisionTree, ForestPayload, default_mtry, train_forest_payload
from .kernels import forest_votes, knn_votes
from .knn import KnnPayload, make_knn_payload
from .svm import SvmPayload, make_svm_payload, svm_votes

MODEL_MAGIC = "#popa-model v1"

ALGORITHM_NAMES = ("rf", "knn1", "knn3", "knn5", "svm")


@dataclass(frozen=True)
class AlgorithmSpec:
    """Training recipe: classifier family plus hyperparameters."""

    kind: str = "rf"  # rf | knn | svm
    n_trees: int = 100
    mtry: int | None = None  # None -> ceil(sqrt(feature_dim))
    max_depth: int = 16
    min_leaf: int = 1
    k: int = 3
    svm_lambda: float = 1e-3
    svm_epochs: int = 50

    @classmethod
    def from_name(cls, name: str, **overrides) -> "AlgorithmSpec":
        if name == "rf":
            return cls(kind="rf", **overrides)
        if name in ("knn1", "knn3", "knn5"):
            return cls(kind="knn", k=int(name[3:]), **overrides)
        if name == "svm":
            return cls(kind="svm", **overrides)
        raise ValueError(f"unknown algorithm {name!r}; expected one of {ALGORITHM_NAMES}")

    @property
    def name(self) -> str:
        if self.kind == "knn":
            return f"knn{self.k}"
        return self.kind


@dataclass
class Prediction:
    label: str
    scores: dict[str, float]


@dataclass
class TrainedModel:
    algorithm: str  # forest | knn | svm
    labels: tuple[str, ...]
    feature_dim: int
    seed: int
    payload: object
    hyperparams: dict = field(default_factory=dict)


def train_forest(
    data: Dataset,
    n_trees: int = 100,
    mtry: int | None = None,
    max_depth: int = 16,
    min_leaf: int = 1,
    seed: int = 0,
) -> TrainedModel:
    payload = train_forest_payload(data, n_trees, mtry, max_depth, min_leaf, seed)
    return TrainedModel(
        algorithm="forest",
        labels=data.labels,
        feature_dim=data.feature_dim,
        seed=seed,
        payload=payload,
        hyperparams={
            "n_trees": n_trees,
            "mtry": mtry if mtry is not None else default_mtry(data.feature_dim),
            "max_depth": max_depth,
            "min_leaf": min_leaf,
        },
    )


def train_knn(data: Dataset, k: int) -> TrainedModel:
    payload = make_knn_payload(data, k)
    return TrainedModel(
        algorithm="knn",
        labels=data.labels,
        feature_dim=data.feature_dim,
        seed=0,
        payload=payload,
        hyperparams={"k": k},
    )


def train_svm_ovo(
    data: Dataset, svm_lambda: float = 1e-3, epochs: int = 50, seed: int = 0
) -> TrainedModel:
    payload = make_svm_payload(data, svm_lambda, epochs, seed)
    return TrainedModel(
        algorithm="svm",
        labels=data.labels,
        feature_dim=data.feature_dim,
        seed=seed,
        payload=payload,
        hyperparams={"lambda": svm_lambda, "epochs": epochs},
    )


def train_model(data: Dataset, spec: AlgorithmSpec, seed: int = 0) -> TrainedModel:
    if spec.kind == "rf":
        return train_forest(
            data,
            n_trees=spec.n_trees,
            mtry=spec.mtry,
            max_depth=spec.max_depth,
            min_leaf=spec.min_leaf,
            seed=seed,
        )
    if spec.kind == "knn":
        return train_knn(data, spec.k)
    if spec.kind == "svm":
        return train_svm_ovo(data, spec.svm_lambda, spec.svm_epochs, seed)
    raise ValueError(f"unknown algorithm kind {spec.kind!r}")


# --- prediction -------------------------------------------------------------

def votes_batch(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    """(n, L) raw vote counts for a batch of query vectors."""
    X = np.ascontiguousarray(np.asarray(X, dtype=np.float64))
    if X.ndim != 2 or X.shape[1] != model.feature_dim:
        raise DimensionMismatch(
            f"expected (*, {model.feature_dim}) queries, got {X.shape}"
        )
    n_labels = len(model.labels)
    if model.algorithm == "forest":
        payload: ForestPayload = model.payload
        feature, thr, left, right, leaf_maj, tree_off = payload.flat()
        return forest_votes(feature, thr, left, right, leaf_maj, tree_off, X, n_labels)
    if model.algorithm == "knn":
        kp: KnnPayload = model.payload
        return knn_votes(kp.X, kp.y, X, kp.k, n_labels)
    if model.algorithm == "svm":
        return svm_votes(model.payload, X, n_labels)
    raise ValueError(f"unknown algorithm {model.algorithm!r}")


def predict_batch(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    """Predicted label codes; argmax takes the first (canonically smallest)
    label on vote ties."""
    votes = votes_batch(model, X)
    return votes.argmax(axis=1).astype(np.int32)


def predict(model: TrainedModel, x: Sequence[float]) -> Prediction:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != model.feature_dim:
        raise DimensionMismatch(
            f"expected a {model.feature_dim}-vector, got shape {x.shape}"
        )
    votes = votes_batch(model, x[None, :])[0]
    total = int(votes.sum())
    scores = {lab: int(v) / total for lab, v in zip(model.labels, votes)}
    code = int(votes.argmax())
    return Prediction(label=model.labels[code], scores=scores)


# --- serialization ----------------------------------------------------------

def _check_label(lab: str) -> str:
    if not lab or any(ch in lab for ch in ",\n\r"):
        raise ValueError(f"label not serializable: {lab!r}")
    return lab


def _tree_to_text(tree: DecisionTree) -> str:
    parts = []
    stack = [0]
    while stack:
        node = stack.pop()
        if tree.feature[node] >= 0:
            parts.append(f"I{int(tree.feature[node])}:{float(tree.threshold[node])!r}")
            stack.append(int(tree.right[node]))
            stack.append(int(tree.left[node]))
        else:
            counts = tree.leaf_counts(node)
            body = "|".join(f"{c}:{counts[c]}" for c in sorted(counts))
            parts.append(f"L{body}")
    return ";".join(parts)


def _tree_from_text(text: str) -> DecisionTree:
    tokens = text.split(";")
    feature, thr, left, right = [], [], [], []
    leaf_maj, cnt_off, cnt_len = [], [], []
    cnt_lab, cnt_val = [], []
    pending: list[tuple[int, int]] = []  # (parent id, 0=left 1=right)

    for tok in tokens:
        nid = len(feature)
        if pending:
            parent, side = pending.pop()
            if side == 0:
                left[parent] = nid
            else:
                right[parent] = nid
        if tok.startswith("I"):
            head, _, t = tok[1:].partition(":")
            feature.append(int(head))
            thr.append(float(t))
            left.append(-1)
            right.append(-1)
            leaf_maj.append(-1)
            cnt_off.append(0)
            cnt_len.append(0)
            pending.append((nid, 1))
            pending.append((nid, 0))
        elif tok.startswith("L"):
            feature.append(-1)
            thr.append(0.0)
            left.append(-1)
            right.append(-1)
            off = len(cnt_lab)
            best_count = -1
            maj = -1
            for pair in tok[1:].split("|"):
                c, _, v = pair.partition(":")
                code, count = int(c), int(v)
                cnt_lab.append(code)
                cnt_val.append(count)
                if count > best_count:
                    best_count = count
                    maj = code
            leaf_maj.append(maj)
            cnt_off.append(off)
            cnt_len.append(len(cnt_lab) - off)
        else:
            raise ValueError(f"bad tree node token {tok!r}")
    if pending:
        raise ValueError("truncated tree text")
    return DecisionTree(
        np.asarray(feature, dtype=np.int32),
        np.asarray(thr, dtype=np.float64),
        np.asarray(left, dtype=np.int32),
        np.asarray(right, dtype=np.int32),
        np.asarray(leaf_maj, dtype=np.int32),
        np.asarray(cnt_off, dtype=np.int64),
        np.asarray(cnt_len, dtype=np.int32),
        np.asarray(cnt_lab, dtype=np.int32),
        np.asarray(cnt_val, dtype=np.int64),
    )


def model_to_text(model: TrainedModel) -> str:
    for lab in model.labels:
        _check_label(lab)
    lines = [
        MODEL_MAGIC,
        f"algorithm={model.algorithm}",
        f"feature_dim={model.feature_dim}",
        f"seed={model.seed}",
        "labels=" + ",".join(model.labels),
    ]
    if model.algorithm == "forest":
        hp = model.hyperparams
        lines.append(f"n_trees={hp['n_trees']}")
        lines.append(f"mtry={hp['mtry']}")
        lines.append(f"max_depth={hp['max_depth']}")
        lines.append(f"min_leaf={hp['min_leaf']}")
        for tree in model.payload.trees:
            lines.append("tree=" + _tree_to_text(tree))
    elif model.algorithm == "knn":
        kp: KnnPayload = model.payload
        lines.append(f"k={kp.k}")
        for i in range(len(kp.y)):
            row = ",".join(repr(float(v)) for v in kp.X[i])
            lines.append(f"instance={int(kp.y[i])}:{row}")
    elif model.algorithm == "svm":
        sp: SvmPayload = model.payload
        lines.append(f"lambda={float(sp.lam)!r}")
        lines.append(f"epochs={sp.epochs}")
        for p, (a, b) in enumerate(sp.pairs):
            wrow = ",".join(repr(float(v)) for v in sp.W[p])
            lines.append(f"pair={a},{b}:{float(sp.B[p])!r}:{wrow}")
    else:
        raise ValueError(f"unknown algorithm {model.algorithm!r}")
    return "\n".join(lines) + "\n"


def model_from_text(text: str) -> TrainedModel:
    lines = text.splitlines()
    if not lines or lines[0] != MODEL_MAGIC:
        raise MalformedRow(1, f"expected header {MODEL_MAGIC!r}")
    kv: dict[str, str] = {}
    trees = []
    instances = []
    pairs = []
    for line in lines[1:]:
        if not line.strip():
            continue
        key, _, val = line.partition("=")
        if key == "tree":
            trees.append(val)
        elif key == "instance":
            instances.append(val)
        elif key == "pair":
            pairs.append(val)
        else:
            kv[key] = val
    algorithm = kv["algorithm"]
    labels = tuple(kv["labels"].split(","))
    feature_dim = int(kv["feature_dim"])
    seed = int(kv["seed"])

    if algorithm == "forest":
        payload = ForestPayload([_tree_from_text(t) for t in trees])
        hyper = {
            "n_trees": int(kv["n_trees"]),
            "mtry": int(kv["mtry"]),
            "max_depth": int(kv["max_depth"]),
            "min_leaf": int(kv["min_leaf"]),
        }
    elif algorithm == "knn":
        X = np.empty((len(instances), feature_dim))
        y = np.empty(len(instances), dtype=np.int32)
        for i, row in enumerate(instances):
            c, _, vec = row.partition(":")
            y[i] = int(c)
            X[i] = [float(v) for v in vec.split(",")]
        payload = KnnPayload(X, y, int(kv["k"]))
        hyper = {"k": int(kv["k"])}
    elif algorithm == "svm":
        pair_codes = []
        W = np.empty((len(pairs), feature_dim))
        B = np.empty(len(pairs))
        for p, row in enumerate(pairs):
            ab, _, rest = row.partition(":")
            bias, _, wrow = rest.partition(":")
            a, b = ab.split(",")
            pair_codes.append((int(a), int(b)))
            B[p] = float(bias)
            W[p] = [float(v) for v in wrow.split(",")]
        payload = SvmPayload(pair_codes, W, B, float(kv["lambda"]), int(kv["epochs"]))
        hyper = {"lambda": float(kv["lambda"]), "epochs": int(kv["epochs"])}
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}")

    return TrainedModel(
        algorithm=algorithm,
        labels=labels,
        feature_dim=feature_dim,
        seed=seed,
        payload=payload,
        hyperparams=hyper,
    )
