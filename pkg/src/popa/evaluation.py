"""Identification and permanence evaluation.

Protocol: repeated stratified k-fold cross-validation over frame (or window)
instances, one confusion matrix accumulated across every repeat and fold,
then one-vs-rest per-subject rates:

    TPR(s) = diag(s) / row(s)          FNR(s) = 1 - TPR(s)
    FPR(s) = (col(s) - diag(s)) / (total - row(s))

Macro metrics are unweighted means over subjects. The permanence experiment
trains one identification model on every subject's first session and tests
on the second.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .classify import AlgorithmSpec, Dataset, predict_batch, train_model
from .errors import ClassTooSmall, SubjectMismatch
from .features import frames_to_matrix, window_features, windows
from .ingest import SessionRecording
from .rng import derive_seed

# offset separating model-training seed streams from fold-shuffle streams
_MODEL_SEED_STREAM = 1 << 32


@dataclass
class FoldPlan:
    """Per-repeat fold assignment; folds partition instances and per-class
    fold sizes differ by at most one."""

    repeats: int
    k: int
    assignment: list[np.ndarray]


@dataclass
class EvalReport:
    labels: tuple[str, ...]
    confusion: np.ndarray  # (L, L) int64, rows true, cols predicted
    tpr: np.ndarray
    fpr: np.ndarray
    fnr: np.ndarray
    metadata: dict = field(default_factory=dict)
    single_class: bool = False

    @property
    def macro_tpr(self) -> float:
        return float(self.tpr.mean())

    @property
    def macro_fpr(self) -> float:
        return float(self.fpr.mean())

    @property
    def macro_fnr(self) -> float:
        return float(self.fnr.mean())


def stratified_folds(labels: Sequence[str], k: int, seed: int) -> np.ndarray:
    """Single-repeat fold assignment: seeded shuffle within each class, then
    round-robin over folds 0..k-1. Classes are visited in canonical order."""
    if k < 1:
        raise ValueError("k must be >= 1")
    labels = list(labels)
    classes = sorted(set(labels))
    by_class: dict[str, list[int]] = {c: [] for c in classes}
    for i, lab in enumerate(labels):
        by_class[lab].append(i)
    for c in classes:
        if len(by_class[c]) < k:
            raise ClassTooSmall(c, len(by_class[c]), k)
    rng = np.random.default_rng(seed)
    assignment = np.empty(len(labels), dtype=np.int32)
    for c in classes:
        idx = np.asarray(by_class[c])
        idx = idx[rng.permutation(len(idx))]
        for j, i in enumerate(idx):
            assignment[i] = j % k
    return assignment


def fold_plan(labels: Sequence[str], repeats: int, k: int, seed: int) -> FoldPlan:
    return FoldPlan(
        repeats=repeats,
        k=k,
        assignment=[stratified_folds(labels, k, derive_seed(seed, r)) for r in range(repeats)],
    )


def _metrics(labels, confusion, metadata) -> EvalReport:
    L = len(labels)
    diag = np.diag(confusion).astype(np.float64)
    row = confusion.sum(axis=1).astype(np.float64)
    col = confusion.sum(axis=0).astype(np.float64)
    total = float(confusion.sum())
    tpr = np.divide(diag, row, out=np.zeros(L), where=row > 0)
    fnr = 1.0 - tpr
    rest = total - row
    fpr = np.divide(col - diag, rest, out=np.zeros(L), where=rest > 0)
    return EvalReport(
        labels=tuple(labels),
        confusion=confusion,
        tpr=tpr,
        fpr=fpr,
        fnr=fnr,
        metadata=metadata,
        single_class=(L == 1),
    )


def cross_validate(
    data: Dataset,
    algorithm: AlgorithmSpec,
    repeats: int = 10,
    k: int = 10,
    seed: int = 1,
) -> EvalReport:
    """Repeated stratified k-fold CV; deterministic given seed."""
    if k < 2:
        raise ValueError("cross-validation needs k >= 2")
    labels_seq = data.label_strings()
    plan = fold_plan(labels_seq, repeats, k, seed)
    confusion = np.zeros((data.n_labels, data.n_labels), dtype=np.int64)
    for r in range(repeats):
        assignment = plan.assignment[r]
        for f in range(k):
            test_idx = np.flatnonzero(assignment == f)
            train_idx = np.flatnonzero(assignment != f)
            train_set = data.subset(train_idx)
            if train_set.labels != data.labels:
                raise AssertionError("stratification lost a class from a training fold")
            model = train_model(
                train_set,
                algorithm,
                seed=derive_seed(seed, _MODEL_SEED_STREAM + r * k + f),
            )
            pred = predict_batch(model, data.X[test_idx])
            true = data.y[test_idx]
            np.add.at(confusion, (true, pred), 1)
    return _metrics(
        data.labels,
        confusion,
        {
            "mode": "cv",
            "algorithm": algorithm.name,
            "repeats": repeats,
            "k": k,
            "seed": seed,
        },
    )


def permanence_eval(
    train: Mapping[str, SessionRecording],
    test: Mapping[str, SessionRecording],
    algorithm: AlgorithmSpec,
    seed: int = 1,
    feature_mode: str = "frame",
    window_len: int = 20,
) -> EvalReport:
    """Train one identification model on session 1, evaluate on session 2."""
    if set(train) != set(test):
        missing = set(train) ^ set(test)
        raise SubjectMismatch(f"subject sets differ: {sorted(missing)}")
    train_set = dataset_from_recordings(train.values(), feature_mode, window_len)
    test_set = dataset_from_recordings(test.values(), feature_mode, window_len)
    model = train_model(train_set, algorithm, seed=seed)
    confusion = np.zeros((train_set.n_labels, train_set.n_labels), dtype=np.int64)
    pred = predict_batch(model, test_set.X)
    # map test codes into the training label order (same subject set)
    remap = np.asarray(
        [train_set.labels.index(lab) for lab in test_set.labels], dtype=np.int32
    )
    np.add.at(confusion, (remap[test_set.y], pred), 1)
    return _metrics(
        train_set.labels,
        confusion,
        {
            "mode": "permanence",
            "algorithm": algorithm.name,
            "seed": seed,
        },
    )


def dataset_from_recordings(
    recordings,
    feature_mode: str = "frame",
    window_len: int = 20,
    stride: int | None = None,
) -> Dataset:
    """Pool recordings into instances labeled by subject.

    frame mode: one instance per frame (16 normalized readings);
    window mode: one 64-vector of per-sensor (mean, std, min, max) per window.
    """
    mats = []
    labels = []
    for rec in recordings:
        if feature_mode == "frame":
            mats.append(frames_to_matrix(rec.frames))
            labels.extend([rec.subject_id] * len(rec.frames))
        elif feature_mode == "window":
            wins = windows(rec.frames, window_len, stride)
            mats.append(np.asarray([window_features(w) for w in wins]))
            labels.extend([rec.subject_id] * len(wins))
        else:
            raise ValueError(f"unknown feature_mode {feature_mode!r}")
    X = np.concatenate([m for m in mats if len(m)]) if labels else np.empty((0, 16))
    return Dataset(X, labels)


def report_csv(report: EvalReport) -> str:
    """One row per subject plus a MACRO row, 4-decimal fixed formatting."""
    lines = ["subject,tpr,fpr,fnr"]
    for i, lab in enumerate(report.labels):
        lines.append(
            f"{lab},{report.tpr[i]:.4f},{report.fpr[i]:.4f},{report.fnr[i]:.4f}"
        )
    lines.append(
        f"MACRO,{report.macro_tpr:.4f},{report.macro_fpr:.4f},{report.macro_fnr:.4f}"
    )
    return "\n".join(lines) + "\n"
