"""On-disk subject profiles: enrollment frames plus model provenance.

A profile file (``<subject_id>.popa-profile``) is all text, LF endings:
a versioned header, a key=value metadata block (timestamps, seed, algorithm
hyperparameters, frame count), then the enrollment recording embedded in the
canonical CSV format. Models are never persisted; they are reconstructed by
deterministic retraining from the stored frames and seed. Writes go to a
temp file in the same directory followed by an atomic rename.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, replace
from pathlib import Path

from .classify import AlgorithmSpec, Dataset
from .errors import (
    CorruptProfile,
    DuplicateSubject,
    InvalidSubjectId,
    IoFailure,
    VersionMismatch,
)
from .features import frames_to_matrix
from .ingest import MAGIC as RECORDING_MAGIC
from .ingest import SessionRecording, parse_csv, write_csv

PROFILE_MAGIC = "#popa-profile v1"
PROFILE_SUFFIX = ".popa-profile"

_SUBJECT_RE = re.compile(r"^[A-Za-z0-9_-]+$")


@dataclass(frozen=True)
class SubjectProfile:
    subject_id: str
    recording: SessionRecording  # enrollment frames
    algorithm: AlgorithmSpec
    seed: int
    created: str  # ISO-8601 text
    updated: str

    def __post_init__(self):
        if not _SUBJECT_RE.match(self.subject_id):
            raise InvalidSubjectId(
                f"subject id {self.subject_id!r} must match [A-Za-z0-9_-]+"
            )


def profile_dataset(profile: SubjectProfile) -> Dataset:
    """Enrollment frames as normalized instances labeled by the subject."""
    X = frames_to_matrix(profile.recording.frames)
    return Dataset(X, [profile.subject_id] * len(X))


def _algo_lines(spec: AlgorithmSpec) -> list[str]:
    return [
        f"algorithm={spec.name}",
        f"n_trees={spec.n_trees}",
        f"mtry={'none' if spec.mtry is None else spec.mtry}",
        f"max_depth={spec.max_depth}",
        f"min_leaf={spec.min_leaf}",
        f"svm_lambda={spec.svm_lambda!r}",
        f"svm_epochs={spec.svm_epochs}",
    ]


def _algo_from_kv(kv: dict) -> AlgorithmSpec:
    mtry = kv.get("mtry", "none")
    return AlgorithmSpec.from_name(
        kv.get("algorithm", "rf"),
        n_trees=int(kv.get("n_trees", 100)),
        mtry=None if mtry == "none" else int(mtry),
        max_depth=int(kv.get("max_depth", 16)),
        min_leaf=int(kv.get("min_leaf", 1)),
        svm_lambda=float(kv.get("svm_lambda", 1e-3)),
        svm_epochs=int(kv.get("svm_epochs", 50)),
    )


def profile_to_text(profile: SubjectProfile) -> str:
    lines = [
        PROFILE_MAGIC,
        f"subject={profile.subject_id}",
        f"created={profile.created}",
        f"updated={profile.updated}",
        f"seed={profile.seed}",
        *_algo_lines(profile.algorithm),
        f"frames={len(profile.recording.frames)}",
    ]
    return "\n".join(lines) + "\n" + write_csv(profile.recording)


def profile_from_text(text: str, path="<text>") -> SubjectProfile:
    lines = text.splitlines()
    if not lines:
        raise CorruptProfile(path, 1, "empty file")
    if lines[0] != PROFILE_MAGIC:
        if lines[0].startswith("#popa-profile"):
            raise VersionMismatch(f"{path}: unsupported {lines[0]!r}")
        raise CorruptProfile(path, 1, f"expected header {PROFILE_MAGIC!r}")
    kv = {}
    body_start = None
    for i, line in enumerate(lines[1:], start=2):
        if line == RECORDING_MAGIC:
            body_start = i
            break
        if not line.strip():
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise CorruptProfile(path, i, f"expected key=value, got {line!r}")
        kv[key] = val
    if body_start is None:
        raise CorruptProfile(path, len(lines), "missing embedded recording")
    for required in ("subject", "created", "updated", "seed", "frames"):
        if required not in kv:
            raise CorruptProfile(path, body_start, f"missing field {required!r}")
    try:
        recording = parse_csv("\n".join(lines[body_start - 1 :]) + "\n")
    except Exception as exc:
        line_no = getattr(exc, "line_no", 1) + body_start - 1
        raise CorruptProfile(path, line_no, str(exc)) from None
    if len(recording.frames) != int(kv["frames"]):
        raise CorruptProfile(
            path,
            body_start,
            f"frame count {len(recording.frames)} != declared {kv['frames']}",
        )
    if recording.subject_id != kv["subject"]:
        raise CorruptProfile(path, 2, "metadata subject differs from recording subject")
    return SubjectProfile(
        subject_id=kv["subject"],
        recording=recording,
        algorithm=_algo_from_kv(kv),
        seed=int(kv["seed"]),
        created=kv["created"],
        updated=kv["updated"],
    )


def profile_path(directory, subject_id: str) -> Path:
    return Path(directory) / f"{subject_id}{PROFILE_SUFFIX}"


def save_profile(profile: SubjectProfile, directory) -> Path:
    """Write <subject_id>.popa-profile atomically; returns the path."""
    directory = Path(directory)
    target = profile_path(directory, profile.subject_id)
    tmp = directory / f".{profile.subject_id}.tmp-{os.getpid()}"
    try:
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(profile_to_text(profile))
        os.replace(tmp, target)
    except OSError as exc:
        try:
            tmp.unlink(missing_ok=True)
        except OSError:
            pass
        raise IoFailure(f"cannot write profile {target}: {exc}") from exc
    return target


def load_profile(path) -> SubjectProfile:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot read profile {path}: {exc}") from exc
    return profile_from_text(text, path)


def list_profiles(directory) -> list[tuple[str, Path]]:
    """(subject_id, path) pairs sorted by subject id; non-profile files are
    ignored, duplicate subject ids are an error."""
    directory = Path(directory)
    try:
        candidates = sorted(p for p in directory.iterdir() if p.name.endswith(PROFILE_SUFFIX))
    except OSError as exc:
        raise IoFailure(f"cannot list {directory}: {exc}") from exc
    seen: dict[str, Path] = {}
    for p in candidates:
        try:
            text = p.read_text(encoding="utf-8")
        except OSError as exc:
            raise IoFailure(f"cannot read {p}: {exc}") from exc
        lines = text.splitlines()
        if not lines or lines[0] != PROFILE_MAGIC:
            if lines and lines[0].startswith("#popa-profile"):
                raise VersionMismatch(f"{p}: unsupported {lines[0]!r}")
            raise CorruptProfile(p, 1, f"expected header {PROFILE_MAGIC!r}")
        subject = None
        for line in lines[1:]:
            if line.startswith("subject="):
                subject = line.partition("=")[2]
                break
        if not subject:
            raise CorruptProfile(p, 2, "missing subject field")
        if subject in seen:
            raise DuplicateSubject(
                f"subject {subject!r} appears in both {seen[subject]} and {p}"
            )
        seen[subject] = p
    return sorted(seen.items())


def touch_updated(profile: SubjectProfile, timestamp: str) -> SubjectProfile:
    return replace(profile, updated=timestamp)
