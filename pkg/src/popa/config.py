"""Engine configuration: defaults, key=value files, environment fallback.

Config files are plain ``key=value`` lines with ``#`` comments. Every key
maps to a field of EngineConfig; unknown keys are errors. When no path is
given the ``POPA_CONFIG`` environment variable is consulted before falling
back to defaults.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields

from .classify import AlgorithmSpec
from .session import SessionConfig
from .synth import PopulationParams


@dataclass
class EngineConfig:
    # features
    feature_mode: str = "frame"  # frame | window
    window_len: int = 20
    stride: int | None = None  # None -> window_len
    tau_occupied: int = 400
    # session
    enroll_frames: int = 600
    theta_accept: float = 0.5
    vacancy_grace_windows: int = 0
    retrain_interval_windows: int = 1
    # classifier
    algorithm: str = "rf"
    n_trees: int = 100
    mtry: int | None = None  # None -> ceil(sqrt(feature_dim))
    max_depth: int = 16
    min_leaf: int = 1
    svm_lambda: float = 1e-3
    svm_epochs: int = 50
    # synthesis
    duration_s: float = 600.0
    pop_baseline_lo: float = 360.0
    pop_baseline_hi: float = 540.0
    pop_weak_sensors: int = 6
    pop_weak_baseline_lo: float = 60.0
    pop_weak_baseline_hi: float = 140.0
    pop_weak_posture_scale: float = 0.25
    pop_n_postures_lo: int = 2
    pop_n_postures_hi: int = 3
    pop_posture_sigma: float = 30.0
    pop_dwell_lo: float = 45.0
    pop_dwell_hi: float = 150.0
    pop_shift_lo: float = 1.0
    pop_shift_hi: float = 3.0
    pop_noise_lo: float = 40.0
    pop_noise_hi: float = 60.0
    pop_weight_lo: float = 0.95
    pop_weight_hi: float = 1.05

    def algorithm_spec(self, name: str | None = None) -> AlgorithmSpec:
        return AlgorithmSpec.from_name(
            name or self.algorithm,
            n_trees=self.n_trees,
            mtry=self.mtry,
            max_depth=self.max_depth,
            min_leaf=self.min_leaf,
            svm_lambda=self.svm_lambda,
            svm_epochs=self.svm_epochs,
        )

    def population_params(self, n_subjects: int, seed: int) -> PopulationParams:
        return PopulationParams(
            n_subjects=n_subjects,
            baseline_lo=self.pop_baseline_lo,
            baseline_hi=self.pop_baseline_hi,
            n_weak_sensors=self.pop_weak_sensors,
            weak_baseline_lo=self.pop_weak_baseline_lo,
            weak_baseline_hi=self.pop_weak_baseline_hi,
            weak_posture_scale=self.pop_weak_posture_scale,
            n_postures_lo=self.pop_n_postures_lo,
            n_postures_hi=self.pop_n_postures_hi,
            posture_sigma=self.pop_posture_sigma,
            dwell_lo=self.pop_dwell_lo,
            dwell_hi=self.pop_dwell_hi,
            shift_lo=self.pop_shift_lo,
            shift_hi=self.pop_shift_hi,
            noise_lo=self.pop_noise_lo,
            noise_hi=self.pop_noise_hi,
            weight_lo=self.pop_weight_lo,
            weight_hi=self.pop_weight_hi,
            seed=seed,
        )

    def session_config(self, seed: int, enroll_frames: int | None = None,
                       algorithm: AlgorithmSpec | None = None) -> SessionConfig:
        return SessionConfig(
            enroll_frames=enroll_frames if enroll_frames is not None else self.enroll_frames,
            window_len=self.window_len,
            theta_accept=self.theta_accept,
            vacancy_grace_windows=self.vacancy_grace_windows,
            retrain_interval_windows=self.retrain_interval_windows,
            tau_occupied=self.tau_occupied,
            algorithm=algorithm if algorithm is not None else self.algorithm_spec(),
            seed=seed,
        )


_OPTIONAL_INT = {"stride", "mtry"}


def _parse_value(name: str, kind: type, raw: str):
    raw = raw.strip()
    if name in _OPTIONAL_INT:
        return None if raw.lower() == "none" else int(raw)
    if kind is int:
        return int(raw)
    if kind is float:
        return float(raw)
    return raw


def parse_config(text: str) -> EngineConfig:
    known = {f.name: f for f in fields(EngineConfig)}
    types = {"stride": int, "mtry": int}
    for f in fields(EngineConfig):
        if f.name not in types:
            types[f.name] = type(getattr(EngineConfig(), f.name))
    values = {}
    for i, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, val = line.partition("=")
        key = key.strip()
        if not sep:
            raise ValueError(f"config line {i}: expected key=value, got {line!r}")
        if key not in known:
            raise ValueError(f"config line {i}: unknown key {key!r}")
        values[key] = _parse_value(key, types[key], val)
    return EngineConfig(**values)


def load_config(path: str | None = None) -> EngineConfig:
    if path is None:
        path = os.environ.get("POPA_CONFIG") or None
    if path is None:
        return EngineConfig()
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
