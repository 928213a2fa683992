"""Synthetic subjects and sessions.

A subject is a 16-sensor baseline (body-geometry signature) plus K posture
offsets. Within a session the active posture follows a renewal process with
exponential dwell times; transitions ramp linearly. Frame readings are
``round(clamp(weight_scale * (baseline + blend) + gaussian(0, noise_sigma)))``
with clamping to the 10-bit range, so generated recordings always satisfy the
frame invariants.

Everything is a deterministic function of the seeds involved: a subject spec
of the population seed, a session of ``(spec.seed, session_seed)``, and a
drifted spec of the original spec's seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import InfeasibleRanges, MalformedRow
from .ingest import ADC_MAX, FRAME_PERIOD_MS, N_SENSORS, SensorFrame, SessionRecording

SPEC_MAGIC = "#popa-spec v1"
_DRIFT_STREAM = 0xD21F7  # second seed word for drift perturbation draws


@dataclass(frozen=True)
class SyntheticSubjectSpec:
    """Generative model of one person's posture repertoire."""

    subject_id: str
    baseline: tuple[float, ...]
    postures: tuple[tuple[float, ...], ...]
    dwell_mean_s: float
    shift_duration_s: float
    noise_sigma: float
    weight_scale: float
    seed: int

    def __post_init__(self):
        if len(self.baseline) != N_SENSORS:
            raise ValueError("baseline must have 16 components")
        if len(self.postures) < 1:
            raise ValueError("need at least one posture")
        for p in self.postures:
            if len(p) != N_SENSORS:
                raise ValueError("posture offsets must have 16 components")
        if not self.dwell_mean_s > self.shift_duration_s >= 0:
            raise ValueError("need dwell_mean_s > shift_duration_s >= 0")
        if self.noise_sigma < 0 or self.weight_scale <= 0:
            raise ValueError("noise_sigma must be >= 0 and weight_scale > 0")


@dataclass(frozen=True)
class PopulationParams:
    """Sampling ranges for a synthetic cohort.

    Sensors split into two groups. The leading ones are load-bearing: their
    baselines spread widely across subjects (body geometry) and posture
    shifts move them strongly. The trailing ``n_weak_sensors`` model sparse
    contact points (seat edges, upper backrest): small, nearly
    person-independent baselines and damped posture response, but the same
    acquisition noise as everything else.

    The defaults are calibrated so that a 30-subject population is mostly but
    not perfectly separable at frame level: load-bearing baselines overlap
    enough that sensor noise causes occasional cross-subject confusion, which
    is the regime the evaluation experiments target. All knobs are
    configurable.
    """

    n_subjects: int = 30
    baseline_lo: float = 360.0
    baseline_hi: float = 540.0
    n_weak_sensors: int = 6
    weak_baseline_lo: float = 60.0
    weak_baseline_hi: float = 140.0
    weak_posture_scale: float = 0.25
    n_postures_lo: int = 2
    n_postures_hi: int = 3
    posture_sigma: float = 30.0
    dwell_lo: float = 45.0
    dwell_hi: float = 150.0
    shift_lo: float = 1.0
    shift_hi: float = 3.0
    noise_lo: float = 40.0
    noise_hi: float = 60.0
    weight_lo: float = 0.95
    weight_hi: float = 1.05
    seed: int = 1

    def validate(self) -> None:
        if self.n_subjects < 1:
            raise InfeasibleRanges("n_subjects must be >= 1")
        if not (0.0 <= self.baseline_lo <= self.baseline_hi <= ADC_MAX):
            raise InfeasibleRanges(
                f"baseline range [{self.baseline_lo}, {self.baseline_hi}] outside [0, {ADC_MAX}]"
            )
        if not 0 <= self.n_weak_sensors < N_SENSORS:
            raise InfeasibleRanges("n_weak_sensors must be in 0..15")
        if not (0.0 <= self.weak_baseline_lo <= self.weak_baseline_hi <= ADC_MAX):
            raise InfeasibleRanges(
                f"weak baseline range [{self.weak_baseline_lo}, {self.weak_baseline_hi}] "
                f"outside [0, {ADC_MAX}]"
            )
        if not 0.0 <= self.weak_posture_scale <= 1.0:
            raise InfeasibleRanges("weak_posture_scale must be in [0, 1]")
        if not 1 <= self.n_postures_lo <= self.n_postures_hi:
            raise InfeasibleRanges("need 1 <= n_postures_lo <= n_postures_hi")
        if self.posture_sigma < 0:
            raise InfeasibleRanges("posture_sigma must be >= 0")
        if not (0.0 <= self.shift_lo <= self.shift_hi < self.dwell_lo <= self.dwell_hi):
            raise InfeasibleRanges("need 0 <= shift range < dwell range")
        if not (0.0 <= self.noise_lo <= self.noise_hi):
            raise InfeasibleRanges("bad noise range")
        if not (0.0 < self.weight_lo <= self.weight_hi):
            raise InfeasibleRanges("bad weight_scale range")

    def baseline_ranges(self) -> tuple[np.ndarray, np.ndarray]:
        n_strong = N_SENSORS - self.n_weak_sensors
        lo = np.array([self.baseline_lo] * n_strong + [self.weak_baseline_lo] * self.n_weak_sensors)
        hi = np.array([self.baseline_hi] * n_strong + [self.weak_baseline_hi] * self.n_weak_sensors)
        return lo, hi

    def posture_sigmas(self) -> np.ndarray:
        n_strong = N_SENSORS - self.n_weak_sensors
        return np.array(
            [self.posture_sigma] * n_strong
            + [self.posture_sigma * self.weak_posture_scale] * self.n_weak_sensors
        )


def subject_label(index: int, n_subjects: int) -> str:
    width = max(2, len(str(n_subjects - 1)))
    return f"subj{index:0{width}d}"


def generate_population(params: PopulationParams) -> list[SyntheticSubjectSpec]:
    """Draw n_subjects specs; a deterministic function of params.seed."""
    params.validate()
    rng = np.random.default_rng(params.seed)
    base_lo, base_hi = params.baseline_ranges()
    posture_sig = params.posture_sigmas()
    specs = []
    for i in range(params.n_subjects):
        baseline = rng.uniform(base_lo, base_hi)
        k = int(rng.integers(params.n_postures_lo, params.n_postures_hi + 1))
        postures = rng.normal(0.0, posture_sig, (k, N_SENSORS))
        dwell = float(rng.uniform(params.dwell_lo, params.dwell_hi))
        shift = float(rng.uniform(params.shift_lo, params.shift_hi))
        noise = float(rng.uniform(params.noise_lo, params.noise_hi))
        weight = float(rng.uniform(params.weight_lo, params.weight_hi))
        seed = int(rng.integers(1 << 63))
        specs.append(
            SyntheticSubjectSpec(
                subject_id=subject_label(i, params.n_subjects),
                baseline=tuple(float(v) for v in baseline),
                postures=tuple(tuple(float(v) for v in row) for row in postures),
                dwell_mean_s=dwell,
                shift_duration_s=shift,
                noise_sigma=noise,
                weight_scale=weight,
                seed=seed,
            )
        )
    return specs


def min_pairwise_baseline_distance(specs: Sequence[SyntheticSubjectSpec]) -> float:
    """Smallest euclidean distance between any two subjects' baselines."""
    best = math.inf
    for i in range(len(specs)):
        a = np.asarray(specs[i].baseline)
        for j in range(i + 1, len(specs)):
            b = np.asarray(specs[j].baseline)
            best = min(best, float(np.linalg.norm(a - b)))
    return best


def _posture_schedule(spec: SyntheticSubjectSpec, duration_s: float, rng) -> list[tuple]:
    """Segments covering [0, duration]: ('stable', t0, t1, p) and
    ('ramp', t0, t1, p_from, p_to)."""
    k = len(spec.postures)
    current = int(rng.integers(k))
    if k == 1:
        return [("stable", 0.0, duration_s, 0)]
    segments = []
    t = 0.0
    while t < duration_s:
        dwell = float(rng.exponential(spec.dwell_mean_s))
        segments.append(("stable", t, t + dwell, current))
        t += dwell
        if t >= duration_s:
            break
        nxt = int(rng.integers(k - 1))
        if nxt >= current:
            nxt += 1
        segments.append(("ramp", t, t + spec.shift_duration_s, current, nxt))
        t += spec.shift_duration_s
        current = nxt
    return segments


def simulate_session(
    spec: SyntheticSubjectSpec,
    duration_s: float,
    session_seed: int,
    session_id: str | None = None,
) -> SessionRecording:
    """Generate floor(duration_s / 0.5) frames at 500 ms spacing."""
    if duration_s <= 0:
        raise ValueError("duration_s must be positive")
    rng = np.random.default_rng((spec.seed, session_seed))
    n_frames = int(duration_s / 0.5)
    times = np.arange(n_frames) * (FRAME_PERIOD_MS / 1000.0)

    postures = np.asarray(spec.postures, dtype=np.float64)
    blend = np.empty((n_frames, N_SENSORS), dtype=np.float64)
    for seg in _posture_schedule(spec, duration_s, rng):
        if seg[0] == "stable":
            _, t0, t1, p = seg
            sel = (times >= t0) & (times < t1)
            blend[sel] = postures[p]
        else:
            _, t0, t1, p_from, p_to = seg
            sel = (times >= t0) & (times < t1)
            if not sel.any():
                continue
            alpha = (times[sel] - t0) / (t1 - t0)
            blend[sel] = np.outer(1.0 - alpha, postures[p_from]) + np.outer(alpha, postures[p_to])

    noise = rng.normal(0.0, spec.noise_sigma, (n_frames, N_SENSORS)) if spec.noise_sigma > 0 else 0.0
    raw = spec.weight_scale * (np.asarray(spec.baseline) + blend) + noise
    readings = np.rint(np.clip(raw, 0, ADC_MAX)).astype(np.int64)

    frames = tuple(
        SensorFrame(i * FRAME_PERIOD_MS, tuple(int(v) for v in readings[i]))
        for i in range(n_frames)
    )
    return SessionRecording(
        subject_id=spec.subject_id,
        session_id=session_id if session_id is not None else f"s{session_seed}",
        frames=frames,
    )


def apply_session_drift(
    spec: SyntheticSubjectSpec, drift_magnitude: float
) -> SyntheticSubjectSpec:
    """Perturb the generative parameters to model cross-session change.

    Baseline and posture offsets receive independent gaussian perturbations of
    standard deviation drift_magnitude (counts); dwell_mean_s is rescaled by a
    uniform factor in [0.8, 1.25]. The returned spec carries a fresh seed so
    repeated drifting accumulates independent perturbations. A magnitude of
    zero returns the spec unchanged.
    """
    if drift_magnitude < 0:
        raise ValueError("drift_magnitude must be >= 0")
    if drift_magnitude == 0:
        return spec
    rng = np.random.default_rng((spec.seed, _DRIFT_STREAM))
    baseline = np.asarray(spec.baseline) + rng.normal(0.0, drift_magnitude, N_SENSORS)
    postures = np.asarray(spec.postures) + rng.normal(
        0.0, drift_magnitude, (len(spec.postures), N_SENSORS)
    )
    factor = float(rng.uniform(0.8, 1.25))
    dwell = max(spec.dwell_mean_s * factor, spec.shift_duration_s + 1e-6)
    return replace(
        spec,
        baseline=tuple(float(v) for v in baseline),
        postures=tuple(tuple(float(v) for v in row) for row in postures),
        dwell_mean_s=dwell,
        seed=int(rng.integers(1 << 63)),
    )


# --- spec (de)serialization -------------------------------------------------

def _fmt_vec(values) -> str:
    return ",".join(repr(float(v)) for v in values)


def spec_to_text(spec: SyntheticSubjectSpec) -> str:
    lines = [
        SPEC_MAGIC,
        f"subject_id={spec.subject_id}",
        f"seed={spec.seed}",
        f"dwell_mean_s={spec.dwell_mean_s!r}",
        f"shift_duration_s={spec.shift_duration_s!r}",
        f"noise_sigma={spec.noise_sigma!r}",
        f"weight_scale={spec.weight_scale!r}",
        f"baseline={_fmt_vec(spec.baseline)}",
        f"n_postures={len(spec.postures)}",
    ]
    for i, p in enumerate(spec.postures):
        lines.append(f"posture_{i}={_fmt_vec(p)}")
    return "\n".join(lines) + "\n"


def spec_from_text(text: str) -> SyntheticSubjectSpec:
    lines = text.splitlines()
    if not lines or lines[0] != SPEC_MAGIC:
        raise MalformedRow(1, f"expected header {SPEC_MAGIC!r}")
    kv = {}
    for i, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        if "=" not in line:
            raise MalformedRow(i, f"expected key=value, got {line!r}")
        key, _, val = line.partition("=")
        kv[key] = val
    try:
        n_post = int(kv["n_postures"])
        postures = tuple(
            tuple(float(v) for v in kv[f"posture_{i}"].split(",")) for i in range(n_post)
        )
        return SyntheticSubjectSpec(
            subject_id=kv["subject_id"],
            baseline=tuple(float(v) for v in kv["baseline"].split(",")),
            postures=postures,
            dwell_mean_s=float(kv["dwell_mean_s"]),
            shift_duration_s=float(kv["shift_duration_s"]),
            noise_sigma=float(kv["noise_sigma"]),
            weight_scale=float(kv["weight_scale"]),
            seed=int(kv["seed"]),
        )
    except KeyError as exc:
        raise MalformedRow(1, f"missing field {exc.args[0]!r}") from None


def save_spec(spec: SyntheticSubjectSpec, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(spec_to_text(spec))


def load_spec(path) -> SyntheticSubjectSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return spec_from_text(fh.read())
