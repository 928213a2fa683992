"""Continuous-authentication state machine.

Lifecycle: Enrolling -> Authenticated -> (Vacant ->) DeAuthenticated.

Enrollment collects enroll_frames frames, then trains a binary model of
genuine-vs-background on normalized frames. After that, every window_len
buffered frames produce exactly one decision:

* occupied count <= window_len/2          -> ChairVacant; after more than
  vacancy_grace_windows consecutive vacant windows the session ends with
  WalkedAway.
* genuine fraction >= theta_accept        -> Accepted; the window's frames
  join the training set and the model retrains every
  retrain_interval_windows accepted windows.
* otherwise                               -> Rejected; the session ends
  immediately with ImpostorSuspected.

The machine is a pure function of the frame sequence given its config and
seed: replaying a stream reproduces the identical decision sequence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional

import numpy as np

from .classify import AlgorithmSpec, Dataset, TrainedModel, predict_batch, train_model
from .errors import EmptyBackground, SessionTerminated, WindowVacant
from .features import DEFAULT_TAU_OCCUPIED, DEFAULT_WINDOW_LEN, Window, frames_to_matrix, occupancy
from .ingest import SensorFrame

GENUINE_LABEL = "genuine"
BACKGROUND_LABEL = "background"

DEFAULT_ENROLL_FRAMES = 600  # 5 minutes at 0.5 s


class Phase(Enum):
    ENROLLING = "Enrolling"
    AUTHENTICATED = "Authenticated"
    VACANT = "Vacant"
    DEAUTHENTICATED = "DeAuthenticated"


class DeauthReason(Enum):
    IMPOSTOR_SUSPECTED = "ImpostorSuspected"
    WALKED_AWAY = "WalkedAway"
    MANUAL = "Manual"


class Verdict(Enum):
    ACCEPTED = "Accepted"
    REJECTED = "Rejected"
    CHAIR_VACANT = "ChairVacant"


@dataclass(frozen=True)
class SessionConfig:
    enroll_frames: int = DEFAULT_ENROLL_FRAMES
    window_len: int = DEFAULT_WINDOW_LEN
    theta_accept: float = 0.5
    vacancy_grace_windows: int = 0
    retrain_interval_windows: int = 1
    tau_occupied: int = DEFAULT_TAU_OCCUPIED
    algorithm: AlgorithmSpec = field(default_factory=AlgorithmSpec)
    seed: int = 0

    def __post_init__(self):
        if self.enroll_frames < self.window_len:
            raise ValueError("enroll_frames must be >= window_len")
        if not 0 < self.theta_accept <= 1:
            raise ValueError("theta_accept must be in (0, 1]")
        if self.vacancy_grace_windows < 0 or self.retrain_interval_windows < 1:
            raise ValueError("bad grace/retrain settings")


@dataclass
class AuthDecision:
    window_index: int
    genuine_fraction: float
    verdict: Verdict


@dataclass
class SessionState:
    config: SessionConfig
    background: Dataset
    phase: Phase = Phase.ENROLLING
    training_frames: list = field(default_factory=list)
    buffer: list = field(default_factory=list)
    model: Optional[TrainedModel] = None
    window_index: int = 0
    vacant_windows: int = 0
    accepted_since_retrain: int = 0
    deauth_reason: Optional[DeauthReason] = None


def new_session(config: SessionConfig, background: Dataset) -> SessionState:
    """Fresh Enrolling state. background holds impostor-side frame features
    (any labels; they are pooled under one background class)."""
    if len(background) == 0:
        raise EmptyBackground("background dataset has no instances")
    if background.feature_dim != 16:
        raise ValueError("background must hold 16-dim frame features")
    return SessionState(config=config, background=background)


def _train_binary(state: SessionState) -> TrainedModel:
    genuine = frames_to_matrix(state.training_frames)
    X = np.concatenate([genuine, state.background.X])
    labels = [GENUINE_LABEL] * len(genuine) + [BACKGROUND_LABEL] * len(state.background)
    data = Dataset(X, labels)
    return train_model(data, state.config.algorithm, seed=state.config.seed)


def ingest_frame(state: SessionState, frame: SensorFrame) -> Optional[AuthDecision]:
    """Advance the machine by one frame; a decision is emitted only when a
    window completes (never mid-window)."""
    if state.phase is Phase.DEAUTHENTICATED:
        raise SessionTerminated(f"session ended: {state.deauth_reason.value}")

    cfg = state.config
    if state.phase is Phase.ENROLLING:
        state.training_frames.append(frame)
        if len(state.training_frames) == cfg.enroll_frames:
            state.model = _train_binary(state)
            state.phase = Phase.AUTHENTICATED
        return None

    state.buffer.append(frame)
    if len(state.buffer) < cfg.window_len:
        return None

    window = state.buffer
    state.buffer = []
    index = state.window_index
    state.window_index += 1

    occupied = [f for f in window if occupancy(f, cfg.tau_occupied)]
    if 2 * len(occupied) <= cfg.window_len:
        state.vacant_windows += 1
        decision = AuthDecision(index, 0.0, Verdict.CHAIR_VACANT)
        if state.vacant_windows > cfg.vacancy_grace_windows:
            state.phase = Phase.DEAUTHENTICATED
            state.deauth_reason = DeauthReason.WALKED_AWAY
        else:
            state.phase = Phase.VACANT
        return decision

    genuine_code = state.model.labels.index(GENUINE_LABEL)
    pred = predict_batch(state.model, frames_to_matrix(occupied))
    fraction = float(np.mean(pred == genuine_code))
    if fraction >= cfg.theta_accept:
        state.training_frames.extend(window)
        state.accepted_since_retrain += 1
        if state.accepted_since_retrain >= cfg.retrain_interval_windows:
            state.model = _train_binary(state)
            state.accepted_since_retrain = 0
        state.phase = Phase.AUTHENTICATED
        state.vacant_windows = 0
        return AuthDecision(index, fraction, Verdict.ACCEPTED)

    state.phase = Phase.DEAUTHENTICATED
    state.deauth_reason = DeauthReason.IMPOSTOR_SUSPECTED
    return AuthDecision(index, fraction, Verdict.REJECTED)


def deauthenticate(
    state: SessionState, reason: DeauthReason = DeauthReason.MANUAL
) -> SessionState:
    """Terminate the session; idempotent, the first reason wins."""
    if state.phase is not Phase.DEAUTHENTICATED:
        state.phase = Phase.DEAUTHENTICATED
        state.deauth_reason = reason
    return state


def identify(
    window: Window,
    population: TrainedModel | Mapping[str, TrainedModel],
    tau_occupied: int = DEFAULT_TAU_OCCUPIED,
) -> tuple[str, float]:
    """One-to-n identification of a majority-occupied window.

    With a shared multi-class model, occupied frames vote per-frame and the
    winning fraction is the confidence. With a map of per-subject binary
    models, each subject scores the fraction of occupied frames its model
    calls genuine. Ties fall to the canonically smaller subject id.
    """
    if isinstance(population, Mapping) and len(population) == 0:
        raise ValueError("population must be nonempty")
    occupied = [f for f in window.frames if occupancy(f, tau_occupied)]
    if 2 * len(occupied) <= len(window.frames):
        raise WindowVacant(
            f"{len(window.frames) - len(occupied)} of {len(window.frames)} frames vacant"
        )
    feats = frames_to_matrix(occupied)

    if isinstance(population, TrainedModel):
        pred = predict_batch(population, feats)
        counts = np.bincount(pred, minlength=len(population.labels))
        code = int(counts.argmax())
        return population.labels[code], float(counts[code] / len(occupied))

    subjects = sorted(population)
    if len(subjects) == 1:
        return subjects[0], 1.0
    best_subject = None
    best_frac = -1.0
    for sid in subjects:
        model = population[sid]
        genuine_code = model.labels.index(GENUINE_LABEL)
        frac = float(np.mean(predict_batch(model, feats) == genuine_code))
        if frac > best_frac:
            best_subject, best_frac = sid, frac
    return best_subject, best_frac
