"""Frame-to-feature conversion, windowing, and occupancy detection."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .ingest import ADC_MAX, N_SENSORS, SensorFrame

DEFAULT_WINDOW_LEN = 20  # 10 s at 0.5 s cadence
DEFAULT_TAU_OCCUPIED = 400  # summed counts; ~2.5% of full-scale total


def normalize_frame(frame: SensorFrame) -> tuple[float, ...]:
    """Scale readings to [0, 1] by 1/1023."""
    return tuple(r / ADC_MAX for r in frame.readings)


def frames_to_matrix(frames: Sequence[SensorFrame]) -> np.ndarray:
    """(n, 16) float64 matrix of normalized readings."""
    out = np.empty((len(frames), N_SENSORS), dtype=np.float64)
    for i, f in enumerate(frames):
        out[i] = f.readings
    out /= ADC_MAX
    return out


@dataclass(frozen=True)
class Window:
    """A contiguous run of frames starting at start_index in the stream."""

    frames: tuple[SensorFrame, ...]
    start_index: int


def windows(
    frames: Sequence[SensorFrame],
    window_len: int = DEFAULT_WINDOW_LEN,
    stride: int | None = None,
) -> list[Window]:
    """Fully populated windows at offsets 0, stride, 2*stride, ...

    The trailing partial window is discarded. Stride defaults to window_len
    (non-overlapping decision windows).
    """
    if window_len < 1:
        raise ValueError("window_len must be >= 1")
    if stride is None:
        stride = window_len
    if stride < 1:
        raise ValueError("stride must be >= 1")
    out = []
    offset = 0
    while offset + window_len <= len(frames):
        out.append(Window(tuple(frames[offset : offset + window_len]), offset))
        offset += stride
    return out


def occupancy(frame: SensorFrame, tau_occupied: int = DEFAULT_TAU_OCCUPIED) -> bool:
    """True iff the summed pressure indicates someone is seated (>= tau)."""
    return sum(frame.readings) >= tau_occupied


def window_features(window: Window) -> tuple[float, ...]:
    """Per-sensor (mean, std, min, max) over the window, sensor-major.

    All values are computed on normalized readings, so each of the 64
    components lies in [0, 1]. Std uses the population formula (divide by n),
    which keeps single-frame windows well defined and bounds std by 0.5.
    """
    mat = frames_to_matrix(window.frames)
    lo = mat.min(axis=0)
    hi = mat.max(axis=0)
    # offset by the minimum so constant windows come out exactly
    mean = lo + (mat - lo).mean(axis=0)
    std = np.sqrt(((mat - mean) ** 2).mean(axis=0))  # population std: ddof=0
    out = []
    for s in range(N_SENSORS):
        out.extend((float(mean[s]), float(std[s]), float(lo[s]), float(hi[s])))
    return tuple(out)
