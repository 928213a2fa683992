"""Sensor-frame streams: canonical CSV parsing/writing and replay.

Canonical format (LF line endings, no quoting)::

    #popa-recording v1
    #subject=<id>,session=<id>
    timestamp_ms,s00,s01,...,s15
    0,12,340,...,7

Data rows are 17 comma-separated base-10 integers. Timestamps are strictly
increasing milliseconds since session start; readings are 10-bit ADC counts.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from enum import Enum
from typing import IO, Iterable, Iterator

from .errors import MalformedRow, NonMonotonicTimestamp, OutOfRange

N_SENSORS = 16
ADC_MAX = 1023
FRAME_PERIOD_MS = 500
CANONICAL_FRAMES = 1200  # 10 minutes at 0.5 s

MAGIC = "#popa-recording v1"
_COLUMNS = "timestamp_ms," + ",".join(f"s{i:02d}" for i in range(N_SENSORS))


def _check_id(value: str, what: str) -> str:
    if not value or any(c in value for c in ",=\n\r"):
        raise ValueError(f"{what} must be nonempty and free of ',', '=' and newlines: {value!r}")
    return value


@dataclass(frozen=True)
class SensorFrame:
    """One 0.5 s snapshot: timestamp plus 16 pressure readings in counts."""

    timestamp_ms: int
    readings: tuple[int, ...]

    def __post_init__(self):
        if self.timestamp_ms < 0:
            raise ValueError(f"negative timestamp {self.timestamp_ms}")
        if len(self.readings) != N_SENSORS:
            raise ValueError(f"expected {N_SENSORS} readings, got {len(self.readings)}")
        for r in self.readings:
            if not 0 <= r <= ADC_MAX:
                raise ValueError(f"reading {r} outside 0..{ADC_MAX}")


@dataclass(frozen=True)
class SessionRecording:
    """An ordered frame sequence tagged with subject and session labels."""

    subject_id: str
    session_id: str
    frames: tuple[SensorFrame, ...]

    def __post_init__(self):
        _check_id(self.subject_id, "subject_id")
        _check_id(self.session_id, "session_id")
        prev = -1
        for f in self.frames:
            if f.timestamp_ms <= prev:
                raise ValueError(f"timestamps not strictly increasing at {f.timestamp_ms}")
            prev = f.timestamp_ms

    @property
    def is_canonical(self) -> bool:
        """True for a full 10-minute session: 1200 frames at exact 500 ms."""
        if len(self.frames) != CANONICAL_FRAMES:
            return False
        return all(
            f.timestamp_ms == i * FRAME_PERIOD_MS for i, f in enumerate(self.frames)
        )


class Pace(Enum):
    AS_FAST = "as-fast"
    REAL_TIME = "real-time"


def parse_csv(stream: Iterable[str] | str) -> SessionRecording:
    """Parse the canonical CSV format into a recording.

    Raises MalformedRow / OutOfRange / NonMonotonicTimestamp naming the
    offending 1-based physical line.
    """
    if isinstance(stream, str):
        lines = stream.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
    else:
        lines = [ln.rstrip("\n") for ln in stream]

    if not lines or lines[0].rstrip("\r") != MAGIC:
        raise MalformedRow(1, f"expected header {MAGIC!r}")
    if len(lines) < 2 or not lines[1].startswith("#subject="):
        raise MalformedRow(2, "expected '#subject=<id>,session=<id>'")
    meta = lines[1][1:]
    parts = meta.split(",")
    kv = {}
    for part in parts:
        if "=" not in part:
            raise MalformedRow(2, f"bad metadata field {part!r}")
        key, _, val = part.partition("=")
        kv[key] = val
    if set(kv) != {"subject", "session"} or not kv["subject"] or not kv["session"]:
        raise MalformedRow(2, "expected subject and session ids")
    if len(lines) < 3 or lines[2] != _COLUMNS:
        raise MalformedRow(3, f"expected column header {_COLUMNS!r}")

    frames = []
    prev_ts = -1
    for offset, row in enumerate(lines[3:]):
        line_no = offset + 4
        cells = row.split(",")
        if len(cells) != N_SENSORS + 1:
            raise MalformedRow(line_no, f"expected {N_SENSORS + 1} columns, got {len(cells)}")
        try:
            values = [int(c) for c in cells]
        except ValueError:
            raise MalformedRow(line_no, f"non-integer cell in {row!r}") from None
        ts = values[0]
        if ts < 0:
            raise OutOfRange(line_no, f"negative timestamp {ts}")
        readings = values[1:]
        for r in readings:
            if not 0 <= r <= ADC_MAX:
                raise OutOfRange(line_no, f"reading {r} outside 0..{ADC_MAX}")
        if ts <= prev_ts:
            raise NonMonotonicTimestamp(line_no, f"timestamp {ts} not greater than {prev_ts}")
        prev_ts = ts
        frames.append(SensorFrame(ts, tuple(readings)))

    return SessionRecording(kv["subject"], kv["session"], tuple(frames))


def write_csv(recording: SessionRecording) -> str:
    """Render a recording in the canonical format; exact parse round-trip."""
    out = [
        MAGIC,
        f"#subject={recording.subject_id},session={recording.session_id}",
        _COLUMNS,
    ]
    for f in recording.frames:
        out.append(str(f.timestamp_ms) + "," + ",".join(map(str, f.readings)))
    return "\n".join(out) + "\n"


def read_file(path) -> SessionRecording:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_csv(fh)


def write_file(recording: SessionRecording, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(write_csv(recording))


def replay(
    recording: SessionRecording,
    pace: Pace = Pace.AS_FAST,
    sleep=time.sleep,
) -> Iterator[SensorFrame]:
    """Yield frames in order; REAL_TIME honors inter-frame timestamp deltas."""
    prev_ts = None
    for frame in recording.frames:
        if pace is Pace.REAL_TIME and prev_ts is not None:
            sleep((frame.timestamp_ms - prev_ts) / 1000.0)
        prev_ts = frame.timestamp_ms
        yield frame
