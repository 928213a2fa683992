import time

import pytest
from hypothesis import given
from hypothesis import strategies as st

from popa.errors import MalformedRow, NonMonotonicTimestamp, OutOfRange
from popa.ingest import (
    CANONICAL_FRAMES,
    MAGIC,
    Pace,
    SensorFrame,
    SessionRecording,
    parse_csv,
    replay,
    write_csv,
)
from popa.synth import PopulationParams, generate_population, simulate_session

HEADER = f"{MAGIC}\n#subject=u1,session=s1\ntimestamp_ms," + ",".join(
    f"s{i:02d}" for i in range(16)
) + "\n"


def make_text(rows):
    return HEADER + "".join(r + "\n" for r in rows)


def row(ts, readings):
    return f"{ts}," + ",".join(map(str, readings))


# --- parse_csv --------------------------------------------------------------

def test_parse_single_zero_frame():
    rec = parse_csv(make_text([row(0, [0] * 16)]))
    assert len(rec.frames) == 1
    assert rec.frames[0].readings == (0,) * 16
    assert rec.subject_id == "u1" and rec.session_id == "s1"


def test_parse_canonical_session():
    rows = [row(i * 500, [100] * 16) for i in range(1200)]
    rec = parse_csv(make_text(rows))
    assert len(rec.frames) == CANONICAL_FRAMES
    assert rec.is_canonical


def test_parse_reading_out_of_range_names_line():
    rows = [row(0, [0] * 16), row(500, [1024] + [0] * 15)]
    with pytest.raises(OutOfRange) as exc:
        parse_csv(make_text(rows))
    assert exc.value.line_no == 5  # 3 header lines + second data row


def test_parse_negative_reading():
    with pytest.raises(OutOfRange):
        parse_csv(make_text([row(0, [-1] + [0] * 15)]))


def test_parse_wrong_column_count():
    with pytest.raises(MalformedRow) as exc:
        parse_csv(make_text(["0,1,2"]))
    assert exc.value.line_no == 4


def test_parse_non_integer_cell():
    with pytest.raises(MalformedRow):
        parse_csv(make_text([row(0, ["x"] + [0] * 15)]))


def test_parse_non_monotonic_timestamp():
    rows = [row(500, [1] * 16), row(500, [1] * 16)]
    with pytest.raises(NonMonotonicTimestamp) as exc:
        parse_csv(make_text(rows))
    assert exc.value.line_no == 5


def test_parse_bad_headers():
    with pytest.raises(MalformedRow) as exc:
        parse_csv("#something else\n")
    assert exc.value.line_no == 1
    with pytest.raises(MalformedRow) as exc:
        parse_csv(f"{MAGIC}\n#nope\n")
    assert exc.value.line_no == 2
    with pytest.raises(MalformedRow) as exc:
        parse_csv(f"{MAGIC}\n#subject=a,session=b\nwrong,header\n")
    assert exc.value.line_no == 3


# --- write_csv --------------------------------------------------------------

def test_write_empty_recording_is_header_only():
    rec = SessionRecording("u1", "s1", ())
    text = write_csv(rec)
    assert text.count("\n") == 3
    assert parse_csv(text) == rec


def test_write_synthetic_session_row_count():
    spec = generate_population(PopulationParams(n_subjects=1, seed=5))[0]
    rec = simulate_session(spec, 600.0, session_seed=1)
    text = write_csv(rec)
    data_rows = text.strip().split("\n")[3:]
    assert len(data_rows) == 1200


ids = st.text(
    alphabet=st.characters(whitelist_categories=("Ll", "Lu", "Nd"), whitelist_characters="_-"),
    min_size=1,
    max_size=8,
)


@st.composite
def recordings(draw):
    subject = draw(ids)
    session = draw(ids)
    n = draw(st.integers(min_value=0, max_value=30))
    deltas = draw(st.lists(st.integers(1, 2000), min_size=n, max_size=n))
    ts = 0
    frames = []
    for d in deltas:
        readings = draw(
            st.lists(st.integers(0, 1023), min_size=16, max_size=16)
        )
        frames.append(SensorFrame(ts, tuple(readings)))
        ts += d
    return SessionRecording(subject, session, tuple(frames))


@given(recordings())
def test_round_trip_identity(rec):
    assert parse_csv(write_csv(rec)) == rec


# --- replay -----------------------------------------------------------------

def _frames(ts_list):
    return tuple(SensorFrame(t, (1,) * 16) for t in ts_list)


def test_replay_as_fast_preserves_order():
    rec = SessionRecording("u", "s", _frames([0, 500, 1000]))
    out = list(replay(rec, Pace.AS_FAST))
    assert out == list(rec.frames)


def test_replay_canonical_final_timestamp():
    rec = SessionRecording("u", "s", _frames([i * 500 for i in range(1200)]))
    out = list(replay(rec, Pace.AS_FAST))
    assert len(out) == 1200
    assert out[-1].timestamp_ms == 599500


def test_replay_real_time_sleeps_deltas():
    rec = SessionRecording("u", "s", _frames([0, 500, 1000, 1500]))
    slept = []
    out = list(replay(rec, Pace.REAL_TIME, sleep=slept.append))
    assert len(out) == 4
    assert slept == [0.5, 0.5, 0.5]


def test_replay_real_time_wall_clock():
    rec = SessionRecording("u", "s", _frames([0, 500, 1000, 1500]))
    t0 = time.monotonic()
    out = list(replay(rec, Pace.REAL_TIME, sleep=time.sleep))
    elapsed = time.monotonic() - t0
    assert len(out) == 4
    assert elapsed >= 1.5
