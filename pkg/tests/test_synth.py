import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from popa.errors import InfeasibleRanges
from popa.ingest import write_csv
from popa.synth import (
    PopulationParams,
    SyntheticSubjectSpec,
    apply_session_drift,
    generate_population,
    load_spec,
    min_pairwise_baseline_distance,
    save_spec,
    simulate_session,
    spec_from_text,
    spec_to_text,
)


def flat_spec(seed=1, k=1, noise=0.0, shift=0.0, weight=1.0):
    return SyntheticSubjectSpec(
        subject_id="u0",
        baseline=tuple(400.0 + i for i in range(16)),
        postures=tuple(tuple(float(10 * j) for _ in range(16)) for j in range(k)),
        dwell_mean_s=120.0,
        shift_duration_s=shift,
        noise_sigma=noise,
        weight_scale=weight,
        seed=seed,
    )


# --- generate_population ----------------------------------------------------

def test_population_deterministic():
    p = PopulationParams(n_subjects=1, seed=7)
    a = generate_population(p)
    b = generate_population(p)
    assert a == b


def test_population_distinct_baselines():
    specs = generate_population(PopulationParams(n_subjects=30, seed=1))
    assert len(specs) == 30
    assert min_pairwise_baseline_distance(specs) > 0
    assert len({s.subject_id for s in specs}) == 30


def test_population_infeasible_baseline():
    with pytest.raises(InfeasibleRanges):
        generate_population(
            PopulationParams(n_subjects=1, baseline_lo=1990.0, baseline_hi=2010.0)
        )


def test_population_infeasible_dwell_below_shift():
    with pytest.raises(InfeasibleRanges):
        PopulationParams(dwell_lo=2.0, dwell_hi=3.0, shift_lo=1.0, shift_hi=5.0).validate()


def test_separability_knob_monotone():
    # same seed draws scale linearly with the range width, so the minimum
    # pairwise distance must increase strictly with the spread
    for seed in (1, 2, 3):
        dists = []
        for width in (100.0, 200.0, 300.0):
            params = PopulationParams(
                n_subjects=10,
                baseline_lo=450.0 - width / 2,
                baseline_hi=450.0 + width / 2,
                seed=seed,
            )
            dists.append(min_pairwise_baseline_distance(generate_population(params)))
        assert dists[0] < dists[1] < dists[2]


# --- simulate_session -------------------------------------------------------

def test_session_frame_count():
    spec = flat_spec()
    rec = simulate_session(spec, 600.0, session_seed=1)
    assert len(rec.frames) == 1200
    assert rec.frames[1].timestamp_ms - rec.frames[0].timestamp_ms == 500


def test_noiseless_single_posture_constant():
    spec = flat_spec(noise=0.0, k=1, weight=1.1)
    rec = simulate_session(spec, 10.0, session_seed=3)
    expected = tuple(
        int(np.rint(min(max(1.1 * (400.0 + i + 0.0), 0), 1023))) for i in range(16)
    )
    for f in rec.frames:
        assert f.readings == expected


def test_session_determinism_bytes():
    spec = generate_population(PopulationParams(n_subjects=1, seed=9))[0]
    a = simulate_session(spec, 60.0, session_seed=4)
    b = simulate_session(spec, 60.0, session_seed=4)
    assert write_csv(a) == write_csv(b)
    c = simulate_session(spec, 60.0, session_seed=5)
    assert write_csv(a) != write_csv(c)


def test_visible_posture_shift():
    # two strongly different postures, long dwell: scan the trace for a
    # moving-average jump beyond 3 sigma on some sensor
    spec = SyntheticSubjectSpec(
        subject_id="u0",
        baseline=(450.0,) * 16,
        postures=((0.0,) * 16, (120.0,) * 8 + (-120.0,) * 8),
        dwell_mean_s=120.0,
        shift_duration_s=2.0,
        noise_sigma=10.0,
        weight_scale=1.0,
        seed=21,
    )
    rec = simulate_session(spec, 600.0, session_seed=2)
    mat = np.array([f.readings for f in rec.frames], dtype=float)
    found = False
    for s in range(16):
        series = mat[:, s]
        ma = np.convolve(series, np.ones(20) / 20, mode="valid")
        if len(ma) > 20 and np.abs(ma[20:] - ma[:-20]).max() > 3 * spec.noise_sigma:
            found = True
            break
    assert found, "no visible shift in any sensor's 20-frame moving average"


@given(
    seed=st.integers(0, 2**32),
    session_seed=st.integers(0, 2**32),
    noise=st.floats(0, 200),
    weight=st.floats(0.5, 2.0),
)
@settings(max_examples=25)
def test_generated_frames_satisfy_invariants(seed, session_seed, noise, weight):
    spec = SyntheticSubjectSpec(
        subject_id="u0",
        baseline=(900.0,) * 16,
        postures=((0.0,) * 16, (300.0,) * 16),
        dwell_mean_s=20.0,
        shift_duration_s=1.0,
        noise_sigma=noise,
        weight_scale=weight,
        seed=seed,
    )
    rec = simulate_session(spec, 30.0, session_seed=session_seed)
    assert len(rec.frames) == 60
    for f in rec.frames:
        assert all(0 <= r <= 1023 for r in f.readings)


# --- apply_session_drift ----------------------------------------------------

def test_zero_drift_identity():
    spec = generate_population(PopulationParams(n_subjects=1, seed=13))[0]
    drifted = apply_session_drift(spec, 0.0)
    a = simulate_session(spec, 60.0, session_seed=2)
    b = simulate_session(drifted, 60.0, session_seed=2)
    assert write_csv(a) == write_csv(b)


def test_drift_bounded_and_nonzero():
    spec = generate_population(PopulationParams(n_subjects=1, seed=13))[0]
    drifted = apply_session_drift(spec, 50.0)
    delta = np.abs(np.asarray(drifted.baseline) - np.asarray(spec.baseline))
    assert delta.max() > 0
    assert delta.max() <= 50.0 * 6  # 6-sigma bound
    assert 0.8 * spec.dwell_mean_s <= drifted.dwell_mean_s <= 1.25 * spec.dwell_mean_s


def test_double_drift_variance_adds():
    a_mag, b_mag = 30.0, 40.0
    deltas = []
    for i in range(1000):
        spec = flat_spec(seed=i)
        d2 = apply_session_drift(apply_session_drift(spec, a_mag), b_mag)
        deltas.extend(np.asarray(d2.baseline) - np.asarray(spec.baseline))
    var = np.var(deltas)
    expected = a_mag**2 + b_mag**2
    assert abs(var - expected) / expected < 0.05


# --- spec serialization -----------------------------------------------------

def test_spec_round_trip(tmp_path):
    spec = generate_population(PopulationParams(n_subjects=2, seed=3))[1]
    assert spec_from_text(spec_to_text(spec)) == spec
    path = tmp_path / "a.popa-spec"
    save_spec(spec, path)
    assert load_spec(path) == spec
