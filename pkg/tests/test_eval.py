import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _support import toy_dataset
from popa.classify import AlgorithmSpec, Dataset
from popa.errors import ClassTooSmall, SubjectMismatch
from popa.evaluation import (
    EvalReport,
    cross_validate,
    dataset_from_recordings,
    permanence_eval,
    report_csv,
    stratified_folds,
)
from popa.synth import (
    PopulationParams,
    apply_session_drift,
    generate_population,
    simulate_session,
)

RF_SMALL = AlgorithmSpec.from_name("rf", n_trees=15)


# --- stratified_folds ---------------------------------------------------------

def test_folds_single_class_exact_sizes():
    assignment = stratified_folds(["a"] * 100, k=10, seed=3)
    counts = np.bincount(assignment, minlength=10)
    assert list(counts) == [10] * 10


def test_folds_two_classes_within_one():
    labels = ["a"] * 15 + ["b"] * 15
    assignment = stratified_folds(labels, k=10, seed=1)
    for fold in range(10):
        sel = assignment == fold
        a = sum(1 for i in range(30) if sel[i] and labels[i] == "a")
        b = sum(1 for i in range(30) if sel[i] and labels[i] == "b")
        assert a in (1, 2) and b in (1, 2)


def test_folds_class_too_small():
    with pytest.raises(ClassTooSmall):
        stratified_folds(["a"] * 7, k=10, seed=1)


@given(
    sizes=st.lists(st.integers(5, 25), min_size=1, max_size=4),
    k=st.integers(2, 5),
    seed=st.integers(0, 1000),
)
@settings(max_examples=30)
def test_folds_partition_property(sizes, k, seed):
    labels = [f"c{i}" for i, n in enumerate(sizes) for _ in range(n)]
    assignment = stratified_folds(labels, k=k, seed=seed)
    assert len(assignment) == len(labels)
    assert set(assignment) <= set(range(k))
    for c in set(labels):
        per_fold = [
            sum(1 for i, lab in enumerate(labels) if lab == c and assignment[i] == f)
            for f in range(k)
        ]
        assert max(per_fold) - min(per_fold) <= 1


# --- cross_validate -------------------------------------------------------------

def test_cv_separable_population(small_population):
    _, recordings = small_population
    data = dataset_from_recordings(recordings)
    report = cross_validate(data, RF_SMALL, repeats=1, k=5, seed=1)
    assert report.macro_tpr == 1.0
    assert report.macro_fpr == 0.0


def test_cv_metric_identity_and_conservation():
    data = toy_dataset(seed=9, n_per_class=30, spread=0.4)  # overlapping blobs
    report = cross_validate(data, RF_SMALL, repeats=2, k=5, seed=7)
    assert np.allclose(report.tpr + report.fnr, 1.0)
    row_sums = report.confusion.sum(axis=1)
    # every instance predicted once per repeat
    assert list(row_sums) == [60, 60, 60]


def test_cv_determinism_bytes():
    data = toy_dataset(seed=9, n_per_class=25, spread=0.5)
    a = cross_validate(data, RF_SMALL, repeats=2, k=5, seed=3)
    b = cross_validate(data, RF_SMALL, repeats=2, k=5, seed=3)
    assert report_csv(a) == report_csv(b)
    c = cross_validate(data, RF_SMALL, repeats=2, k=5, seed=4)
    assert report_csv(a) != report_csv(c)


def test_cv_chance_level_on_shuffled_labels():
    rng = np.random.default_rng(5)
    n_classes, per = 4, 150
    X = rng.uniform(0, 1, (n_classes * per, 6))
    labels = [f"c{i}" for i in range(n_classes) for _ in range(per)]
    data = Dataset(X, labels)  # labels independent of features
    report = cross_validate(data, RF_SMALL, repeats=2, k=5, seed=11)
    p = 1.0 / n_classes
    se = np.sqrt(p * (1 - p) / len(data))
    assert abs(report.macro_tpr - p) <= 3 * se


# --- permanence -----------------------------------------------------------------

@pytest.fixture(scope="module")
def drift_population():
    params = PopulationParams(n_subjects=5, seed=21)
    specs = generate_population(params)
    train = {s.subject_id: simulate_session(s, 150.0, session_seed=1) for s in specs}
    return specs, train


def test_permanence_zero_drift_close_to_cv(drift_population):
    specs, train = drift_population
    test = {s.subject_id: simulate_session(s, 150.0, session_seed=2) for s in specs}
    report = permanence_eval(train, test, RF_SMALL, seed=5)
    data = dataset_from_recordings(train.values())
    cv = cross_validate(data, RF_SMALL, repeats=1, k=5, seed=5)
    assert abs(report.macro_tpr - cv.macro_tpr) <= 0.05


def test_permanence_drift_degrades(drift_population):
    specs, train = drift_population
    def tpr_at(drift):
        test = {
            s.subject_id: simulate_session(
                apply_session_drift(s, drift), 150.0, session_seed=2
            )
            for s in specs
        }
        return permanence_eval(train, test, RF_SMALL, seed=5).macro_tpr

    assert tpr_at(120.0) < tpr_at(0.0)


def test_permanence_subject_mismatch(drift_population):
    specs, train = drift_population
    test = {s.subject_id: simulate_session(s, 150.0, 2) for s in specs[:-1]}
    with pytest.raises(SubjectMismatch):
        permanence_eval(train, test, RF_SMALL, seed=1)


def test_permanence_single_subject_degenerate(drift_population):
    specs, _ = drift_population
    spec = specs[0]
    train = {spec.subject_id: simulate_session(spec, 150.0, 1)}
    test = {spec.subject_id: simulate_session(spec, 150.0, 2)}
    report = permanence_eval(train, test, RF_SMALL, seed=2)
    assert report.single_class
    assert report.macro_tpr == 1.0  # every frame necessarily predicted as them
    assert report.macro_fpr == 0.0


# --- report_csv -----------------------------------------------------------------

def _report_one_subject():
    confusion = np.array([[10]], dtype=np.int64)
    return EvalReport(
        labels=("s1",),
        confusion=confusion,
        tpr=np.array([1.0]),
        fpr=np.array([0.0]),
        fnr=np.array([0.0]),
        single_class=True,
    )


def test_report_csv_single_subject_row():
    text = report_csv(_report_one_subject())
    lines = text.strip().split("\n")
    assert lines[0] == "subject,tpr,fpr,fnr"
    assert lines[1] == "s1,1.0000,0.0000,0.0000"
    assert lines[2].startswith("MACRO,")


def test_report_csv_macro_is_unweighted_mean():
    report = EvalReport(
        labels=("a", "b"),
        confusion=np.zeros((2, 2), dtype=np.int64),
        tpr=np.array([1.0, 0.5]),
        fpr=np.array([0.25, 0.0]),
        fnr=np.array([0.0, 0.5]),
    )
    lines = report_csv(report).strip().split("\n")
    assert lines[-1] == "MACRO,0.7500,0.1250,0.2500"


def test_report_csv_parse_back_exact():
    data = toy_dataset(seed=9, n_per_class=25, spread=0.5)
    report = cross_validate(data, RF_SMALL, repeats=1, k=5, seed=3)
    text = report_csv(report)
    lines = text.strip().split("\n")
    assert lines[0] == "subject,tpr,fpr,fnr"
    for i, line in enumerate(lines[1:-1]):
        subject, tpr, fpr, fnr = line.split(",")
        assert subject == report.labels[i]
        assert float(tpr) == float(f"{report.tpr[i]:.4f}")
        assert float(fpr) == float(f"{report.fpr[i]:.4f}")
        assert float(fnr) == float(f"{report.fnr[i]:.4f}")


def test_window_mode_dataset():
    params = PopulationParams(n_subjects=2, seed=2)
    specs = generate_population(params)
    recs = [simulate_session(s, 100.0, 1) for s in specs]
    data = dataset_from_recordings(recs, feature_mode="window", window_len=20)
    assert data.feature_dim == 64
    assert len(data) == 2 * 10
