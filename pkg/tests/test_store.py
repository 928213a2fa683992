import numpy as np
import pytest

from popa.classify import AlgorithmSpec, model_to_text, train_model
from popa.errors import (
    CorruptProfile,
    DuplicateSubject,
    InvalidSubjectId,
    VersionMismatch,
)
from popa.ingest import SensorFrame, SessionRecording
from popa.store import (
    SubjectProfile,
    list_profiles,
    load_profile,
    profile_dataset,
    profile_from_text,
    profile_to_text,
    save_profile,
)


def make_recording(subject="alice", n=600, fill=300):
    frames = tuple(SensorFrame(i * 500, (fill,) * 16) for i in range(n))
    return SessionRecording(subject, "s1", frames)


def make_profile(subject="alice", n=600, algorithm=None):
    return SubjectProfile(
        subject_id=subject,
        recording=make_recording(subject, n),
        algorithm=algorithm or AlgorithmSpec.from_name("rf", n_trees=7),
        seed=42,
        created="2026-08-10T10:00:00+00:00",
        updated="2026-08-10T10:00:00+00:00",
    )


def test_save_embeds_all_frames(tmp_path):
    path = save_profile(make_profile(n=600), tmp_path)
    text = path.read_text()
    data_rows = [
        ln for ln in text.splitlines() if ln and ln[0].isdigit()
    ]
    assert len(data_rows) == 600


def test_save_load_round_trip(tmp_path):
    profile = make_profile()
    path = save_profile(profile, tmp_path)
    assert path.name == "alice.popa-profile"
    assert load_profile(path) == profile


def test_invalid_subject_id():
    for bad in ("a/b", "a b", "..", "a\\b"):
        with pytest.raises(InvalidSubjectId):
            make_profile(subject=bad)


def test_version_mismatch(tmp_path):
    p = tmp_path / "x.popa-profile"
    p.write_text("#popa-profile v9\nsubject=x\n")
    with pytest.raises(VersionMismatch):
        load_profile(p)


def test_corrupt_truncated_csv(tmp_path):
    profile = make_profile(n=10)
    text = profile_to_text(profile)
    truncated = "\n".join(text.splitlines()[:-3]) + "\n"
    p = tmp_path / "alice.popa-profile"
    p.write_text(truncated)
    with pytest.raises(CorruptProfile):
        load_profile(p)


def test_corrupt_not_a_profile(tmp_path):
    p = tmp_path / "x.popa-profile"
    p.write_text("hello\n")
    with pytest.raises(CorruptProfile) as exc:
        load_profile(p)
    assert exc.value.line_no == 1


def test_list_profiles_sorted_ignores_strays(tmp_path):
    for name in ("carol", "alice", "bob"):
        save_profile(make_profile(subject=name, n=20), tmp_path)
    (tmp_path / "notes.txt").write_text("not a profile\n")
    entries = list_profiles(tmp_path)
    assert [s for s, _ in entries] == ["alice", "bob", "carol"]


def test_list_profiles_empty(tmp_path):
    assert list_profiles(tmp_path) == []


def test_list_profiles_duplicate_subject(tmp_path):
    save_profile(make_profile(subject="alice", n=20), tmp_path)
    text = (tmp_path / "alice.popa-profile").read_text()
    (tmp_path / "copy.popa-profile").write_text(text)
    with pytest.raises(DuplicateSubject):
        list_profiles(tmp_path)


def test_retrain_on_load_determinism(tmp_path):
    profile = make_profile(n=40, algorithm=AlgorithmSpec.from_name("rf", n_trees=5))
    # enrollment frames are constant here; mix in a second label so training
    # is meaningful
    rng = np.random.default_rng(3)
    data_before = profile_dataset(profile)
    import popa.classify as cl

    other = cl.Dataset(
        np.concatenate([data_before.X, rng.uniform(0, 1, (40, 16))]),
        [profile.subject_id] * 40 + ["other"] * 40,
    )
    model_before = train_model(other, profile.algorithm, seed=profile.seed)
    path = save_profile(profile, tmp_path)
    loaded = load_profile(path)
    data_after = profile_dataset(loaded)
    assert np.array_equal(data_after.X, data_before.X)
    other_after = cl.Dataset(
        np.concatenate([data_after.X, rng.uniform(0, 1, (40, 16))]),
        [loaded.subject_id] * 40 + ["other"] * 40,
    )
    # identical inputs are required for byte equality; reuse the same rows
    other_after.X[40:] = other.X[40:]
    model_after = train_model(other_after, loaded.algorithm, seed=loaded.seed)
    assert model_to_text(model_after) == model_to_text(model_before)


def test_profile_text_round_trip_all_algorithms(tmp_path):
    for name in ("rf", "knn3", "svm"):
        profile = make_profile(subject=f"sub_{name}", algorithm=AlgorithmSpec.from_name(name))
        text = profile_to_text(profile)
        assert profile_from_text(text) == profile
