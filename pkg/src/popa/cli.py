"""Command-line surface: synthesis, enrollment, monitoring, identification,
and evaluation experiments.

Exit codes: 0 success (monitor: stream ended without de-authentication),
1 usage or operational error, 2 monitor ended with ImpostorSuspected,
3 monitor ended with WalkedAway.
"""

from __future__ import annotations

import argparse
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .classify import Dataset
from .config import load_config
from .errors import EmptyBackground, PopaError, RefusingOverwrite, TooShort
from .evaluation import (
    cross_validate,
    dataset_from_recordings,
    permanence_eval,
    report_csv,
)
from .features import frames_to_matrix, windows
from .ingest import Pace, SessionRecording, parse_csv, read_file, replay, write_file
from .session import DeauthReason, Phase, ingest_frame, new_session
from .store import (
    SubjectProfile,
    list_profiles,
    load_profile,
    profile_dataset,
    profile_path,
    save_profile,
)
from .synth import (
    apply_session_drift,
    generate_population,
    min_pairwise_baseline_distance,
    save_spec,
    simulate_session,
)
from .session import identify as identify_window

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_IMPOSTOR = 2
EXIT_WALKED_AWAY = 3


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the monitor owns that code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=1, help="global seed (default 1)")
    common.add_argument("--config", default=None, metavar="PATH",
                        help="key=value config file (default: $POPA_CONFIG)")
    return common


def build_parser() -> _Parser:
    parser = _Parser(prog="popa", description=__doc__)
    parser.add_argument("--version", action="version", version=f"popa {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _common()

    p = sub.add_parser("synth", parents=[common],
                       help="generate a synthetic population and its sessions")
    p.add_argument("--subjects", type=int, required=True, metavar="N")
    p.add_argument("--sessions", type=int, default=1, metavar="M")
    p.add_argument("--duration-s", type=float, default=None, metavar="D",
                   help="session length in seconds (default from config, 600)")
    p.add_argument("--drift", type=float, default=0.0, metavar="X",
                   help="drift magnitude applied to sessions 2+ (counts)")
    p.add_argument("--out", required=True, metavar="DIR")

    p = sub.add_parser("enroll", parents=[common],
                       help="build a subject profile from a recording")
    p.add_argument("--in", dest="infile", required=True, metavar="RECORDING.CSV")
    p.add_argument("--profiles", required=True, metavar="DIR")
    p.add_argument("--force", action="store_true",
                   help="overwrite an existing profile for the subject")

    p = sub.add_parser("monitor", parents=[common],
                       help="run continuous authentication over a frame stream")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--in", dest="infile", metavar="RECORDING.CSV")
    src.add_argument("--stdin", action="store_true", help="read the stream from stdin")
    p.add_argument("--profile", required=True, metavar="FILE")
    p.add_argument("--background", required=True, metavar="DIR",
                   help="profile directory providing impostor frames")
    p.add_argument("--pace", choices=["as-fast", "real-time"], default="as-fast")

    p = sub.add_parser("evaluate", parents=[common],
                       help="identification CV or cross-session permanence study")
    p.add_argument("--data", required=True, metavar="DIR")
    p.add_argument("--algorithm", choices=["rf", "knn1", "knn3", "knn5", "svm"],
                   default=None, help="classifier (default from config, rf)")
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--mode", choices=["cv", "permanence"], default="cv")
    p.add_argument("--out", required=True, metavar="REPORT.CSV")

    p = sub.add_parser("identify", parents=[common],
                       help="one-to-n identification of each window of a recording")
    p.add_argument("--in", dest="infile", required=True, metavar="RECORDING.CSV")
    p.add_argument("--profiles", required=True, metavar="DIR")
    p.add_argument("--window", type=int, default=None, metavar="W",
                   help="window length in frames (default from config, 20)")
    return parser


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def cmd_synth(args) -> int:
    config = load_config(args.config)
    duration = args.duration_s if args.duration_s is not None else config.duration_s
    if args.subjects < 1 or args.sessions < 1:
        raise PopaError("--subjects and --sessions must be >= 1")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    specs = generate_population(config.population_params(args.subjects, args.seed))
    for spec in specs:
        save_spec(spec, out / f"{spec.subject_id}.popa-spec")
        current = spec
        for session in range(1, args.sessions + 1):
            if session > 1:
                current = apply_session_drift(current, args.drift)
            rec = simulate_session(current, duration, session_seed=session,
                                   session_id=f"s{session}")
            write_file(rec, out / f"{spec.subject_id}_s{session}.csv")
    print(f"wrote {len(specs)} specs and {len(specs) * args.sessions} recordings to {out}")
    if len(specs) > 1:
        print(f"min pairwise baseline distance: {min_pairwise_baseline_distance(specs):.1f}")
    return EXIT_OK


def cmd_enroll(args) -> int:
    config = load_config(args.config)
    recording = read_file(args.infile)
    if len(recording.frames) < config.enroll_frames:
        raise TooShort(
            f"recording has {len(recording.frames)} frames; "
            f"enrollment needs {config.enroll_frames}"
        )
    profiles_dir = Path(args.profiles)
    profiles_dir.mkdir(parents=True, exist_ok=True)
    target = profile_path(profiles_dir, recording.subject_id)
    if target.exists() and not args.force:
        raise RefusingOverwrite(f"{target} exists; use --force to replace it")
    now = _now_iso()
    profile = SubjectProfile(
        subject_id=recording.subject_id,
        recording=SessionRecording(
            recording.subject_id,
            recording.session_id,
            recording.frames[: config.enroll_frames],
        ),
        algorithm=config.algorithm_spec(),
        seed=args.seed,
        created=now,
        updated=now,
    )
    path = save_profile(profile, profiles_dir)
    print(path)
    return EXIT_OK


def _load_background(directory, exclude_subject: str) -> Dataset:
    frames = []
    labels = []
    for subject, path in list_profiles(directory):
        if subject == exclude_subject:
            continue
        prof = load_profile(path)
        mat = frames_to_matrix(prof.recording.frames)
        frames.append(mat)
        labels.extend([subject] * len(mat))
    if not labels:
        raise EmptyBackground(
            f"no background profiles in {directory} besides {exclude_subject!r}"
        )
    import numpy as np

    return Dataset(np.concatenate(frames), labels)


def cmd_monitor(args) -> int:
    config = load_config(args.config)
    profile = load_profile(args.profile)
    background = _load_background(args.background, profile.subject_id)
    session_config = config.session_config(
        seed=profile.seed,
        enroll_frames=len(profile.recording.frames),
        algorithm=profile.algorithm,
    )
    state = new_session(session_config, background)
    for frame in profile.recording.frames:
        ingest_frame(state, frame)
    if state.phase is not Phase.AUTHENTICATED:
        raise PopaError("profile enrollment did not reach the authenticated state")

    if args.stdin:
        stream = parse_csv(sys.stdin)
    else:
        stream = read_file(args.infile)
    pace = Pace.REAL_TIME if args.pace == "real-time" else Pace.AS_FAST
    for frame in replay(stream, pace):
        decision = ingest_frame(state, frame)
        if decision is not None:
            print(f"{decision.window_index},{decision.verdict.value},"
                  f"{decision.genuine_fraction:.4f}")
        if state.phase is Phase.DEAUTHENTICATED:
            print(f"DEAUTH,{state.deauth_reason.value}")
            if state.deauth_reason is DeauthReason.IMPOSTOR_SUSPECTED:
                return EXIT_IMPOSTOR
            return EXIT_WALKED_AWAY
    return EXIT_OK


def cmd_evaluate(args) -> int:
    config = load_config(args.config)
    data_dir = Path(args.data)
    recordings = [read_file(p) for p in sorted(data_dir.glob("*.csv"))]
    if not recordings:
        raise PopaError(f"no recordings (*.csv) in {data_dir}")
    algorithm = config.algorithm_spec(args.algorithm)

    if args.mode == "cv":
        data = dataset_from_recordings(
            recordings, config.feature_mode, config.window_len, config.stride
        )
        report = cross_validate(data, algorithm, args.repeats, args.folds, args.seed)
    else:
        by_subject: dict[str, list[SessionRecording]] = {}
        for rec in recordings:
            by_subject.setdefault(rec.subject_id, []).append(rec)
        train, test = {}, {}
        for subject, recs in sorted(by_subject.items()):
            recs = sorted(recs, key=lambda r: r.session_id)
            if len(recs) < 2:
                raise PopaError(f"permanence needs 2 sessions per subject; "
                                f"{subject!r} has {len(recs)}")
            train[subject] = recs[0]
            test[subject] = recs[1]
        report = permanence_eval(
            train, test, algorithm, args.seed, config.feature_mode, config.window_len
        )

    text = report_csv(report)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    print(f"MACRO tpr={report.macro_tpr:.4f} fpr={report.macro_fpr:.4f} "
          f"fnr={report.macro_fnr:.4f}")
    return EXIT_OK


def cmd_identify(args) -> int:
    from .classify import train_model
    import numpy as np

    config = load_config(args.config)
    window_len = args.window if args.window is not None else config.window_len
    entries = list_profiles(args.profiles)
    if not entries:
        raise PopaError(f"no profiles in {args.profiles}")
    parts = []
    for _, path in entries:
        parts.append(profile_dataset(load_profile(path)))
    X = np.concatenate([p.X for p in parts])
    labels = []
    for p in parts:
        labels.extend(p.label_strings())
    model = train_model(Dataset(X, labels), config.algorithm_spec(), seed=args.seed)

    recording = read_file(args.infile)
    from .errors import WindowVacant

    for index, window in enumerate(windows(recording.frames, window_len)):
        try:
            subject, confidence = identify_window(window, model, config.tau_occupied)
            print(f"{index},{subject},{confidence:.4f}")
        except WindowVacant:
            print(f"{index},VACANT,0.0000")
    return EXIT_OK


_COMMANDS = {
    "synth": cmd_synth,
    "enroll": cmd_enroll,
    "monitor": cmd_monitor,
    "evaluate": cmd_evaluate,
    "identify": cmd_identify,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (PopaError, ValueError, OSError) as exc:
        print(f"popa: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
