#!/usr/bin/env python3
"""De-authentication latency demo.

Enrolls a synthetic subject, streams genuine windows, then switches to an
impostor (or to an empty chair) and reports how many windows pass before the
session terminates.
"""

import argparse

import numpy as np

from popa.classify import AlgorithmSpec, Dataset
from popa.features import frames_to_matrix
from popa.ingest import SensorFrame
from popa.session import Phase, SessionConfig, ingest_frame, new_session
from popa.synth import PopulationParams, generate_population, simulate_session


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--genuine-windows", type=int, default=5)
    ap.add_argument("--scenario", choices=["impostor", "vacancy"], default="impostor")
    ap.add_argument("--seed", type=int, default=11)
    args = ap.parse_args()

    params = PopulationParams(
        n_subjects=3, baseline_lo=250.0, baseline_hi=750.0,
        noise_lo=8.0, noise_hi=12.0, seed=args.seed,
    )
    genuine, impostor, other = generate_population(params)
    rec = simulate_session(genuine, 400.0, session_seed=1)
    bg = simulate_session(other, 150.0, session_seed=1)
    background = Dataset(frames_to_matrix(bg.frames), [other.subject_id] * len(bg.frames))

    config = SessionConfig(algorithm=AlgorithmSpec(n_trees=25), seed=7)
    state = new_session(config, background)
    for frame in rec.frames[:600]:
        ingest_frame(state, frame)
    print(f"enrolled 600 frames -> {state.phase.value}")

    stream = list(rec.frames[600 : 600 + 20 * args.genuine_windows])
    t0 = stream[-1].timestamp_ms if stream else rec.frames[599].timestamp_ms
    if args.scenario == "impostor":
        attack = simulate_session(impostor, 60.0, session_seed=9)
        takeover = [
            SensorFrame(t0 + 500 * (i + 1), f.readings)
            for i, f in enumerate(attack.frames)
        ]
    else:
        takeover = [SensorFrame(t0 + 500 * (i + 1), (0,) * 16) for i in range(120)]
    switch_window = len(stream) // 20

    for frame in stream + takeover:
        decision = ingest_frame(state, frame)
        if decision is not None:
            print(f"window {decision.window_index}: {decision.verdict.value} "
                  f"(genuine fraction {decision.genuine_fraction:.2f})")
        if state.phase is Phase.DEAUTHENTICATED:
            latency = state.window_index - switch_window
            print(f"DEAUTH,{state.deauth_reason.value} -- takeover began at window "
                  f"{switch_window}, detected after {latency} window(s) "
                  f"({latency * 10} simulated seconds)")
            return
    print("stream ended without de-authentication")


if __name__ == "__main__":
    main()
