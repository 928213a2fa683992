import pytest
from hypothesis import HealthCheck, settings

from popa.synth import PopulationParams, generate_population, simulate_session

# first kernel invocations may JIT-compile; don't let hypothesis time them
settings.register_profile(
    "popa",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("popa")


@pytest.fixture(scope="session")
def small_population():
    """Three well-separated subjects with short sessions, for fast fixtures."""
    params = PopulationParams(
        n_subjects=3,
        baseline_lo=250.0,
        baseline_hi=750.0,
        noise_lo=8.0,
        noise_hi=12.0,
        seed=11,
    )
    specs = generate_population(params)
    recordings = [simulate_session(s, 400.0, session_seed=1) for s in specs]
    return specs, recordings
