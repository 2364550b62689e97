import time

import numpy as np
import pytest

from coupled_hamiltonian.integrators import IntegratorSpec, integrate
from coupled_hamiltonian.models import (BeamParams, CouplingSpec, SpringMassParams,
                                        build_coupled_beam_spring, build_initial_state)

# lines appended by tests/test_acceptance.py, echoed at the end of the run
ACCEPTANCE_LINES = []

RUN_T = 50.0
RUN_DT = 5e-4

# wall-clock seconds of each beam-spring run, keyed by dt
RUN_SECONDS = {}


@pytest.fixture(scope="session")
def beam_spring_params():
    return BeamParams(), SpringMassParams(), CouplingSpec()


@pytest.fixture(scope="session")
def beam_spring(beam_spring_params):
    return build_coupled_beam_spring(*beam_spring_params)


@pytest.fixture(scope="session")
def beam_state(beam_spring_params):
    return build_initial_state(*beam_spring_params, q2_0=-1.0)


def _run(system, state, dt, stride):
    n = int(round(RUN_T / dt))
    start = time.perf_counter()
    traj = integrate(system, IntegratorSpec(dt=dt), state, n, stride, track_every_step=True)
    RUN_SECONDS[dt] = time.perf_counter() - start
    return traj


@pytest.fixture(scope="session")
def beam_run(beam_spring, beam_state):
    """The full T = 50, 1e5-step Verlet run, snapshots every 100 steps."""
    return _run(beam_spring, beam_state, RUN_DT, 100)


@pytest.fixture(scope="session")
def beam_run_half_dt(beam_spring, beam_state):
    return _run(beam_spring, beam_state, RUN_DT / 2, 200)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
