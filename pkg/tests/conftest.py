import math

import pytest

from klindblad import ModelParams, evolve_trajectory

REFERENCE = dict(epsilon=1.0, omega=0.5, mass=1.0)
REFERENCE_THETAS = (0.0, 0.05, math.pi / 12, math.pi / 6, math.pi / 4)

ACCEPTANCE_RESULTS = []


def record_criterion(number, name, passed, detail):
    ACCEPTANCE_RESULTS.append((number, name, bool(passed), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, passed, detail in sorted(ACCEPTANCE_RESULTS, key=lambda r: r[0]):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"{status} [{number:>4}] {name}: {detail}")


class TrajectoryCache:
    def __init__(self):
        self._store = {}

    def get(self, ell_H=1.0, ell_L=1.0, theta=0.0, method="rk4", sample_every=100, t_max=20.0):
        key = (ell_H, ell_L, theta, method, sample_every, t_max)
        if key not in self._store:
            params = ModelParams(ell_H=ell_H, ell_L=ell_L, theta=theta, **REFERENCE)
            self._store[key] = evolve_trajectory(
                params, t_max=t_max, sample_every=sample_every, method=method
            )
        return self._store[key]


@pytest.fixture(scope="session")
def trajectories():
    return TrajectoryCache()
