import numpy as np
import pytest

from chemoflux import Grid, ModelParams


@pytest.fixture
def unit_grid():
    return Grid((1.0,), (64,))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_params(**kw):
    base = dict(m=1.0, p=2.0, q=2.0, chi=1.0, xi=1.0, alpha=1.0, beta=1.0, gamma=1.0, delta=1.0)
    base.update(kw)
    return ModelParams(**base)


def cosine(grid, offset=1.0, amplitude=1.0):
    x = grid.centers()[0]
    return offset + amplitude * np.cos(np.pi * x / grid.extent[0])


# acceptance outcomes, printed once at the end of the session
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def record(label, passed, detail=""):
    # parametrized criteria pass only if every case passes
    if label in ACCEPTANCE:
        before, earlier = ACCEPTANCE[label]
        passed, detail = before and passed, f"{earlier}; {detail}"
    ACCEPTANCE[label] = (bool(passed), detail)
    print(f"{label} {'PASS' if passed else 'FAIL'} {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(ACCEPTANCE, key=lambda s: int(s[1:])):
        passed, detail = ACCEPTANCE[label]
        terminalreporter.write_line(f"{label} {'PASS' if passed else 'FAIL'} {detail}")
