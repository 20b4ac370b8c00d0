import numpy as np
import pytest

from ugks.kinetic import GasProperties, MacroState, build_grid


@pytest.fixture(scope="session")
def grid16():
    return build_grid(6.0, 16)


@pytest.fixture(scope="session")
def grid8():
    return build_grid(5.0, 8)


@pytest.fixture(scope="session")
def gas():
    return GasProperties()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def smooth_positive(rng, grid, n=None, scale=0.2):
    """Random non-equilibrium distribution: a Maxwellian times a smooth factor."""
    lead = () if n is None else (n,)
    rho = 1.0 + 0.2 * rng.random(lead)
    U = 0.3 * (rng.random(lead + (3,)) - 0.5)
    T = 0.8 + 0.4 * rng.random(lead)
    from ugks.kinetic import maxwellian_array
    M = maxwellian_array(rho, U, T, grid)
    a = rng.normal(size=lead + (3,)) * scale
    bump = 1.0 + np.tanh(a[..., 0, None, None, None] * grid.u
                         + a[..., 1, None, None, None] * grid.v * grid.w
                         + a[..., 2, None, None, None] * (grid.u ** 2 - grid.w ** 2) / 4)
    return M * bump


# --- acceptance report ---------------------------------------------------------

_ACCEPTANCE = {}


@pytest.fixture
def report():
    """Record one acceptance line: report(criterion, passed, detail)."""
    def record(criterion, passed, detail):
        _ACCEPTANCE[criterion] = (bool(passed), detail)
        print(f"ACCEPTANCE {criterion}: {'PASS' if passed else 'FAIL'} - {detail}")
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_ACCEPTANCE, key=lambda s: (int(s.split(".")[0]), s)):
        ok, detail = _ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'} - {detail}")
