import numpy as np
import pytest

from kinkstab.darboux import build_darboux
from kinkstab.grid import default_grid
from kinkstab.kink import solve_kink
from kinkstab.potential import make_phi4, make_phi8_scaled
from kinkstab.resonance import solve_resonance
from kinkstab.spectral import build_L0, check_hypothesis1, discrete_spectrum


@pytest.fixture(scope="session")
def phi4():
    return make_phi4()


@pytest.fixture(scope="session")
def phi4_kink(phi4):
    return solve_kink(phi4, default_grid(phi4.omega))


@pytest.fixture(scope="session")
def phi4_h1(phi4, phi4_kink):
    return check_hypothesis1(phi4, phi4_kink.grid, phi4_kink)


@pytest.fixture(scope="session")
def phi4_even(phi4, phi4_kink):
    return discrete_spectrum(build_L0(phi4, phi4_kink, "even"), phi4.omega_sq)


@pytest.fixture(scope="session")
def phi4_darboux(phi4_kink, phi4_h1):
    return build_darboux(phi4_kink, phi4_h1.lambda_sq)


@pytest.fixture(scope="session")
def phi4_res(phi4_kink, phi4_h1):
    return solve_resonance(phi4_kink, phi4_h1.lambda_sq)


@pytest.fixture(scope="session")
def phi8_m5():
    W = make_phi8_scaled(5.0)
    K = solve_kink(W, default_grid(W.omega))
    h1 = check_hypothesis1(W, K.grid, K)
    return W, K, h1, build_darboux(K, h1.lambda_sq)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# -- acceptance reporting: one line per criterion ------------------------------

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call":
        return
    detail = dict(item.user_properties).get("detail", "")
    _CRITERIA[mark.args[0]] = (rep.passed, item.name, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        ok, name, detail = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {name}  {detail}")
