import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import eigh

from kinkstab.grid import EVEN, ODD, Grid, inner
from kinkstab.kink import solve_kink
from kinkstab.potential import make_phi8_scaled
from kinkstab.spectral import (NoSignChange, SchrodingerOperator, build_L0, check_hypothesis1,
                               discrete_spectrum, shooting_eigenvalue, sturm_count)


def pt_operator(sector, L=20.0, n=2001, depth=2.0):
    grid = Grid(L, n)
    fn = lambda x: -depth / np.cosh(x) ** 2          # noqa: E731
    return SchrodingerOperator(grid, fn(grid.x), 0.0, sector, 1.0, fn)


def test_phi4_potential(phi4, phi4_kink):
    op = build_L0(phi4, phi4_kink, ODD)
    x = phi4_kink.x
    assert np.max(np.abs(op.V - (2 - 3 / np.cosh(x / np.sqrt(2)) ** 2))) <= 1e-12
    assert op.V[0] == pytest.approx(-1.0, abs=1e-15)
    assert abs(op.V[-1] - 2.0) <= 1e-12


def test_phi8_potential_at_zero():
    W = make_phi8_scaled(2.0)
    K = solve_kink(W, Grid(20.0 / W.omega, 401))
    assert build_L0(W, K, ODD).V[0] == pytest.approx(W.d(2, 0.0), abs=1e-14)


def test_phi4_odd_mode(phi4_h1):
    spec = phi4_h1.spectrum
    assert spec.eigenvalues.size == 1
    assert abs(spec.eigenvalues[0] - 1.5) <= 1e-6
    x, Y = spec.grid.x, spec.eigenfunctions[0]
    s = x / np.sqrt(2)
    ref = np.tanh(s) / np.cosh(s)
    ref /= np.sqrt(inner(ref, ref, spec.grid))
    assert np.max(np.abs(Y - ref)) <= 1e-8
    assert Y[1] > 0


def test_phi4_zero_mode(phi4_even, phi4_kink):
    assert abs(phi4_even.eigenvalues[0]) <= 1e-6
    Y0 = phi4_even.eigenfunctions[0]
    assert Y0[0] > 0
    ref = phi4_kink.Hp / np.sqrt(inner(phi4_kink.Hp, phi4_kink.Hp, phi4_kink.grid))
    assert np.max(np.abs(Y0 - ref)) <= 1e-8


def test_poschl_teller():
    spec = discrete_spectrum(pt_operator(EVEN), 0.0)
    assert spec.eigenvalues[0] == pytest.approx(-1.0, abs=1e-8)
    # no odd bound state for -2 sech^2
    assert discrete_spectrum(pt_operator(ODD), 0.0).eigenvalues.size == 0


@given(st.sampled_from([2.0, 6.0, 12.0]))
@settings(max_examples=3, deadline=None)
def test_poschl_teller_family(depth):
    # -l(l+1) sech^2 has bound states -(l - j)^2, j = 0..l-1, alternating parity
    l = int(round((np.sqrt(1 + 4 * depth) - 1) / 2))
    levels = [-(l - j) ** 2 for j in range(l)]
    even = discrete_spectrum(pt_operator(EVEN, depth=depth), 0.0)
    odd = discrete_spectrum(pt_operator(ODD, depth=depth), 0.0)
    got = sorted(list(even.eigenvalues) + list(odd.eigenvalues))
    assert np.allclose(got, levels, atol=1e-7)


def test_shooting_oracle(phi4, phi4_kink, phi4_h1, phi4_even):
    op = build_L0(phi4, phi4_kink, ODD)
    E = shooting_eigenvalue(op, (1.0, 1.9))
    assert abs(E - 1.5) <= 1e-8
    err = max(phi4_h1.spectrum.convergence[0], 1e-11)
    assert abs(E - phi4_h1.lambda_sq) <= 10 * err
    with pytest.raises(NoSignChange):
        shooting_eigenvalue(op, (1.6, 1.9))
    E0 = shooting_eigenvalue(build_L0(phi4, phi4_kink, EVEN), (-0.5, 0.5))
    assert abs(E0) <= 1e-8


def test_eigenfunctions_orthonormal(phi4_h1):
    spec = phi4_h1.spectrum
    Y = spec.eigenfunctions[0]
    assert abs(inner(Y, Y, spec.grid) - 1.0) <= 1e-8


def test_domain_growth(phi4, phi4_kink, phi4_h1):
    g = phi4_kink.grid.extended(1.25)
    K = solve_kink(phi4, g)
    ev = discrete_spectrum(build_L0(phi4, K, ODD), phi4.omega_sq).eigenvalues
    assert abs(ev[0] - phi4_h1.lambda_sq) <= 1e-8


def test_zero_mode_residual(phi4, phi4_kink):
    op = build_L0(phi4, phi4_kink, EVEN)
    r = op.apply(phi4_kink.Hp)
    h = phi4_kink.grid.h
    scale = np.max(np.abs(op.V))
    assert np.linalg.norm(r[:-1]) / np.linalg.norm(phi4_kink.Hp) <= 10 * h**2 * scale


def test_sturm_count_matches_dense(rng):
    for _ in range(5):
        d = rng.normal(size=60)
        e = rng.normal(size=59)
        A = np.diag(d) + np.diag(e, 1) + np.diag(e, -1)
        w = eigh(A, eigvals_only=True)
        for sigma in rng.normal(size=4):
            assert sturm_count(d, e, sigma) == int(np.sum(w < sigma))


def test_hypothesis1_phi4(phi4_h1):
    assert phi4_h1.passed and phi4_h1.window
    assert phi4_h1.lam == pytest.approx(np.sqrt(1.5), abs=1e-7)


def test_hypothesis1_phi8_large_m():
    lams = []
    for m in (10.0, 20.0):
        W = make_phi8_scaled(m)
        rep = check_hypothesis1(W)
        assert rep.passed and rep.window
        lams.append(rep.lambda_sq)
    # approach to 1.5 is O(m^-2): quadrupling m^2 cuts the gap about fourfold
    gaps = [abs(v - 1.5) for v in lams]
    assert gaps[1] < gaps[0]
    assert 2.5 < gaps[0] / gaps[1] < 6.0


def test_hypothesis1_no_mode_reported():
    spec = discrete_spectrum(pt_operator(ODD), 0.0)
    from kinkstab.spectral import hypothesis1_from_spectrum
    rep = hypothesis1_from_spectrum(spec, 1.0)
    assert not rep.passed


def test_bad_sector():
    with pytest.raises(ValueError):
        SchrodingerOperator(Grid(1.0, 11), np.zeros(11), 0.0, "both")
