import numpy as np
import pytest
from scipy.integrate import quad

from kinkstab.grid import Grid
from kinkstab.kink import solve_kink
from kinkstab.potential import make_phi4
from kinkstab.resonance import ResonanceError, compute_gamma, segur_g, solve_resonance


def test_segur_closed_form(phi4_res):
    x = phi4_res.grid.x
    m = x <= 15.0
    assert np.max(np.abs(phi4_res.g[m] - segur_g(x[m]) / 4)) <= 1e-6
    assert phi4_res.g[0] == 0.0
    # g_Segur'(0) = 4 fixes the 1/4
    h = 1e-6
    assert (segur_g(h) - segur_g(-h)) / (2 * h) == pytest.approx(4.0, rel=1e-8)


def test_tail_wavenumber(phi4_res):
    assert abs(phi4_res.k_fit - 2.0) <= 1e-4
    assert phi4_res.k == pytest.approx(2.0)


def test_residual_small(phi4_res, phi4_kink):
    assert phi4_res.residual(phi4_kink.Wpp) <= 1e-6


def test_gamma_against_closed_form(phi4_kink, phi4_h1, phi4_res):
    rep = compute_gamma(phi4_kink, phi4_h1.Y, phi4_res, phi4_h1.lambda_sq, refinements=False)
    c2 = 3.0 / (2.0 * np.sqrt(2.0))             # normalization of c tanh sech on R

    def f(x):
        s = x / np.sqrt(2)
        Y2 = c2 * (np.tanh(s) / np.cosh(s)) ** 2
        return 0.25 * 6.0 * np.tanh(s) * Y2 * segur_g(x) / 4.0

    ref = 2.0 * quad(f, 0, 60, limit=400, epsabs=1e-14, epsrel=1e-13)[0]
    assert rep.gamma == pytest.approx(ref, rel=1e-8)
    assert abs(rep.int_Yg) <= 1e-8
    assert abs(rep.int_R0g - 2 * rep.gamma) <= 1e-8 * rep.scale


@pytest.mark.parametrize("s", [0.5, 2.0])
def test_scale_covariance(phi4_kink, phi4_h1, phi4_res, s):
    from dataclasses import replace
    base = compute_gamma(phi4_kink, phi4_h1.Y, phi4_res, phi4_h1.lambda_sq, refinements=False)
    scaled = replace(phi4_res, g=s * phi4_res.g)
    rep = compute_gamma(phi4_kink, phi4_h1.Y, scaled, phi4_h1.lambda_sq, refinements=False)
    assert rep.gamma == pytest.approx(s * base.gamma, rel=1e-14)
    assert abs(rep.gamma) > 1e-6 * rep.scale


def test_domain_length_within_truncation(phi4, phi4_kink, phi4_h1, phi4_res):
    from kinkstab.grid import ODD
    from kinkstab.spectral import build_L0, shoot_eigenfunction
    a = compute_gamma(phi4_kink, phi4_h1.Y, phi4_res, phi4_h1.lambda_sq, refinements=False)
    g = phi4_kink.grid.extended(1.5)
    K = solve_kink(phi4, g)
    Y = shoot_eigenfunction(build_L0(phi4, K, ODD), phi4_h1.lambda_sq)
    b = compute_gamma(K, Y, solve_resonance(K, phi4_h1.lambda_sq), phi4_h1.lambda_sq, refinements=False)
    # the difference is dominated by discretization roundoff, not truncation
    assert abs(a.gamma - b.gamma) <= max(a.truncation_bound, 1e-10 * a.scale)


def test_residual_converges():
    W = make_phi4()
    res = []
    for n in (1001, 2001):
        K = solve_kink(W, Grid(20.0, n))
        res.append(solve_resonance(K, 1.5).residual(K.Wpp))
    # fourth-order stencil applied to an accurate g: error falls with h
    assert res[1] < res[0] / 8


def test_below_continuum_rejected(phi4_kink):
    with pytest.raises(ResonanceError, match="ill-posed"):
        solve_resonance(phi4_kink, 0.4)


def test_refined_gamma_report(phi4_kink, phi4_h1, phi4_res):
    rep = compute_gamma(phi4_kink, phi4_h1.Y, phi4_res, phi4_h1.lambda_sq)
    assert rep.hypothesis2 is True
    assert rep.gamma_convergence["relative_spread"] < 0.5e-3
    assert set(rep.to_dict()) >= {"gamma", "k", "tail_amplitude", "hypothesis2"}
