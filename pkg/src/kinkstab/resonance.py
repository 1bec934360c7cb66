"""Bounded odd solution of L0 g = 4 lambda^2 g and the coupling Gamma = 1/4 int W'''(H) Y^2 g."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import curve_fit

from .grid import Grid, integrate
from .kink import KinkProfile, solve_kink
from .spectral import ODD, build_L0, shoot_eigenfunction


class ResonanceError(ValueError):
    pass


@dataclass
class ResonanceSolution:
    grid: Grid
    g: np.ndarray
    dg: np.ndarray
    k: float
    amplitude: float
    phase: float
    k_fit: float
    energy: float
    sol: object = field(default=None, repr=False)

    def residual(self, V) -> float:
        """sup |L0 g - 4 lambda^2 g| / sup |g| with the fourth-order stencil (inner nodes)."""
        from .grid import d2
        r = -d2(self.g, self.grid.h, ODD) + (V - self.energy) * self.g
        return float(np.max(np.abs(r[:-3])) / np.max(np.abs(self.g)))


def solve_resonance(K: KinkProfile, lambda_sq: float, rtol: float = 1e-12) -> ResonanceSolution:
    E = 4.0 * lambda_sq
    om2 = K.omega**2
    if E <= om2:
        raise ResonanceError("resonance frequency below continuum; Hypothesis 2 ill-posed in this regime "
                             f"(4 lambda^2 = {E:.6g} <= omega^2 = {om2:.6g})")

    def rhs(x, s):
        V = K.at(x).Wpp[0]
        return [s[1], (V - E) * s[0]]

    x = K.grid.x
    sol = solve_ivp(rhs, (0.0, x[-1]), [0.0, 1.0], method="DOP853", rtol=rtol, atol=1e-13,
                    t_eval=x, dense_output=True)
    if not sol.success:
        raise ResonanceError(sol.message)
    g, dg = sol.y
    k = float(np.sqrt(E - om2))
    tail = x >= 0.75 * x[-1]
    xt, gt = x[tail], g[tail]

    def model(t, a, kk, th):
        return a * np.sin(kk * t + th)

    c = np.linalg.lstsq(np.column_stack([np.sin(k * xt), np.cos(k * xt)]), gt, rcond=None)[0]
    a0, th0 = np.hypot(*c), np.arctan2(c[1], c[0])
    (a, kk, th), _ = curve_fit(model, xt, gt, p0=[a0, k, th0], xtol=1e-14, ftol=1e-14)
    if a < 0:
        a, th = -a, th + np.pi
    return ResonanceSolution(K.grid, g, dg, k, float(a), float(np.mod(th, 2 * np.pi)), float(kk), E, sol.sol)


@dataclass
class FermiReport:
    gamma: float
    scale: float
    truncation_bound: float
    gamma_convergence: dict
    hypothesis2: bool | None
    int_Yg: float
    int_R0g: float
    k: float
    tail_amplitude: float

    def to_dict(self) -> dict:
        return {"gamma": self.gamma, "scale": self.scale, "truncation_bound": self.truncation_bound,
                "gamma_convergence": self.gamma_convergence, "hypothesis2": self.hypothesis2,
                "int_Yg": self.int_Yg, "int_R0g": self.int_R0g, "k": self.k,
                "tail_amplitude": self.tail_amplitude}


def compute_gamma(K: KinkProfile, Y, res: ResonanceSolution, lambda_sq: float,
                  refinements: bool = True, tol_rel: float = 1e-6, digits: int = 3) -> FermiReport:
    grid = K.grid
    integrand = 0.25 * K.Wppp * Y**2 * res.g
    gamma = integrate(integrand, grid)
    scale = integrate(np.abs(integrand), grid)
    decay = 2.0 * np.sqrt(K.omega**2 - lambda_sq)
    trunc = 2.0 * abs(integrand[-1]) / decay + 1e-12 * scale
    int_Yg = integrate(Y * res.g, grid)

    # independent path: adaptive quadrature of R0 g = W'''(H) Y^2 g / 2 on the dense ODE output
    # with Y interpolated by a cubic spline of the sampled mode
    from scipy.interpolate import CubicSpline
    Ys = CubicSpline(grid.x, Y)

    def r0g(t):
        return 0.5 * K.at(t).Wppp[0] * Ys(t) ** 2 * res.sol(t)[0]

    pts = np.linspace(0.0, grid.L, 41)
    int_R0g = 2.0 * sum(quad(r0g, a, b, epsabs=1e-14, epsrel=1e-12, limit=200)[0]
                        for a, b in zip(pts[:-1], pts[1:]))

    conv = {"base": {"h": grid.h, "L": grid.L, "gamma": gamma}}
    hyp2 = None
    if refinements:
        vals = [gamma]
        for label, gnew in (("h/2", grid.refined(2)), ("1.5L", grid.extended(1.5))):
            Kn = solve_kink(K.W, gnew)
            Yn = shoot_eigenfunction(build_L0(K.W, Kn, ODD), lambda_sq)
            resn = solve_resonance(Kn, lambda_sq)
            gn = integrate(0.25 * Kn.Wppp * Yn**2 * resn.g, gnew)
            conv[label] = {"h": gnew.h, "L": gnew.L, "gamma": gn}
            vals.append(gn)
        spread = (max(vals) - min(vals)) / max(abs(gamma), 1e-300)
        conv["relative_spread"] = spread
        stable = spread < 0.5 * 10.0 ** (-digits)
        if not stable:
            hyp2 = None
        else:
            hyp2 = bool(abs(gamma) > tol_rel * scale)
    return FermiReport(float(gamma), float(scale), float(trunc), conv, hyp2, float(int_Yg),
                       float(int_R0g), res.k_fit, res.amplitude)


def segur_g(x):
    """Closed-form phi^4 solution of L0 g = 6 g (scaled so that g'(0) = 4)."""
    s = x / np.sqrt(2.0)
    return np.sin(2 * x) * (1 + 0.5 / np.cosh(s) ** 2) + np.sqrt(2.0) * np.cos(2 * x) * np.tanh(s)
