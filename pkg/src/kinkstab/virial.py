"""Weight functions, the Hypothesis 3 check and the virial functionals."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson

from .darboux import DarbouxData, RegularizedTransform, apply_S_epsilon
from .grid import ODD, Grid, d1, inner, integrate
from .spectral import SchrodingerOperator, sturm_count


class DomainTooShort(RuntimeError):
    pass


# -- smooth cutoff ---------------------------------------------------------

def _step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1, with its first two derivatives."""
    t = np.asarray(t, dtype=float)
    s = np.zeros_like(t)
    ds = np.zeros_like(t)
    dds = np.zeros_like(t)
    s[t >= 1.0] = 1.0
    m = (t > 0.0) & (t < 1.0)
    tm = t[m]
    u = 1.0 - tm
    # a = exp(-1/t), b = exp(-1/(1-t)); work with b/a to avoid underflow
    ratio = np.exp(np.clip(1.0 / tm - 1.0 / u, -700.0, 700.0))   # b / a
    s[m] = 1.0 / (1.0 + ratio)
    G = 1.0 / tm**2 + 1.0 / u**2
    f = G / (ratio + 2.0 + 1.0 / ratio)       # a b G / (a + b)^2
    dG = -2.0 / tm**3 + 2.0 / u**3
    dlog = (1.0 / tm**2 - 1.0 / u**2 + dG / G
            - 2.0 * (1.0 / tm**2 - ratio / u**2) / (1.0 + ratio))
    ds[m] = f
    dds[m] = f * dlog
    return s, ds, dds


def chi(x):
    """Even cutoff: 1 on [-1, 1], 0 outside [-2, 2], nonincreasing on [0, inf).

    Returns chi, chi', chi'' at x.
    """
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    s, ds, dds = _step(ax - 1.0)
    sg = np.sign(x)
    return 1.0 - s, -ds * sg, -dds


@dataclass
class Weights:
    grid: Grid
    A: float
    B: float
    kappa: float
    rho: np.ndarray
    sigma_A: np.ndarray
    chi_A: np.ndarray
    dchi_A: np.ndarray
    zeta_A: np.ndarray
    Phi_A: np.ndarray
    zeta_B: np.ndarray
    Phi_B: np.ndarray
    logzeta_B_dd: np.ndarray   # zeta_B''/zeta_B - (zeta_B'/zeta_B)^2
    Psi: np.ndarray
    dPsi: np.ndarray


def _zeta(x, scale):
    c, dc, ddc = chi(x)
    ax = np.abs(x)
    zeta = np.exp(-(1.0 - c) * ax / scale)
    # (log zeta)'' = (1/scale) [chi'' |x| + 2 chi' sgn x]
    logdd = (ddc * ax + 2.0 * dc * np.sign(x)) / scale
    return zeta, logdd


def _primitive(f, grid: Grid):
    return cumulative_simpson(f, dx=grid.h, initial=0.0)


def make_weights(grid: Grid, omega_sq: float, lambda_sq: float, A: float, B: float) -> Weights:
    x = grid.x
    kappa = np.sqrt(omega_sq - lambda_sq) / 12.0
    rho = 1.0 / np.cosh(kappa * x) ** 2
    sigma_A = 1.0 / np.cosh(2.0 * x / A)
    chi_A, dchi_A, _ = chi(x / A)
    dchi_A = dchi_A / A
    zeta_A, _ = _zeta(x, A)
    zeta_B, logdd_B = _zeta(x, B)
    Phi_A = _primitive(zeta_A**2, grid)
    Phi_B = _primitive(zeta_B**2, grid)
    Psi = chi_A**2 * Phi_B
    dPsi = 2.0 * chi_A * dchi_A * Phi_B + chi_A**2 * zeta_B**2
    return Weights(grid, A, B, kappa, rho, sigma_A, chi_A, dchi_A, zeta_A, Phi_A, zeta_B, Phi_B,
                   logdd_B, Psi, dPsi)


def resolved(dP2, tail_fraction: float = 0.1, factor: float = 100.0) -> np.ndarray:
    """P2' with its unresolved tail set to zero.

    P2' decays exponentially, but the sampled values level off at the noise
    floor of the Riccati solve.  The weights below grow exponentially, so that
    floor would dominate; beyond the last node where |P2'| exceeds `factor`
    times the floor (measured on the outer `tail_fraction` of the grid) the
    samples are replaced by zero.
    """
    dP2 = np.asarray(dP2, dtype=float)
    k = max(1, int(tail_fraction * dP2.size))
    floor = float(np.max(np.abs(dP2[-k:])))
    above = np.nonzero(np.abs(dP2) > factor * floor)[0]
    out = np.zeros_like(dP2)
    if above.size:
        last = above[-1] + 1
        out[:last] = dP2[:last]
    return out


def WB_ratio(w: Weights, dP2) -> float:
    """max |x - Phi_B/zeta_B^2| |P2'| B / rho^2 over the grid."""
    x = w.grid.x
    val = np.abs(x - w.Phi_B / w.zeta_B**2) * np.abs(resolved(dP2)) * w.B / w.rho**2
    return float(np.max(val))


# -- Hypothesis 3 ----------------------------------------------------------

def virial_operator(D: DarbouxData, gamma: float) -> SchrodingerOperator:
    x = D.grid.x
    return SchrodingerOperator(D.grid, 0.5 * x * D.dP2, 0.0, ODD, kinetic=1.0 - gamma)


@dataclass
class Hypothesis3Report:
    gamma_values: list
    counts: list
    passed: bool
    witness: float | None
    tail_xdP2: float

    def to_dict(self) -> dict:
        return {"gamma_values": list(self.gamma_values), "negative_counts": list(self.counts),
                "passed": self.passed, "witness_gamma": self.witness, "tail_xdP2": self.tail_xdP2,
                "note": "" if self.passed else "fail on scanned grid"}


DEFAULT_GAMMAS = tuple(np.round(np.arange(0.05, 0.501, 0.05), 2))


def check_hypothesis3(D: DarbouxData, gamma_grid=DEFAULT_GAMMAS, tail_tol: float = 1e-6) -> Hypothesis3Report:
    x = D.grid.x
    tail = float(np.max(np.abs(x[-10:] * D.dP2[-10:])))
    if tail > tail_tol:
        raise DomainTooShort(f"x P2' has not decayed at L (|x P2'| = {tail:.2e})")
    counts = []
    for gam in gamma_grid:
        if not 0.0 < gam < 1.0:
            raise ValueError("gamma values must lie in (0, 1)")
        d, e = virial_operator(D, gam).tridiagonal()
        counts.append(sturm_count(d, e, 0.0))
    good = [g for g, c in zip(gamma_grid, counts) if c == 0]
    return Hypothesis3Report([float(g) for g in gamma_grid], counts, bool(good),
                             float(max(good)) if good else None, tail)


def sech_gap_ratio(w: Weights, v) -> float:
    """int (v')^2 / (2 kappa^2 int rho v^2) for odd v."""
    grid = w.grid
    den = integrate(w.rho * v**2, grid)
    if den == 0.0:
        raise ValueError("v must be nonzero")
    dv = d1(v, grid.h, ODD)
    return integrate(dv**2, grid) / (2.0 * w.kappa**2 * den)


def sech_gap_check(w: Weights, samples) -> float:
    return float(min(sech_gap_ratio(w, v) for v in samples))


def compute_VB(w: Weights, dP2) -> np.ndarray:
    return 0.5 * w.logzeta_B_dd - 0.5 * (w.Phi_B / w.zeta_B**2) * resolved(dP2)


def VB_form(w: Weights, VB, v) -> tuple:
    """(int (v')^2 + V_B v^2, int rho v^2) for odd v."""
    grid = w.grid
    dv = d1(v, grid.h, ODD)
    return integrate(dv**2 + VB * v**2, grid), integrate(w.rho * v**2, grid)


# -- functionals -----------------------------------------------------------

@dataclass
class FunctionalSample:
    I: float
    Hfun: float
    J: float
    Zfun: float
    K: float
    M: float
    alpha: float
    beta: float
    NY: float
    rho2u1_sq: float
    rhoSu1_sq: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def functionals(z1, z2, u1, u2, w: Weights, D: DarbouxData, T: RegularizedTransform,
                g, Gamma: float, lam: float, NY: float = 0.0) -> FunctionalSample:
    grid = w.grid
    h = grid.h
    du1 = d1(u1, h, ODD)
    dPhi_A = w.zeta_A**2
    I = integrate((w.Phi_A * du1 + 0.5 * dPhi_A * u1) * u2, grid)
    Hf = integrate(w.sigma_A**2 * u1 * u2, grid)
    alpha = z1 * z1 - z2 * z2
    beta = 2.0 * z1 * z2
    zsq = z1 * z1 + z2 * z2
    gc = g * w.chi_A
    J = -alpha * inner(u2, gc, grid) + 2.0 * lam * beta * inner(u1, gc, grid) + Gamma / (2.0 * lam) * beta * zsq
    Zf = Gamma / (4.0 * lam) * alpha * beta
    if np.any(u1) or np.any(u2):
        v1 = apply_S_epsilon(T, D, u1)
        v2 = apply_S_epsilon(T, D, u2)
        dv1 = d1(v1, h, ODD)
        K = integrate((w.Psi * dv1 + 0.5 * w.dPsi * v1) * v2, grid)
        rhoS = integrate(w.rho**2 * v1**2, grid)
    else:
        K = rhoS = 0.0
    M = zsq**2 + integrate(w.sigma_A**2 * (du1**2 + u1**2 + u2**2), grid)
    rho2u = integrate(w.rho**4 * u1**2, grid)
    return FunctionalSample(I, Hf, J, Zf, K, M, alpha, beta, NY, rho2u, rhoS)
