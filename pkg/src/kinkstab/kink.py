"""Static kink H'' = W'(H), H(0) = 0, H(+inf) = 1.

The profile is carried in the log-distance to the vacuum, s = -log(1 - H),
which obeys the autonomous first-order equation

    s' = sqrt(2 r(exp(-s))),       W(1 - y) = y^2 r(y),

obtained from the first integral (H')^2 / 2 = W(H).  The right-hand side is
smooth and tends to omega, so no endpoint singularity remains and every
derived field (H', H'', q0 = H''/H', ...) is evaluated in y = 1 - H without
cancellation in the exponentially small tail.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .grid import Grid
from .potential import Potential


class KinkError(RuntimeError):
    pass


@dataclass(frozen=True)
class KinkFields:
    x: np.ndarray
    y: np.ndarray      # 1 - H
    H: np.ndarray
    Hp: np.ndarray
    Hpp: np.ndarray
    Hppp: np.ndarray
    q0: np.ndarray     # H''/H'
    Wpp: np.ndarray    # W''(H)
    Wppp: np.ndarray   # W'''(H)


class KinkProfile:
    """Sampled kink on a half-line grid, plus an evaluator at arbitrary x >= 0."""

    def __init__(self, W: Potential, grid: Grid, sol, L_solved: float):
        self.W = W
        self.grid = grid
        self.omega = W.omega
        self._sol = sol
        self._L = L_solved
        self._r = W.tail_factor()
        self._r1 = self._r.deriv()
        self._r2 = self._r.deriv(2)
        f = self.at(grid.x)
        self.x, self.y = f.x, f.y
        self.H, self.Hp, self.Hpp, self.Hppp = f.H, f.Hp, f.Hpp, f.Hppp
        self.q0, self.Wpp, self.Wppp = f.q0, f.Wpp, f.Wppp

    def s(self, x):
        x = np.asarray(x, dtype=float)
        inside = np.minimum(x, self._L)
        s = self._sol(inside)
        # beyond the solved range s grows with slope omega up to O(y) corrections
        return np.where(x > self._L, s + self.omega * (x - self._L), s)

    def at(self, x) -> KinkFields:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if np.any(x < 0):
            raise ValueError("kink evaluator takes x >= 0 (extend by oddness)")
        y = np.exp(-self.s(x)).reshape(x.shape)
        r, r1, r2 = self._r(y), self._r1(y), self._r2(y)
        sq = np.sqrt(2.0 * r)
        Hp = y * sq
        Hpp = -y * (2.0 * r + y * r1)
        q0 = -(2.0 * r + y * r1) / sq
        Wpp = 2.0 * r + 4.0 * y * r1 + y * y * r2
        H = 1.0 - y
        return KinkFields(x=x, y=y, H=H, Hp=Hp, Hpp=Hpp, Hppp=Wpp * Hp, q0=q0,
                          Wpp=Wpp, Wppp=self.W.d(3, H))

    def V_L0(self, x):
        return self.at(x).Wpp


def solve_kink(W: Potential, grid: Grid, rtol: float = 1e-13) -> KinkProfile:
    r = W.tail_factor()
    y_probe = np.linspace(0.0, 1.0, 2001)
    if np.min(r(y_probe)) <= 0.0:
        raise KinkError("W vanishes on [0, 1); no kink connects 0 to the vacuum 1")

    def rhs(_, s):
        return np.sqrt(2.0 * r(np.exp(-s)))

    L = grid.L
    sol = solve_ivp(rhs, (0.0, L), [0.0], method="DOP853", rtol=rtol, atol=rtol,
                    dense_output=True)
    if not sol.success:
        raise KinkError(f"kink integration failed: {sol.message}")
    dense = sol.sol

    def s_of_x(x):
        return dense(x)[0]

    return KinkProfile(W, grid, s_of_x, L)


def decay_constants(K: KinkProfile, x_min: float = 0.0, warn_tol: float = 1e-12):
    """Smallest C_k with |H - 1| <= C_0 e^{-omega x}, |H^(k)| <= C_k e^{-omega x} on the grid."""
    if np.exp(-K.omega * K.grid.L) > warn_tol:
        warnings.warn(f"grid too short for tail estimates: exp(-omega L) = "
                      f"{np.exp(-K.omega * K.grid.L):.2e}", stacklevel=2)
    m = K.x >= x_min
    e = np.exp(K.omega * K.x[m])
    cs = [np.max(K.y[m] * e)] + [np.max(np.abs(f[m]) * e) for f in (K.Hp, K.Hpp, K.Hppp)]
    if not np.all(np.isfinite(cs)):
        raise KinkError("unbounded decay ratio; wrong omega or domain too short")
    return tuple(float(c) for c in cs)


def kink_energy(K: KinkProfile) -> float:
    """E[H] = int (H')^2 over R (first integral: (H')^2/2 = W(H))."""
    from scipy.integrate import quad
    r = K.W.tail_factor()

    def integrand(s):
        # (H')^2 dx = H' dH with dH = y ds
        y = np.exp(-s)
        return y * y * np.sqrt(2.0 * r(y))

    val, _ = quad(integrand, 0.0, np.inf, epsabs=1e-14, epsrel=1e-13, limit=200)
    return 2.0 * val
