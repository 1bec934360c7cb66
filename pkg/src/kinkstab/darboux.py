"""Two-step Darboux factorization L0 -> L1 -> L2 and the regularized transform.

Log-derivative formulation throughout: q0 = H''/H' comes from the kink's
tail-safe closed form, q1 = Z'/Z from the Riccati equation

    q1' = P1 - lambda^2 - q1^2,

integrated inward from the tail where the decaying branch is attracting.
Then P2 = 2 lambda^2 + 2 q1^2 - P1 and Z = exp(int_0^x q1) without dividing
any exponentially small samples.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import solve_banded

from .grid import EVEN, ODD, Grid, d1, d2, inner, norm
from .kink import KinkProfile


class RiccatiBlowup(RuntimeError):
    pass


@dataclass
class DarbouxData:
    grid: Grid
    lambda_sq: float
    q0: np.ndarray
    q1: np.ndarray
    dq1: np.ndarray
    Z: np.ndarray
    P1: np.ndarray
    P2: np.ndarray
    dP2: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    q1_at_zero: float
    omega_sq: float

    def summary(self) -> dict:
        return {"lambda_sq": self.lambda_sq, "P1_tail": float(self.P1[-1]), "P2_tail": float(self.P2[-1]),
                "omega_sq": self.omega_sq, "q1_at_zero": self.q1_at_zero,
                "Z_min": float(self.Z.min()),
                "max_abs_dP2": float(np.max(np.abs(self.dP2)))}


def _p1_fields(K: KinkProfile, x):
    f = K.at(x)
    P1 = 2.0 * f.q0**2 - f.Wpp
    # d/dx q0 = W''(H) - q0^2 ; d/dx W''(H) = W'''(H) H'
    dq0 = f.Wpp - f.q0**2
    dP1 = 4.0 * f.q0 * dq0 - f.Wppp * f.Hp
    return P1, dP1, f.q0


def build_darboux(K: KinkProfile, lambda_sq: float, rtol: float = 1e-12) -> DarbouxData:
    grid = K.grid
    x = grid.x
    L = grid.L
    P1L = float(_p1_fields(K, L)[0][0])
    if P1L <= lambda_sq:
        raise RiccatiBlowup("lambda^2 is not below the tail value of P1")
    bound = 1e6

    def rhs(t, s):
        P1 = _p1_fields(K, t)[0][0]
        return [P1 - lambda_sq - s[0] ** 2, s[0]]

    def blow(t, s):
        return bound - abs(s[0])
    blow.terminal = True

    q1L = -np.sqrt(P1L - lambda_sq)
    sol = solve_ivp(rhs, (L, 0.0), [q1L, 0.0], method="DOP853", rtol=rtol, atol=1e-14,
                    t_eval=x[::-1], events=blow)
    if sol.status == 1 or not sol.success or sol.y.shape[1] != x.size:
        raise RiccatiBlowup("Riccati integration blew up: Z has a zero, so lambda^2 is not "
                            "the ground state of L1 (another odd mode lies below)")
    q1 = sol.y[0][::-1]
    logZ = sol.y[1][::-1]
    logZ = logZ - logZ[0]
    P1, dP1, q0 = _p1_fields(K, x)
    dq1 = P1 - lambda_sq - q1**2
    P2 = 2.0 * lambda_sq + 2.0 * q1**2 - P1
    dP2 = 4.0 * q1 * dq1 - dP1
    k1 = q1 + q0
    k2 = dq1 + q1 * q0
    return DarbouxData(grid, float(lambda_sq), q0, q1, dq1, np.exp(logZ), P1, P2, dP2, k1, k2,
                       float(q1[0]), K.omega**2)


def apply_U0(D: DarbouxData, f, parity: str = ODD):
    return d1(f, D.grid.h, parity) - D.q0 * f


def apply_U1U0(D: DarbouxData, f) -> np.ndarray:
    """d^2 f - d(k1 f) + k2 f for odd f (fourth-order stencils).

    The outer two nodes are set to zero: their stencils reach past x = L.
    """
    f = np.asarray(f, dtype=float)
    h = D.grid.h
    out = d2(f, h, ODD) - d1(D.k1 * f, h, EVEN) + D.k2 * f
    out[-2:] = 0.0
    return out


def apply_L(V, f, h, parity: str = ODD):
    """-f'' + V f with the fourth-order stencil."""
    return -d2(f, h, parity) + V * f


class RegularizedTransform:
    """X_eps = (1 - eps d^2/dx^2)^{-1} on odd functions, Dirichlet at 0 and L."""

    def __init__(self, epsilon: float, grid: Grid):
        if not 0.0 < epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1) (got {epsilon})")
        self.epsilon = float(epsilon)
        self.grid = grid
        m = grid.n - 2
        c = epsilon / grid.h**2
        ab = np.zeros((3, m))
        ab[0, 1:] = -c
        ab[1, :] = 1.0 + 2.0 * c
        ab[2, :-1] = -c
        self._ab = ab

    def solve(self, rhs) -> np.ndarray:
        out = np.zeros(self.grid.n)
        out[1:-1] = solve_banded((1, 1), self._ab, np.asarray(rhs, dtype=float)[1:-1])
        return out

    def forward(self, g) -> np.ndarray:
        """(1 - eps d^2) g on interior nodes."""
        g = np.asarray(g, dtype=float)
        out = np.zeros_like(g)
        out[1:-1] = g[1:-1] - self.epsilon * (g[2:] - 2.0 * g[1:-1] + g[:-2]) / self.grid.h**2
        return out


def apply_S_epsilon(T: RegularizedTransform, D: DarbouxData, f) -> np.ndarray:
    return T.solve(apply_U1U0(D, f))


def project_out(u, Y, grid: Grid):
    return u - inner(u, Y, grid) * Y


def coercivity_ratio(T: RegularizedTransform, D: DarbouxData, Y, u, rho) -> float:
    """||rho^2 u|| / ||rho S_eps u|| for odd u orthogonal to Y."""
    grid = D.grid
    nu = norm(u, grid)
    if nu == 0.0:
        raise ValueError("u must be nonzero")
    if abs(inner(u, Y, grid)) > 1e-10 * nu:
        raise ValueError("u must be orthogonal to the internal mode; project it first")
    v = apply_S_epsilon(T, D, u)
    den = norm(rho * v, grid)
    assert den > 0.0, "S_eps annihilated a Y-orthogonal function"
    return norm(rho**2 * u, grid) / den


def conjugation_residual(D: DarbouxData, V0, f) -> float:
    """||U1U0 L0 f - L2 U1U0 f|| / ||f||, excluding the outer five nodes."""
    h = D.grid.h
    lhs = apply_U1U0(D, apply_L(V0, f, h))
    rhs = apply_L(D.P2, apply_U1U0(D, f), h)
    r = (lhs - rhs)
    r[-5:] = 0.0
    return norm(r, D.grid) / norm(f, D.grid)
