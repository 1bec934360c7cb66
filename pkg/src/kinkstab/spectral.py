"""Discrete spectra of -a d^2/dx^2 + V on a parity sector of the half-line.

Matrix route: three-point stencil, Dirichlet (odd) or Neumann (even) node at
x = 0 and Dirichlet at x = L, Sturm-sequence bisection plus inverse iteration
(LAPACK stebz/stein through ``eigh_tridiagonal``), Richardson extrapolation
over h, h/2, h/4.  Shooting route: Numerov integration inward from the tail,
used as an independent oracle and to sample eigenfunctions at the
extrapolated eigenvalue.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq

from .grid import EVEN, ODD, Grid, default_grid, inner
from .kink import KinkProfile, solve_kink
from .potential import Potential, validate


class SpectralError(RuntimeError):
    pass


class NoSignChange(SpectralError):
    pass


@dataclass
class SchrodingerOperator:
    grid: Grid
    V: np.ndarray
    v_infinity: float
    sector: str
    kinetic: float = 1.0
    V_fn: Optional[Callable] = field(default=None, repr=False)

    def __post_init__(self):
        if self.sector not in (ODD, EVEN):
            raise ValueError(f"sector must be 'odd' or 'even' (got {self.sector!r})")
        self.V = np.asarray(self.V, dtype=float)
        if self.V.shape != (self.grid.n,):
            raise ValueError("potential samples do not match the grid")

    def on(self, grid: Grid) -> "SchrodingerOperator":
        if self.V_fn is None:
            raise SpectralError("operator has no potential evaluator; cannot resample")
        return SchrodingerOperator(grid, self.V_fn(grid.x), self.v_infinity, self.sector,
                                   self.kinetic, self.V_fn)

    def tridiagonal(self):
        """Symmetric tridiagonal (diag, offdiag) on the sector's free nodes."""
        a, h = self.kinetic, self.grid.h
        c = a / (h * h)
        if self.sector == ODD:
            d = 2.0 * c + self.V[1:-1]
            e = np.full(d.size - 1, -c)
        else:
            d = 2.0 * c + self.V[:-1]
            e = np.full(d.size - 1, -c)
            e[0] = -np.sqrt(2.0) * c   # Neumann row symmetrized with the half trapezoid weight
        return d, e

    def to_samples(self, vec) -> np.ndarray:
        """Map an eigenvector of :meth:`tridiagonal` back to grid samples."""
        out = np.zeros(self.grid.n)
        if self.sector == ODD:
            out[1:-1] = vec
        else:
            out[:-1] = vec
            out[0] = vec[0] * np.sqrt(2.0)
        return out

    def apply(self, f) -> np.ndarray:
        """Three-point action on samples; boundary rows follow the sector conditions."""
        f = np.asarray(f, dtype=float)
        a, h = self.kinetic, self.grid.h
        out = np.zeros_like(f)
        out[1:-1] = -a * (f[2:] - 2.0 * f[1:-1] + f[:-2]) / h**2 + self.V[1:-1] * f[1:-1]
        if self.sector == EVEN:
            out[0] = -a * 2.0 * (f[1] - f[0]) / h**2 + self.V[0] * f[0]
        return out

    def dense(self) -> np.ndarray:
        d, e = self.tridiagonal()
        return np.diag(d) + np.diag(e, 1) + np.diag(e, -1)


@dataclass
class SpectralData:
    eigenvalues: np.ndarray
    eigenfunctions: list
    convergence: np.ndarray
    sector: str
    grid: Grid
    raw: list = field(default_factory=list)          # eigenvalues at h, h/2, h/4
    flags: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"sector": self.sector,
                "eigenvalues": [float(v) for v in self.eigenvalues],
                "convergence": [float(v) for v in self.convergence],
                "flags": list(self.flags)}


def sturm_count(d, e, sigma: float = 0.0) -> int:
    """Number of eigenvalues < sigma of the symmetric tridiagonal (d, e)."""
    count = 0
    q = d[0] - sigma
    if q < 0:
        count += 1
    tiny = np.finfo(float).tiny
    e2 = np.asarray(e) ** 2
    for i in range(1, len(d)):
        if q == 0.0:
            q = tiny
        q = d[i] - sigma - e2[i - 1] / q
        if q < 0:
            count += 1
    return count


def _eigs_below(op: SchrodingerOperator, upper: float):
    d, e = op.tridiagonal()
    if sturm_count(d, e, upper) == 0:
        return np.empty(0), np.empty((d.size, 0))
    lo = float(np.min(d) - 2.0 * np.max(np.abs(e)) - 1.0)
    w, v = eigh_tridiagonal(d, e, select="v", select_range=(lo, upper))
    return w, v


def _normalize(f, grid: Grid, sector: str) -> np.ndarray:
    f = f / np.sqrt(inner(f, f, grid))
    ref = f[1] if sector == ODD else f[0]
    return -f if ref < 0 else f


def discrete_spectrum(op: SchrodingerOperator, upper: float | None = None,
                      richardson: bool = True) -> SpectralData:
    upper = op.v_infinity if upper is None else upper
    if upper > op.v_infinity + 1e-14:
        raise SpectralError("upper bound exceeds the bottom of the essential spectrum")
    w0, v0 = _eigs_below(op, upper)
    flags = []
    if richardson and op.V_fn is not None and w0.size:
        g1 = op.grid.refined(2)
        g2 = op.grid.refined(4)
        # a level may straddle `upper` between resolutions; compare on the common count
        w1, _ = _eigs_below(op.on(g1), upper + 0.5 * (upper - w0.max()) + 1e-12)
        w2, _ = _eigs_below(op.on(g2), upper + 0.5 * (upper - w0.max()) + 1e-12)
        k = min(w0.size, w1.size, w2.size)
        w0, w1, w2, v0 = w0[:k], w1[:k], w2[:k], v0[:, :k]
        r1 = (4.0 * w1 - w0) / 3.0
        r2 = (4.0 * w2 - w1) / 3.0
        evals = r2
        conv = np.abs(r2 - r1)
        raw = [w0, w1, w2]
    else:
        evals = w0
        conv = np.full(w0.size, np.nan)
        raw = [w0]
    funcs = []
    for i, lam in enumerate(evals):
        if op.V_fn is not None and lam < op.v_infinity:
            funcs.append(shoot_eigenfunction(op, lam))
        else:
            funcs.append(_normalize(op.to_samples(v0[:, i]), op.grid, op.sector))
        err = conv[i] if np.isfinite(conv[i]) else op.grid.h**2
        if upper - lam < 10.0 * max(err, 1e-12):
            flags.append(f"eigenvalue {lam:.10g} near threshold {upper:g}: possibly a resonance, unresolved")
    return SpectralData(np.asarray(evals), funcs, np.asarray(conv), op.sector, op.grid, raw, flags)


# -- shooting oracle -------------------------------------------------------

def _numerov_inward(V, E, a, h, v_inf, x_end):
    """Integrate -a u'' + V u = E u from x = L inward on nodes with spacing h.

    Starts on the decaying exponential; returns the samples (inward order
    reversed back to ascending x) and the left boundary data (u(0), u'(0)).
    """
    f = (E - V) / a            # u'' = -f u
    n = V.size
    kap = np.sqrt(max(v_inf - E, 1e-300) / a)
    u = np.empty(n)
    u[-1] = 1.0
    u[-2] = np.exp(kap * h)
    c = h * h / 12.0
    for i in range(n - 2, 0, -1):
        u[i - 1] = (2.0 * u[i] * (1.0 - 5.0 * c * f[i]) - u[i + 1] * (1.0 + c * f[i + 1])) / (1.0 + c * f[i - 1])
        if abs(u[i - 1]) > 1e250:
            u[i - 1:] *= 1e-250
    # derivative at 0 from the Numerov-consistent formula with ghost node at -h
    return u


def _boundary_value(op: SchrodingerOperator, E: float, fine: Grid):
    V = op.V_fn(fine.x)
    u = _numerov_inward(V, E, op.kinetic, fine.h, op.v_infinity, fine.L)
    h = fine.h
    c = h * h / 12.0
    f = (E - V) / op.kinetic
    if op.sector == ODD:
        return u[0] / np.max(np.abs(u)), u
    # even: the symmetric ghost u(-h) = u(h) turns u'(0)=0 into a Numerov residual at node 0
    res = 2.0 * u[1] * (1.0 + c * f[1]) - 2.0 * u[0] * (1.0 - 5.0 * c * f[0])
    return res / np.max(np.abs(u)), u


def _shooting_grid(op: SchrodingerOperator, h_max: float = 2.5e-3) -> Grid:
    factor = max(1, int(np.ceil(op.grid.h / h_max)))
    return op.grid.refined(factor) if factor > 1 else op.grid


def shooting_eigenvalue(op: SchrodingerOperator, bracket, xtol: float = 1e-13) -> float:
    if op.V_fn is None:
        raise SpectralError("shooting needs a potential evaluator")
    fine = _shooting_grid(op)
    a, b = bracket

    def F(E):
        return _boundary_value(op, E, fine)[0]

    fa, fb = F(a), F(b)
    if np.sign(fa) == np.sign(fb):
        raise NoSignChange(f"no sign change of the matching function on [{a}, {b}]")
    return float(brentq(F, a, b, xtol=xtol, rtol=4 * np.finfo(float).eps))


def shoot_eigenfunction(op: SchrodingerOperator, E: float) -> np.ndarray:
    """Eigenfunction at a known eigenvalue, sampled on op.grid by inward shooting."""
    fine = _shooting_grid(op)
    _, u = _boundary_value(op, E, fine)
    step = (fine.n - 1) // (op.grid.n - 1)
    f = u[::step].copy()
    if op.sector == ODD:
        f[0] = 0.0
    return _normalize(f, op.grid, op.sector)


# -- L0 and Hypothesis 1 ---------------------------------------------------

def build_L0(W: Potential, K: KinkProfile, sector: str) -> SchrodingerOperator:
    if K.W is not W and K.W != W:
        raise ValueError("kink profile was computed for a different potential")
    return SchrodingerOperator(K.grid, K.Wpp.copy(), W.omega_sq, sector, 1.0, K.V_L0)


@dataclass
class Hypothesis1Report:
    passed: bool
    lambda_sq: float | None
    Y: np.ndarray | None
    odd_count: int
    window: bool | None
    omega_sq: float
    spectrum: SpectralData | None = None
    reason: str = ""

    @property
    def lam(self) -> float:
        return float(np.sqrt(self.lambda_sq))

    def to_dict(self) -> dict:
        return {"passed": bool(self.passed), "lambda_sq": self.lambda_sq,
                "odd_eigenvalue_count": self.odd_count, "window_omega_half_lt_lambda_lt_omega": self.window,
                "omega_sq": self.omega_sq, "reason": self.reason,
                "spectrum": self.spectrum.to_dict() if self.spectrum else None}


def hypothesis1_from_spectrum(spec: SpectralData, omega_sq: float, zero_tol: float = 1e-6) -> Hypothesis1Report:
    ev = spec.eigenvalues
    inside = [i for i, v in enumerate(ev) if zero_tol < v < omega_sq]
    if spec.sector != ODD or not inside:
        return Hypothesis1Report(False, None, None, len(inside), None, omega_sq, spec,
                                 reason="no odd eigenvalue in (0, omega^2)")
    i = inside[0]
    lam2 = float(ev[i])
    lam, om = np.sqrt(lam2), np.sqrt(omega_sq)
    reason = "" if len(inside) == 1 else f"{len(inside)} odd internal modes; lowest selected"
    return Hypothesis1Report(True, lam2, spec.eigenfunctions[i], len(inside),
                             bool(0.5 * om < lam < om), omega_sq, spec, reason=reason)


def check_hypothesis1(W: Potential, grid: Grid | None = None, K: KinkProfile | None = None) -> Hypothesis1Report:
    if not validate(W).ok:
        return Hypothesis1Report(False, None, None, 0, None, W.omega_sq, None,
                                 reason="potential fails admissibility")
    grid = grid or default_grid(W.omega)
    K = K or solve_kink(W, grid)
    spec = discrete_spectrum(build_L0(W, K, ODD), W.omega_sq)
    return hypothesis1_from_spectrum(spec, W.omega_sq)
