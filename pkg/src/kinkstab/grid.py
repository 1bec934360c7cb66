"""Half-line grids for parity-definite functions on the real line.

Functions are stored on [0, L]; their extension to [-L, 0] is fixed by the
parity, so full-line integrals are twice the half-line trapezoid sums.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

ODD, EVEN = "odd", "even"


@dataclass(frozen=True)
class Grid:
    L: float
    n: int

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"grid needs n >= 3 points (got {self.n})")
        if not self.L > 0:
            raise ValueError(f"grid half-length must be positive (got {self.L})")

    @property
    def h(self) -> float:
        return self.L / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.L, self.n)

    @property
    def weights(self) -> np.ndarray:
        w = np.full(self.n, self.h)
        w[0] = w[-1] = 0.5 * self.h
        return w

    def refined(self, factor: int = 2) -> "Grid":
        return Grid(self.L, factor * (self.n - 1) + 1)

    def extended(self, scale: float) -> "Grid":
        """Longer domain with the same spacing."""
        cells = int(round(scale * (self.n - 1)))
        return Grid(cells * self.h, cells + 1)

    def check_tail(self, omega: float, tol: float = 1e-12) -> bool:
        ok = np.exp(-omega * self.L) < tol
        if not ok:
            warnings.warn(f"domain too short: exp(-omega L) = {np.exp(-omega * self.L):.2e} >= {tol:g}",
                          stacklevel=2)
        return bool(ok)


def default_grid(omega: float, L_factor: float = 40.0, n: int = 4001) -> Grid:
    return Grid(L_factor / omega, n)


def integrate(f, grid: Grid) -> float:
    """Integral over R of a function that is even on the line (stored on [0, L])."""
    return 2.0 * float(np.dot(grid.weights, f))


def inner(f, g, grid: Grid) -> float:
    """<f, g> over R for f, g of equal parity."""
    return integrate(np.asarray(f) * np.asarray(g), grid)


def norm(f, grid: Grid) -> float:
    return float(np.sqrt(inner(f, f, grid)))


def _pad(f, parity: str, k: int = 2):
    f = np.asarray(f, dtype=float)
    sign = -1.0 if parity == ODD else 1.0
    left = sign * f[k:0:-1]
    right = 2.0 * f[-1] - f[-2:-k - 2:-1]
    return np.concatenate([left, f, right])


def d1(f, h: float, parity: str) -> np.ndarray:
    """Fourth-order first derivative; parity sets the ghost values left of 0.

    The two outermost nodes use an odd reflection about x = L and are only
    second-order accurate.
    """
    p = _pad(f, parity)
    return (p[:-4] - 8.0 * p[1:-3] + 8.0 * p[3:-1] - p[4:]) / (12.0 * h)


def d2(f, h: float, parity: str) -> np.ndarray:
    """Fourth-order second derivative (same boundary treatment as :func:`d1`)."""
    p = _pad(f, parity)
    return (-p[:-4] + 16.0 * p[1:-3] - 30.0 * p[2:-2] + 16.0 * p[3:-1] - p[4:]) / (12.0 * h * h)


def flip(parity: str) -> str:
    return EVEN if parity == ODD else ODD


def full_line(f, parity: str):
    """Mirror a half-line array onto [-L, L]."""
    f = np.asarray(f)
    sign = -1.0 if parity == ODD else 1.0
    return np.concatenate([sign * f[:0:-1], f])
