"""Even double-well potentials W with exact derivatives.

Every admissible potential is stored as an even polynomial in phi, so all
derivatives W^(k) are exact and the expansion around the vacuum phi = 1 can be
formed without cancellation (see :meth:`Potential.tail_factor`).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial


class InvalidPotential(ValueError):
    pass


@dataclass(frozen=True)
class EtaPerturbation:
    """Even multiplicative perturbation eta(phi), W_eta = (1 + eta) W."""

    coeffs: tuple

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if np.any(c[1::2] != 0.0):
            raise InvalidPotential("eta must be even (odd-power coefficients must vanish)")
        object.__setattr__(self, "coeffs", tuple(float(v) for v in c))

    @property
    def poly(self) -> Polynomial:
        return Polynomial(self.coeffs)

    @property
    def eta0(self) -> float:
        """max_{k<=4} sup_[-1,1] |eta^(k)| on a dense sample."""
        s = np.linspace(-1.0, 1.0, 4001)
        p = self.poly
        return float(max(np.max(np.abs(p.deriv(k)(s))) if k else np.max(np.abs(p(s)))
                         for k in range(5)))


@dataclass(frozen=True)
class Potential:
    kind: str
    coeffs: tuple  # ascending powers of phi
    name: str = ""
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        c = np.trim_zeros(np.asarray(self.coeffs, dtype=float), "b")
        object.__setattr__(self, "coeffs", tuple(float(v) for v in c))

    @property
    def poly(self) -> Polynomial:
        return Polynomial(self.coeffs)

    def __call__(self, phi):
        return self.poly(phi)

    def d(self, k: int, phi):
        """k-th derivative W^(k)(phi)."""
        if k == 0:
            return self.poly(phi)
        return self.poly.deriv(k)(phi)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def omega_sq(self) -> float:
        return float(self.d(2, 1.0))

    @property
    def omega(self) -> float:
        return float(np.sqrt(self.omega_sq))

    def tail_factor(self) -> Polynomial:
        """Polynomial r with W(1 - y) = y^2 r(y).

        The two lowest coefficients of W(1 - y) vanish for an admissible
        potential; they are dropped exactly so that r(0) = omega^2 / 2.
        """
        shifted = self.poly(Polynomial([1.0, -1.0]))
        c = np.asarray(shifted.coef, dtype=float)
        if c.size < 3:
            raise InvalidPotential("potential has no quadratic vacuum at phi = 1")
        return Polynomial(c[2:])

    def taylor_force(self, base, pert, start: int = 1):
        """sum_{k>=start} W^(k+1)(base) pert^k / k!.

        start=1 gives W'(base + pert) - W'(base); start=2 drops the linear term too.
        """
        out = np.zeros(np.broadcast(base, pert).shape)
        term = np.ones_like(out)
        for k in range(1, self.degree):
            term = term * pert / k
            if k >= start:
                out = out + self.d(k + 1, base) * term
        return out

    def taylor_remainder(self, base, pert, order: int):
        """sum_{k>=order} W^(k)(base) pert^k / k!  (e.g. order=2 gives W(b+p)-W(b)-W'(b)p)."""
        out = np.zeros(np.broadcast(base, pert).shape)
        term = np.ones_like(out)
        for k in range(1, self.degree + 1):
            term = term * pert / k
            if k >= order:
                out = out + self.d(k, base) * term
        return out

    def to_spec(self) -> dict:
        if self.kind == "phi4":
            return {"kind": "phi4"}
        if self.kind == "phi8":
            return {"kind": "phi8", "m": self.params["m"]}
        if self.kind == "perturbed":
            return {"kind": "perturbed", "base": self.params["base"].to_spec(),
                    "eta_coeffs": list(self.params["eta"].coeffs)}
        return {"kind": "poly", "coeffs": list(self.coeffs)}


def _quartic():
    # (phi^2 - 1)^2
    return Polynomial([1.0, 0.0, -2.0, 0.0, 1.0])


def make_phi4() -> Potential:
    return Potential("phi4", tuple(0.25 * _quartic().coef), name="phi^4")


def make_phi8_scaled(m: float) -> Potential:
    """W_m = (phi^2-1)^2 (phi^2-m^2)^2 / (4 m^4)."""
    if not m > 1.0:
        raise InvalidPotential(f"m must exceed 1 (got {m}); inner and outer wells collide")
    outer = Polynomial([-m * m, 0.0, 1.0]) ** 2
    p = _quartic() * outer / (4.0 * m**4)
    return Potential("phi8", tuple(p.coef), name=f"phi^8 scaled (m={m:g})", params={"m": float(m)})


def make_poly(coeffs, name: str = "poly") -> Potential:
    return Potential("poly", tuple(coeffs), name=name)


def perturb(base: Potential, eta: EtaPerturbation, max_eta0: float = 0.25) -> Potential:
    if eta.eta0 > max_eta0:
        raise InvalidPotential(f"eta0={eta.eta0:.3g} exceeds the configured bound {max_eta0:g}")
    p = (Polynomial([1.0]) + eta.poly) * base.poly
    out = Potential("perturbed", tuple(p.coef), name=f"({base.name}) x (1+eta)",
                    params={"base": base, "eta": eta})
    report = validate(out)
    if not report.ok:
        raise InvalidPotential(f"perturbed potential is not admissible: {report.failures()}")
    return out


def potential_from_spec(spec: dict) -> Potential:
    kind = spec.get("kind")
    if kind == "phi4":
        return make_phi4()
    if kind == "phi8":
        return make_phi8_scaled(float(spec["m"]))
    if kind == "poly":
        return make_poly(spec["coeffs"])
    if kind == "perturbed":
        return perturb(potential_from_spec(spec["base"]), EtaPerturbation(tuple(spec["eta_coeffs"])))
    raise InvalidPotential(f"unknown potential kind {kind!r}")


@dataclass
class Clause:
    name: str
    passed: bool
    witness: float | None = None
    detail: str = ""


@dataclass
class ValidationReport:
    clauses: list
    omega_sq: float

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.clauses)

    def failures(self) -> list:
        return [c.name for c in self.clauses if not c.passed]

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "omega_sq": self.omega_sq,
            "clauses": [{"name": c.name, "passed": bool(c.passed), "witness": c.witness,
                         "detail": c.detail} for c in self.clauses],
        }


def validate(W: Potential, n_mesh: int = 10_000, margin: float = 1e-3,
             zero_tol: float = 1e-12) -> ValidationReport:
    """Check the admissibility clauses; failures are reported, never raised."""
    clauses = []
    c = np.asarray(W.coeffs)
    odd = c[1::2]
    s = np.linspace(-3.0, 3.0, 601)
    asym = float(np.max(np.abs(W(s) - W(-s))))
    clauses.append(Clause("even", bool(np.all(odd == 0.0)) and asym == 0.0,
                          witness=float(s[np.argmax(np.abs(W(s) - W(-s)))]),
                          detail=f"max|W(s)-W(-s)|={asym:.3g}"))

    vals = W(s)
    imin = int(np.argmin(vals))
    clauses.append(Clause("nonnegative", bool(vals[imin] >= -zero_tol), witness=float(s[imin]),
                          detail=f"min W on [-3,3] = {vals[imin]:.3g}"))

    mesh = np.linspace(-1.0 + margin, 1.0 - margin, n_mesh)
    wm = W(mesh)
    jmin = int(np.argmin(wm))
    clauses.append(Clause("positive_inside", bool(wm[jmin] > 0.0), witness=float(mesh[jmin]),
                          detail=f"min W on (-1,1) mesh = {wm[jmin]:.3g}"))

    w1, dw1 = float(W(1.0)), float(W.d(1, 1.0))
    clauses.append(Clause("vacuum_zero", abs(w1) <= zero_tol, witness=1.0, detail=f"W(1)={w1:.3g}"))
    clauses.append(Clause("vacuum_critical", abs(dw1) <= zero_tol, witness=1.0, detail=f"W'(1)={dw1:.3g}"))
    om2 = W.omega_sq
    clauses.append(Clause("vacuum_massive", om2 > zero_tol, witness=1.0, detail=f"W''(1)={om2:.6g}"))
    return ValidationReport(clauses, om2)
