"""Nonlinear Klein-Gordon flow of odd perturbations around the kink.

The unknown is the perturbation varphi = phi - H on the half-line [0, L]
with Dirichlet nodes at both ends.  Its equation

    varphi_tt = Lap_h varphi - [W'(H + varphi) - W'(H)]

uses an exact finite Taylor sum for the bracket, so varphi = 0 stays zero
to the last bit (the discrete kink residual Lap_h H - W'(H) = O(h^2) is
dropped on purpose).  Time stepping is velocity Verlet with the sponge
factor exp(-sigma dt / 2) applied to the velocity before and after each
step (Strang splitting), which keeps the scheme symplectic where sigma = 0.
"""
from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .darboux import DarbouxData, RegularizedTransform, build_darboux
from .grid import Grid, inner, integrate
from .kink import KinkProfile, kink_energy, solve_kink
from .potential import Potential
from .virial import Weights, functionals, make_weights


class SimulationError(RuntimeError):
    pass


class InitialDataTooLarge(ValueError):
    pass


COLUMNS = ("t", "z1", "z2", "abs_z", "I", "Hfun", "J", "Zfun", "K", "M", "E", "local_norm")


@dataclass
class FieldState:
    t: float
    varphi1: np.ndarray      # phi1 - H
    varphi2: np.ndarray      # phi2
    H: np.ndarray = field(repr=False)

    @property
    def phi1(self) -> np.ndarray:
        return self.H + self.varphi1

    @property
    def phi2(self) -> np.ndarray:
        return self.varphi2

    def copy(self) -> "FieldState":
        return FieldState(self.t, self.varphi1.copy(), self.varphi2.copy(), self.H)


@dataclass
class SimSetup:
    W: Potential
    K: KinkProfile
    grid: Grid
    dt: float
    Y: np.ndarray                # internal mode of the discrete linearization, unit norm
    lambda_sq: float             # its eigenvalue
    lambda_sq_ref: float         # continuum value from the spectral module
    sponge: np.ndarray
    coeffs: list                 # W^(k+1)(H)/k!, k = 1 .. deg-1
    E_kink: float
    window: float
    D: DarbouxData | None = None
    weights: Weights | None = None
    T_eps: RegularizedTransform | None = None
    g: np.ndarray | None = None
    Gamma: float = 0.0

    @property
    def lam(self) -> float:
        return math.sqrt(self.lambda_sq)

    @property
    def h(self) -> float:
        return self.grid.h


def sponge_profile(grid: Grid, width: float = 0.2, strength: float = 1.0) -> np.ndarray:
    """Quadratic ramp from 0 at (1 - width) L to `strength` at L."""
    x0 = (1.0 - width) * grid.L
    s = np.clip((grid.x - x0) / (grid.L - x0), 0.0, None)
    return strength * s**2


def discrete_internal_mode(K: KinkProfile, grid: Grid):
    """Lowest odd eigenpair of -Lap_h + W''(H) with Dirichlet nodes at 0 and L."""
    h = grid.h
    d = 2.0 / h**2 + K.Wpp[1:-1]
    e = np.full(d.size - 1, -1.0 / h**2)
    w, v = eigh_tridiagonal(d, e, select="i", select_range=(0, 0))
    Y = np.zeros(grid.n)
    Y[1:-1] = v[:, 0] / math.sqrt(2.0 * h)
    if Y[1] < 0:
        Y = -Y
    return float(w[0]), Y


def prepare(W: Potential, lambda_sq_ref: float, *, h_factor=0.05, L_factor=200.0, dt_factor=0.4,
            cadence=0.5, sponge=True, sponge_width=0.2, sponge_strength=1.0, window=10.0,
            with_functionals=False, Gamma=0.0, A=None, B=None, epsilon=1e-2) -> SimSetup:
    om = W.omega
    cells = int(math.ceil(L_factor / h_factor))
    grid = Grid(cells * h_factor / om, cells + 1)
    dt = dt_factor * grid.h
    if dt > 0.5 * grid.h * (1 + 1e-12):
        raise SimulationError(f"CFL violated: dt = {dt:g} > h/2 = {grid.h / 2:g}")
    # make the cadence an integer number of steps
    dt = cadence / math.ceil(cadence / dt - 1e-9)
    K = solve_kink(W, grid)
    lam2, Y = discrete_internal_mode(K, grid)
    if not 0.0 < lam2 < W.omega_sq:
        raise SimulationError(f"no internal mode on the simulation grid (lowest odd eigenvalue {lam2:g})")
    sig = sponge_profile(grid, sponge_width, sponge_strength) if sponge else np.zeros(grid.n)
    coeffs = [W.d(k + 1, K.H) / math.factorial(k) for k in range(1, W.degree)]
    setup = SimSetup(W, K, grid, dt, Y, lam2, float(lambda_sq_ref), sig, coeffs, kink_energy(K), window,
                     Gamma=float(Gamma))
    if with_functionals:
        from .resonance import solve_resonance
        setup.D = build_darboux(K, lambda_sq_ref)
        setup.weights = make_weights(grid, W.omega_sq, lambda_sq_ref,
                                     A if A is not None else 64.0 / om, B if B is not None else 16.0 / om)
        setup.T_eps = RegularizedTransform(epsilon, grid)
        setup.g = solve_resonance(K, lambda_sq_ref).g
    return setup


# -- initial data ------------------------------------------------------------

def _h1l2_sq(v1, v2, grid: Grid, upto: int | None = None) -> float:
    """Full-line ||(v1, v2)||^2 in H^1 x L^2 over nodes [0, upto]."""
    n = grid.n if upto is None else upto + 1
    a, b, h = v1[:n], v2[:n], grid.h
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    grad = np.sum(np.diff(a) ** 2) / h
    return 2.0 * (float(np.sum(w * (a * a + b * b))) + grad)


def bump(grid: Grid, width: float, center: float) -> np.ndarray:
    x = grid.x
    b = np.exp(-((x - center) / width) ** 2) - np.exp(-((x + center) / width) ** 2)
    b[0] = 0.0
    b[-1] = 0.0
    return b / math.sqrt(_h1l2_sq(b, np.zeros_like(b), grid))


def initialize(setup: SimSetup, mode: str = "pure-Y", delta: float = 0.05, width: float = 2.0,
               center: float = 5.0, file: str | None = None, delta_max: float = 0.2) -> FieldState:
    grid = setup.grid
    v2 = np.zeros(grid.n)
    if mode == "pure-Y":
        v1 = delta * setup.Y
    elif mode == "bump":
        v1 = delta * bump(grid, width, center)
    elif mode == "file":
        data = np.genfromtxt(file, delimiter=",", names=True)
        v1 = np.interp(grid.x, data["x"], data["varphi1"], right=0.0)
        if "varphi2" in data.dtype.names:
            v2 = np.interp(grid.x, data["x"], data["varphi2"], right=0.0)
        v1[0] = v2[0] = 0.0
        v1[-1] = v2[-1] = 0.0
    else:
        raise ValueError(f"unknown initial-data mode {mode!r}")
    size = math.sqrt(_h1l2_sq(v1, v2, grid))
    if size > delta_max:
        raise InitialDataTooLarge(f"||phi_in - H|| = {size:.4g} exceeds delta_max = {delta_max:g}")
    return FieldState(0.0, v1, v2, setup.K.H)


# -- stepping ----------------------------------------------------------------

def _accel(setup: SimSetup, u: np.ndarray, out: np.ndarray) -> np.ndarray:
    c = setup.coeffs
    p = c[-1] * u
    for ck in reversed(c[:-1]):
        p += ck
        p *= u
    out[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / setup.h**2 - p[1:-1]
    out[0] = out[-1] = 0.0
    return out


def _advance(setup: SimSetup, u, v, a, nsteps: int, dt: float):
    damp = np.exp(-0.5 * dt * setup.sponge) if np.any(setup.sponge) else None
    half = 0.5 * dt
    for _ in range(nsteps):
        if damp is not None:
            v *= damp
        v += half * a
        u += dt * v
        _accel(setup, u, a)
        v += half * a
        if damp is not None:
            v *= damp


def step(setup: SimSetup, state: FieldState, dt: float | None = None) -> FieldState:
    dt = setup.dt if dt is None else dt
    if dt > 0.5 * setup.h * (1 + 1e-12):
        raise SimulationError(f"CFL violated: dt = {dt:g} > h/2")
    new = state.copy()
    a = _accel(setup, new.varphi1, np.empty_like(new.varphi1))
    _advance(setup, new.varphi1, new.varphi2, a, 1, dt)
    new.t = state.t + dt
    return new


# -- diagnostics ---------------------------------------------------------------

def decompose(setup: SimSetup, state: FieldState):
    grid, Y, lam = setup.grid, setup.Y, setup.lam
    z1 = inner(state.varphi1, Y, grid)
    z2 = inner(state.varphi2, Y, grid) / lam
    u1 = state.varphi1 - z1 * Y
    u2 = state.varphi2 - lam * z2 * Y
    return z1, z2, u1, u2


def nonlinear_term(setup: SimSetup, varphi1) -> np.ndarray:
    """N = W'(H + varphi1) - W'(H) - W''(H) varphi1."""
    c = setup.coeffs
    if len(c) < 2:
        return np.zeros_like(varphi1)
    p = c[-1] * varphi1
    for ck in reversed(c[1:-1]):
        p += ck
        p *= varphi1
    return p * varphi1


def energy(setup: SimSetup, state: FieldState) -> float:
    """E_kink + discrete perturbation energy; conserved by the scheme up to O(dt^2)."""
    u, v, h = state.varphi1, state.varphi2, setup.h
    pot = setup.W.taylor_remainder(setup.K.H, u, 2)
    e = 0.5 * np.sum(v[1:-1] ** 2) * h + 0.5 * np.sum(np.diff(u) ** 2) / h + np.sum(pot[1:-1]) * h
    return setup.E_kink + 2.0 * float(e)


def local_norm(setup: SimSetup, state: FieldState, window: float | None = None) -> float:
    R = setup.window if window is None else window
    k = int(np.searchsorted(setup.grid.x, R, side="right")) - 1
    return math.sqrt(_h1l2_sq(state.varphi1, state.varphi2, setup.grid, upto=max(k, 1)))


def global_norm(setup: SimSetup, state: FieldState) -> float:
    return math.sqrt(_h1l2_sq(state.varphi1, state.varphi2, setup.grid))


def outer_energy(setup: SimSetup, state: FieldState) -> float:
    """Quadratic perturbation energy inside the sponge layer."""
    m = setup.sponge > 0
    if not np.any(m):
        return 0.0
    u, v, h = state.varphi1, state.varphi2, setup.h
    du = np.diff(u) / h
    e = 0.5 * np.sum(v[m] ** 2 + (setup.K.Wpp * u * u)[m]) * h + 0.5 * np.sum(du[m[1:]] ** 2) * h
    return 2.0 * float(e)


# -- trajectories --------------------------------------------------------------

@dataclass
class ModalTrajectory:
    columns: dict
    extra: dict
    meta: dict

    def __len__(self):
        return len(self.columns["t"])

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(COLUMNS)
            for row in zip(*(self.columns[c] for c in COLUMNS)):
                w.writerow([repr(float(v)) for v in row])


def simulate(setup: SimSetup, state: FieldState, T: float, cadence: float = 0.5,
             with_functionals: bool = False, reflect_tol: float = 0.5) -> ModalTrajectory:
    every = int(round(cadence / setup.dt))
    if abs(every * setup.dt - cadence) > 1e-9 * cadence:
        raise ValueError("cadence must be an integer multiple of dt")
    nrec = int(round(T / cadence))
    if with_functionals and setup.D is None:
        raise ValueError("setup was prepared without functional data")
    grid = setup.grid
    u, v = state.varphi1.copy(), state.varphi2.copy()
    a = _accel(setup, u, np.empty_like(u))
    cols = {c: [] for c in COLUMNS}
    extra = {k: [] for k in ("NY", "alpha", "beta", "rho2u1_sq", "rhoSu1_sq", "global_norm",
                             "outer_energy", "orth1", "orth2")}
    e_pert0 = None

    def record(t):
        nonlocal e_pert0
        st = FieldState(t, u, v, setup.K.H)
        z1, z2, u1, u2 = decompose(setup, st)
        NY = inner(nonlinear_term(setup, u), setup.Y, grid)
        E = energy(setup, st)
        if e_pert0 is None:
            e_pert0 = max(E - setup.E_kink, 1e-300)
        if with_functionals:
            F = functionals(z1, z2, u1, u2, setup.weights, setup.D, setup.T_eps, setup.g, setup.Gamma,
                            setup.lam, NY)
            fvals = (F.I, F.Hfun, F.J, F.Zfun, F.K, F.M)
            rho2, rhoS = F.rho2u1_sq, F.rhoSu1_sq
        else:
            fvals = (math.nan,) * 6
            rho2 = integrate(setup_rho4(setup) * u1 * u1, grid)
            rhoS = math.nan
        row = (t, z1, z2, math.hypot(z1, z2)) + fvals + (E, local_norm(setup, st))
        for c, val in zip(COLUMNS, row):
            cols[c].append(float(val))
        oe = outer_energy(setup, st)
        for k, val in (("NY", NY), ("alpha", z1 * z1 - z2 * z2), ("beta", 2 * z1 * z2),
                       ("rho2u1_sq", rho2), ("rhoSu1_sq", rhoS), ("global_norm", global_norm(setup, st)),
                       ("outer_energy", oe), ("orth1", inner(u1, setup.Y, grid)),
                       ("orth2", inner(u2, setup.Y, grid))):
            extra[k].append(float(val))

    record(state.t)
    t = state.t
    for i in range(nrec):
        _advance(setup, u, v, a, every, setup.dt)
        t = state.t + (i + 1) * cadence
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            raise SimulationError(f"non-finite field at t = {t:.6g}")
        record(t)
    cols = {c: np.asarray(vals) for c, vals in cols.items()}
    extra = {k: np.asarray(vals) for k, vals in extra.items()}
    reflect = float(np.max(extra["outer_energy"]) / e_pert0) if e_pert0 else 0.0
    if np.any(setup.sponge) and reflect > reflect_tol:
        warnings.warn(f"sponge layer holds {reflect:.2f} of the initial perturbation energy; "
                      "reflections may contaminate the run", RuntimeWarning, stacklevel=2)
    meta = {"dt": setup.dt, "h": setup.h, "L": grid.L, "n": grid.n, "cadence": cadence,
            "lambda_sq": setup.lambda_sq, "lambda_sq_ref": setup.lambda_sq_ref, "T": t,
            "sponge_energy_fraction_max": reflect, "final_state": (u, v)}
    return ModalTrajectory(cols, extra, meta)


def setup_rho4(setup: SimSetup) -> np.ndarray:
    if setup.weights is not None:
        return setup.weights.rho**4
    kappa = math.sqrt(setup.W.omega_sq - setup.lambda_sq_ref) / 12.0
    return np.cosh(kappa * setup.grid.x) ** -8


def modal_ode_residual(traj: ModalTrajectory) -> dict:
    """Central-difference z-dot against the modal system right-hand sides.

    r1 = z1' - lam z2 and r2 = z2' + lam z1 + <N, Y>/lam at interior records.
    """
    t = traj.columns["t"]
    dtau = np.diff(t)
    if dtau.size < 2 or np.ptp(dtau) > 1e-9 * dtau.mean():
        raise ValueError("trajectory must be recorded at a uniform cadence with >= 3 records")
    tau = dtau.mean()
    lam = math.sqrt(traj.meta["lambda_sq"])
    z1, z2, NY = traj.columns["z1"], traj.columns["z2"], traj.extra["NY"]
    dz1 = (z1[2:] - z1[:-2]) / (2 * tau)
    dz2 = (z2[2:] - z2[:-2]) / (2 * tau)
    r1 = dz1 - lam * z2[1:-1]
    r2 = dz2 + lam * z1[1:-1] + NY[1:-1] / lam
    zsq = z1**2 + z2**2
    dzsq = (zsq[2:] - zsq[:-2]) / (2 * tau)
    r3 = dzsq + 2.0 / lam * NY[1:-1] * z2[1:-1]
    return {"r1": r1, "r2": r2, "r_zsq": r3, "max_r1": float(np.max(np.abs(r1))),
            "max_r2": float(np.max(np.abs(r2))), "max_r_zsq": float(np.max(np.abs(r3)))}


def _trapz(y, t):
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(t))) if len(t) > 1 else 0.0


def summarize(traj: ModalTrajectory) -> dict:
    c, x = traj.columns, traj.extra
    t = c["t"]
    T = t[-1]
    half = t >= 0.5 * T - 1e-12
    z4 = c["abs_z"] ** 4
    r2 = x["rho2u1_sq"]
    iz4, ir2 = _trapz(z4, t), _trapz(r2, t)
    tz4, tr2 = _trapz(z4[half], t[half]), _trapz(r2[half], t[half])
    g0 = x["global_norm"][0]
    E = c["E"]
    ln = c["local_norm"]
    return {
        "T": float(T),
        "z0": float(c["abs_z"][0]),
        "zT": float(c["abs_z"][-1]),
        "z_ratio": float(c["abs_z"][-1] / c["abs_z"][0]) if c["abs_z"][0] > 0 else None,
        "stability_constant": float(np.max(x["global_norm"]) / g0) if g0 > 0 else None,
        "local_norm_T": float(ln[-1]),
        "local_norm_max": float(np.max(ln)),
        "local_ratio": float(ln[-1] / np.max(ln)) if np.max(ln) > 0 else None,
        "int_z4": iz4,
        "int_rho2u1": ir2,
        "tail_fraction_z4": tz4 / iz4 if iz4 > 0 else None,
        "tail_fraction_rho2u1": tr2 / ir2 if ir2 > 0 else None,
        "energy_drift": float(np.max(np.abs(E - E[0])) / abs(E[0])),
        "max_orthogonality_defect": float(max(np.max(np.abs(x["orth1"])), np.max(np.abs(x["orth2"])))),
        "sponge_energy_fraction_max": traj.meta["sponge_energy_fraction_max"],
        "lambda_sq_sim": traj.meta["lambda_sq"],
        "lambda_sq_ref": traj.meta["lambda_sq_ref"],
        "dt": traj.meta["dt"], "h": traj.meta["h"], "L": traj.meta["L"], "n": traj.meta["n"],
    }


def run_experiment(cfg, out_dir=None, lambda_sq_ref=None, Gamma=None):
    """Prepare spectral inputs, evolve, and optionally write trajectory.csv and summary.json."""
    from .grid import default_grid
    from .potential import potential_from_spec
    from .resonance import compute_gamma, solve_resonance
    from .spectral import check_hypothesis1

    W = potential_from_spec(cfg.potential)
    s = cfg.simulation
    if lambda_sq_ref is None or (Gamma is None and s.functionals):
        grid = Grid(cfg.grid.L, cfg.grid.n) if cfg.grid.L else default_grid(W.omega, n=cfg.grid.n)
        K = solve_kink(W, grid)
        h1 = check_hypothesis1(W, grid, K)
        if not h1.passed:
            raise SimulationError(f"Hypothesis 1 fails: {h1.reason}")
        lambda_sq_ref = h1.lambda_sq
        if s.functionals:
            Gamma = compute_gamma(K, h1.Y, solve_resonance(K, h1.lambda_sq), h1.lambda_sq,
                                  refinements=False).gamma
    setup = prepare(W, lambda_sq_ref, h_factor=s.h_factor, L_factor=s.L_factor, dt_factor=s.dt_factor,
                    cadence=s.cadence, sponge=s.sponge, sponge_width=s.sponge_width,
                    sponge_strength=s.sponge_strength, window=s.window, with_functionals=s.functionals,
                    Gamma=Gamma or 0.0, A=cfg.virial.A, B=cfg.virial.B, epsilon=cfg.darboux.epsilon)
    state = initialize(setup, s.mode, s.delta, s.width, s.center, s.file, s.delta_max)
    traj = simulate(setup, state, s.T, s.cadence, with_functionals=s.functionals)
    summary = summarize(traj)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        traj.to_csv(out / "trajectory.csv")
        with open(out / "summary.json", "w") as fh:
            json.dump({"schema_version": 1, "summary": summary,
                       "units": {"t": "time (c = 1)", "fields": "dimensionless"}},
                      fh, indent=2, sort_keys=True)
    return traj, summary
