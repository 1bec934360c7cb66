"""Run configuration: nested dataclasses parsed from JSON, unknown keys rejected."""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from typing import Optional


class ConfigError(ValueError):
    pass


@dataclass
class GridConfig:
    L: Optional[float] = None          # default 40 / omega
    n: int = 4001

    def check(self):
        if self.n < 3:
            raise ConfigError(f"grid.n must be >= 3 (got {self.n})")
        if self.L is not None and self.L <= 0:
            raise ConfigError("grid.L must be positive")


@dataclass
class SpectralConfig:
    upper: Optional[float] = None      # default omega^2
    zero_tol: float = 1e-6
    richardson: bool = True

    def check(self):
        if self.zero_tol <= 0:
            raise ConfigError("spectral.zero_tol must be positive")


@dataclass
class DarbouxConfig:
    epsilon: float = 1e-2

    def check(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ConfigError("darboux.epsilon must lie in (0, 1)")


@dataclass
class VirialConfig:
    A: Optional[float] = None          # default 64 / omega
    B: Optional[float] = None          # default 16 / omega
    gammas: list = field(default_factory=lambda: [round(0.05 * k, 2) for k in range(1, 11)])

    def check(self):
        if any(not 0.0 < g < 1.0 for g in self.gammas):
            raise ConfigError("virial.gammas must lie in (0, 1)")
        if self.A is not None and self.B is not None and not self.A > self.B > 0:
            raise ConfigError("virial requires A > B > 0")


@dataclass
class FgrConfig:
    tol_rel: float = 1e-6
    digits: int = 3
    refine: bool = True

    def check(self):
        if self.tol_rel <= 0 or self.digits < 1:
            raise ConfigError("fgr.tol_rel must be positive and fgr.digits >= 1")


@dataclass
class SimulationConfig:
    mode: str = "pure-Y"               # pure-Y | bump | file
    delta: float = 0.05
    width: float = 2.0
    center: float = 5.0
    file: Optional[str] = None
    T: float = 400.0
    dt_factor: float = 0.4
    h_factor: float = 0.05             # h = h_factor / omega
    L_factor: float = 200.0            # L = L_factor / omega
    cadence: float = 0.5
    sponge: bool = True
    sponge_width: float = 0.2
    sponge_strength: float = 1.0
    window: float = 10.0
    delta_max: float = 0.2
    functionals: bool = True

    def check(self):
        if self.mode not in ("pure-Y", "bump", "file"):
            raise ConfigError(f"simulation.mode must be pure-Y, bump or file (got {self.mode!r})")
        if self.mode == "file" and not self.file:
            raise ConfigError("simulation.mode=file needs simulation.file")
        if not 0.0 < self.dt_factor <= 0.5:
            raise ConfigError("simulation.dt_factor must lie in (0, 0.5] (CFL)")
        if self.T <= 0 or self.cadence <= 0 or self.h_factor <= 0 or self.L_factor <= 0:
            raise ConfigError("simulation.T, cadence, h_factor, L_factor must be positive")
        if not 0.0 < self.sponge_width < 1.0:
            raise ConfigError("simulation.sponge_width must lie in (0, 1)")
        if self.delta < 0 or self.delta_max <= 0 or self.window <= 0:
            raise ConfigError("simulation.delta >= 0, delta_max > 0 and window > 0 required")


@dataclass
class ScanConfig:
    parameter: Optional[str] = None    # m | eta0 | delta | A | epsilon
    values: list = field(default_factory=list)
    action: str = "analyze"            # analyze | simulate

    def check(self):
        if self.parameter is not None and self.parameter not in SCAN_PARAMETERS:
            raise ConfigError(f"scan.parameter must be one of {sorted(SCAN_PARAMETERS)}")
        if self.action not in ("analyze", "simulate"):
            raise ConfigError("scan.action must be analyze or simulate")


SCAN_PARAMETERS = {"m", "eta0", "delta", "A", "epsilon"}


@dataclass
class RunConfig:
    potential: dict = field(default_factory=lambda: {"kind": "phi4"})
    grid: GridConfig = field(default_factory=GridConfig)
    spectral: SpectralConfig = field(default_factory=SpectralConfig)
    darboux: DarbouxConfig = field(default_factory=DarbouxConfig)
    virial: VirialConfig = field(default_factory=VirialConfig)
    fgr: FgrConfig = field(default_factory=FgrConfig)
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    scan: ScanConfig = field(default_factory=ScanConfig)
    output: str = "out"
    seed: int = 0

    def check(self):
        if not isinstance(self.potential, dict) or "kind" not in self.potential:
            raise ConfigError("potential must be an object with a 'kind'")
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if dataclasses.is_dataclass(v):
                v.check()
        if self.seed < 0:
            raise ConfigError("seed must be a nonnegative integer")
        return self

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _build(cls, data: dict, path: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{path or 'config'} must be an object")
    known = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(data) - set(known)
    if unknown:
        raise ConfigError(f"unknown key(s) in {path or 'config'}: {sorted(unknown)}")
    kwargs = {}
    for name, value in data.items():
        default = known[name].default_factory() if known[name].default_factory is not dataclasses.MISSING \
            else known[name].default
        if dataclasses.is_dataclass(default):
            kwargs[name] = _build(type(default), value, f"{path}.{name}" if path else name)
        else:
            kwargs[name] = value
    return cls(**kwargs)


def config_from_dict(data: dict) -> RunConfig:
    return _build(RunConfig, data, "").check()


def load_config(path) -> RunConfig:
    with open(path) as fh:
        return config_from_dict(json.load(fh))
