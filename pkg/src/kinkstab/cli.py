"""Command-line entry point: ``kinkstab <subcommand> [--config FILE] [--out DIR] [--jobs N] [--seed S]``.

Exit codes: 0 all checks pass, 2 a scientific check fails, 1 software or input error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, config_from_dict, load_config
from .pipeline import EXIT_ERROR, EXIT_FAIL, EXIT_PASS, SCAN_COLUMNS, SCHEMA_VERSION, analysis_grid

SUBCOMMANDS = ("validate", "kink", "spectrum", "darboux", "fgr", "hyp3", "analyze", "simulate", "scan",
               "selftest")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def write_json(path: Path, payload: dict):
    body = {"schema_version": SCHEMA_VERSION, **payload}
    path.write_text(json.dumps(_jsonable(body), indent=2, sort_keys=True) + "\n")


def write_csv(path: Path, header, columns):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([repr(float(v)) for v in row])


def _setup(cfg: RunConfig):
    from .kink import solve_kink
    from .potential import potential_from_spec
    W = potential_from_spec(cfg.potential)
    grid = analysis_grid(cfg, W.omega)
    return W, grid, solve_kink(W, grid)


def _internal_mode(cfg, W, K):
    from .grid import ODD
    from .spectral import build_L0, discrete_spectrum, hypothesis1_from_spectrum
    upper = cfg.spectral.upper if cfg.spectral.upper is not None else W.omega_sq
    spec = discrete_spectrum(build_L0(W, K, ODD), upper, cfg.spectral.richardson)
    return hypothesis1_from_spectrum(spec, W.omega_sq, cfg.spectral.zero_tol)


def cmd_validate(cfg, out, args):
    from .potential import potential_from_spec, validate
    rep = validate(potential_from_spec(cfg.potential))
    write_json(out / "validation.json", rep.to_dict())
    return EXIT_PASS if rep.ok else EXIT_FAIL


def cmd_kink(cfg, out, args):
    from .kink import decay_constants, kink_energy
    W, grid, K = _setup(cfg)
    write_csv(out / "kink.csv", ("x", "H", "Hp", "Hpp", "Hppp"), (K.x, K.H, K.Hp, K.Hpp, K.Hppp))
    write_json(out / "kink.json", {"omega_sq": W.omega_sq, "L": grid.L, "n": grid.n,
                                   "energy": kink_energy(K), "decay_constants": list(decay_constants(K))})
    return EXIT_PASS


def cmd_spectrum(cfg, out, args):
    from .spectral import build_L0, discrete_spectrum, hypothesis1_from_spectrum
    W, grid, K = _setup(cfg)
    upper = cfg.spectral.upper if cfg.spectral.upper is not None else W.omega_sq
    spec = discrete_spectrum(build_L0(W, K, args.sector), upper, cfg.spectral.richardson)
    h1 = hypothesis1_from_spectrum(spec, W.omega_sq, cfg.spectral.zero_tol) if args.sector == "odd" else None
    report = spec.to_dict()
    report["hypothesis1"] = bool(h1.passed) if h1 is not None else None
    if h1 is not None:
        report["window"] = h1.window
    write_json(out / "spectrum.json", report)
    names = ["x"] + [f"Y{i}" for i in range(len(spec.eigenfunctions))]
    write_csv(out / "eigenfunctions.csv", names, [grid.x, *spec.eigenfunctions])
    return EXIT_PASS if h1 is None or h1.passed else EXIT_FAIL


def cmd_darboux(cfg, out, args):
    from .darboux import build_darboux, conjugation_residual
    from .pipeline import random_odd_probes
    W, grid, K = _setup(cfg)
    h1 = _internal_mode(cfg, W, K)
    if not h1.passed:
        write_json(out / "darboux.json", {"error": "no internal mode", "hypothesis1": h1.to_dict()})
        return EXIT_FAIL
    D = build_darboux(K, h1.lambda_sq)
    write_csv(out / "darboux.csv", ("x", "P1", "P2", "Z", "q0", "q1"), (grid.x, D.P1, D.P2, D.Z, D.q0, D.q1))
    probes = random_odd_probes(grid, 3, cfg.seed)
    res = [conjugation_residual(D, K.Wpp, f) for f in probes]
    write_json(out / "darboux.json", {**D.summary(), "conjugation_residuals": res})
    return EXIT_PASS


def cmd_fgr(cfg, out, args):
    from .resonance import compute_gamma, solve_resonance
    W, grid, K = _setup(cfg)
    h1 = _internal_mode(cfg, W, K)
    if not h1.passed:
        write_json(out / "fgr.json", {"error": "no internal mode", "hypothesis2": None})
        return EXIT_FAIL
    res = solve_resonance(K, h1.lambda_sq)
    rep = compute_gamma(K, h1.Y, res, h1.lambda_sq, refinements=cfg.fgr.refine, tol_rel=cfg.fgr.tol_rel,
                        digits=cfg.fgr.digits)
    write_csv(out / "fgr.csv", ("x", "g"), (grid.x, res.g))
    write_json(out / "fgr.json", rep.to_dict())
    return EXIT_PASS if rep.hypothesis2 else EXIT_FAIL


def cmd_hyp3(cfg, out, args):
    from .darboux import build_darboux
    from .virial import check_hypothesis3, compute_VB, make_weights
    W, grid, K = _setup(cfg)
    h1 = _internal_mode(cfg, W, K)
    if not h1.passed:
        write_json(out / "hyp3.json", {"error": "no internal mode", "passed": False})
        return EXIT_FAIL
    D = build_darboux(K, h1.lambda_sq)
    rep = check_hypothesis3(D, cfg.virial.gammas)
    write_json(out / "hyp3.json", rep.to_dict())
    om = W.omega
    w = make_weights(grid, W.omega_sq, h1.lambda_sq, cfg.virial.A or 64.0 / om, cfg.virial.B or 16.0 / om)
    write_csv(out / "weights.csv", ("x", "rho", "sigma_A", "chi_A", "zeta_A", "Phi_A", "zeta_B", "Phi_B",
                                    "Psi", "V_B"),
              (grid.x, w.rho, w.sigma_A, w.chi_A, w.zeta_A, w.Phi_A, w.zeta_B, w.Phi_B, w.Psi,
               compute_VB(w, D.dP2)))
    return EXIT_PASS if rep.passed else EXIT_FAIL


def cmd_analyze(cfg, out, args):
    from .pipeline import analyze
    rep = analyze(cfg)
    d = rep.to_dict()
    d.pop("schema_version")
    write_json(out / "report.json", d)
    return rep.exit_code


def cmd_simulate(cfg, out, args):
    from .kgsim import run_experiment
    run_experiment(cfg, out_dir=out)
    return EXIT_PASS


def cmd_scan(cfg, out, args):
    from .pipeline import scan
    parameter = args.param or cfg.scan.parameter
    values = [float(v) for v in args.values.split(",") if v.strip()] if args.values is not None \
        else list(cfg.scan.values)
    if values and parameter is None:
        raise ConfigError("scan needs a parameter (--param or scan.parameter)")
    rows = scan(cfg, parameter, values, jobs=args.jobs, action=cfg.scan.action)
    with open(out / "scan.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SCAN_COLUMNS)
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return EXIT_PASS


def cmd_selftest(cfg, out, args):
    from .pipeline import selftest
    rep = selftest(seed=cfg.seed)
    rep.pop("schema_version")
    write_json(out / "selftest.json", rep)
    for it in rep["items"]:
        print(f"{'PASS' if it['passed'] else 'FAIL'} {it['name']}: {it['value']:.3e} (tol {it['tolerance']:g})")
    return EXIT_PASS if rep["passed"] else EXIT_FAIL


COMMANDS = {name: globals()[f"cmd_{name}"] for name in SUBCOMMANDS}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kinkstab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON run configuration")
        s.add_argument("--out", help="output directory (overrides config 'output')")
        s.add_argument("--jobs", type=int, default=1)
        s.add_argument("--seed", type=int, help="seed for randomized probes (overrides config)")
        if name == "spectrum":
            s.add_argument("--sector", choices=("odd", "even"), default="odd")
        if name == "scan":
            s.add_argument("--param", help="m | eta0 | delta | A | epsilon")
            s.add_argument("--values", help="comma-separated values")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else config_from_dict({})
        if args.seed is not None:
            if args.seed < 0 or args.seed >= 2**64:
                raise ConfigError("--seed must be an unsigned 64-bit integer")
            cfg.seed = args.seed
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        out = Path(args.out or cfg.output)
        out.mkdir(parents=True, exist_ok=True)
        (out / "effective_config.json").write_text(cfg.to_json() + "\n")
        return COMMANDS[args.command](cfg, out, args)
    except (ConfigError, json.JSONDecodeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as exc:                    # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
