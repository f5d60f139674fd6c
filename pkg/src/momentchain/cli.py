"""Command-line front end: writes CSV/JSON plot data and verification reports.

Settings come from per-command defaults, then an optional JSON ``--config``
file, then explicit flags.  Exit codes: 2 bad configuration, 3 numerical
failure, 4 moment overflow, 5 oracle mismatch.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .dynamics import coherent_moments, fit_component_rates, propagate
from .errors import ConfigError, MomentOverflowError, NumericError, OracleMismatchError
from .fock_oracle import FockConfig, differential_test
from .localization import classify_mode, ipr_scan, phase_diagram_scan
from .matrices import DimerParams, GeneralDimerParams, build_general_moment_matrix, build_moment_matrix
from .spectral import analytic_eigenvector, mode_rows, spectrum_rows

EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_OVERFLOW = 4
EXIT_ORACLE = 5

DEFAULTS = {
    "spectrum": {"order": 30, "gamma": 1.0, "big_gamma": 0.0, "ratios": {"start": 0.0, "stop": 2.0, "step": 0.01}},
    "modes": {"order": 20, "gamma": 1.0, "big_gamma": 0.0, "ratios": [0.5, 1.01, 2.0], "ks": None},
    "ipr": {"order": 20, "gamma": 1.0, "big_gamma": 0.0, "ratios": {"start": 0.0, "stop": 4.0, "step": 0.01}, "ks": None},
    "evolve": {
        "order": 9, "delta": 0.0, "gamma": 1.0, "big_gamma": 0.0,
        "alpha1": 1.0, "alpha2": -1.0, "t_max": 1.0, "dt": 0.01, "tol": 0.01,
    },
    "phase": {
        "order": 10, "omega1": -1.0, "omega2": 1.0,
        "kappa1": {"start": 0.1, "stop": 4.1, "num": 41},
        "kappa2": {"start": 0.1, "stop": 4.1, "num": 41},
        "tol": 1e-9,
    },
    "verify": {
        "order": 2, "delta": 0.5, "gamma": 0.4, "big_gamma": 1.0,
        "alpha1": 0.3, "alpha2": "0.2j", "cutoff": 10, "dt": 0.01, "t_max": 2.0, "frame": "lab", "tol": 1e-5,
    },
    "build": {"order": 2, "delta": 0.5, "gamma": 1.0, "big_gamma": 0.0, "general": None},
}

def _complex(value) -> complex:
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    try:
        return complex(str(value).replace(" ", "")) if isinstance(value, str) else complex(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"cannot read {value!r} as a complex number") from exc


def ratio_grid(desc) -> np.ndarray:
    """Grid from a list or from {"start", "stop", "step"} (inclusive stop)."""
    if isinstance(desc, dict):
        try:
            start, stop, step = float(desc["start"]), float(desc["stop"]), float(desc["step"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"grid needs numeric start/stop/step: {exc}") from exc
        if step <= 0 or stop < start:
            raise ConfigError(f"bad grid start={start} stop={stop} step={step}")
        count = int(round((stop - start) / step)) + 1
        return start + step * np.arange(count)
    grid = np.asarray(desc, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ConfigError("grid must be a non-empty list")
    return grid


def linear_grid(desc) -> np.ndarray:
    if isinstance(desc, dict):
        try:
            num = int(desc["num"])
            grid = np.linspace(float(desc["start"]), float(desc["stop"]), num)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"grid needs start/stop/num: {exc}") from exc
        if num < 1:
            raise ConfigError("grid needs num >= 1")
        return grid
    return ratio_grid(desc)


def _dimer(cfg) -> DimerParams:
    try:
        return DimerParams(float(cfg.get("delta", 0.0)), float(cfg["gamma"]), float(cfg.get("big_gamma", 0.0)), int(cfg["order"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad dimer parameters: {exc}") from exc


def cmd_spectrum(cfg) -> list:
    p = _dimer(cfg)
    rows = spectrum_rows(p, ratio_grid(cfg["ratios"]))
    return [("csv", ("delta_over_gamma", "k", "re_E", "im_E"), rows)]


def cmd_modes(cfg) -> list:
    p = _dimer(cfg)
    ratios = ratio_grid(cfg["ratios"])
    rows = mode_rows(p, ratios, cfg.get("ks"))
    classes = []
    ks = range(p.size) if cfg.get("ks") is None else cfg["ks"]
    for r in ratios:
        q = p.with_(delta=float(r) * p.gamma)
        for k in ks:
            rep = classify_mode(analytic_eigenvector(q, int(k)).vector, k=int(k))
            classes.append((float(r), rep.k, rep.kind, rep.site, rep.ipr))
    return [
        ("csv", ("delta_over_gamma", "k", "site", "re", "im", "abs2"), rows),
        ("csv:classes", ("delta_over_gamma", "k", "class", "site", "ipr"), classes),
    ]


def cmd_ipr(cfg) -> list:
    p = _dimer(cfg)
    rows = ipr_scan(p, ratio_grid(cfg["ratios"]), cfg.get("ks"))
    return [("csv", ("delta_over_gamma", "k", "ipr"), rows)]


def cmd_evolve(cfg) -> list:
    p = _dimer(cfg)
    a0 = coherent_moments(_complex(cfg["alpha1"]), _complex(cfg["alpha2"]), p.order)
    traj = propagate(build_moment_matrix(p), a0, float(cfg["t_max"]), float(cfg["dt"]))
    fit = fit_component_rates(traj, tolerance=float(cfg["tol"]))
    return [("csv", ("t", "j", "re", "im"), traj.rows()), ("json:fit", fit.to_json())]


def cmd_phase(cfg) -> list:
    try:
        omega1, omega2, order = float(cfg["omega1"]), float(cfg["omega2"]), int(cfg["order"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad phase parameters: {exc}") from exc
    points = phase_diagram_scan(linear_grid(cfg["kappa1"]), linear_grid(cfg["kappa2"]), omega1, omega2, order, float(cfg["tol"]))
    rows = [(pt.kappa1, pt.kappa2, pt.phase, pt.on_exceptional_surface) for pt in points]
    return [("csv", ("kappa1", "kappa2", "phase", "on_EL"), rows)]


def cmd_verify(cfg) -> list:
    p = _dimer(cfg)
    try:
        fock = FockConfig(int(cfg["cutoff"]), float(cfg["dt"]), float(cfg["t_max"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad oracle settings: {exc}") from exc
    report = differential_test(
        p, _complex(cfg["alpha1"]), _complex(cfg["alpha2"]), p.order, fock, frame=cfg.get("frame", "lab")
    )
    report.threshold = float(cfg["tol"])
    return [("json", report.to_json())]


def cmd_build(cfg) -> list:
    gen = cfg.get("general")
    if gen:
        try:
            m = build_general_moment_matrix(
                GeneralDimerParams(float(gen["omega1"]), float(gen["omega2"]), float(gen["kappa1"]), float(gen["kappa2"]), int(cfg["order"]))
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad general dimer parameters: {exc}") from exc
    else:
        m = build_moment_matrix(_dimer(cfg))
    return [("json", io.matrix_to_json(m)), ("csv", ("row", "col", "re", "im"), io.matrix_rows(m))]


COMMANDS = {
    "spectrum": cmd_spectrum,
    "modes": cmd_modes,
    "ipr": cmd_ipr,
    "evolve": cmd_evolve,
    "phase": cmd_phase,
    "verify": cmd_verify,
    "build": cmd_build,
}


def load_config(command: str, path, overrides: dict) -> dict:
    cfg = json.loads(json.dumps(DEFAULTS[command]))
    if path:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        data.pop("command", None)
        unknown = set(data) - set(cfg) - {"out"}
        if unknown:
            raise ConfigError(f"unknown config keys for {command}: {sorted(unknown)}")
        cfg.update(data)
    cfg.update({k: v for k, v in overrides.items() if v is not None})
    return cfg


def _sibling(out: Path, tag: str, suffix: str) -> Path:
    return out.with_name(f"{out.stem}.{tag}{suffix}")


def emit(outputs: list, out: Path, stream=sys.stdout) -> list[Path]:
    """Write command outputs. The primary output goes to ``out``; tagged ones beside it."""
    written = []
    for item in outputs:
        base, _, tag = item[0].partition(":")
        suffix = ".csv" if base == "csv" else ".json"
        target = _sibling(out, tag, suffix) if tag else out.with_suffix(suffix)
        if base == "csv":
            io.write_csv(target, item[1], item[2])
        else:
            io.write_json(target, item[1])
        written.append(target)
    for path in written:
        print(path, file=stream)
    return written


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="momentchain", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, help=COMMANDS[name].__name__.replace("cmd_", "") + " data")
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--out", help="output path (default: <command>.csv or .json)")
        sp.add_argument("--order", type=int, help="moment order N (chain has N+1 sites)")
        sp.add_argument("--delta", type=float)
        sp.add_argument("--gamma", type=float)
        sp.add_argument("--big-gamma", dest="big_gamma", type=float)
        sp.add_argument("--tol", type=float)
        if name in ("evolve", "verify"):
            sp.add_argument("--alpha1", help="complex amplitude, e.g. 0.3 or 0.2j")
            sp.add_argument("--alpha2")
            sp.add_argument("--t-max", dest="t_max", type=float)
            sp.add_argument("--dt", type=float)
        if name == "verify":
            sp.add_argument("--cutoff", type=int)
            sp.add_argument("--frame", choices=("lab", "gauged"))
        if name == "phase":
            sp.add_argument("--omega1", type=float)
            sp.add_argument("--omega2", type=float)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config", "out")}
    try:
        cfg = load_config(args.command, args.config, overrides)
        outputs = COMMANDS[args.command](cfg)
        primary = "json" if outputs[0][0] == "json" else "csv"
        out = Path(args.out or cfg.get("out") or f"{args.command}.{primary}")
        emit(outputs, out)
        if args.command == "verify":
            report = outputs[0][1]
            if not report["passed"]:
                raise OracleMismatchError(report["diagnosis"] or "oracle mismatch")
    except MomentOverflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OVERFLOW
    except OracleMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ORACLE
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
