"""Command-line front end for the benchmark experiments.

Two subcommands: ``composite`` sweeps the composite-function benchmark
over expansion degrees; ``heat-network`` sweeps the pipe/reactor
Galerkin comparison over input dimensions.  Each run writes one table
file (CSV or JSON), a JSON manifest echoing the configuration, and by
default a pair of summary figures next to the table.

Configuration can come from a flat key=value file via --config; flags
given on the command line override file values.

Exit codes: 0 success, 1 configuration or I/O error, 2 solver
nonconvergence, 3 reduction failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy
import scipy

from . import __version__
from .models import (CompositeRow, HeatNetworkResult, composite_experiment,
                     heat_network_experiment)
from .network import NonconvergenceError
from .quadrature import ResourceLimitError
from .reduction import RankDeficiencyError, ReductionFailureError

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NONCONVERGENCE = 2
EXIT_REDUCTION = 3

COMPOSITE_COLUMNS = ("N", "P1", "Q1", "Pp1", "R",
                     "err_full", "err_reduced", "orth_err")
NETWORK_COLUMNS = ("s", "P1", "Q1", "Pp1", "R",
                   "solves_c1", "solves_c2", "time_c1", "time_c2")

_COMPOSITE_DEFAULTS = {
    "s": 4, "n_min": 1, "n_max": 6, "n_reduced": None, "tol": 1e-12,
    "rank_mode": "tolerance", "format": "csv", "out_dir": ".",
    "seed": 0, "plot": True,
}
_NETWORK_DEFAULTS = {
    "s_min": 2, "s_max": 5, "n": 3, "n_reduced": 3, "qr_tol": 1e-12,
    "newton_tol": 1e-10, "format": "csv", "out_dir": ".",
    "seed": 0, "plot": True,
}


class ConfigError(Exception):
    """Invalid command line, config file, or option value."""


class _Parser(argparse.ArgumentParser):
    """Parser that raises instead of exiting so main() owns exit codes."""

    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="netuq",
                     description="uncertainty propagation benchmarks for "
                                 "network-coupled systems")
    parser.add_argument("--version", action="version",
                        version=f"netuq {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")

    def add_common(p):
        p.add_argument("--config", type=str, default=None,
                       help="flat key=value config file; flags override")
        p.add_argument("--out-dir", type=str, default=None,
                       help="directory for table, manifest, and figures")
        p.add_argument("--format", type=str, default=None,
                       choices=("csv", "json"), help="table format")
        p.add_argument("--seed", type=int, default=None,
                       help="seed recorded for sampling-based checks")
        p.add_argument("--plot", default=None,
                       action=argparse.BooleanOptionalAction,
                       help="render summary figures (default on)")

    comp = sub.add_parser("composite",
                          description="composite-function sparsity and "
                                      "accuracy sweep")
    comp.add_argument("--s", type=int, default=None,
                      help="number of random inputs")
    comp.add_argument("--n-min", type=int, default=None,
                      help="first expansion degree")
    comp.add_argument("--n-max", type=int, default=None,
                      help="last expansion degree")
    comp.add_argument("--n-reduced", type=int, default=None,
                      help="reduced-basis degree (default: same as N)")
    comp.add_argument("--tol", type=float, default=None,
                      help="QR rank tolerance for the reduction")
    comp.add_argument("--rank-mode", type=str, default=None,
                      choices=("tolerance", "fixed-rank"),
                      help="rank selection mode")
    add_common(comp)

    net = sub.add_parser("heat-network",
                         description="pipe/reactor Galerkin comparison "
                                     "sweep over input dimension")
    net.add_argument("--s-min", type=int, default=None,
                     help="first input dimension")
    net.add_argument("--s-max", type=int, default=None,
                     help="last input dimension")
    net.add_argument("--n", type=int, default=None,
                     help="expansion degree")
    net.add_argument("--n-reduced", type=int, default=None,
                     help="reduced-basis degree")
    net.add_argument("--qr-tol", type=float, default=None,
                     help="QR rank tolerance for the reduction")
    net.add_argument("--newton-tol", type=float, default=None,
                     help="Galerkin Newton residual tolerance")
    add_common(net)
    return parser


def load_config_file(path) -> dict[str, str]:
    """Parse a flat key=value file; '#' starts a comment line."""
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(
                f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _coerce(key: str, text: str, defaults: dict):
    """Convert a config-file string to the type of the default value."""
    template = defaults[key]
    try:
        if key == "n_reduced" or isinstance(template, int) and \
                not isinstance(template, bool):
            return int(text)
        if isinstance(template, bool):
            lowered = text.lower()
            if lowered in ("1", "true", "yes", "on"):
                return True
            if lowered in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {text!r}")
        if isinstance(template, float):
            return float(text)
    except ValueError as exc:
        raise ConfigError(f"config value {key}={text!r}: {exc}")
    return text


def merge_config(args: argparse.Namespace, defaults: dict) -> dict:
    """Resolve option values: flag, then config file, then default."""
    from_file = {}
    if args.config is not None:
        raw = load_config_file(args.config)
        for key, text in raw.items():
            if key not in defaults:
                raise ConfigError(f"unknown config key {key!r}")
            from_file[key] = _coerce(key, text, defaults)
    merged = {}
    for key, fallback in defaults.items():
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            merged[key] = flag_value
        elif key in from_file:
            merged[key] = from_file[key]
        else:
            merged[key] = fallback
    return merged


def _validate_composite(cfg: dict):
    if cfg["s"] < 1:
        raise ConfigError("s must be at least 1")
    if not (1 <= cfg["n_min"] <= cfg["n_max"] <= 8):
        raise ConfigError("need 1 <= n-min <= n-max <= 8")
    if cfg["n_reduced"] is not None and cfg["n_reduced"] < 1:
        raise ConfigError("n-reduced must be at least 1")
    if cfg["tol"] <= 0:
        raise ConfigError("tol must be positive")


def _validate_network(cfg: dict):
    if not (2 <= cfg["s_min"] <= cfg["s_max"] <= 5):
        raise ConfigError("need 2 <= s-min <= s-max <= 5")
    if cfg["n"] < 1 or cfg["n_reduced"] < 1:
        raise ConfigError("n and n-reduced must be at least 1")
    if cfg["qr_tol"] <= 0 or cfg["newton_tol"] <= 0:
        raise ConfigError("tolerances must be positive")


def _composite_lines(rows: list[CompositeRow]) -> list[str]:
    lines = [",".join(COMPOSITE_COLUMNS)]
    for r in rows:
        lines.append(
            f"{r.degree},{r.basis_size},{r.npoints},{r.nreduced},"
            f"{r.nonzeros},{r.err_full:.12e},{r.err_reduced:.12e},"
            f"{r.orth_error:.12e}")
    return lines


def _network_lines(rows: list[HeatNetworkResult]) -> list[str]:
    lines = [",".join(NETWORK_COLUMNS)]
    for r in rows:
        lines.append(
            f"{r.s},{r.basis_size},{r.npoints},{r.nreduced},{r.nonzeros},"
            f"{r.solves_c1},{r.solves_c2},{r.time_c1:.6e},{r.time_c2:.6e}")
    return lines


def _composite_records(rows: list[CompositeRow]) -> list[dict]:
    return [{
        "N": r.degree, "P1": r.basis_size, "Q1": r.npoints,
        "Pp1": r.nreduced, "R": r.nonzeros, "err_full": r.err_full,
        "err_reduced": r.err_reduced, "orth_err": r.orth_error,
    } for r in rows]


def _network_records(rows: list[HeatNetworkResult]) -> list[dict]:
    return [{
        "s": r.s, "P1": r.basis_size, "Q1": r.npoints, "Pp1": r.nreduced,
        "R": r.nonzeros, "solves_c1": r.solves_c1,
        "solves_c2": r.solves_c2, "time_c1": r.time_c1,
        "time_c2": r.time_c2,
    } for r in rows]


def _write_table(out_dir: Path, stem: str, fmt: str, lines, records) -> Path:
    if fmt == "csv":
        path = out_dir / f"{stem}_table.csv"
        path.write_text("\n".join(lines) + "\n")
    else:
        path = out_dir / f"{stem}_table.json"
        path.write_text(json.dumps(records, indent=2) + "\n")
    return path


def _write_manifest(out_dir: Path, stem: str, command: str, cfg: dict,
                    outputs: list[Path], elapsed: float) -> Path:
    manifest = {
        "command": command,
        "config": cfg,
        "elapsed_seconds": elapsed,
        "outputs": [p.name for p in outputs],
        "versions": {
            "netuq": __version__,
            "numpy": numpy.__version__,
            "scipy": scipy.__version__,
            "python": sys.version.split()[0],
        },
    }
    path = out_dir / f"{stem}_manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _run_composite(args: argparse.Namespace) -> int:
    cfg = merge_config(args, _COMPOSITE_DEFAULTS)
    _validate_composite(cfg)
    out_dir = Path(cfg["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)

    start = time.perf_counter()
    rows = []
    for n in range(cfg["n_min"], cfg["n_max"] + 1):
        rows.append(composite_experiment(
            cfg["s"], n, cfg["n_reduced"], qr_tol=cfg["tol"],
            rank_mode=cfg["rank_mode"]))
    elapsed = time.perf_counter() - start

    outputs = [_write_table(out_dir, "composite", cfg["format"],
                            _composite_lines(rows),
                            _composite_records(rows))]
    if cfg["plot"]:
        from .report import render_composite_figures
        outputs.extend(render_composite_figures(rows, out_dir))
    _write_manifest(out_dir, "composite", "composite", cfg, outputs,
                    elapsed)
    for line in _composite_lines(rows):
        print(line)
    return EXIT_OK


def _run_network(args: argparse.Namespace) -> int:
    cfg = merge_config(args, _NETWORK_DEFAULTS)
    _validate_network(cfg)
    out_dir = Path(cfg["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)

    start = time.perf_counter()
    rows = []
    for s in range(cfg["s_min"], cfg["s_max"] + 1):
        rows.append(heat_network_experiment(
            s, cfg["n"], cfg["n_reduced"], qr_tol=cfg["qr_tol"],
            tol=cfg["newton_tol"]))
    elapsed = time.perf_counter() - start

    outputs = [_write_table(out_dir, "heat_network", cfg["format"],
                            _network_lines(rows), _network_records(rows))]
    if cfg["plot"]:
        from .report import render_network_figures
        outputs.extend(render_network_figures(rows, out_dir))
    _write_manifest(out_dir, "heat_network", "heat-network", cfg, outputs,
                    elapsed)
    for line in _network_lines(rows):
        print(line)
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise ConfigError("a command is required "
                              "(composite or heat-network)")
        if args.command == "composite":
            return _run_composite(args)
        return _run_network(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ResourceLimitError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonconvergenceError as exc:
        print(f"error: solver did not converge: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (ReductionFailureError, RankDeficiencyError) as exc:
        print(f"error: reduction failed: {exc}", file=sys.stderr)
        return EXIT_REDUCTION


if __name__ == "__main__":
    sys.exit(main())
