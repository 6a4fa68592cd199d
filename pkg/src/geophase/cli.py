"""Command-line entry point.

    geophase <experiment> [--config FILE] [--xi V|LIST] [--alpha V] [--pulse-width V]
             [--centers LIST] [--spacing V] [--step V] [--seed N] [--runs N]
             [--jitter SPEC] [--out DIR]

Flags override values from the config file. Summary metrics are printed as
KEY=VALUE lines; with --out, CSV tables and a plain-text report are written
into that directory.

Exit codes: 0 success, 1 invalid configuration, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import io
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, InvalidInputError, NumericalError
from .experiments import (
    EXPERIMENTS,
    GATE_CSV_COLUMNS,
    ExperimentConfig,
    JitterSpec,
    run_gate_full,
    run_gate_half,
    run_robustness,
    run_spin_demo,
    run_tripod_cycle,
    run_xi_scan,
)
from .operators import TWO_PARTICLE_BASIS
from .propagate import Trajectory

log = logging.getLogger("geophase")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2

_FLOAT_KEYS = {"alpha", "width", "spacing", "first_center", "step", "spin_j", "omega", "segment_duration"}
_INT_KEYS = {"record_stride", "seed", "runs", "workers"}
_LIST_KEYS = {"centers", "xi_list"}
_ALIASES = {"pulse_width": "width", "t": "width", "j": "spin_j"}


def fmt(x) -> str:
    """12 significant digits for floats, plain str otherwise."""
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.12g}"
    return str(x)


def _parse_list(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())


def parse_config_text(text: str) -> dict:
    """Flat `key = value` lines; `#` starts a comment; keys accept - or _."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string("[config]\n" + text)
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed config file: {exc}") from None
    values = {}
    for raw_key, raw in parser["config"].items():
        key = raw_key.strip().lower().replace("-", "_")
        key = _ALIASES.get(key, key)
        values[key] = raw.strip()
    return _coerce(values)


def _coerce(values: dict) -> dict:
    fields = {f.name for f in dataclasses.fields(ExperimentConfig)}
    out = {}
    try:
        for key, val in values.items():
            if key == "xi":
                items = _parse_list(val) if isinstance(val, str) else tuple(np.atleast_1d(val))
                if len(items) == 1:
                    out["xi"] = float(items[0])
                else:
                    out["xi_list"] = tuple(float(v) for v in items)
                continue
            if key not in fields:
                raise ConfigurationError(f"unknown config key {key!r}")
            if key in _FLOAT_KEYS:
                out[key] = float(val)
            elif key in _INT_KEYS:
                out[key] = int(val)
            elif key in _LIST_KEYS:
                out[key] = _parse_list(val)
            elif key == "jitter":
                out[key] = JitterSpec.parse(val) if isinstance(val, str) else val
            else:
                out[key] = val
    except ValueError as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"bad value for {key!r}: {exc}") from None
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="geophase", description="Geometric phase gate experiments")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", type=Path, help="flat key = value config file")
    p.add_argument("--xi", help="dipole shift, or comma-separated list for xi-scan")
    p.add_argument("--alpha", type=float)
    p.add_argument("--pulse-width", dest="width", type=float)
    p.add_argument("--centers", help="comma-separated pulse centres")
    p.add_argument("--spacing", type=float)
    p.add_argument("--step", type=float)
    p.add_argument("--record-stride", dest="record_stride", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--runs", type=int)
    p.add_argument("--jitter", help="e.g. 0.1 or amplitude=0.1,timing=0.1,width=0.1,xi=0.1")
    p.add_argument("--initial", choices=("2", "3", "plus", "minus"))
    p.add_argument("--spin-j", dest="spin_j", type=float)
    p.add_argument("--omega", type=float)
    p.add_argument("--segment-duration", dest="segment_duration", type=float)
    p.add_argument("--workers", type=int)
    p.add_argument("--out", help="output directory")
    return p


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    values = {}
    if args.config is not None:
        try:
            text = args.config.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigurationError(f"cannot read config: {exc}") from None
        values.update(parse_config_text(text))
    overrides = {
        k: v
        for k, v in vars(args).items()
        if v is not None and k not in ("config", "experiment")
    }
    values.update(_coerce(overrides))
    values["experiment"] = args.experiment
    return ExperimentConfig(**values)


def write_csv(path: Path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    path.write_text(buf.getvalue(), encoding="utf-8", newline="")


def trajectory_rows(traj: Trajectory, columns):
    """Rows of (t, |amplitude| per column, norm, accumulated dynamical phase)."""
    mags = np.abs(traj.states)
    norms = traj.norms
    for k, t in enumerate(traj.times):
        yield [float(t), *(float(mags[k, i]) for _, i in columns), float(norms[k]),
               float(traj.accumulated_dynamical_phase[k])]


def write_trajectory_csv(path: Path, traj: Trajectory, columns) -> None:
    header = ["t", *(name for name, _ in columns), "norm", "dynamical_phase"]
    write_csv(path, header, trajectory_rows(traj, columns))


def gate_columns():
    return [(name, TWO_PARTICLE_BASIS.index(label)) for name, label in GATE_CSV_COLUMNS]


TRIPOD_COLUMNS = [(f"abs_{k}", k - 1) for k in (1, 2, 3, 4)]


def summary_lines(summary: dict) -> list[str]:
    return [f"{k}={fmt(v)}" for k, v in summary.items()]


def run(cfg: ExperimentConfig) -> tuple[dict, dict]:
    """Run `cfg.experiment`; returns (summary, {filename: (header, rows)})."""
    tables = {}
    exp = cfg.experiment
    if exp == "spin-demo":
        rep = run_spin_demo(cfg)
        tables["spin_demo.csv"] = rep.table()
        return rep.summary(), tables
    if exp in ("tripod-cycle", "tripod-double"):
        rep = run_tripod_cycle(cfg)
        tables["trajectory.csv"] = ("traj", rep.trajectory, TRIPOD_COLUMNS)
        return rep.summary(), tables
    if exp == "gate-half":
        rep = run_gate_half(cfg)
        tables["trajectory.csv"] = ("traj", rep.trajectory, gate_columns())
        return rep.summary(), tables
    if exp == "xi-scan":
        rep = run_xi_scan(cfg)
        tables["xi_scan.csv"] = rep.table()
        return rep.summary(), tables
    if exp == "gate-full":
        rep = run_gate_full(cfg)
        s = rep.summary()
        u = rep.logical_unitary
        for i, lab in enumerate(("00", "01", "10", "11")):
            s[f"U_{lab}_{lab}_RE"] = float(u[i, i].real)
            s[f"U_{lab}_{lab}_IM"] = float(u[i, i].imag)
        return s, tables
    if exp == "robustness":
        rep = run_robustness(cfg)
        tables["robustness.csv"] = rep.table()
        return rep.summary(), tables
    raise ConfigurationError(f"unknown experiment {exp!r}")


def emit(cfg: ExperimentConfig, summary: dict, tables: dict, stream) -> None:
    lines = [f"EXPERIMENT={cfg.experiment}", *summary_lines(summary)]
    stream.write("\n".join(lines) + "\n")
    if cfg.out is None:
        return
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, table in tables.items():
        if table[0] == "traj":
            write_trajectory_csv(out / name, table[1], table[2])
        else:
            write_csv(out / name, *table)
    (out / "report.txt").write_text("\n".join(lines) + "\n", encoding="utf-8", newline="")


def main(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            summary, tables = run(cfg)
        for w in caught:
            log.warning("%s", w.message)
        emit(cfg, summary, tables, stdout)
    except (ConfigurationError, InvalidInputError) as exc:
        log.error("invalid configuration: %s", exc)
        return EXIT_CONFIG
    except NumericalError as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
