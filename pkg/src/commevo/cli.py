"""Command-line experiment runner.

Config files are INI-style. Every section whose name is ``experiment`` or
starts with ``experiment:`` describes one experiment::

    [experiment:heis]
    scenario = heisenberg_limit
    levels = 3-10
    tol = 1e-3
    seed = 7
    slope = 2.0

``scenario`` is required; ``backend`` is optional and must match the
scenario; any other key overrides a numeric scenario parameter. Each
experiment writes ``<out>/<name>.csv`` and prints one summary line.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import logging
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CommevoError, ConfigError
from .scenarios import BACKENDS, SCENARIOS, Outcome, Row, list_scenarios

CSV_VERSION = 1
COLUMNS = ("scenario", "level", "cells", "error_oracle", "error_closed_form",
           "successive_difference", "norm_drift")
RESERVED = {"scenario", "backend", "levels", "tol", "seed"}

log = logging.getLogger("commevo")


@dataclass
class ExperimentConfig:
    name: str
    scenario: str
    backend: str
    params: dict[str, float]
    levels: list[int]
    tol: float
    seed: int | None


def _parse_levels(text: str) -> list[int]:
    levels: list[int] = []
    for part in text.replace(" ", "").split(","):
        if not part:
            continue
        if "-" in part:
            lo, hi = part.split("-", 1)
            levels.extend(range(int(lo), int(hi) + 1))
        else:
            levels.append(int(part))
    if not levels or any(n < 0 for n in levels):
        raise ValueError(f"bad level list {text!r}")
    return levels


def parse_config(text: str, source: str = "<config>") -> list[ExperimentConfig]:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    sections = [sec for sec in parser.sections() if sec == "experiment" or sec.startswith("experiment:")]
    if not sections:
        raise ConfigError(f"{source}: no [experiment] section")
    out = []
    for sec in sections:
        body = parser[sec]
        name = sec.split(":", 1)[1].strip() if ":" in sec else "experiment"
        if not name or any(ch in name for ch in "/\\"):
            raise ConfigError(f"[{sec}]: bad experiment name")
        if "scenario" not in body:
            raise ConfigError(f"[{sec}]: missing 'scenario'")
        scen = SCENARIOS.get(body["scenario"].strip())
        if scen is None:
            raise ConfigError(f"[{sec}]: unknown scenario {body['scenario']!r}")
        backend = body.get("backend", scen.backend).strip()
        if backend not in BACKENDS:
            raise ConfigError(f"[{sec}]: unknown backend {backend!r}")
        if backend != scen.backend:
            raise ConfigError(f"[{sec}]: scenario {scen.name} runs on {scen.backend}, not {backend}")
        params = dict(scen.defaults)
        try:
            for key, value in body.items():
                if key in RESERVED:
                    continue
                if key not in scen.defaults:
                    raise ConfigError(f"[{sec}]: scenario {scen.name} has no parameter {key!r}")
                params[key] = float(value)
            levels = _parse_levels(body["levels"]) if "levels" in body else list(scen.default_levels)
            tol = float(body["tol"]) if "tol" in body else scen.default_tol
            seed = int(body["seed"]) if "seed" in body else None
        except ValueError as exc:
            raise ConfigError(f"[{sec}]: {exc}") from exc
        if not tol > 0:
            raise ConfigError(f"[{sec}]: tol must be > 0")
        if seed is not None and not 0 <= seed < 2**64:
            raise ConfigError(f"[{sec}]: seed must fit in u64")
        out.append(ExperimentConfig(name, scen.name, backend, params, levels, tol, seed))
    names = [c.name for c in out]
    if len(set(names)) != len(names):
        raise ConfigError(f"{source}: duplicate experiment names")
    return out


def load_config(path) -> list[ExperimentConfig]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_config(text, str(path))


def run_experiment(cfg: ExperimentConfig, seed: int = 0) -> Outcome:
    rng = np.random.default_rng(cfg.seed if cfg.seed is not None else seed)
    return SCENARIOS[cfg.scenario].runner(cfg.params, cfg.levels, cfg.tol, rng)


def _fmt(v) -> str:
    return "" if v is None else f"{v:.17g}"


def format_csv(cfg: ExperimentConfig, rows: list[Row]) -> str:
    buf = io.StringIO()
    buf.write(f"# commevo results v{CSV_VERSION}\n")
    buf.write(f"# experiment={cfg.name} scenario={cfg.scenario} backend={cfg.backend} tol={cfg.tol!r}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([cfg.scenario, r.level, r.cells, _fmt(r.error_oracle), _fmt(r.error_closed_form),
                    _fmt(r.successive_difference), _fmt(r.norm_drift)])
    return buf.getvalue()


def summary_line(cfg: ExperimentConfig, outcome: Outcome, seconds: float) -> str:
    order = "n/a" if outcome.order is None else f"{outcome.order:.3f}"
    status = "PASS" if outcome.passed else "FAIL"
    return (f"{status} {cfg.name} scenario={cfg.scenario} backend={cfg.backend} order={order} "
            f"{outcome.detail.strip()} time={seconds:.2f}s")


def cmd_run(args) -> int:
    configs = load_config(args.config)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    failed = 0
    for cfg in configs:
        if args.seed is not None:
            cfg.seed = args.seed
        log.info("running %s (%s)", cfg.name, cfg.scenario)
        t0 = time.perf_counter()
        try:
            outcome = run_experiment(cfg)
        except ConfigError:
            raise
        except (CommevoError, ArithmeticError) as exc:
            print(f"error: {cfg.name}: oracle or backend failure: {exc}", file=sys.stderr)
            failed += 1
            continue
        elapsed = time.perf_counter() - t0
        (out_dir / f"{cfg.name}.csv").write_text(format_csv(cfg, outcome.rows), encoding="utf-8")
        if not args.quiet:
            print(summary_line(cfg, outcome, elapsed))
        failed += not outcome.passed
    return 1 if failed else 0


def cmd_list(args) -> int:
    for sc in list_scenarios(args.backend):
        print(f"{sc.name:24s} {sc.backend:12s} {sc.anchor}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    # global options are accepted before or after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="override every experiment seed (u64)")
    common.add_argument("--out", default=argparse.SUPPRESS, help="directory for CSV output")
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS, help="suppress summary lines")
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    p = argparse.ArgumentParser(prog="commevo", description="Run evolution-system experiments.",
                                parents=[common])
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run the experiments of a config file", parents=[common])
    r.add_argument("config")
    r.set_defaults(func=cmd_run)
    ls = sub.add_parser("list", help="list built-in scenarios", parents=[common])
    ls.add_argument("--backend", default=None)
    ls.set_defaults(func=cmd_list)
    return p


GLOBAL_DEFAULTS = {"seed": None, "out": ".", "quiet": False, "verbose": False}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    for key, value in GLOBAL_DEFAULTS.items():
        if not hasattr(args, key):
            setattr(args, key, value)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.seed is not None and not 0 <= args.seed < 2**64:
        print("error: config: seed must fit in u64", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
