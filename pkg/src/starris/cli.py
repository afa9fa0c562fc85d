"""Experiment harness: config ingestion, seeded runs, machine-readable output.

Subcommands
-----------
convergence : optimize the scenario and write the per-iteration trace (CSV)
sweep-n     : optimize and evaluate proposed vs random phases over a list of
              element counts (CSV)
validate    : run the built-in oracle suite and write a JSON report
solve       : optimize and write the final phase profile (JSON)

Config files are YAML with two sections, ``scenario`` (SystemConfig field
overrides) and ``experiment`` (trials, sweep_n, seed). Unknown keys are
rejected. Every output embeds the resolved config hash, the seed, and the
package version, so reruns are attributable; reruns with a fixed seed are
byte-identical except for wall-time fields.

Exit codes: 0 success, 2 config error, 3 validation failure, 4 solver
degeneracy, 1 I/O or internal error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import sys
import time
from dataclasses import dataclass

import numpy as np
import yaml

from . import __version__, objective, simulator, validate
from .channel import SystemConfig, default_config
from .manifold import RetractionError
from .statcsi import DegenerateDenominatorError

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "load_experiment",
    "run_convergence",
    "run_sweep_n",
    "run_validate",
    "run_solve",
    "main",
]

EXIT_OK = 0
EXIT_IO = 1
EXIT_CONFIG = 2
EXIT_VALIDATION = 3
EXIT_DEGENERATE = 4

_EXPERIMENT_KEYS = {"trials", "sweep_n", "seed"}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    scenario: SystemConfig
    trials: int = 500
    sweep_n: tuple = ((4, 4), (6, 6), (8, 8))
    seed: int = 0
    out: str | None = None


def _scenario_fields() -> set:
    return {f.name for f in dataclasses.fields(SystemConfig)}


def _parse_sweep(raw) -> tuple:
    grids = []
    for item in raw:
        if isinstance(item, int):
            root = int(round(np.sqrt(item)))
            if root * root != item:
                raise ConfigError(
                    f"sweep_n value {item} is not a perfect square; give [n_x, n_z] instead"
                )
            grids.append((root, root))
        elif isinstance(item, (list, tuple)) and len(item) == 2:
            grids.append((int(item[0]), int(item[1])))
        else:
            raise ConfigError(f"sweep_n entries must be ints or [n_x, n_z] pairs, got {item!r}")
    if not grids:
        raise ConfigError("sweep_n must be nonempty")
    return tuple(grids)


def load_experiment(path: str | None, seed=None, out=None, trials=None) -> ExperimentConfig:
    """Build the experiment from an optional YAML file plus CLI overrides."""
    doc = {}
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            doc = yaml.safe_load(fh) or {}
        if not isinstance(doc, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
    unknown = set(doc) - {"scenario", "experiment"}
    if unknown:
        raise ConfigError(f"unknown top-level config sections: {sorted(unknown)}")

    scen_doc = doc.get("scenario") or {}
    exp_doc = doc.get("experiment") or {}
    if not isinstance(scen_doc, dict) or not isinstance(exp_doc, dict):
        raise ConfigError("scenario and experiment sections must be mappings")
    bad = set(scen_doc) - _scenario_fields()
    if bad:
        raise ConfigError(f"unknown scenario keys: {sorted(bad)}")
    bad = set(exp_doc) - _EXPERIMENT_KEYS
    if bad:
        raise ConfigError(f"unknown experiment keys: {sorted(bad)}")

    try:
        scenario = default_config(**{
            k: (tuple(v) if k == "modes" else v) for k, v in scen_doc.items()
        })
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid scenario: {exc}") from exc

    exp = ExperimentConfig(scenario=scenario)
    if "trials" in exp_doc:
        exp.trials = int(exp_doc["trials"])
    if "sweep_n" in exp_doc:
        exp.sweep_n = _parse_sweep(exp_doc["sweep_n"])
    if "seed" in exp_doc:
        exp.seed = int(exp_doc["seed"])
    # CLI flags override the file
    if seed is not None:
        exp.seed = int(seed)
    if trials is not None:
        exp.trials = int(trials)
    if out is not None:
        exp.out = out
    if exp.trials < 1:
        raise ConfigError("trials must be >= 1")
    exp.scenario = dataclasses.replace(exp.scenario, seed=exp.seed)
    return exp


def _scenario_dict(cfg: SystemConfig) -> dict:
    out = {}
    for f in dataclasses.fields(cfg):
        v = getattr(cfg, f.name)
        if isinstance(v, np.ndarray):
            v = v.tolist()
        elif isinstance(v, tuple):
            v = list(v)
        out[f.name] = v
    return out


def _config_hash(exp: ExperimentConfig) -> str:
    payload = {
        "scenario": _scenario_dict(exp.scenario),
        "trials": exp.trials,
        "sweep_n": [list(g) for g in exp.sweep_n],
        "seed": exp.seed,
    }
    blob = json.dumps(payload, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def _meta(exp: ExperimentConfig) -> dict:
    return {"config_hash": _config_hash(exp), "seed": exp.seed, "version": __version__}


def _write_csv(path: str, header: list, rows: list) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(x) -> str:
    return repr(float(x))


def run_convergence(exp: ExperimentConfig) -> dict:
    """Optimize the scenario from the all-ones profile and write the trace."""
    _, trace = objective.optimize_phases(exp.scenario)
    meta = _meta(exp)
    f0 = trace.objective[0]
    rows = []
    for it, (f, g) in enumerate(zip(trace.objective, trace.grad_norm)):
        step = _fmt(trace.step[it - 1]) if it > 0 else ""
        norm = _fmt(f / f0) if f0 > 0 else _fmt(1.0)
        rows.append([it, _fmt(f), norm, _fmt(g), step,
                     meta["config_hash"], meta["seed"], meta["version"]])
    out = exp.out or "convergence.csv"
    _write_csv(out, ["iteration", "objective", "normalized_objective",
                     "grad_norm", "step", "config_hash", "seed", "version"], rows)
    return {"out": out, "iterations": trace.iterations, "trace": trace}


def run_sweep_n(exp: ExperimentConfig) -> dict:
    """For each grid in the sweep: optimize, then evaluate the optimized and
    the random-phase profiles on identical channel draws."""
    meta = _meta(exp)
    rows = []
    for n_x, n_z in exp.sweep_n:
        cfg = dataclasses.replace(exp.scenario, n_x=n_x, n_z=n_z)
        theta, _ = objective.optimize_phases(cfg)
        rand = simulator.random_phase_baseline(
            cfg, np.random.default_rng([exp.seed, cfg.N, 99])
        )
        for scheme, prof in (("proposed", theta), ("random", rand)):
            summary = simulator.evaluate_scheme(
                cfg, prof, exp.trials, np.random.default_rng([exp.seed, cfg.N])
            )
            rows.append([
                cfg.N, scheme,
                _fmt(summary.mean_rate), _fmt(summary.se_rate),
                _fmt(summary.mean_interference), _fmt(summary.se_interference),
                meta["config_hash"], meta["seed"], meta["version"],
            ])
    out = exp.out or "sweep_n.csv"
    _write_csv(out, ["n_elements", "scheme", "mean_rate", "se_rate",
                     "mean_interference", "se_interference",
                     "config_hash", "seed", "version"], rows)
    return {"out": out, "rows": rows}


def run_validate(exp: ExperimentConfig) -> dict:
    report = validate.run_checks(exp.scenario, trials=exp.trials, seed=exp.seed)
    report["meta"] = _meta(exp)
    out = exp.out or "validate.json"
    with open(out, "w", encoding="utf-8") as fh:
        json.dump(report, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return {"out": out, "report": report}


def run_solve(exp: ExperimentConfig) -> dict:
    t0 = time.perf_counter()
    theta, trace = objective.optimize_phases(exp.scenario)
    angles = theta.angles()
    doc = {
        "meta": {**_meta(exp), "wall_time_s": time.perf_counter() - t0},
        "objective": trace.objective[-1],
        "iterations": trace.iterations,
        "converged": trace.converged,
        "grad_norm": trace.grad_norm[-1],
        "angles": {"tr": angles[0].tolist(), "re": angles[1].tolist()},
    }
    out = exp.out or "solution.json"
    with open(out, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return {"out": out, "solution": doc}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="starris",
        description="STAR-RIS phase design under statistical CSI and phase noise",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("convergence", "write the per-iteration solver trace as CSV"),
        ("sweep-n", "rate vs element count, optimized and random phases (CSV)"),
        ("validate", "run the oracle self-checks and write a JSON report"),
        ("solve", "optimize and write the phase profile as JSON"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", default=None, help="YAML experiment config")
        p.add_argument("--seed", type=int, default=None, help="root seed override")
        p.add_argument("--out", default=None, help="output file path")
        p.add_argument("--trials", type=int, default=None, help="Monte Carlo trials override")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        exp = load_experiment(args.config, seed=args.seed, out=args.out, trials=args.trials)
        if args.command == "convergence":
            run_convergence(exp)
        elif args.command == "sweep-n":
            run_sweep_n(exp)
        elif args.command == "solve":
            run_solve(exp)
        elif args.command == "validate":
            result = run_validate(exp)
            if not result["report"]["passed"]:
                print("validation failed; see report", file=sys.stderr)
                return EXIT_VALIDATION
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DegenerateDenominatorError, RetractionError) as exc:
        print(f"solver degeneracy: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except OSError as exc:
        path = getattr(exc, "filename", None)
        print(f"i/o error{f' ({path})' if path else ''}: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
