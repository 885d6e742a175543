"""Command-line front end.

Commands:

* ``list``               scenario catalog with expected properties
* ``report``             full geometry sweep + identities + gate, to file
* ``verify-identities``  identity suite; exit 0 iff every applicable check passes
* ``check-theorem``      hypothesis gate and dichotomy classification

Exit codes: 0 success (for ``check-theorem``: a dichotomy verdict), 1 failed
checks or a violated hypothesis gate, 2 unknown scenario or bad
configuration, 3 out-of-chart sampling, 4 indeterminate classification.

All report output is deterministic for a fixed (config, seed): wall-clock
timing goes to stderr and the ``runtime_seconds`` field of the artifact is
serialized as null.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import scenarios as scen
from .errors import GraphGeoError, OutOfChartError, UnknownScenarioError
from .identities import DEFAULT_IDENTITY_TOLERANCES, run_identity_suite
from .reporting import canonical_json, report_to_csv
from .theorem_gate import (
    DEFAULT_TOLERANCES,
    classify,
    evaluate_hypotheses,
    sweep_geometry,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_OUT_OF_CHART = 3
EXIT_INDETERMINATE = 4


@dataclass
class RunConfig:
    scenario: str | None = None
    grid: tuple[int, ...] | None = None
    box: list | None = None
    seed: int = 0
    h: float = 1e-3
    c: float = 2.0
    sigma: float | None = None
    kappa_margin: float = 0.01
    tolerances: dict[str, float] = field(default_factory=dict)
    output: str | None = None
    format: str = "json"
    threads: int = 1
    match: str | None = None

    def validate(self) -> None:
        if self.grid is not None and any(r < 2 for r in self.grid):
            raise ValueError("grid resolution must be at least 2 per axis")
        if self.h <= 0.0:
            raise ValueError("finite-difference step must be positive")
        if any(v <= 0.0 for v in self.tolerances.values()):
            raise ValueError("tolerances must be positive")
        if self.format not in ("json", "csv"):
            raise ValueError(f"unknown format {self.format!r}")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")


def _parse_grid(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.lower().split("x"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad grid syntax {text!r}") from exc


def _parse_tol(text: str) -> tuple[str, float]:
    name, _, value = text.partition("=")
    if not value:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    return name, float(value)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphgeo",
        description="Numerical geometry of graphs of maps between "
                    "Riemannian manifolds.")
    sub = parser.add_subparsers(dest="command", required=True)

    list_p = sub.add_parser("list", help="print the scenario catalog")
    list_p.add_argument("--match", default=None,
                        help="only scenarios whose name contains this string")

    for name, help_text in [
            ("report", "full geometry sweep, identity suite and theorem gate"),
            ("verify-identities", "run the identity suite"),
            ("check-theorem", "evaluate the hypothesis gate and classify")]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--scenario", required=False)
        p.add_argument("--config", default=None, help="JSON config file")
        p.add_argument("--grid", type=_parse_grid, default=None,
                       metavar="NxN", help="grid resolution per axis")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--h", type=float, default=None,
                       help="finite-difference step")
        p.add_argument("--c", type=float, default=None,
                       help="shift parameter for the elliptic equation")
        p.add_argument("--sigma", type=float, default=None,
                       help="curvature pinching level (default: scenario's)")
        p.add_argument("--kappa-margin", type=float, default=None)
        p.add_argument("--tol", type=_parse_tol, action="append", default=[],
                       metavar="NAME=VALUE", help="tolerance override (repeatable)")
        p.add_argument("--output", default=None)
        p.add_argument("--format", choices=["json", "csv"], default=None)
        p.add_argument("--threads", type=int, default=None)
    return parser


def _load_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        raw = Path(args.config).read_text(encoding="utf-8")
        import json as _json
        data = _json.loads(raw)
        known = set(RunConfig.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "grid" in data and data["grid"] is not None:
            data["grid"] = tuple(data["grid"])
        cfg = replace(cfg, **data)
    # command line wins over the config file
    overrides = {}
    for key in ("scenario", "grid", "seed", "h", "c", "sigma",
                "output", "format", "threads"):
        val = getattr(args, key, None)
        if val is not None:
            overrides[key] = val
    if getattr(args, "kappa_margin", None) is not None:
        overrides["kappa_margin"] = args.kappa_margin
    if getattr(args, "tol", None):
        overrides["tolerances"] = {**cfg.tolerances, **dict(args.tol)}
    cfg = replace(cfg, **overrides)
    cfg.validate()
    return cfg


def _resolve_scenario(cfg: RunConfig) -> scen.Scenario:
    if not cfg.scenario:
        raise UnknownScenarioError("no scenario given (use --scenario)")
    return scen.get(cfg.scenario)


def _grid_points(scenario: scen.Scenario, cfg: RunConfig):
    box = np.asarray(cfg.box, dtype=float) if cfg.box is not None \
        else scenario.sample_box
    shape = cfg.grid or scenario.grid_shape
    if len(shape) != scenario.domain.dim:
        raise ValueError(
            f"grid has {len(shape)} axes, scenario needs {scenario.domain.dim}")
    margin_box = scenario.domain.sample_box()
    if np.any(box[:, 0] < margin_box[:, 0]) or np.any(box[:, 1] > margin_box[:, 1]):
        raise OutOfChartError(
            "sampling box leaves the chart box (including its margin)")
    return scenario.grid_points(shape, box), box, shape


def _config_echo(cfg: RunConfig, scenario: scen.Scenario, box, shape,
                 sigma: float) -> dict:
    return {
        "scenario": scenario.name,
        "grid": list(shape),
        "box": [list(map(float, b)) for b in box],
        "seed": cfg.seed,
        "h": cfg.h,
        "c": cfg.c,
        "sigma": sigma,
        "kappa_margin": cfg.kappa_margin,
        "tolerances": dict(sorted(cfg.tolerances.items())),
        "format": cfg.format,
        "threads": cfg.threads,
    }


def _point_records(sweep) -> list[dict]:
    records = []
    for row in sweep.rows:
        records.append({
            "x": [float(v) for v in row.coords],
            "lambda": [float(v) for v in row.lambdas],
            "trace_s": row.trace_s,
            "a_norm_sq": row.a_norm_sq,
            "h_norm": row.h_norm,
            "sec_m_min": row.sec_m_min,
            "sec_n_max": row.sec_n_max,
        })
    return records


def _identity_records(reports) -> list[dict]:
    return [{
        "name": r.name,
        "max_residual": r.max_residual,
        "tolerance": r.tolerance,
        "pass": bool(r.passed),
        "skipped_reason": r.skipped_reason,
    } for r in reports]


def _hypotheses_record(hyp) -> dict:
    return {
        "sigma": hyp.sigma,
        "kappa_sq": hyp.kappa_sq,
        "lambda0_sq": hyp.lambda0_sq,
        "minimal_ok": hyp.minimal_ok,
        "pinching_ok": hyp.pinching_ok,
        "trace_ok": hyp.trace_ok,
        "kappa_ok": hyp.kappa_ok,
        "condition4_ok": hyp.condition4_ok,
        "margins": dict(hyp.margins),
        "scope": hyp.scope,
    }


def _classification_record(cls) -> dict:
    return {"verdict": cls.verdict, "evidence": cls.evidence, "scope": cls.scope}


def _write_report(report: dict, cfg: RunConfig) -> None:
    text = canonical_json(report) + "\n" if cfg.format == "json" \
        else report_to_csv(report)
    if cfg.output:
        Path(cfg.output).write_text(text, encoding="utf-8")
        print(f"report written to {cfg.output}", file=sys.stderr)
    else:
        sys.stdout.write(text)


def cmd_list(match: str | None) -> int:
    reg = scen.registry()
    names = [n for n in reg if match is None or match in n]
    header = f"{'name':22s} {'dims':7s} {'grid':10s} {'expected'}"
    print(header)
    print("-" * len(header))
    for name in names:
        s = reg[name]
        exp = s.expected
        flags = []
        for label, val in [("minimal", exp.minimal),
                           ("totally-geodesic", exp.totally_geodesic)]:
            flags.append(f"{label}={'measured' if val is None else val}")
        if exp.isometric:
            flags.append("isometric")
        dims = f"{s.domain.dim}->{s.target.dim}"
        grid = "x".join(map(str, s.grid_shape))
        print(f"{name:22s} {dims:7s} {grid:10s} {'; '.join(flags)};"
              f" lambda: {exp.lambda_field}")
    return EXIT_OK


def cmd_report(cfg: RunConfig) -> int:
    scenario = _resolve_scenario(cfg)
    grid, box, shape = _grid_points(scenario, cfg)
    sigma = cfg.sigma if cfg.sigma is not None else scenario.sigma
    t0 = time.monotonic()

    sweep = sweep_geometry(scenario.f, grid, seed=cfg.seed, threads=cfg.threads)
    gate_tol = {k: v for k, v in cfg.tolerances.items() if k in DEFAULT_TOLERANCES}
    id_tol = {k: v for k, v in cfg.tolerances.items()
              if k in DEFAULT_IDENTITY_TOLERANCES}
    hyp = evaluate_hypotheses(scenario.f, sweep, sigma, cfg.kappa_margin, gate_tol)
    cls = classify(scenario.f, grid, sigma, cfg.kappa_margin, gate_tol,
                   seed=cfg.seed, sweep=sweep, hypotheses=hyp)
    identities = run_identity_suite(scenario, seed=cfg.seed, h=cfg.h, c=cfg.c,
                                    tolerances=id_tol)
    elapsed = time.monotonic() - t0

    report = {
        "config": _config_echo(cfg, scenario, box, shape, sigma),
        "points": _point_records(sweep),
        "identities": _identity_records(identities),
        "hypotheses": _hypotheses_record(hyp),
        "classification": _classification_record(cls),
        # kept out of the deterministic artifact; see module docstring
        "runtime_seconds": None,
    }
    _write_report(report, cfg)
    print(f"runtime: {elapsed:.2f}s", file=sys.stderr)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    scenario = _resolve_scenario(cfg)
    id_tol = {k: v for k, v in cfg.tolerances.items()
              if k in DEFAULT_IDENTITY_TOLERANCES}
    t0 = time.monotonic()
    reports = run_identity_suite(scenario, seed=cfg.seed, h=cfg.h, c=cfg.c,
                                 tolerances=id_tol)
    for r in reports:
        print(r.line())
    print(f"runtime: {time.monotonic() - t0:.2f}s", file=sys.stderr)
    if cfg.output:
        payload = {"scenario": scenario.name,
                   "identities": _identity_records(reports)}
        text = canonical_json(payload) + "\n" if cfg.format == "json" \
            else report_to_csv({"config": {"scenario": scenario.name},
                                "identities": _identity_records(reports)})
        Path(cfg.output).write_text(text, encoding="utf-8")
    failed = [r for r in reports if not r.skipped and not r.passed]
    return EXIT_FAIL if failed else EXIT_OK


def cmd_check_theorem(cfg: RunConfig) -> int:
    scenario = _resolve_scenario(cfg)
    grid, box, shape = _grid_points(scenario, cfg)
    sigma = cfg.sigma if cfg.sigma is not None else scenario.sigma
    gate_tol = {k: v for k, v in cfg.tolerances.items() if k in DEFAULT_TOLERANCES}

    sweep = sweep_geometry(scenario.f, grid, seed=cfg.seed, threads=cfg.threads)
    hyp = evaluate_hypotheses(scenario.f, sweep, sigma, cfg.kappa_margin, gate_tol)
    cls = classify(scenario.f, grid, sigma, cfg.kappa_margin, gate_tol,
                   seed=cfg.seed, sweep=sweep, hypotheses=hyp)

    payload = {"config": _config_echo(cfg, scenario, box, shape, sigma),
               "hypotheses": _hypotheses_record(hyp),
               "classification": _classification_record(cls)}
    if cfg.output:
        text = canonical_json(payload) + "\n" if cfg.format == "json" \
            else report_to_csv(payload)
        Path(cfg.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(canonical_json(payload) + "\n")

    if cls.verdict in ("constant", "totally-geodesic-isometric-immersion"):
        return EXIT_OK
    if cls.verdict == "hypothesis-violated":
        return EXIT_FAIL
    return EXIT_INDETERMINATE


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "list":
            return cmd_list(args.match)
        cfg = _load_config(args)
        if args.command == "report":
            return cmd_report(cfg)
        if args.command == "verify-identities":
            return cmd_verify(cfg)
        if args.command == "check-theorem":
            return cmd_check_theorem(cfg)
        parser.error(f"unknown command {args.command!r}")
    except UnknownScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OutOfChartError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OUT_OF_CHART
    except (ValueError, GraphGeoError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
