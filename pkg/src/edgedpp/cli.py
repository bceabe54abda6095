"""Command line interface.

Subcommands:
  verify all | <kind>   run verification experiments, print one line per
                        experiment, exit 0/1 on pass/fail (2 on errors)
  kernel eval           evaluate the exact kernel at one point pair
  density scan          tabulate the edge density profile against the
                        two-term prediction along the outward normal
  report                run experiments and write a csv/json report

Configuration is a plain INI-style key=value file with one section per
experiment kind plus [global] and [contour]; every key has a built-in
default (see config_defaults).
"""

from __future__ import annotations

import argparse
import configparser
import math
import sys

import numpy as np

from .contour import ContourConfig
from .errors import EdgeDppError
from .geometry import edge_point_sample
from .harness import (
    EXPERIMENT_KINDS,
    ConvergenceReport,
    default_spec,
    emit_report,
    run_experiment,
)
from .kernel import ModelParams, kernel_exact, rho1_density
from .predictors import edge_density_prediction

__all__ = ["main", "config_defaults", "load_config"]


def config_defaults() -> dict:
    """Built-in configuration: global keys, contour knobs, per-kind grids."""
    cfg = {
        "global": {"seed": 20260401, "threads": 1},
        "contour": {
            "node_count": 512,
            "radius_offset": 1.0,
            "tolerance": 1e-10,
            "max_doublings": 8,
        },
    }
    for kind in EXPERIMENT_KINDS:
        spec = default_spec(kind)
        cfg[kind] = {
            "n_grid": ",".join(str(n) for n in spec.n_grid),
            "d_grid": ",".join(str(d) for d in sorted({d for d, _ in spec.params_grid})),
            "tau_grid": ",".join(repr(t) for t in sorted({t for _, t in spec.params_grid})),
        }
        for key, val in spec.tolerances.items():
            cfg[kind][key] = val
        for key, val in spec.settings.items():
            if isinstance(val, (int, float, complex)):
                cfg[kind][key] = val
    return cfg


def load_config(path: str | None) -> dict:
    """Defaults overridden by an INI file; unknown keys are rejected."""
    cfg = config_defaults()
    if path is None:
        return cfg
    parser = configparser.ConfigParser()
    with open(path) as fh:
        parser.read_file(fh)
    for section in parser.sections():
        if section not in cfg:
            raise EdgeDppError(f"unknown config section [{section}]")
        for key, raw in parser.items(section):
            if key not in cfg[section]:
                raise EdgeDppError(f"unknown config key {key!r} in [{section}]")
            default = cfg[section][key]
            if isinstance(default, str):
                cfg[section][key] = raw
            elif isinstance(default, int) and not isinstance(default, bool):
                cfg[section][key] = int(raw)
            elif isinstance(default, complex):
                cfg[section][key] = complex(raw)
            else:
                cfg[section][key] = float(raw)
    return cfg


def _spec_from_config(kind: str, cfg: dict):
    sec = cfg[kind]
    seed = int(cfg["global"]["seed"])
    n_grid = tuple(int(x) for x in str(sec["n_grid"]).split(","))
    d_grid = tuple(int(x) for x in str(sec["d_grid"]).split(","))
    tau_grid = tuple(float(x) for x in str(sec["tau_grid"]).split(","))
    base = default_spec(kind, seed=seed)
    tolerances = dict(base.tolerances)
    settings = dict(base.settings)
    for key in list(tolerances):
        if key in sec:
            tolerances[key] = float(sec[key])
    for key in list(settings):
        if key in sec and isinstance(settings[key], (int, float, complex)):
            settings[key] = type(settings[key])(sec[key])
    params_grid = tuple((d, t) for d in d_grid for t in tau_grid)
    # keep kinds with a fixed structural grid on their defaults
    if kind in ("refined_d1", "saddle_pole", "max_principle", "phi_expansion"):
        params_grid = base.params_grid
    return default_spec(
        kind,
        seed=seed,
        params_grid=params_grid,
        n_grid=n_grid,
        tolerances=tolerances,
        settings=settings,
    )


def _contour_from_config(cfg: dict) -> ContourConfig:
    sec = cfg["contour"]
    return ContourConfig(
        node_count=int(sec["node_count"]),
        radius_offset=float(sec["radius_offset"]),
        tolerance=float(sec["tolerance"]),
        max_doublings=int(sec["max_doublings"]),
    )


def _run_kinds(kinds, cfg) -> list[ConvergenceReport]:
    contour = _contour_from_config(cfg)
    threads = int(cfg["global"]["threads"])
    reports = []
    for kind in kinds:
        spec = _spec_from_config(kind, cfg)
        rep = run_experiment(spec, contour, threads)
        status = "PASS" if rep.passed else "FAIL"
        print(f"[{status}] {kind}")
        for s in rep.series:
            worst = max((e for _, e in s.samples), default=float("nan"))
            extra = f" {s.note}" if s.note else ""
            print(
                f"    d={s.d} tau={s.tau}: worst={worst:.3e} "
                f"fitted_exponent={s.fitted_exponent:+.3f} "
                f"{'ok' if s.passed else 'FAIL'}{extra}"
            )
        reports.append(rep)
    return reports


def _parse_point(text: str, d: int) -> np.ndarray:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != d:
        raise EdgeDppError(f"expected {d} comma-separated coordinates, got {len(parts)}")
    return np.array([complex(p) for p in parts])


def _cmd_verify(args) -> int:
    cfg = load_config(args.config)
    kinds = list(EXPERIMENT_KINDS) if args.kind == "all" else [args.kind]
    reports = _run_kinds(kinds, cfg)
    if args.report:
        text = emit_report(reports, args.format)
        with open(args.report, "w") as fh:
            fh.write(text)
        print(f"report written to {args.report}")
    return 0 if all(r.passed for r in reports) else 1


def _cmd_kernel_eval(args) -> int:
    params = ModelParams(d=args.d, tau=args.tau, n=args.n)
    z = _parse_point(args.z, args.d)
    w = _parse_point(args.w, args.d)
    val = kernel_exact(params, z, w)
    print(f"K_n(z, w) = {val.real!r} {'+' if val.imag >= 0 else '-'} {abs(val.imag)!r}j")
    return 0


def _cmd_density_scan(args) -> int:
    params = ModelParams(d=args.d, tau=args.tau, n=args.n)
    edge = edge_point_sample(params, args.seed)
    rn = math.sqrt(args.n)
    lams = np.linspace(args.lambda_min, args.lambda_max, args.steps)
    print("lambda,scaled_density,prediction,abs_error")
    for lam in lams:
        val = args.n**args.d * rho1_density(params, rn * edge.z + lam * edge.normal)
        pred = edge_density_prediction(params, edge, float(lam), args.n)
        print(f"{lam!r},{val!r},{pred!r},{abs(val - pred)!r}")
    return 0


def _cmd_report(args) -> int:
    cfg = load_config(args.config)
    kinds = args.kind if args.kind else list(EXPERIMENT_KINDS)
    reports = _run_kinds(kinds, cfg)
    text = emit_report(reports, args.format)
    with open(args.out, "w") as fh:
        fh.write(text)
    print(f"report written to {args.out}")
    return 0 if all(r.passed for r in reports) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="edgedpp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="run verification experiments")
    p_verify.add_argument("kind", choices=("all",) + EXPERIMENT_KINDS)
    p_verify.add_argument("--config", default=None)
    p_verify.add_argument("--report", default=None, help="also write a report file")
    p_verify.add_argument("--format", choices=("csv", "json"), default="csv")
    p_verify.set_defaults(func=_cmd_verify)

    p_kernel = sub.add_parser("kernel", help="kernel evaluations")
    kernel_sub = p_kernel.add_subparsers(dest="subcommand", required=True)
    p_eval = kernel_sub.add_parser("eval", help="evaluate K_n(z, w)")
    p_eval.add_argument("--d", type=int, required=True)
    p_eval.add_argument("--tau", type=float, required=True)
    p_eval.add_argument("--n", type=int, required=True)
    p_eval.add_argument("--z", required=True, help="comma-separated complex coordinates")
    p_eval.add_argument("--w", required=True, help="comma-separated complex coordinates")
    p_eval.set_defaults(func=_cmd_kernel_eval)

    p_density = sub.add_parser("density", help="density profiles")
    density_sub = p_density.add_subparsers(dest="subcommand", required=True)
    p_scan = density_sub.add_parser("scan", help="edge density against the prediction")
    p_scan.add_argument("--d", type=int, default=1)
    p_scan.add_argument("--tau", type=float, default=0.5)
    p_scan.add_argument("--n", type=int, default=1024)
    p_scan.add_argument("--seed", type=int, default=1)
    p_scan.add_argument("--lambda-min", type=float, default=-1.0, dest="lambda_min")
    p_scan.add_argument("--lambda-max", type=float, default=1.0, dest="lambda_max")
    p_scan.add_argument("--steps", type=int, default=9)
    p_scan.set_defaults(func=_cmd_density_scan)

    p_report = sub.add_parser("report", help="run experiments and write a report")
    p_report.add_argument("--format", choices=("csv", "json"), default="csv")
    p_report.add_argument("--out", required=True)
    p_report.add_argument("--kind", action="append", choices=EXPERIMENT_KINDS)
    p_report.add_argument("--config", default=None)
    p_report.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EdgeDppError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
