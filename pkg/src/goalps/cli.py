"""Command-line front end.

Subcommands:
  simulate      replicated comparison of methods over a scenario grid
  fit           run the estimators on a user-supplied CSV dataset
  oracle-check  support-recovery and normality diagnostics over an n grid

Exit codes: 0 success, 2 configuration or data error, 3 too many failed
replications, 4 oracle acceptance gates failed. Flag values override
config-file values, which override defaults.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .dataio import DataFormatError, read_dataset
from .estimators import MethodSpec, fit_method
from .exceptions import GoalpsError, ScenarioConfigError, TooManyFailuresError
from .harness import emit_results, oracle_diagnostics, run_replications
from .simgen import scenarios_from_config
from .weights import lambda_grid

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_FAILURES = 3
EXIT_GATE = 4

MONOTONE_SLACK = 0.05
VAR_RATIO_RANGE = (0.7, 1.3)

_RUN_KEYS = {"seed", "replications", "methods", "gamma", "workers", "out", "scenarios"}
_DEFAULTS = {"replications": 200, "methods": ["GOAL", "OAL", "LASSO"],
             "gamma": 3.0, "workers": 1, "out": "results", "seed": 0}


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            cfg = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ScenarioConfigError(f"config file not found: {path}") from None
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        loc = f" (line {mark.line + 1}, column {mark.column + 1})" if mark else ""
        raise ScenarioConfigError(f"{path}: invalid YAML{loc}: {exc}") from None
    if not isinstance(cfg, dict):
        raise ScenarioConfigError(f"{path}: top level must be a mapping")
    unknown = set(cfg) - _RUN_KEYS
    if unknown:
        raise ScenarioConfigError(f"{path}: unknown keys {sorted(unknown)}")
    if "scenarios" not in cfg:
        raise ScenarioConfigError(f"{path}: missing required 'scenarios' block")
    return cfg


def _merged(cfg: dict, args) -> dict:
    """flag > file > default, per setting."""
    out = {}
    for key in ("seed", "replications", "gamma", "workers", "out"):
        flag = getattr(args, key if key != "out" else "out", None)
        out[key] = flag if flag is not None else cfg.get(key, _DEFAULTS[key])
    methods = args.methods if args.methods is not None else cfg.get(
        "methods", _DEFAULTS["methods"])
    if isinstance(methods, str):
        methods = [m.strip() for m in methods.split(",") if m.strip()]
    out["methods"] = methods
    return out


def _method_specs(names, gamma: float) -> list[MethodSpec]:
    try:
        return [MethodSpec(kind=name, gamma=gamma) for name in names]
    except ValueError as exc:
        raise ScenarioConfigError(str(exc)) from None


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    run = _merged(cfg, args)
    if run["replications"] < 2:
        raise ScenarioConfigError("replications must be >= 2 for simulate")
    scenarios = scenarios_from_config(cfg["scenarios"], int(run["seed"]))
    methods = _method_specs(run["methods"], run["gamma"])

    all_summaries = []
    print(f"{'n':>6} {'p':>5} {'|A|':>4} {'rho':>5} {'method':>7} "
          f"{'bias':>9} {'se':>9} {'mse':>9} {'fail':>5}")
    for s in scenarios:
        summaries = run_replications(s, methods, int(run["replications"]),
                                     workers=int(run["workers"]))
        for summ in summaries:
            print(f"{s.n:>6} {s.p:>5} {len(s.active_set):>4} {s.rho:>5g} "
                  f"{summ.method.kind:>7} {summ.bias:>9.4f} {summ.se:>9.4f} "
                  f"{summ.mse:>9.4f} {summ.n_failed:>5}")
        all_summaries.extend(summaries)
    paths = emit_results(all_summaries, run["out"])
    print(f"wrote {len(paths)} files to {run['out']}")
    return EXIT_OK


def cmd_fit(args) -> int:
    data = read_dataset(args.data)
    gamma = args.gamma if args.gamma is not None else _DEFAULTS["gamma"]
    names = args.methods if args.methods is not None else _DEFAULTS["methods"]
    if isinstance(names, str):
        names = [m.strip() for m in names.split(",") if m.strip()]
    methods = _method_specs(names, gamma)
    grid = lambda_grid(data.n)

    out_dir = Path(args.out if args.out is not None else _DEFAULTS["out"])
    out_dir.mkdir(parents=True, exist_ok=True)
    result_path = out_dir / "fit_results.csv"
    with result_path.open("w") as fh:
        fh.write("method,lambda1,lambda2,ate,selected\n")
        for m in methods:
            est = fit_method(data, m, grid)
            names_sel = " ".join(f"X{j + 1}" for j in sorted(est.selected))
            print(f"{m.kind}: ate={est.ate:.6g} lambda1={est.lambda1:.6g} "
                  f"lambda2={est.lambda2:.6g} selected=[{names_sel}]")
            fh.write(f"{m.kind},{est.lambda1!r},{est.lambda2!r},{est.ate!r},"
                     f"{names_sel}\n")
    print(f"wrote {result_path}")
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    cfg = _load_config(args.config)
    run = _merged(cfg, args)
    R = int(run["replications"])
    if R < 50:
        raise ScenarioConfigError("oracle-check needs replications >= 50")
    scenarios = scenarios_from_config(cfg["scenarios"], int(run["seed"]))
    scenarios = sorted(scenarios, key=lambda s: s.n)

    out_dir = Path(run["out"])
    out_dir.mkdir(parents=True, exist_ok=True)
    diag_path = out_dir / "oracle_diagnostics.csv"

    results = []
    for s in scenarios:
        diag = oracle_diagnostics(s, R, use_schedule=True,
                                  gamma=float(run["gamma"]),
                                  workers=int(run["workers"]))
        results.append(diag)
        ratios = diag.z_var / diag.ref_var
        print(f"n={s.n:>5} p={s.p:>4} zero_recovery={diag.zero_recovery_rate:.3f} "
              f"nonzero_recovery={diag.nonzero_recovery_rate:.3f} "
              f"var_ratio=[{ratios.min():.3f}, {ratios.max():.3f}]")

    with diag_path.open("w") as fh:
        fh.write("n,p,coordinate,zero_recovery,nonzero_recovery,"
                 "z_mean,z_se,z_var,ref_var,var_ratio\n")
        for diag in results:
            s = diag.scenario
            for k, j in enumerate(diag.active_indices):
                fh.write(f"{s.n},{s.p},{j + 1},{diag.zero_recovery_rate!r},"
                         f"{diag.nonzero_recovery_rate!r},{diag.z_mean[k]!r},"
                         f"{diag.z_se[k]!r},{diag.z_var[k]!r},{diag.ref_var[k]!r},"
                         f"{diag.z_var[k] / diag.ref_var[k]!r}\n")
    print(f"wrote {diag_path}")

    ok = True
    rates = [diag.zero_recovery_rate for diag in results]
    for prev, cur in zip(rates, rates[1:]):
        if cur < prev - MONOTONE_SLACK:
            print(f"GATE FAIL: zero recovery dropped {prev:.3f} -> {cur:.3f} "
                  f"(slack {MONOTONE_SLACK})")
            ok = False
    last = results[-1]
    ratios = last.z_var / last.ref_var
    lo, hi = VAR_RATIO_RANGE
    if np.any(ratios < lo) or np.any(ratios > hi):
        print(f"GATE FAIL: variance ratios at n={last.scenario.n} outside "
              f"[{lo}, {hi}]: [{ratios.min():.3f}, {ratios.max():.3f}]")
        ok = False
    print("oracle gates: " + ("PASS" if ok else "FAIL"))
    return EXIT_OK if ok else EXIT_GATE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="goalps",
        description="Outcome-adaptive lasso propensity-score estimation")
    parser.add_argument("--version", action="version", version=f"goalps {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--replications", type=int, default=None)
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--out", type=str, default=None)
        p.add_argument("--methods", type=str, default=None,
                       help="comma-separated subset of GOAL,OAL,LASSO")
        p.add_argument("--gamma", type=float, default=None)

    sim = sub.add_parser("simulate", help="run a replicated scenario grid")
    sim.add_argument("--config", required=True)
    common(sim)
    sim.set_defaults(func=cmd_simulate)

    fitp = sub.add_parser("fit", help="fit estimators to a CSV dataset")
    fitp.add_argument("--data", required=True, help="CSV with header Y,A,X1..Xp")
    common(fitp)
    fitp.set_defaults(func=cmd_fit)

    orc = sub.add_parser("oracle-check", help="support-recovery diagnostics")
    orc.add_argument("--config", required=True)
    common(orc)
    orc.set_defaults(func=cmd_oracle_check)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioConfigError, DataFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TooManyFailuresError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURES
    except GoalpsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
