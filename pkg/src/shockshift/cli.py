"""Command-line interface.

Subcommands: ``constants``, ``curve``, ``run``, ``prop14`` and ``verify``.
Exit codes: 0 when every verdict passes, 1 on a verification failure,
2 on a configuration error and 3 on a runtime or numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ConfigError, ShockShiftError

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _emit(obj, out: Optional[str]) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True, default=_default)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serialisable: {type(o)}")


def cmd_constants(args) -> int:
    from .constants import build_contraction_config
    from .harness import constants_audit, load_scenario, shock_from_spec, system_from_spec

    cfg = load_scenario(args.scenario)
    system = system_from_spec(cfg.system)
    shock = shock_from_spec(system, cfg.shock)
    cc = build_contraction_config(
        system,
        shock,
        n_samples=cfg.constants.n_samples,
        seed=cfg.seed,
        v=cfg.constants.v,
        a=cfg.constants.a,
        n_bases=cfg.constants.n_bases,
        n_s=cfg.constants.n_s,
    )
    _emit(constants_audit(cc), args.out)
    return EXIT_OK


def cmd_curve(args) -> int:
    from .hugoniot import liu_strengthen_check, shock_curve
    from .systems import make_system

    params = {}
    if args.gamma is not None:
        params["gamma"] = args.gamma
    system = make_system(args.system, **params)
    curve = shock_curve(system, np.asarray(args.base, float), args.family, args.smax, args.n)
    rep = liu_strengthen_check(system, curve)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh)
        w.writerow(["s"] + [f"U{k}" for k in range(system.m)] + ["sigma", "liu_margin", "strengthen_margin"])
        for k in range(len(curve.s)):
            row = [curve.s[k], *curve.states[k], curve.sigma[k], rep.liu_margin[k], rep.strengthen_margin[k]]
            w.writerow([repr(float(v)) for v in row])
    finally:
        if args.out:
            fh.close()
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_run(args) -> int:
    from .harness import run_scenario

    rec = run_scenario(args.scenario, out_dir=args.out)
    summary = {"scenario_hash": rec.scenario_hash, "steps": rec.metadata["steps"], **rec.verdicts}
    _emit(summary, None)
    return EXIT_OK if rec.passed else EXIT_FAIL


def cmd_prop14(args) -> int:
    from .harness import prop14_experiment

    rep = prop14_experiment(args.r, args.eps, args.T, args.n_steps, args.fv_cells)
    _emit(rep, args.out)
    return EXIT_OK if rep["pass"] else EXIT_FAIL


def cmd_verify(args) -> int:
    from .harness import verify_suite

    items = verify_suite(seed=args.seed)
    _emit({"items": items, "pass": all(i["pass"] for i in items)}, args.out)
    return EXIT_OK if all(i["pass"] for i in items) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="shockshift", description="Relative-entropy shock contraction laboratory.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("constants", help="construct v, C0, beta, epsilon and a for a scenario")
    c.add_argument("--scenario", required=True)
    c.add_argument("--out")
    c.set_defaults(func=cmd_constants)

    c = sub.add_parser("curve", help="sample a shock curve and its Liu/strengthening margins")
    c.add_argument("--system", required=True, choices=["burgers", "isentropic", "euler"])
    c.add_argument("--gamma", type=float)
    c.add_argument("--base", required=True, type=_floats, help="conserved state, e.g. 1,0,1")
    c.add_argument("--family", default="1", choices=["1", "n"])
    c.add_argument("--smax", required=True, type=float)
    c.add_argument("--n", type=int, default=101)
    c.add_argument("--out")
    c.set_defaults(func=cmd_curve)

    c = sub.add_parser("run", help="run a scenario and write series.csv, constants.json, verdicts.json")
    c.add_argument("--scenario", required=True)
    c.add_argument("--out")
    c.set_defaults(func=cmd_run)

    c = sub.add_parser("prop14", help="drift of the explicit Burgers example against its lower bound")
    c.add_argument("--r", type=float, required=True)
    c.add_argument("--eps", type=float, required=True)
    c.add_argument("--T", type=float, default=100.0)
    c.add_argument("--n-steps", type=int, default=None)
    c.add_argument("--fv-cells", type=int, default=None)
    c.add_argument("--out")
    c.set_defaults(func=cmd_prop14)

    c = sub.add_parser("verify", help="identity and hypothesis audits for the built-in systems")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out")
    c.set_defaults(func=cmd_verify)
    return p


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ShockShiftError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ValueError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
