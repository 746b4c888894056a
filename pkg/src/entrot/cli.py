"""Command-line surface: analysis, sweeps, simulation and self-checks.

Subcommands
-----------
pmax       optimal success weights and probability at one parameter point
sweep      CSV/JSON table of the optimum over a parameter grid
simulate   Monte Carlo protocol runs with a seeded, reproducible stream
threshold  break-even gate angle for the deterministic scheme
verify     named self-consistency checks (quick or full)

Angles are plain radians ("0.7853") or pi-multiples ("0.25pi").  Exit
codes: 0 success, 1 I/O failure, 2 usage or domain error, 3 failed
verification (including a simulate run whose success rate strays more
than 5 sigma from the closed form).  All numeric text output is rounded
to 12 significant digits, and identical invocations with identical seeds
produce byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import verify as verify_mod
from .entanglement import average_cost, threshold_theta
from .montecarlo import monte_carlo
from .povm import (ProtocolParams, det_e3, discriminant, optimum, tr_e3)
from .qmath import StateVector

__all__ = ["main"]


def _parse_angle(text: str) -> float:
    t = text.strip().lower()
    try:
        if t.endswith("pi"):
            head = t[:-2].strip()
            if head in ("", "+", "-"):
                head += "1"
            return float(head) * math.pi
        return float(t)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected radians or a pi-multiple like '0.25pi', got {text!r}")


def _parse_grid(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(
            f"expected START:STOP:COUNT, got {text!r}")
    start, stop = _parse_angle(parts[0]), _parse_angle(parts[1])
    try:
        count = int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"grid count must be an integer, got {parts[2]!r}")
    if count < 2:
        raise argparse.ArgumentTypeError(
            f"grid count must be at least 2, got {count}")
    return start, stop, count


@dataclass(frozen=True)
class SweepPlan:
    """A rectangular parameter grid and how to serialize it."""

    theta_grid: tuple[float, float, int]
    alpha_grid: tuple[float, float, int]
    output_format: str  # "csv" | "json"


def _fmt(value: float) -> str:
    return f"{value:.12g}"


def _round12(obj):
    """Round every float in a JSON-ready structure to 12 significant
    digits, so reports are compact and byte-stable."""
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, float):
        return float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {k: _round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round12(v) for v in obj]
    return obj


def _emit_json(payload: dict, out=None) -> None:
    (out or sys.stdout).write(
        json.dumps(_round12(payload), indent=2) + "\n")


def _emit_table(pairs: list[tuple[str, object]], out=None) -> None:
    stream = out or sys.stdout
    width = max(len(k) for k, _ in pairs)
    for key, value in pairs:
        text = _fmt(value) if isinstance(value, float) else str(value)
        stream.write(f"{key.ljust(width)} = {text}\n")


def _cmd_pmax(args: argparse.Namespace) -> int:
    params = ProtocolParams(args.theta, args.alpha)
    best = optimum(params)
    w = best.weights
    payload = {
        "theta_rad": params.theta,
        "alpha_rad": params.alpha,
        "case": best.case.value,
        "x": best.x,
        "y": best.y,
        "p_max": best.p_max,
        "discriminant": discriminant(params),
        "tr_e3": tr_e3(params, w),
        "det_e3": det_e3(params, w),
    }
    if args.json:
        _emit_json(payload)
    else:
        _emit_table(list(payload.items()))
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    plan = SweepPlan(theta_grid=args.theta_grid, alpha_grid=args.alpha_grid,
                     output_format="json" if args.json else "csv")
    thetas = np.linspace(*plan.theta_grid)
    alphas = np.linspace(*plan.alpha_grid)
    rows = []
    for theta in thetas:
        for alpha in alphas:
            params = ProtocolParams(float(theta), float(alpha))
            best = optimum(params)
            rep = average_cost(params)
            rows.append({
                "theta_rad": params.theta,
                "alpha_rad": params.alpha,
                "case": best.case.value,
                "x": best.x,
                "y": best.y,
                "p_max": best.p_max,
                "e_alpha": rep.entropy,
                "avg_cost": rep.avg_cost,
            })
    if plan.output_format == "json":
        text = json.dumps(_round12({
            "theta_grid": list(plan.theta_grid),
            "alpha_grid": list(plan.alpha_grid),
            "rows": rows,
        }), indent=2) + "\n"
    else:
        header = "theta_rad,alpha_rad,case,x,y,p_max,e_alpha,avg_cost"
        lines = [header]
        for r in rows:
            lines.append(",".join([
                _fmt(r["theta_rad"]), _fmt(r["alpha_rad"]), r["case"],
                _fmt(r["x"]), _fmt(r["y"]), _fmt(r["p_max"]),
                _fmt(r["e_alpha"]), _fmt(r["avg_cost"])]))
        text = "\n".join(lines) + "\n"
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return 0


def _input_state(text: str) -> StateVector | None:
    """'random' means a fresh Haar state per trial; otherwise a two-bit
    computational basis string for the (A, B) register."""
    if text == "random":
        return None
    if len(text) == 2 and set(text) <= {"0", "1"}:
        amps = np.zeros(4, dtype=complex)
        amps[int(text, 2)] = 1.0
        return StateVector(("A", "B"), amps)
    raise ValueError(
        f"input must be 'random' or a 2-bit basis string like '01', got {text!r}")


def _cmd_simulate(args: argparse.Namespace) -> int:
    params = ProtocolParams(args.theta, args.alpha)
    best = optimum(params)
    state = _input_state(args.input)
    stats = monte_carlo(params, args.trials, args.seed,
                        input_state=state, deterministic=args.deterministic)
    payload = {
        "params": {
            "theta_rad": params.theta,
            "alpha_rad": params.alpha,
            "x": stats.weights.x,
            "y": stats.weights.y,
            "case": best.case.value,
        },
        "trials": stats.trials,
        "seed": stats.seed,
        "deterministic": stats.deterministic,
        "input": args.input,
        "success_count": stats.success_count,
        "branch_counts": list(stats.branch_counts),
        "empirical_p": stats.empirical_p,
        "analytic_p": stats.analytic_p,
        "z_score": stats.z_score,
        "mean_fidelity": stats.mean_fidelity,
        "mean_bell_pairs": stats.mean_bell_pairs,
        "mean_ebits": stats.mean_ebits,
    }
    if args.json:
        _emit_json(payload)
    else:
        flat = [(f"params.{k}", v) for k, v in payload["params"].items()]
        flat += [(k, v) for k, v in payload.items() if k != "params"]
        flat = [(k, "null" if v is None else
                 (str(v) if isinstance(v, (bool, list)) else v))
                for k, v in flat]
        _emit_table(flat)
    if abs(stats.z_score) > 5.0:
        print(f"error: success rate is {stats.z_score:.2f} sigma from the "
              f"closed form", file=sys.stderr)
        return 3
    return 0


def _cmd_threshold(args: argparse.Namespace) -> int:
    value = threshold_theta(tol=args.tol)
    payload = {
        "tol_pi": args.tol,
        "threshold_rad": value,
        "threshold_pi": value / math.pi,
    }
    if args.json:
        _emit_json(payload)
    else:
        _emit_table(list(payload.items()))
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    results = verify_mod.run_checks(level=args.level)
    ok = verify_mod.all_passed(results)
    if args.json:
        _emit_json({
            "level": args.level,
            "all_passed": ok,
            "results": [{"name": r.name, "passed": r.passed,
                         "detail": r.detail} for r in results],
        })
    else:
        for r in results:
            sys.stdout.write(
                f"{'PASS' if r.passed else 'FAIL'}  {r.name:<28} {r.detail}\n")
        passed = sum(r.passed for r in results)
        sys.stdout.write(f"{passed}/{len(results)} checks passed\n")
    if not ok:
        first = next(r.name for r in results if not r.passed)
        print(f"error: verification failed, first failing check: {first}",
              file=sys.stderr)
        return 3
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entrot",
        description="Nonlocal controlled-rotation protocol: optimal POVM "
                    "analysis, Monte Carlo simulation and entanglement "
                    "accounting.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pmax", help="optimal success probability at one point")
    p.add_argument("--theta", type=_parse_angle, required=True,
                   help="gate angle in (0, pi/2], radians or e.g. '0.25pi'")
    p.add_argument("--alpha", type=_parse_angle, required=True,
                   help="resource angle in (0, pi/2]")
    p.add_argument("--json", action="store_true", help="emit JSON")
    p.set_defaults(func=_cmd_pmax)

    p = sub.add_parser("sweep", help="tabulate the optimum over a grid")
    p.add_argument("--theta-grid", type=_parse_grid, required=True,
                   metavar="START:STOP:COUNT", help="e.g. '0.05pi:0.5pi:10'")
    p.add_argument("--alpha-grid", type=_parse_grid, required=True,
                   metavar="START:STOP:COUNT")
    p.add_argument("--out", default=None, metavar="PATH",
                   help="output file (default: stdout)")
    p.add_argument("--json", action="store_true",
                   help="emit JSON instead of CSV")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("simulate", help="Monte Carlo protocol runs")
    p.add_argument("--theta", type=_parse_angle, required=True)
    p.add_argument("--alpha", type=_parse_angle, required=True)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--deterministic", action="store_true",
                   help="complete failed runs with a Bell pair")
    p.add_argument("--input", default="random",
                   help="'random' or a 2-bit basis string (default: random)")
    p.add_argument("--json", action="store_true", help="emit JSON")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("threshold", help="break-even gate angle")
    p.add_argument("--tol", type=float, default=1e-4,
                   help="bisection width in units of pi (default 1e-4)")
    p.add_argument("--json", action="store_true", help="emit JSON")
    p.set_defaults(func=_cmd_threshold)

    p = sub.add_parser("verify", help="run self-consistency checks")
    p.add_argument("--level", choices=("quick", "full"), default="quick")
    p.add_argument("--json", action="store_true", help="emit JSON")
    p.set_defaults(func=_cmd_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else 2
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
