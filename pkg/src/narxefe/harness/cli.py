"""Command-line entry point.

    narxefe run <config> [--seed N] [--out DIR]
    narxefe sweep-lambda <config> --scales 0.5,2,100 [--out DIR]
    narxefe objective-curve <config> --grid -1:1:201 [--out DIR]
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .experiments import objective_curve, run_experiment, sweep_lambda, write_rows


def _floats(text: str) -> list[float]:
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _grid(text: str) -> tuple[float, float, int]:
    try:
        lo, hi, n = text.split(":")
        return float(lo), float(hi), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi:n, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="narxefe", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a closed-loop experiment")
    run.add_argument("config")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--out", default="out")

    sweep = sub.add_parser("sweep-lambda", help="first-step argmins across prior precision scales")
    sweep.add_argument("config")
    sweep.add_argument("--scales", type=_floats, required=True)
    sweep.add_argument("--out", default="out")

    curve = sub.add_parser("objective-curve", help="objective values over the first control")
    curve.add_argument("config")
    curve.add_argument("--grid", type=_grid, default=(-1.0, 1.0, 201))
    curve.add_argument("--out", default="out")
    return parser


def _join_values(argv: list[str]) -> list[str]:
    # "--grid -1:1:201" would otherwise be read as an unknown option
    out, it = [], iter(argv)
    for tok in it:
        if tok in ("--grid", "--scales"):
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_join_values(argv))
    try:
        config = load_config(args.config)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    if args.command == "run":
        result = run_experiment(config, out, seed=args.seed)
        print(json.dumps({k: v for k, v in result["summary"].items() if k != "agents"}))
        for kind, s in result["summary"]["agents"].items():
            print(f"{kind}: first_u={s['first_u']} first_success_step={s['first_success_step']}")
    elif args.command == "sweep-lambda":
        rows = sweep_lambda(config, args.scales)
        write_rows(rows, out / "sweep_lambda.csv")
        for r in rows:
            print(f"scale={r['scale']:g} argmin_efe={r['argmin_efe']:.4f} "
                  f"argmin_qcr={r['argmin_qcr']:.4f} mi_range={r['mi_range']:.4g}")
    else:
        lo, hi, n = args.grid
        if n < 1 or not lo <= hi:
            print("error: --grid needs lo <= hi and n >= 1", file=sys.stderr)
            return 2
        rows = objective_curve(config, lo, hi, n)
        write_rows(rows, out / "objective_curve.csv")
        print(f"wrote {len(rows)} rows to {out / 'objective_curve.csv'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
