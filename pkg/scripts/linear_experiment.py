"""Linear AR experiment: first-step argmins, a precision sweep and the objective curves.

    python scripts/linear_experiment.py [--out out/linear]
"""

import argparse
from pathlib import Path

import numpy as np

from narxefe.harness import load_config, objective_curve, run_experiment, sweep_lambda, write_rows

CONFIG = Path(__file__).resolve().parents[1] / "configs" / "experiment1.toml"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=str(CONFIG))
    ap.add_argument("--out", default="out/linear")
    args = ap.parse_args()
    cfg = load_config(args.config)
    out = Path(args.out)

    summary = run_experiment(cfg, out)["summary"]
    for kind, u in summary["first_step_argmin"].items():
        print(f"first-step argmin {kind}: {u:.4f}")

    rows = sweep_lambda(cfg, np.geomspace(0.1, 1000.0, 13))
    write_rows(rows, out / "sweep_lambda.csv")
    print("\nscale      argmin_efe  mi_range")
    for r in rows:
        print(f"{r['scale']:<10.4g} {r['argmin_efe']:<11.4f} {r['mi_range']:.4g}")

    for scale in (0.5, 2.0, 100.0):
        cfg.lambda_scale = scale
        write_rows(objective_curve(cfg, cfg.u_min, cfg.u_max, 201), out / f"objective_curve_{scale:g}.csv")
    print(f"\nwrote traces and curves to {out}")


if __name__ == "__main__":
    main()
