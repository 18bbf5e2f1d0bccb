"""Multi-seed pendulum swing-up comparison of the EFE and QCR agents.

    python scripts/pendulum_study.py [--seeds 20] [--workers 4] [--out out/pendulum]
"""

import argparse
import csv
import time
from pathlib import Path

import numpy as np

from narxefe.harness import load_config, swing_up_study

CONFIG = Path(__file__).resolve().parents[1] / "configs" / "pendulum.toml"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=str(CONFIG))
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="out/pendulum")
    args = ap.parse_args()
    cfg = load_config(args.config)

    t0 = time.perf_counter()
    res = swing_up_study(cfg, range(args.seeds), workers=args.workers)
    elapsed = time.perf_counter() - t0

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "first_success.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["seed", *res])
        for i in range(args.seeds):
            w.writerow([i, *("" if res[k][i] is None else res[k][i] for k in res)])

    for kind, steps in res.items():
        s = np.array([np.inf if v is None else v for v in steps], float)
        print(f"{kind}: success {np.isfinite(s).mean():.0%}, median first success {np.median(s):g}")
    print(f"{elapsed:.1f} s; per-seed table in {out / 'first_success.csv'}")


if __name__ == "__main__":
    main()
