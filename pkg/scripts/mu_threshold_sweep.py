#!/usr/bin/env python3
"""Sweep the front-response coefficient mu and tabulate the detected regime.

With a small initial range and d1 > 1 - k, a weak front response leaves the
invader confined (vanishing) while a strong one lets it escape (spreading);
this script locates the crossover empirically.  One output directory per
cell plus sweep.csv.

Usage:
  python scripts/mu_threshold_sweep.py [--T 120] [--jobs 2] [--out out/mu_sweep]
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from nlinvade.config import build_scenario
from nlinvade.runner import sweep


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--T", type=float, default=120.0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", default="out/mu_sweep")
    ap.add_argument(
        "--mus", type=float, nargs="*",
        default=[0.005, 0.02, 0.08, 0.3, 1.2, 5.0, 20.0],
    )
    args = ap.parse_args()

    mapping = {
        "params": dict(d1=1.2, d2=1.0, k=0.5, h_comp=0.5, gamma=1.0, mu=1.0, h0=0.2),
        "kernel_u": {"form": "uniform", "L0": 1.0},
        "kernel_v": {"form": "uniform", "L0": 1.0},
        "numerics": {"dx": 0.05, "dt": 0.02, "T": args.T, "snapshot_every": 0.5},
        "output": {"directory": args.out},
        "sweep": {"cap": 64, "axis.params.mu": list(args.mus)},
    }
    cfg = build_scenario(mapping)
    header, rows = sweep(cfg, jobs=args.jobs, check_theorems=False)
    i_mu = header.index("params.mu")
    i_regime = header.index("regime")
    i_h = header.index("h_front")
    print(f"{'mu':>10} {'regime':>12} {'h_front':>12}")
    for row in rows:
        print(f"{row[i_mu]:>10} {row[i_regime]:>12} {float(row[i_h]):>12.3f}")
    print(f"rows written to {Path(args.out) / 'sweep.csv'}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
