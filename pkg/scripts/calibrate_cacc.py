"""Calibrate the headline acceptance constant on clean runs and freeze it.

C_acc = 5 x the median clean normalized error, where the clean runs use
eps = 0 data and the normalization uses the headline eps. Writes
src/robust_mallows/calibration.json. Run once; the acceptance suite reads the
frozen value and never recomputes it.
"""

import argparse
import json
import math
import time
from pathlib import Path

import numpy as np

from robust_mallows.config import ExperimentSpec
from robust_mallows.runner import run_spec

OUT = Path(__file__).resolve().parents[1] / "src" / "robust_mallows" / "calibration.json"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=30)
    ap.add_argument("--phi", type=float, default=0.9)
    ap.add_argument("--s", type=int, default=100_000)
    ap.add_argument("--eps", type=float, default=0.05, help="headline eps used in the normalization")
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--out", default=str(OUT))
    args = ap.parse_args()

    scale = (1 - args.phi) / (args.eps * math.log(1 / args.eps))
    rows = []
    for seed in range(args.seeds):
        t = time.time()
        res = run_spec(ExperimentSpec(n=args.n, phi=args.phi, s=args.s, eps=0.0, seed=seed), baseline=False)
        r = res.row()
        rows.append({"seed": seed, "l2_error": r["l2_error"], "normalized_error": scale * r["l2_error"],
                     "phi_hat": r["phi_hat"]})
        print(f"seed {seed}: l2 {r['l2_error']:.4f} phi_hat {r['phi_hat']:.4f} ({time.time() - t:.1f}s)")
    clean = float(np.median([r["normalized_error"] for r in rows]))
    doc = {
        "c_acc": 5.0 * clean,
        "clean_median_normalized_error": clean,
        "setting": {"n": args.n, "phi": args.phi, "s": args.s, "eps": args.eps, "seeds": args.seeds},
        "clean_runs": rows,
    }
    Path(args.out).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    print(f"C_acc = {doc['c_acc']} written to {args.out}")


if __name__ == "__main__":
    main()
