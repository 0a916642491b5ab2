"""RK4 angle integration versus the closed-form flow on the sphere at infinity.

    python3 scripts/flow_check.py --points 50 --s-max 100
"""
import argparse
import time

import numpy as np

from torusdamp.infinity_flow import SpherePoint, compare_integrators


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--points", type=int, default=50)
    ap.add_argument("--s-max", type=float, default=100.0)
    ap.add_argument("--dt", type=float, default=1e-3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    pts = [SpherePoint.random(3 + (i % 2), rng) for i in range(args.points)]
    t0 = time.perf_counter()
    err = compare_integrators(pts, s_max=args.s_max, dt=args.dt)
    print(f"{args.points} points, s in [0, {args.s_max}], dt = {args.dt}: "
          f"max error {err.max():.3e}, median {np.median(err):.3e} ({time.perf_counter() - t0:.1f} s)")


if __name__ == "__main__":
    main()
