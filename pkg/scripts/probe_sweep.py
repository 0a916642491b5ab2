"""Observability ratio of profile quasimodes on band2d versus fig4_1 across h.

    python3 scripts/probe_sweep.py
"""
import argparse

import numpy as np

from torusdamp.scene_geometry import preset_scene
from torusdamp.spectral_lab import bump, check_slab_estimate, profile_quasimode, rasterize_damping


def sweep(name, axis, res, hs, band=None, slab_axis=None):
    torus, damping = preset_scene(name)
    a = rasterize_damping(torus, damping, res)
    prev = None
    print(f"\n{name}  res={res}  axis={axis}")
    print(f"{'h':>10} {'||u||':>8} {'||a^1/2 u||':>12} {'||f||/h':>10} {'ratio':>8} {'growth':>7} {'slab':>7}")
    for h in hs:
        q = profile_quasimode(torus, axis, bump(0.4), h, res, band=band)
        r = q.report(a)
        slab = (check_slab_estimate(q.u, q.f, q.h, 1.0, axis=slab_axis).ratio
                if slab_axis is not None else float("nan"))
        growth = r.ratio / prev if prev else float("nan")
        prev = r.ratio
        print(f"{r.h:10.5f} {r.norm_u:8.4f} {r.norm_au:12.3e} {r.norm_f / r.h:10.4f} {r.ratio:8.3f} "
              f"{growth:7.3f} {slab:7.3f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--h", default="1/32,1/64,1/128,1/256")
    args = ap.parse_args()
    hs = [1 / float(x.split("/")[1]) if "/" in x else float(x) for x in args.h.split(",")]
    sweep("band2d", 0, (512, 64), hs, band=lambda y: np.abs(y) < 0.5, slab_axis=1)
    sweep("fig4_1:1/10,1/10,1/10,1/10", 2, (64, 64, 256), hs)


if __name__ == "__main__":
    main()
