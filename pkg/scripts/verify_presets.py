"""Verdict table for the preset scenes.

    python3 scripts/verify_presets.py --bound 3 --out results/verdicts.json
"""
import argparse
import time

from torusdamp import io
from torusdamp.geodesic_control import Condition, analyze_scene, check_conditions
from torusdamp.scene_geometry import preset_scene

SCENES = ["checkerboard2d:a", "checkerboard2d:b", "checkerboard2d:c", "fig4_1:1/10,1/10,1/10,1/10",
          "fig5_1", "band2d", "empty2d", "full2d"]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--bound", type=int, default=3)
    ap.add_argument("--scenes", nargs="+", default=SCENES, help="preset names, e.g. fig5_1 checkerboard2d:b")
    ap.add_argument("--out", default=None)
    args = ap.parse_args()
    rows = []
    for name in args.scenes:
        torus, damping = preset_scene(name)
        t0 = time.perf_counter()
        an = analyze_scene(damping, torus, args.bound)
        v = check_conditions(damping, torus, list(Condition), analysis=an)
        dt = time.perf_counter() - t0
        labels = {c.value: x.label for c, x in v.items()}
        rows.append({"scene": name, "seconds": dt, "razing": len(an.razing), **labels})
        print(f"{name:32s} " + "  ".join(f"{k}={lab}" for k, lab in labels.items())
              + f"  razing={len(an.razing)}  ({dt:.1f} s)")
    if args.out:
        io.write_json(args.out, {"schema": io.SCHEMA, "bound": args.bound, "rows": rows})


if __name__ == "__main__":
    main()
