"""Command-line entry point: verify, simulate, probe, flow, reduce.

Exit codes: 0 all requested conditions hold, 1 some condition fails,
2 some condition is undecided, 3 invalid scene, 4 non-finite values during
a simulation, 5 no admissible (p, q) in a reduction.
"""
from __future__ import annotations

import argparse
import csv
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import io
from .geodesic_control import Condition, Result, check_conditions
from .infinity_flow import SpherePoint, flow_closed_form, rotate_to_canonical, to_angles, write_trajectory_csv
from .lattice_reduction import DegenerateAlpha, reduce_geodesic, verify_periodicity
from .scene_geometry import SceneError, load_scene, preset_scene, validate_scene

EXIT_HOLDS, EXIT_FAILS, EXIT_UNKNOWN, EXIT_SCENE, EXIT_NAN, EXIT_ALPHA = 0, 1, 2, 3, 4, 5


def _floats(text: str) -> list[float]:
    return [float(Fraction(x.strip())) for x in text.split(",") if x.strip()]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _res(text: str):
    vals = _ints(text)
    return vals[0] if len(vals) == 1 else tuple(vals)


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _scene(args):
    """(torus, damping, source) or raises SceneError."""
    if args.scene and args.preset:
        raise SceneError("give either --scene or --preset, not both")
    if args.scene:
        torus, damping = load_scene(args.scene)
        source = str(args.scene)
    elif args.preset:
        torus, damping = preset_scene(args.preset)
        source = args.preset
    else:
        raise SceneError("a scene is required (--scene FILE or --preset NAME)")
    report = validate_scene(damping, torus)
    if not report.ok:
        err = SceneError("; ".join(f"{v['kind']}: {v['detail']}" for v in report.violations))
        err.violations = report.violations
        raise err
    return torus, damping, source


def _scene_error(err, out: Path | None) -> int:
    doc = {"schema": io.SCHEMA, "error": "invalid_scene", "detail": str(err),
           "violations": getattr(err, "violations", [])}
    sys.stdout.write(io.dumps(doc))
    if out is not None:
        io.write_json(out / "scene_error.json", doc)
    return EXIT_SCENE


# ---------------------------------------------------------------------------

def cmd_verify(args) -> int:
    out = _outdir(args)
    try:
        torus, damping, source = _scene(args)
    except (SceneError, OSError, ValueError) as err:
        return _scene_error(err, out)
    conds = [Condition.parse(c) for c in args.conditions.split(",") if c.strip()]
    verdicts = check_conditions(damping, torus, conds, bound=args.bound, horizon=args.horizon)
    doc = {"schema": io.SCHEMA, "scene": source, "bound": args.bound,
           "verdicts": [v.to_json() for v in verdicts.values()]}
    io.write_json(out / "verdicts.json", doc)
    sys.stdout.write(io.dumps(doc))
    results = {v.result for v in verdicts.values()}
    if Result.FAILS in results:
        return EXIT_FAILS
    if Result.UNKNOWN in results:
        return EXIT_UNKNOWN
    return EXIT_HOLDS


def _initial_data(args, torus, res, rng):
    from .spectral_lab import gaussian_beam, profile_quasimode, random_band_limited
    from .spectral_lab.quasimodes import bump
    from .spectral_lab.wave import plane_mode
    kind = args.data
    if kind == "random":
        return random_band_limited(torus, res, args.kmax, rng)
    if kind == "modes":
        k = _ints(args.modes) if args.modes else [1] + [0] * (torus.dim - 1)
        return plane_mode(torus, res, k)
    center = (0.0,) * (torus.dim - 1)
    h = args.h_values[0] if args.h_values else 1 / 16
    if kind == "beam":
        q = gaussian_beam(torus, args.axis, center, h, res)
    else:
        q = profile_quasimode(torus, args.axis, bump(args.radius), h, res)
    return q.u.with_values(q.u.values.real)


def cmd_simulate(args) -> int:
    from .spectral_lab import SimulationNaN, fit_decay_rate, rasterize_damping, run_simulation, save_field
    from .spectral_lab.wave import WaveState, oracle_rate
    out = _outdir(args)
    try:
        torus, damping, source = _scene(args)
    except (SceneError, OSError, ValueError) as err:
        return _scene_error(err, out)
    rng = np.random.default_rng(args.seed)
    res = _res(args.res)
    u0 = _initial_data(args, torus, res, rng)
    v0 = u0.with_values(np.zeros(u0.resolution))
    a = rasterize_damping(torus, damping, u0.resolution)
    state = WaveState(u0, v0, a, args.m)
    stride = max(1, int(round(args.sample_dt / args.dt)))
    try:
        result = run_simulation(state, args.T, args.dt, sample_stride=stride)
    except SimulationNaN as err:
        if err.last_good is not None:
            save_field(out / "last_good_u.bin", err.last_good.u)
            save_field(out / "last_good_v.bin", err.last_good.v)
        doc = {"schema": io.SCHEMA, "error": "non_finite", "detail": str(err),
               "diagnostics": err.diagnostics}
        io.write_json(out / "simulation_error.json", doc)
        sys.stdout.write(io.dumps(doc))
        return EXIT_NAN
    trace = result.trace
    trace.to_csv(out / "energy.csv")
    lo = args.window_start if args.window_start is not None else args.T / 2
    fit = fit_decay_rate(trace, window=(lo, args.T))
    doc = {"schema": io.SCHEMA, "scene": source, "resolution": list(u0.resolution), "dt": args.dt,
           "T": args.T, "m": args.m, "seed": args.seed, "data": args.data,
           "damped_fraction": float(a.values.mean()),
           "E0": float(trace.energy[0]), "E_T": float(trace.energy[-1]),
           "max_relative_residual": trace.max_relative_residual(),
           "max_relative_increase": trace.max_increase(),
           "fit": {"window": [lo, args.T], "rate": fit.rate, "prefactor": fit.prefactor, "r2": fit.r2}}
    if np.all(a.values == 1.0):
        doc["oracle_rate"] = oracle_rate(u0, v0, args.m)
    io.write_json(out / "fit.json", doc)
    if args.svg:
        io.write_line_svg(out / "energy.svg", trace.times, np.log(np.maximum(trace.energy, 1e-300)),
                          title="log E(t)", xlabel="t", ylabel="log E")
    sys.stdout.write(io.dumps(doc))
    return 0


def cmd_probe(args) -> int:
    from .spectral_lab import (check_nonconcentration, check_slab_estimate, gaussian_beam,
                               profile_quasimode, rasterize_damping)
    from .spectral_lab.quasimodes import bump, plane_wave, quasimode_report
    out = _outdir(args)
    try:
        torus, damping, source = _scene(args)
    except (SceneError, OSError, ValueError) as err:
        return _scene_error(err, out)
    res = _res(args.res)
    a = rasterize_damping(torus, damping, res)
    center = (0.0,) * (torus.dim - 1)
    slab_axis = next(j for j in range(torus.dim) if j != args.axis)
    rows = []
    for h in args.h_values or [1 / 32, 1 / 64, 1 / 128, 1 / 256]:
        try:
            if args.family == "beam":
                q = gaussian_beam(torus, args.axis, center, h, res)
                u, f, hh = q.u, q.f, q.h
            elif args.family == "profile":
                q = profile_quasimode(torus, args.axis, bump(args.radius), h, res)
                u, f, hh = q.u, q.f, q.h
            else:
                q = plane_wave(torus, args.axis, h, res)
                u, f, hh = q.u, q.f, q.h
        except ValueError as err:
            print(f"warning: skipping h = {h:.6g}: {err}", file=sys.stderr)
            continue
        rep = quasimode_report(u, f, hh, a)
        nc = check_nonconcentration(u, f, hh, args.axis if args.family == "plane" else slab_axis)
        try:
            slab = check_slab_estimate(u, f, hh, args.beta, axis=slab_axis).ratio
        except ValueError as err:
            print(f"warning: slab estimate skipped at h = {hh:.6g}: {err}", file=sys.stderr)
            slab = math.nan
        row = rep.to_json()
        row.update({"h_requested": h, "nonconcentration_constant": nc.constant,
                    "nonconcentration_vacuous": nc.vacuous, "slab_ratio": slab})
        rows.append(row)
    for prev, cur in zip(rows, rows[1:]):
        cur["ratio_growth"] = cur["ratio"] / prev["ratio"] if prev["ratio"] else math.nan
    doc = {"schema": io.SCHEMA, "scene": source, "family": args.family, "axis": args.axis,
           "resolution": list(a.resolution), "rows": rows}
    io.write_json(out / "probe.json", doc)
    keys = ["h", "h_requested", "norm_u", "norm_au", "norm_f", "epsilon", "ratio",
            "nonconcentration_constant", "slab_ratio"]
    with (out / "probe.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(keys)
        for row in rows:
            w.writerow([f"{float(row[k]):.17g}" for k in keys])
    sys.stdout.write(io.dumps(doc))
    return 0


def cmd_flow(args) -> int:
    out = _outdir(args)
    if args.z or args.zeta:
        p0 = SpherePoint.normalized(_floats(args.z), _floats(args.zeta))
    else:
        p0 = SpherePoint.random(args.dim, np.random.default_rng(args.seed))
    s_values = np.linspace(0.0, args.s_max, args.samples)
    path = write_trajectory_csv(out / "trajectory.csv", p0, s_values, dt=args.dt)
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    doc = {"schema": io.SCHEMA, "z0": p0.z, "zeta0": p0.zeta, "s_max": args.s_max, "dt": args.dt,
           "max_divergence": float(data[:, -1].max()),
           "fixed_point": bool(np.linalg.norm(p0.zeta) == 0),
           "final_closed_form": flow_closed_form(p0, args.s_max).vector()}
    if not doc["fixed_point"] and len(p0.z) >= 2:
        _, _, canon = rotate_to_canonical(p0)
        doc["angles0"] = list(to_angles(canon))
    io.write_json(out / "flow.json", doc)
    if args.svg:
        io.write_line_svg(out / "theta1.svg", data[:, 0], data[:, -2], title="theta_1(s)",
                          xlabel="s", ylabel="theta_1")
    sys.stdout.write(io.dumps(doc))
    return 0


def cmd_reduce(args) -> int:
    out = _outdir(args)
    periods = [Fraction(x.strip()) for x in args.periods.split(",")]
    n = _ints(args.n)
    pq = tuple(_ints(args.pq)) if args.pq else None
    try:
        result = reduce_geodesic(periods, n, pq=pq)
    except DegenerateAlpha as err:
        doc = {"schema": io.SCHEMA, "error": "degenerate_alpha", "detail": str(err)}
        sys.stdout.write(io.dumps(doc))
        io.write_json(out / "reduction_error.json", doc)
        return EXIT_ALPHA
    except ValueError as err:
        doc = {"schema": io.SCHEMA, "error": "invalid_direction", "detail": str(err)}
        sys.stdout.write(io.dumps(doc))
        return EXIT_SCENE
    doc = {"schema": io.SCHEMA, **result.to_json(),
           "periodicity": verify_periodicity(result, trials=args.trials, seed=args.seed)}
    io.write_json(out / "reduction.json", doc)
    sys.stdout.write(io.dumps(doc))
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="torusdamp", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, scene=True):
        if scene:
            sp.add_argument("--scene", help="scene JSON file")
            sp.add_argument("--preset", help="preset name, optionally NAME:params")
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--seed", type=int, default=0)

    v = sub.add_parser("verify", help="check control conditions on a scene")
    common(v)
    v.add_argument("--conditions", default="wgcc,sgcc,cond13,finexc")
    v.add_argument("--bound", type=int, default=3)
    v.add_argument("--horizon", type=float)
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("simulate", help="damped wave simulation and decay fit")
    common(s)
    s.add_argument("--res", default="64")
    s.add_argument("--dt", type=float, default=1e-3)
    s.add_argument("--T", type=float, default=10.0)
    s.add_argument("--m", type=float, default=0.0)
    s.add_argument("--data", choices=["random", "modes", "beam", "profile"], default="random")
    s.add_argument("--modes", help="integer frequency vector for --data modes")
    s.add_argument("--kmax", type=int, default=4)
    s.add_argument("--h", dest="h_values", type=_floats)
    s.add_argument("--axis", type=int, default=0)
    s.add_argument("--radius", type=float, default=0.4)
    s.add_argument("--sample-dt", type=float, default=0.01)
    s.add_argument("--window-start", type=float)
    s.add_argument("--svg", action="store_true")
    s.set_defaults(func=cmd_simulate)

    q = sub.add_parser("probe", help="quasimode observability / estimate sweep over h")
    common(q)
    q.add_argument("--family", choices=["profile", "beam", "plane"], default="profile")
    q.add_argument("--h", dest="h_values", type=_floats)
    q.add_argument("--res", default="512,64")
    q.add_argument("--axis", type=int, default=0)
    q.add_argument("--radius", type=float, default=0.4)
    q.add_argument("--beta", type=float, default=1.0)
    q.set_defaults(func=cmd_probe)

    f = sub.add_parser("flow", help="flow zeta . d_z on the sphere at infinity")
    common(f, scene=False)
    f.add_argument("--z", default="")
    f.add_argument("--zeta", default="")
    f.add_argument("--dim", type=int, default=3, help="torus dimension d for random points")
    f.add_argument("--s-max", type=float, default=100.0)
    f.add_argument("--samples", type=int, default=101)
    f.add_argument("--dt", type=float, default=1e-3)
    f.add_argument("--svg", action="store_true")
    f.set_defaults(func=cmd_flow)

    r = sub.add_parser("reduce", help="straighten a closed geodesic by orthonormal changes of variables")
    common(r, scene=False)
    r.add_argument("--periods", required=True)
    r.add_argument("--n", required=True)
    r.add_argument("--pq", help="p,q used at every stage")
    r.add_argument("--trials", type=int, default=100)
    r.set_defaults(func=cmd_reduce)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
