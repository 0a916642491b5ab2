"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (lines are printed even without -s).
"""
import math
import time
import warnings

import numpy as np
import pytest

from torusdamp.geodesic_control import Complement, Condition, Result, analyze_scene, check_conditions
from torusdamp.infinity_flow import SpherePoint, compare_integrators, flow_closed_form
from torusdamp.lattice_reduction import reduce_geodesic, verify_periodicity
from torusdamp.scene_geometry import preset_scene
from torusdamp.spectral_lab import (GridField, bump, check_1d_resolvent, check_nonconcentration,
                                    check_slab_estimate, fit_decay_rate, microlocal_mass, oracle_energy,
                                    oracle_rate, plane_wave, profile_quasimode, psi_partition,
                                    random_band_limited, rasterize_damping, run_simulation,
                                    second_microlocal_mass)
from torusdamp.spectral_lab.wave import WaveState, constant_damping

BAND = lambda y: np.abs(y) < 0.5          # noqa: E731  transverse band of the band2d scene
H_SWEEP = (1 / 32, 1 / 64, 1 / 128, 1 / 256)


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail, elapsed, budget):
        ok = bool(ok) and elapsed <= budget
        with capsys.disabled():
            print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'}  {detail}  [{elapsed:.1f} s / {budget} s]")
        return ok
    return emit


def _rest(u):
    return u.with_values(np.zeros(u.resolution))


# -- 1 -----------------------------------------------------------------------------

def test_criterion_1_geometry_verdicts(report):
    t0 = time.perf_counter()
    checks = {}
    for variant in "abc":
        torus, damping = preset_scene(f"checkerboard2d:{variant}")
        v = check_conditions(damping, torus, ["wgcc", "sgcc"], bound=3)
        checks[f"checkerboard {variant}"] = (v[Condition.WGCC].result is Result.HOLDS
                                             and v[Condition.SGCC].result is Result.FAILS
                                             and bool(v[Condition.SGCC].witnesses))
    t_cb = time.perf_counter() - t0

    t1 = time.perf_counter()
    torus, damping = preset_scene("fig4_1:1/10,1/10,1/10,1/10")
    an = analyze_scene(damping, torus, bound=3)
    v = check_conditions(damping, torus, [Condition.COND13], analysis=an)
    razing = {(tuple(str(x) for x in w.geodesic.base), w.geodesic.describe().get("n")
               and tuple(w.geodesic.describe()["n"])) for w, _ in an.razing}
    checks["fig4_1 Cond13 Holds"] = v[Condition.COND13].result is Result.HOLDS
    checks["fig4_1 sole razing {x=0}"] = razing == {(("0", "0", "0"), (0, 0, 1))}
    t_41 = time.perf_counter() - t1

    t2 = time.perf_counter()
    torus, damping = preset_scene("fig5_1")
    an = analyze_scene(damping, torus, bound=3)
    v = check_conditions(damping, torus, [Condition.COND13, Condition.FINITE_EXCEPTIONS], analysis=an)
    wit = v[Condition.COND13].witnesses
    reps = [rep for w, rep in an.razing if w.geodesic.describe() == {"base": ["0", "0", "0"], "n": [0, 0, 1]}]
    checks["fig5_1 Cond13 Fails, witness {x=0}"] = (
        v[Condition.COND13].result is Result.FAILS
        and any(w.geodesic.describe() == {"base": ["0", "0", "0"], "n": [0, 0, 1]} for w in wit))
    checks["fig5_1 four exceptional directions"] = (
        len(reps) == 1 and reps[0].complement is Complement.FINITE_SET
        and sorted(reps[0].exceptional) == [(-1, 0, 0), (0, -1, 0), (0, 1, 0), (1, 0, 0)])
    checks["fig5_1 FiniteExceptions Holds"] = v[Condition.FINITE_EXCEPTIONS].result is Result.HOLDS
    t_51 = time.perf_counter() - t2

    failed = [k for k, ok in checks.items() if not ok]
    worst = max(t_cb, t_41, t_51)
    ok = report(1, not failed, f"{len(checks) - len(failed)}/{len(checks)} verdict checks"
                + (f"; failed: {failed}" if failed else "")
                + f"; scene times {t_cb:.1f}/{t_41:.1f}/{t_51:.1f} s", worst, 60)
    assert ok


# -- 2 -----------------------------------------------------------------------------

def test_criterion_2_flow_equivalence(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240)
    points = [SpherePoint.random(d, rng) for d in [3, 4] * 25]
    err = compare_integrators(points, s_max=100.0, dt=1e-3)
    # fixed points: the closed form is stationary exactly when zeta = 0
    probes = points[:10] + [SpherePoint.normalized(rng.normal(size=d - 1), np.zeros(d - 1))
                            for d in [3, 4] * 5]
    stationary = [all(np.array_equal(flow_closed_form(p, s).vector(), p.vector()) for s in (0.5, 10.0, 1e4))
                  for p in probes]
    is_zero = [not np.any(p.zeta) for p in probes]
    elapsed = time.perf_counter() - t0
    ok = report(2, err.max() <= 1e-6 and stationary == is_zero,
                f"max |ODE - closed form| = {err.max():.2e} (tol 1e-6); fixed set == {{zeta=0}}: "
                f"{stationary == is_zero}", elapsed, 10)
    assert ok


# -- 3 -----------------------------------------------------------------------------

def test_criterion_3_lattice_reduction(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(31)
    dirs = []
    while len(dirs) < 20:
        n = tuple(int(x) for x in rng.integers(-3, 4, size=3))
        if any(n) and math.gcd(*n) == 1 and n not in dirs:
            dirs.append(n)
    worst_disc = worst_align = 0.0
    alpha_ok = True
    for periods in ((1, 1, 1), (2, 2, 2)):
        for n in dirs:
            res = reduce_geodesic(periods, n)
            alpha_ok &= all(s.alpha2S2 != 0 for s in res.steps)
            worst_align = max(worst_align, res.alignment_error())
            worst_disc = max(worst_disc, verify_periodicity(res, trials=100, seed=1)["max_discrepancy"])
    elapsed = time.perf_counter() - t0
    ok = report(3, worst_disc <= 1e-10 and worst_align <= 1e-12 and alpha_ok,
                f"periodicity {worst_disc:.2e} (tol 1e-10), alignment {worst_align:.2e} (tol 1e-12), "
                f"alpha != 0 exactly: {alpha_ok}", elapsed, 5)
    assert ok


# -- 4 -----------------------------------------------------------------------------

def test_criterion_4_energy_identity(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    drifts = []
    for periods, res, kmax in (((2, 2), (256, 256), 16), ((2, 2, 2), (64, 64, 64), 8)):
        u0 = random_band_limited(periods, res, kmax, rng)
        state = WaveState(u0, _rest(u0), constant_damping(periods, res, 0.0))
        trace = run_simulation(state, 10.0, 1e-3, sample_stride=1000).trace
        drifts.append(max(trace.relative_drift(), float(np.max(np.abs(trace.energy / trace.energy[0] - 1)))))

    torus, damping = preset_scene("band2d")
    u0 = random_band_limited(torus, 128, 8, np.random.default_rng(7))
    a = rasterize_damping(torus, damping, 128)
    residuals = []
    for dt in (5e-3, 2.5e-3, 1.25e-3):
        trace = run_simulation(WaveState(u0, _rest(u0), a), 2.0, dt).trace
        residuals.append(trace.max_relative_residual())
    quarters = [residuals[i] / residuals[i + 1] for i in range(2)]
    elapsed = time.perf_counter() - t0
    ok = report(4, max(drifts) <= 1e-8 and max(residuals) <= 1e-5 and all(3.0 <= q <= 5.0 for q in quarters),
                f"a=0 drift 2-D {drifts[0]:.1e}, 3-D {drifts[1]:.1e} (tol 1e-8); identity residual "
                f"{', '.join(f'{r:.2e}' for r in residuals)} (tol 1e-5), halving ratios "
                f"{', '.join(f'{q:.2f}' for q in quarters)} (expect 4)", elapsed, 300)
    assert ok


# -- 5 -----------------------------------------------------------------------------

def test_criterion_5_constant_damping_oracle(report):
    t0 = time.perf_counter()
    periods, res = (2, 2), (32, 32)
    u0 = random_band_limited(periods, res, 4, np.random.default_rng(5))
    v0 = _rest(u0)
    trace = run_simulation(WaveState(u0, v0, constant_damping(periods, res, 1.0)), 20.0, 1e-3,
                           sample_stride=10).trace
    window = (10.0, 20.0)
    fit = fit_decay_rate(trace, window=window)
    oracle_fit = fit_decay_rate(trace.times, oracle_energy(u0, v0, trace.times), window=window)
    rate = oracle_rate(u0, v0)
    rel = abs(fit.rate - oracle_fit.rate) / oracle_fit.rate
    elapsed = time.perf_counter() - t0
    ok = report(5, rel <= 0.05, f"fitted rate {fit.rate:.5f} vs expm oracle {oracle_fit.rate:.5f} "
                f"(asymptotic {rate:.5f}); rel. diff {rel:.1e} (tol 5%)", elapsed, 120)
    assert ok


# -- 6 -----------------------------------------------------------------------------

def test_criterion_6_nonconcentration_sharpness(report):
    t0 = time.perf_counter()
    periods = (2, 2)
    expected = math.sqrt(2 / periods[0])
    consts = []
    for h in (1 / 64, 1 / 128, 1 / 256):
        q = plane_wave(periods, 0, h, (512, 8))
        nc = check_nonconcentration(q.u, q.f, q.h, axis=0)
        consts.append(nc.constant)
    worst = max(abs(c / expected - 1) for c in consts)
    elapsed = time.perf_counter() - t0
    ok = report(6, worst <= 0.10, f"constants {', '.join(f'{c:.6f}' for c in consts)} vs "
                f"(2/A)^(1/2) = {expected:.6f}; worst rel. dev {worst:.1e} (tol 10%)", elapsed, 30)
    assert ok


# -- 7 -----------------------------------------------------------------------------

def test_criterion_7_observability_witness(report):
    t0 = time.perf_counter()
    torus, damping = preset_scene("band2d")
    a = rasterize_damping(torus, damping, (512, 64))
    band_ratios = [profile_quasimode(torus, 0, bump(0.4), h, (512, 64), band=BAND).report(a).ratio
                   for h in H_SWEEP]
    band_growth = [r1 / r0 for r0, r1 in zip(band_ratios, band_ratios[1:])]
    band_ok = all(abs(g - 2) <= 0.4 for g in band_growth)

    torus, damping = preset_scene("fig4_1:1/10,1/10,1/10,1/10")
    a = rasterize_damping(torus, damping, (64, 64, 256))
    reps = [profile_quasimode(torus, 2, bump(0.4), h, (64, 64, 256)).report(a) for h in H_SWEEP]
    ratios = [r.ratio for r in reps]
    ceiling = min(1 / r.norm_au for r in reps)
    growth = [r1 / r0 for r0, r1 in zip(ratios, ratios[1:])]
    contrast_ok = (all(r <= ceiling for r in ratios)
                   and all(g1 < g0 for g0, g1 in zip(growth, growth[1:])) and growth[-1] < 1.6)
    elapsed = time.perf_counter() - t0
    ok = report(7, band_ok and contrast_ok,
                f"band2d growth {', '.join(f'{g:.3f}' for g in band_growth)} (2 +/- 20%); fig4_1 ratios "
                f"{', '.join(f'{r:.3f}' for r in ratios)} <= {ceiling:.3f}, growth "
                f"{', '.join(f'{g:.3f}' for g in growth)} decreasing", elapsed, 600)
    assert ok


# -- 8 -----------------------------------------------------------------------------

def test_criterion_8_quantization_consistency(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    u = GridField((2, 2), rng.normal(size=(64, 64)) + 1j * rng.normal(size=(64, 64)))
    h, eps = 1 / 64, 0.4
    exact = complex(u.cell_volume * np.vdot(u.values, u.values))
    m1 = microlocal_mass(u, h)
    qxi = lambda X, Y: np.exp(-X ** 2 - 0.5 * Y ** 2)        # noqa: E731
    qx = lambda x, y: 1 + 0.5 * np.cos(np.pi * x)            # noqa: E731
    one = lambda *args: np.ones_like(args[0])                 # noqa: E731
    ref = microlocal_mass(u, h, q_x=qx, q_xi=qxi)
    second = second_microlocal_mass(u, h, eps, 0, q_x=qx, q_xi=qxi, w_z=one, w_zeta=one)
    dev2 = abs(second - ref) / abs(ref)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        parts = psi_partition(u, h, eps, axis=0, psi_axis=1, psi_center=1.0, q_x=qx, q_xi=qxi)
    dev3 = abs(parts["plus"] + parts["minus"] + parts["rest"] - ref) / abs(ref)
    elapsed = time.perf_counter() - t0
    ok = report(8, m1 == exact and dev2 <= 1e-12 and dev3 <= 1e-10,
                f"q=1 mass exact: {m1 == exact}; windows=1 rel. dev {dev2:.1e} (tol 1e-12); "
                f"psi partition rel. dev {dev3:.1e} (tol 1e-10)", elapsed, 10)
    assert ok


# -- 9 -----------------------------------------------------------------------------

def _resolvent_family(rng, count=100):
    """Homogeneous and polynomially forced solutions of v'' + tau v = k on [-2, 2]."""
    z = np.linspace(-2, 2, 40001)
    for i in range(count):
        tau = float(rng.choice([-1.0, 1.0]) * 10 ** rng.uniform(-2, 4))
        w = math.sqrt(abs(tau))
        if i % 2 == 0:
            if tau > 0:
                v = np.cos(w * z + rng.uniform(0, 2 * math.pi))
            else:
                c = rng.normal(size=2)
                v = c[0] * np.exp(w * (z - 2)) + c[1] * np.exp(-w * (z + 2))
            k = np.zeros_like(z)
        else:
            p = np.polynomial.Polynomial(rng.normal(size=4))
            v = p(z)
            k = p.deriv(2)(z) + tau * v
        yield z, v, k, tau


def test_criterion_9_one_dimensional_estimates(report):
    t0 = time.perf_counter()
    consts = [check_1d_resolvent(z, v, k, tau) for z, v, k, tau in _resolvent_family(np.random.default_rng(9))]
    torus, _ = preset_scene("band2d")
    ratios = []
    for h in H_SWEEP:
        q = profile_quasimode(torus, 0, bump(0.4), h, (512, 64), band=BAND)
        for beta in (1.0, 2.0, 4.0):
            if 2 * beta * math.sqrt(q.h) > torus.periods[1] / 2:
                continue
            ratios.append(check_slab_estimate(q.u, q.f, q.h, beta, axis=1, center=0.0).ratio)
    elapsed = time.perf_counter() - t0
    ok = report(9, max(consts) <= 5 and max(ratios) <= 10,
                f"resolvent constants max {max(consts):.3f} over {len(consts)} triples (bound 5); slab ratios "
                f"{min(ratios):.3f}..{max(ratios):.3f} over {len(ratios)} cases (bound 10)", elapsed, 60)
    assert ok
