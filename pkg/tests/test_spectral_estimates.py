import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from torusdamp.scene_geometry import preset_scene
from torusdamp.spectral_lab import (GridField, bump, check_1d_resolvent, check_nonconcentration,
                                    check_slab_estimate, epsilon_of_h, gaussian_beam, helmholtz_residual,
                                    helmholtz_solve, plane_wave, profile_quasimode, rasterize_damping,
                                    slice_mass, snap_h)
from torusdamp.spectral_lab.wave import constant_damping

BAND = dict(band=lambda y: np.abs(y) < 0.5)


# -- epsilon and slices ----------------------------------------------------------

def test_epsilon_examples():
    assert epsilon_of_h(1 / 64, 0.0) == pytest.approx(64 ** (-1 / 6))
    assert epsilon_of_h(0.01, 0.01) == pytest.approx(1.0)
    assert epsilon_of_h(1 / 64, 1 / 4096) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        epsilon_of_h(1 / 64, -1.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(1e-4, 0.5), st.floats(0, 10))
def test_epsilon_lower_bound(h, r):
    assert epsilon_of_h(h, r) >= h ** (1 / 6)


def _plane(n=256, k=5):
    return GridField.from_function((2, 2), (n, 8), lambda x, y: np.exp(1j * math.pi * k * x) / 2 + 0 * y)


@pytest.mark.parametrize("w", [0.1, 0.25, 0.3125, 0.7])
def test_slice_mass_plane_wave(w):
    u = _plane()
    assert u.norm() == pytest.approx(1.0)
    assert slice_mass(u, 0, w) == pytest.approx(math.sqrt(2 * w / 2), rel=1e-12)


def test_slice_mass_half_torus_and_outside():
    u = _plane()
    # half-width A/4 covers half the circle
    assert slice_mass(u, 0, 0.5) == pytest.approx(2 ** -0.5, rel=1e-12)
    # whole circle at half-width A/2
    assert slice_mass(u, 0, 1.0) == pytest.approx(1.0, rel=1e-12)
    far = GridField.from_function((2, 2), (64, 8), lambda x, y: ((x > 0.9) & (x < 1.1)) * 1.0 + 0 * y)
    assert slice_mass(far, 0, 0.5) == 0.0
    with pytest.raises(ValueError):
        slice_mass(u, 0, 1.5)


def test_nonconcentration_plane_waves():
    consts = []
    for h in (1 / 64, 1 / 128, 1 / 256):
        q = plane_wave((2, 2), 0, h, (512, 8))
        nc = check_nonconcentration(q.u, q.f, q.h, axis=0)
        assert nc.passed and not nc.vacuous
        consts.append(nc.constant)
    np.testing.assert_allclose(consts, 1.0, rtol=1e-6)    # (2 / A)^{1/2} with A = 2


def test_nonconcentration_beam_slab_holds_mass():
    q = gaussian_beam((2, 2), 0, (1.0,), 1 / 32, (256, 64))
    nc = check_nonconcentration(q.u, q.f, q.h, axis=1, center=1.0)
    assert not nc.vacuous and nc.passed
    assert nc.mass >= 0.9


def test_nonconcentration_vacuous_when_slab_covers_torus():
    # exact quasimode (f = 0): eps = h^{1/6}, width h^{1/6} > A/2 on a unit torus
    q = plane_wave((1, 1), 0, 1 / 32, (256, 8))
    nc = check_nonconcentration(q.u, 0.0, q.h, axis=1)
    assert nc.vacuous and nc.passed


# -- quasimodes -----------------------------------------------------------------

def test_snap_h():
    h, k = snap_h(2.0, 1 / 32)
    assert k == 10 and h == pytest.approx(1 / (10 * math.pi))


def test_gaussian_beam_norm_and_residual():
    ratios = []
    for h in (1 / 16, 1 / 32, 1 / 64):
        q = gaussian_beam((2, 2), 0, (1.0,), h, (256, 128))
        assert q.u.norm() == pytest.approx(1.0, abs=1e-10)
        ratios.append(q.f.norm() / q.h)
    assert max(ratios) / min(ratios) <= 1.2
    hs = [gaussian_beam((2, 2), 0, (1.0,), h, (256, 128)).h for h in (1 / 16, 1 / 64)]
    fs = [gaussian_beam((2, 2), 0, (1.0,), h, (256, 128)).f.norm() for h in (1 / 16, 1 / 64)]
    slope = math.log(fs[0] / fs[1]) / math.log(hs[0] / hs[1])
    assert slope == pytest.approx(1.0, abs=0.1)


def test_beam_in_damped_region():
    q = gaussian_beam((2, 2), 0, (1.0,), 1 / 64, (256, 128))
    rep = q.report(constant_damping((2, 2), (256, 128), 1.0))
    assert rep.norm_au == pytest.approx(1.0, abs=1e-10)


def test_beam_unresolvable():
    with pytest.raises(ValueError):
        gaussian_beam((2, 2), 0, (1.0,), 1 / 64, (64, 64))


def test_profile_quasimode_residual_law():
    phi = bump(0.4)
    vals = []
    for h in (1 / 32, 1 / 64, 1 / 128):
        q = profile_quasimode((2, 2), 0, phi, h, (512, 64), **BAND)
        # the residual is h^2 e^{i x/h} Lap_perp(phi): divide out h^2
        vals.append((q.h, q.f.norm() / q.h ** 2))
    lap = vals[0][1]
    for _, v in vals:
        assert v == pytest.approx(lap, rel=0.01)
    slope = math.log(vals[0][1] * vals[0][0] ** 2 / (vals[-1][1] * vals[-1][0] ** 2)) / math.log(
        vals[0][0] / vals[-1][0])
    assert slope == pytest.approx(2.0, abs=0.05)


def test_profile_quasimode_observability_ratio():
    torus, damping = preset_scene("band2d")
    a = rasterize_damping(torus, damping, (512, 64))
    reps = [profile_quasimode((2, 2), 0, bump(0.4), h, (512, 64), **BAND).report(a)
            for h in (1 / 32, 1 / 64)]
    assert all(r.norm_au <= 1e-10 for r in reps)
    assert reps[1].ratio / reps[0].ratio == pytest.approx(2.0, rel=0.2)


def test_profile_band_violation():
    with pytest.raises(ValueError, match="band"):
        profile_quasimode((2, 2), 0, bump(0.8), 1 / 32, (512, 64), **BAND)


def test_helmholtz_single_mode():
    h = 0.05
    f = GridField.from_function((2, 2), 32, lambda x, y: np.exp(1j * math.pi * (3 * x + y)))
    u, rep = helmholtz_solve(f, h)
    sym = 1 - h * h * math.pi ** 2 * 10
    np.testing.assert_allclose(u.values, f.values / sym, atol=1e-12)
    assert rep.excluded_with_data == 0
    np.testing.assert_allclose(helmholtz_residual(u, h).values, f.values, atol=1e-10)


def test_helmholtz_on_shell_is_excluded():
    h = 1 / (2 * math.pi)           # |xi| = 2 pi lies on the shell
    f = GridField.from_function((2, 2), 32, lambda x, y: np.exp(2j * math.pi * x) + 0 * y)
    u, rep = helmholtz_solve(f, h)
    assert not np.any(np.abs(u.values) > 1e-14)
    assert rep.excluded_with_data == 1 and [2, 0] in rep.excluded_modes


def test_helmholtz_retained_modes(rng):
    h = 0.1
    f = GridField((2, 2), rng.normal(size=(32, 32)) + 1j * rng.normal(size=(32, 32)))
    u, rep = helmholtz_solve(f, h)
    back = helmholtz_residual(u, h)
    keep = np.abs(1 - h * h * np.broadcast_to(f.xi_squared(), f.resolution)) >= rep.delta
    np.testing.assert_allclose(back.coefficients[keep], f.coefficients[keep], rtol=1e-10, atol=1e-9)


# -- slab estimate ---------------------------------------------------------------------

def test_slab_plane_wave():
    for h in (1 / 32, 1 / 64, 1 / 128):
        q = plane_wave((2, 2), 1, h, (64, 512))
        r = check_slab_estimate(q.u, q.f, q.h, 1.0, axis=0)
        assert r.ratio == pytest.approx(2 ** -0.5, rel=1e-6)


def test_slab_vanishing_field():
    u = GridField.from_function((2, 2), (64, 8), lambda x, y: ((x > 0.8) & (x < 1.2)) * 1.0 + 0 * y)
    r = check_slab_estimate(u, u.with_values(np.zeros(u.resolution)), 1 / 32, 1.0, axis=0)
    assert r.ratio == 0.0


def test_slab_unresolved():
    q = plane_wave((2, 2), 1, 1 / 256, (8, 512))
    with pytest.raises(ValueError):
        check_slab_estimate(q.u, q.f, q.h, 1.0, axis=0)


# -- one-dimensional resolvent -------------------------------------------------------------

def test_resolvent_polynomial_example():
    z = np.linspace(-2, 2, 4001)
    c = check_1d_resolvent(z, z ** 2, np.full_like(z, 2.0), 0.0)
    expected = 1 / (math.sqrt(2 * 31 / 5) + 8)
    assert c == pytest.approx(expected, rel=1e-6)


def test_resolvent_oscillatory_example():
    z = np.linspace(-2, 2, 40001)
    c = check_1d_resolvent(z, np.cos(10 * z), np.zeros_like(z), 100.0)
    l2sq = 2 * (0.5 + (math.sin(40) - math.sin(20)) / 40)
    assert c == pytest.approx(1 / math.sqrt(l2sq), rel=1e-6)
    assert c <= 1.5


def test_resolvent_zero_and_bad_residual():
    z = np.linspace(-2, 2, 401)
    assert check_1d_resolvent(z, 0 * z, 0 * z, 3.0) == 0.0
    with pytest.raises(ValueError):
        check_1d_resolvent(z, np.sin(z), 0 * z, 0.0)
