"""Semiclassical quasimodes along axis-aligned closed geodesics.

A quasimode is u with small residual f = (h^2 Lap + 1) u.  Along axis j the
phase exp(i x_j / h) is periodic only when A_j / (2 pi h) is an integer, so
every constructor snaps h to the nearest such value and reports the snapped
h.  Residuals are evaluated spectrally.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .estimates import epsilon_of_h
from .grid import GridField, periodic_offset


def snap_h(period: float, h: float) -> tuple[float, int]:
    """Closest h' = A / (2 pi k), k >= 1 integer, and that k."""
    if not h > 0:
        raise ValueError("h must be positive")
    k = max(1, int(round(period / (2 * math.pi * h))))
    return period / (2 * math.pi * k), k


def helmholtz_residual(u: GridField, h: float) -> GridField:
    """(h^2 Lap + 1) u computed in Fourier space."""
    coeffs = (1.0 - h * h * u.xi_squared()) * u.coefficients
    return GridField.from_coefficients(u.periods, coeffs)


@dataclass
class Quasimode:
    u: GridField
    f: GridField
    h: float
    axis: int
    center: tuple          # transverse centre (coordinates on the other axes)

    def report(self, a: GridField | None = None) -> "QuasimodeReport":
        return quasimode_report(self.u, self.f, self.h, a)


def _check_axis_resolution(field_res, periods, axis, k):
    n = field_res[axis]
    if 2 * k >= n:
        raise ValueError(f"h unresolvable: frequency index {k} needs more than {n} points on axis {axis}")


def _transverse_offsets(base: GridField, axis: int, center) -> list:
    """Per transverse axis, offsets x - c folded to [-A/2, A/2), broadcastable."""
    mesh = base.mesh()
    others = [j for j in range(base.dim) if j != axis]
    if len(center) != len(others):
        raise ValueError(f"center needs {len(others)} transverse coordinates")
    return [periodic_offset(mesh[j], c, base.periods[j]) for j, c in zip(others, center)]


def _normalised(vals: np.ndarray, cell_volume: float) -> np.ndarray:
    nrm = math.sqrt(cell_volume * float(np.sum(np.abs(vals) ** 2)))
    if nrm == 0:
        raise ValueError("profile vanishes on the grid")
    return vals / nrm


def gaussian_beam(torus_or_periods, axis: int, center, h: float, resolution,
                  images: int = 2) -> Quasimode:
    """h^{-(d-1)/4} exp(i x_j/h) exp(-|X_perp - c|^2 / (2h)), periodised and normalised."""
    base = GridField.zeros(torus_or_periods, resolution)
    if h < 4 / base.resolution[axis]:
        raise ValueError(f"h = {h} unresolvable with {base.resolution[axis]} points along axis {axis}")
    h, k = snap_h(base.periods[axis], h)
    _check_axis_resolution(base.resolution, base.periods, axis, k)
    mesh = base.mesh()
    phase = np.exp(1j * mesh[axis] / h)
    others = [j for j in range(base.dim) if j != axis]
    envelope = np.ones(1)
    for j, c in zip(others, center):
        A = base.periods[j]
        x = mesh[j] - c
        g = sum(np.exp(-(x + m * A) ** 2 / (2 * h)) for m in range(-images, images + 1))
        envelope = envelope * g
    vals = h ** (-(base.dim - 1) / 4) * phase * envelope
    vals = _normalised(np.broadcast_to(vals, base.resolution), base.cell_volume)
    u = base.with_values(vals)
    return Quasimode(u, helmholtz_residual(u, h), h, axis, tuple(center))


def plane_wave(torus_or_periods, axis: int, h: float, resolution) -> Quasimode:
    """Normalised exp(i x_j / h) with h snapped: an exact discrete eigenfunction."""
    base = GridField.zeros(torus_or_periods, resolution)
    h, k = snap_h(base.periods[axis], h)
    _check_axis_resolution(base.resolution, base.periods, axis, k)
    vals = np.broadcast_to(np.exp(1j * base.mesh()[axis] / h), base.resolution)
    u = base.with_values(_normalised(vals, base.cell_volume))
    return Quasimode(u, helmholtz_residual(u, h), h, axis, (0.0,) * (base.dim - 1))


def bump(radius: float) -> Callable:
    """Smooth radial bump exp(1 - 1/(1 - (r/radius)^2)) supported in r < radius."""
    def phi(*offsets):
        r2 = sum(o * o for o in offsets) / radius ** 2
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            val = np.where(r2 < 1, np.exp(1 - 1 / (1 - np.minimum(r2, 1 - 1e-300))), 0.0)
        return val
    return phi


def profile_quasimode(torus_or_periods, axis: int, profile, h: float, resolution,
                      center=None, band: Callable | None = None, tol: float = 1e-12) -> Quasimode:
    """u = exp(i x_j / h) phi(X_perp - c), normalised.

    ``profile`` is a callable of the folded transverse offsets (or an array of
    samples on the transverse grid).  ``band`` is an optional predicate on the
    same offsets; a profile that is not negligible outside it is rejected.
    """
    base = GridField.zeros(torus_or_periods, resolution)
    h, k = snap_h(base.periods[axis], h)
    _check_axis_resolution(base.resolution, base.periods, axis, k)
    center = tuple(center) if center is not None else (0.0,) * (base.dim - 1)
    offsets = _transverse_offsets(base, axis, center)
    if callable(profile):
        phi = np.asarray(profile(*offsets))
    else:
        shape = [n if j != axis else 1 for j, n in enumerate(base.resolution)]
        phi = np.asarray(profile).reshape(shape)
    phi = np.broadcast_to(phi, [n if j != axis else 1 for j, n in enumerate(base.resolution)])
    if band is not None:
        inside = np.broadcast_to(band(*offsets), phi.shape)
        peak = float(np.max(np.abs(phi)))
        if np.any(np.abs(phi[~inside]) > tol * peak):
            raise ValueError("profile support exceeds the band")
    mesh = base.mesh()
    vals = np.exp(1j * mesh[axis] / h) * phi
    vals = _normalised(np.broadcast_to(vals, base.resolution), base.cell_volume)
    u = base.with_values(vals)
    return Quasimode(u, helmholtz_residual(u, h), h, axis, center)


@dataclass
class QuasimodeReport:
    h: float
    norm_u: float
    norm_au: float          # ||a^{1/2} u||
    norm_f: float
    epsilon: float
    ratio: float            # ||u|| / (||a^{1/2} u|| + ||f|| / h)

    def to_json(self) -> dict:
        return {"schema": "1", **asdict(self)}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), default=lambda x: float(f"{x:.17g}"))


def quasimode_report(u: GridField, f: GridField, h: float, a: GridField | None = None) -> QuasimodeReport:
    nu, nf = u.norm(), f.norm()
    if a is None:
        na = 0.0
    else:
        na = math.sqrt(u.cell_volume * float(np.sum(np.clip(a.values.real, 0, None) * np.abs(u.values) ** 2)))
    denom = na + nf / h
    ratio = nu / denom if denom > 0 else math.inf
    return QuasimodeReport(h, nu, na, nf, epsilon_of_h(h, nf), ratio)


@dataclass
class HelmholtzReport:
    delta: float
    retained: int
    excluded: int
    excluded_modes: list          # integer frequency vectors (capped list)
    excluded_with_data: int = 0   # excluded modes on which f is nonzero

    def to_json(self) -> dict:
        return asdict(self)


def helmholtz_solve(f: GridField, h: float, delta: float | None = None,
                    max_listed: int = 64) -> tuple[GridField, HelmholtzReport]:
    """Solve (h^2 Lap + 1) u = f away from the characteristic set.

    Modes with |1 - h^2 |xi|^2| < delta are zeroed and reported; the default
    guard is 10 h^2.
    """
    delta = 10 * h * h if delta is None else delta
    if not delta > 0:
        raise ValueError("delta must be positive")
    symbol = 1.0 - h * h * np.broadcast_to(f.xi_squared(), f.resolution)
    keep = np.abs(symbol) >= delta
    if not keep.any():
        raise ValueError("every mode lies inside the resonance guard")
    coeffs = np.where(keep, f.coefficients / np.where(keep, symbol, 1.0), 0.0)
    scale = float(np.abs(f.coefficients).max())
    carrying = (~keep) & (np.abs(f.coefficients) > 1e-12 * scale)
    idx = np.argwhere(~keep)
    listed = []
    for row in idx[:max_listed]:
        listed.append([int(i if i < n // 2 else i - n) for i, n in zip(row, f.resolution)])
    report = HelmholtzReport(float(delta), int(keep.sum()), int((~keep).sum()), listed,
                             int(carrying.sum()))
    return GridField.from_coefficients(f.periods, coeffs), report
