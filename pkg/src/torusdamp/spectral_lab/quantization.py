"""Quadratic phase-space masses <Op_h(q) u, u> for separable symbols.

Op_h(q_X(X) q_Xi(Xi)) u = q_X * (q_Xi(hD) u): one Fourier multiplier and one
pointwise product.  The second quantization adds a transverse window
w_z(eps h^{-1/2} x_perp) in space and w_zeta(eps h^{1/2} xi_perp) in
frequency; the third-level windows psi_pm(+-eps^{3/2} h^{-1/2} x_j) are extra
pointwise factors.  Sums of separable symbols are handled by linearity.
"""
from __future__ import annotations

import math
import warnings
from typing import Callable

import numpy as np

from .grid import GridField, periodic_offset


class UnresolvedWindow(ValueError):
    """A window varies on a scale the grid cannot represent."""


def fourier_multiplier(u: GridField, h: float, chi: Callable | None) -> GridField:
    """u_hat(k) <- chi(h xi_k) u_hat(k); chi receives one array per axis."""
    if chi is None:
        return u
    xi = u.xi_mesh()
    factor = np.broadcast_to(chi(*[h * x for x in xi]), u.resolution)
    return GridField.from_coefficients(u.periods, factor * u.coefficients)


def _spatial(u: GridField, q_x) -> np.ndarray | float:
    if q_x is None:
        return 1.0
    return np.broadcast_to(q_x(*u.mesh()), u.resolution)


def microlocal_mass(u: GridField, h: float, q_x: Callable | None = None,
                    q_xi: Callable | None = None) -> complex:
    """<q_X (q_Xi(hD) u), u>.  With both factors absent this is exactly ||u||^2."""
    w = fourier_multiplier(u, h, q_xi)
    vals = _spatial(u, q_x) * w.values
    return complex(u.cell_volume * np.vdot(u.values, vals))


def psi_step(s):
    """Smooth step: 0 on (-inf, 1/2], 1 on [1, inf)."""
    s = np.asarray(s, dtype=float)
    t = np.clip(2 * s - 1, 0.0, 1.0)        # 0 at s = 1/2, 1 at s = 1

    def g(x):
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(x > 0, np.exp(-1 / np.where(x > 0, x, 1)), 0.0)
    num = g(t)
    return num / (num + g(1 - t))


def psi_windows(u: GridField, h: float, eps: float, axis: int, center: float = 0.0):
    """(psi_+, psi_-) sampled on the grid: psi(+- eps^{3/2} h^{-1/2} (x_axis - c))."""
    x = periodic_offset(u.mesh()[axis], center, u.periods[axis])
    s = eps ** 1.5 / math.sqrt(h) * x
    return (np.broadcast_to(psi_step(s), u.resolution), np.broadcast_to(psi_step(-s), u.resolution))


def second_microlocal_mass(u: GridField, h: float, eps: float, axis: int,
                           q_x: Callable | None = None, q_xi: Callable | None = None,
                           w_z: Callable | None = None, w_zeta: Callable | None = None,
                           center=None, extra=None, check_regime: bool = True) -> complex:
    """Mass of the 2-microlocal separable symbol along the geodesic parallel to ``axis``.

    w_z receives the rescaled transverse offsets eps h^{-1/2}(x_perp - c), w_zeta
    the rescaled transverse frequencies eps h^{1/2} xi_perp (one array per
    transverse axis each).  ``extra`` is an optional pointwise factor array,
    e.g. one of the psi windows.
    """
    if not (h > 0 and eps > 0):
        raise ValueError("h and eps must be positive")
    if check_regime and (eps < math.sqrt(h) or math.sqrt(h) / eps ** 2 > 1):
        warnings.warn(f"eps = {eps:.3g} outside the regime h^(1/2) <= eps, h^(1/2) eps^-2 small",
                      stacklevel=2)
    others = [j for j in range(u.dim) if j != axis]
    center = tuple(center) if center is not None else (0.0,) * len(others)
    w = fourier_multiplier(u, h, q_xi)
    if w_zeta is not None:
        for j in others:
            if 1.0 / (eps * math.sqrt(h)) < 2 * np.pi / u.periods[j]:
                raise UnresolvedWindow("frequency window narrower than the mode spacing")
        xi = u.xi_mesh()
        factor = np.broadcast_to(w_zeta(*[eps * math.sqrt(h) * xi[j] for j in others]), u.resolution)
        w = GridField.from_coefficients(u.periods, factor * w.coefficients)
    vals = _spatial(u, q_x) * w.values
    if w_z is not None:
        for j in others:
            if math.sqrt(h) / eps < 2 * u.spacing(j):
                raise UnresolvedWindow("spatial window narrower than two grid cells")
        mesh = u.mesh()
        offs = [eps / math.sqrt(h) * periodic_offset(mesh[j], c, u.periods[j])
                for j, c in zip(others, center)]
        vals = np.broadcast_to(w_z(*offs), u.resolution) * vals
    if extra is not None:
        vals = np.asarray(extra) * vals
    return complex(u.cell_volume * np.vdot(u.values, vals))


def psi_partition(u: GridField, h: float, eps: float, axis: int, psi_axis: int,
                  psi_center: float = 0.0, **symbol) -> dict:
    """Masses with psi_+, psi_-, the remainder 1 - psi_+ - psi_-, and without windows."""
    plus, minus = psi_windows(u, h, eps, psi_axis, psi_center)
    out = {}
    for name, factor in (("plus", plus), ("minus", minus), ("rest", 1.0 - plus - minus)):
        out[name] = second_microlocal_mass(u, h, eps, axis, extra=factor, **symbol)
    out["total"] = second_microlocal_mass(u, h, eps, axis, **symbol)
    return out
