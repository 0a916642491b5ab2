"""Discrete evaluation of the slice estimates for quasimodes.

Slabs {|x_j - c| <= w} are integrated with cell-coverage weights: each grid
point carries the fraction of its cell [x - dx/2, x + dx/2] lying inside the
slab (periodically), so constant-modulus fields get the exact slab mass.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .grid import GridField, periodic_offset


def epsilon_of_h(h: float, r: float) -> float:
    """max(h^{1/6}, (r / h)^{1/6}) for residual norm r."""
    if not h > 0:
        raise ValueError("h must be positive")
    if r < 0:
        raise ValueError("residual norm must be nonnegative")
    return max(h ** (1 / 6), (r / h) ** (1 / 6))


def slab_weights(field: GridField, axis: int, lo: float, hi: float, center: float = 0.0) -> np.ndarray:
    """Coverage of each cell along ``axis`` by {lo <= |x - center| <= hi} (1-D array)."""
    A = field.periods[axis]
    n = field.resolution[axis]
    dx = A / n
    x = periodic_offset(np.arange(n) * dx, center, A)

    def cover(w):
        # overlap of the cell with [-w, w] summed over the periodic images
        tot = np.zeros(n)
        for m in (-1, 0, 1):
            left = np.maximum(x + m * A - dx / 2, -w)
            right = np.minimum(x + m * A + dx / 2, w)
            tot += np.clip(right - left, 0, None)
        return np.minimum(tot / dx, 1.0)

    outer = cover(hi)
    inner = cover(lo) if lo > 0 else np.zeros(n)
    return np.clip(outer - inner, 0.0, 1.0)


def _weighted_norm(field: GridField, axis: int, weights: np.ndarray) -> float:
    shape = [1] * field.dim
    shape[axis] = -1
    w = weights.reshape(shape)
    return math.sqrt(field.cell_volume * float(np.sum(w * np.abs(field.values) ** 2)))


def slice_mass(u: GridField, axis: int, width: float, center: float = 0.0) -> float:
    """L^2 norm of u on the slab |x_axis - center| <= width."""
    A = u.periods[axis]
    if not 0 < width <= A / 2:
        raise ValueError(f"width must lie in (0, {A / 2}]")
    return _weighted_norm(u, axis, slab_weights(u, axis, 0.0, width, center))


@dataclass(frozen=True)
class NonConcentration:
    h: float
    epsilon: float
    width: float
    mass: float
    constant: float      # mass / epsilon^{1/2}
    c_max: float
    vacuous: bool        # slab wider than half the torus: nothing to test

    @property
    def passed(self) -> bool:
        return self.vacuous or self.constant <= self.c_max


def check_nonconcentration(u: GridField, f, h: float, axis: int, center: float = 0.0,
                           c_max: float = 10.0) -> NonConcentration:
    """Slab mass at width h^{1/2} eps^{-2} measured against eps^{1/2}.

    ``f`` is the residual field or its norm.
    """
    r = f.norm() if isinstance(f, GridField) else float(f)
    eps = epsilon_of_h(h, r)
    w = math.sqrt(h) / eps ** 2
    if w > u.periods[axis] / 2:
        return NonConcentration(h, eps, w, u.norm(), math.nan, c_max, True)
    mass = slice_mass(u, axis, w, center)
    return NonConcentration(h, eps, w, mass, mass / math.sqrt(eps), c_max, False)


@dataclass(frozen=True)
class SlabEstimate:
    left: float          # sup over planes |x_1| <= beta h^{1/2} of the transverse L^2 norm
    annulus: float       # ||u|| on beta h^{1/2} <= |x_1| <= 2 beta h^{1/2}
    source: float        # ||f|| on |x_1| <= 2 beta h^{1/2}
    right: float         # beta^{-1/2} h^{-1/4} (annulus + beta^2 source / h)
    ratio: float


def check_slab_estimate(u: GridField, f: GridField, h: float, beta: float, axis: int = 0,
                        center: float = 0.0) -> SlabEstimate:
    """Both sides of the slab estimate near the hyperplane x_axis = center."""
    if not 1 <= beta <= h ** -0.5 + 1e-12:
        raise ValueError("beta must satisfy 1 <= beta <= h^{-1/2}")
    A = u.periods[axis]
    dx = A / u.resolution[axis]
    inner = beta * math.sqrt(h)
    if inner < dx:
        raise ValueError("slab unresolved by the grid")
    if 2 * inner > A / 2:
        raise ValueError("slab wider than half the torus")
    x = periodic_offset(np.arange(u.resolution[axis]) * dx, center, A)
    planes = np.nonzero(np.abs(x) <= inner + 1e-12)[0]
    moved = np.moveaxis(np.abs(u.values) ** 2, axis, 0)
    dvol_perp = u.cell_volume / dx
    left = math.sqrt(dvol_perp * float(np.max(moved[planes].reshape(len(planes), -1).sum(axis=1))))
    annulus = _weighted_norm(u, axis, slab_weights(u, axis, inner, 2 * inner, center))
    source = _weighted_norm(f, axis, slab_weights(f, axis, 0.0, 2 * inner, center))
    right = beta ** -0.5 * h ** -0.25 * (annulus + beta ** 2 * source / h)
    ratio = left / right if right > 0 else (0.0 if left == 0 else math.inf)
    return SlabEstimate(left, annulus, source, right, ratio)


# ---------------------------------------------------------------------------
# one-dimensional resolvent estimate on (-2, 2)

def second_derivative_fd4(z: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Fourth-order central second derivative on a uniform grid (interior points)."""
    dz = z[1] - z[0]
    if not np.allclose(np.diff(z), dz, rtol=1e-9, atol=0):
        raise ValueError("grid must be uniform")
    return (-v[4:] + 16 * v[3:-1] - 30 * v[2:-2] + 16 * v[1:-3] - v[:-4]) / (12 * dz * dz)


def check_1d_resolvent(z, v, k, tau: float, rtol: float = 1e-4) -> float:
    """||v||_{L^inf(-1,1)} / (||v||_{L^2(1<=|z|<=2)} + (1+|tau|)^{-1/2} ||k||_{L^1(-2,2)}).

    (v, k) must solve v'' + tau v = k; the residual is checked with a
    fourth-order stencil first.  The zero solution returns 0.
    """
    z, v, k = (np.asarray(a, dtype=float) for a in (z, v, k))
    if z.ndim != 1 or v.shape != z.shape or k.shape != z.shape:
        raise ValueError("z, v, k must be 1-D arrays of equal length")
    if abs(z[0] + 2) > 1e-9 or abs(z[-1] - 2) > 1e-9:
        raise ValueError("samples must span [-2, 2]")
    vpp = second_derivative_fd4(z, v)
    lhs = vpp + tau * v[2:-2]
    scale = max(float(np.max(np.abs(vpp))), abs(tau) * float(np.max(np.abs(v))),
                float(np.max(np.abs(k))), 1e-300)
    res = float(np.max(np.abs(lhs - k[2:-2]))) / scale
    if res > rtol:
        raise ValueError(f"(v, k) does not solve v'' + tau v = k (relative residual {res:.3g})")
    mid = np.abs(z) <= 1 + 1e-12
    sup = float(np.max(np.abs(v[mid])))
    outer_sq = 0.0
    for sel in (z <= -1 + 1e-12, z >= 1 - 1e-12):
        outer_sq += float(trapezoid(v[sel] ** 2, z[sel]))
    l1 = float(trapezoid(np.abs(k), z))
    denom = math.sqrt(outer_sq) + l1 / math.sqrt(1 + abs(tau))
    if denom == 0:
        return 0.0
    return sup / denom
