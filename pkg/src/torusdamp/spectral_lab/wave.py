"""Damped wave equation u_tt - Lap u + a u_t + m u = 0 on a flat torus.

Time stepping is Strang splitting: an exact half-step of the undamped wave
(each Fourier mode rotates with frequency sqrt(|xi|^2 + m)), the exact
pointwise decay v <- v exp(-a dt), and another exact half-step.  Wave steps
conserve the discrete energy exactly, so all energy loss happens in the
damping step; the flux integral int a |u_t|^2 is accumulated with the
midpoint velocity v exp(-a dt / 2), which makes the energy-identity residual
second order in dt.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg

from .. import exact
from ..scene_geometry import Damping, FlatTorus, translates_near
from .grid import GridField, check_resolution


# ---------------------------------------------------------------------------
# damping rasterisation

def rasterize_damping(torus: FlatTorus, damping: Damping, resolution) -> GridField:
    """0/1 samples of the closed damped set (Interior or Boundary points count).

    Grid points are rational, x_j = k_j A_j / n_j, so membership in each
    translated half-space is decided in exact integer arithmetic.
    """
    res = check_resolution(resolution, torus.dim)
    d = torus.dim
    mask = np.zeros(res, dtype=bool)
    k = np.meshgrid(*[np.arange(n, dtype=np.int64) for n in res], indexing="ij", sparse=True)
    lo = tuple(exact.Q(0) for _ in range(d))
    hi = tuple(torus.periods)
    for poly in damping.polyhedra:
        for g in translates_near(torus, poly, lo, hi):
            inside = np.ones(res, dtype=bool)
            for h in poly.halfspaces:
                # sum_j N_j (k_j A_j / n_j) <= c + N.g, scaled to integers
                coef = [h.normal[j] * torus.periods[j] / res[j] for j in range(d)]
                rhs = h.offset + exact.dot(h.normal, g)
                den = 1
                for q in coef + [rhs]:
                    den = math.lcm(den, int(q.denominator))
                icoef = [int(c * den) for c in coef]
                irhs = int(rhs * den)
                bound = sum(abs(c) * n for c, n in zip(icoef, res)) + abs(irhs)
                if bound >= 2 ** 62:
                    raise OverflowError("rasterisation coefficients exceed int64")
                lhs = sum(c * kj for c, kj in zip(icoef, k))
                inside &= np.broadcast_to(lhs <= irhs, res)
                if not inside.any():
                    break
            mask |= inside
    return GridField(torus, mask.astype(float))


def constant_damping(torus_or_periods, resolution, value: float = 1.0) -> GridField:
    f = GridField.zeros(torus_or_periods, resolution, dtype=float)
    return f.with_values(np.full(f.resolution, float(value)))


# ---------------------------------------------------------------------------
# state and stepping

@dataclass
class WaveState:
    u: GridField
    v: GridField
    a: GridField
    m: float = 0.0
    t: float = 0.0

    def __post_init__(self):
        if self.m < 0:
            raise ValueError("potential m must be nonnegative")
        if not (self.u.resolution == self.v.resolution == self.a.resolution):
            raise ValueError("u, v and a must share one resolution")
        if np.any(self.a.values.real < 0):
            raise ValueError("damping must be nonnegative")


class SimulationNaN(FloatingPointError):
    """Non-finite values met during a run; carries the last good state."""

    def __init__(self, message: str, last_good: WaveState | None, diagnostics: dict):
        super().__init__(message)
        self.last_good = last_good
        self.diagnostics = diagnostics


class _Propagator:
    """Exact Fourier-space propagator of u_tt = Lap u - m u over time tau."""

    def __init__(self, xi2: np.ndarray, m: float, tau: float):
        omega = np.sqrt(xi2 + m)
        self.c = np.cos(omega * tau)
        with np.errstate(divide="ignore", invalid="ignore"):
            self.s_over_w = np.where(omega > 0, np.sin(omega * tau) / np.where(omega > 0, omega, 1), tau)
        self.w_s = omega * np.sin(omega * tau)

    def __call__(self, uh, vh):
        return self.c * uh + self.s_over_w * vh, -self.w_s * uh + self.c * vh


def _is_real(*fields) -> bool:
    return not any(np.iscomplexobj(f.values) for f in fields)


def step_damped_wave(state: WaveState, dt: float) -> WaveState:
    """One Strang step of length dt."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    half = _Propagator(state.u.xi_squared(), state.m, dt / 2)
    uh, vh = half(state.u.coefficients, state.v.coefficients)
    v = np.fft.ifftn(vh) * np.exp(-state.a.values.real * dt)
    uh, vh = half(uh, np.fft.fftn(v))
    real = _is_real(state.u, state.v)
    u_new = GridField.from_coefficients(state.u.periods, uh, real=real)
    v_new = GridField.from_coefficients(state.u.periods, vh, real=real)
    return WaveState(u_new, v_new, state.a, state.m, state.t + dt)


def _energy_from_coefficients(uh, vh, xi2, m, volume) -> float:
    n2 = uh.size ** 2
    return float(0.5 * volume / n2 * np.sum((xi2 + m) * np.abs(uh) ** 2 + np.abs(vh) ** 2))


def energy(state: WaveState) -> float:
    """(1/2)(||grad u||^2 + ||v||^2 + m ||u||^2), gradient taken spectrally."""
    return _energy_from_coefficients(state.u.coefficients, state.v.coefficients,
                                     state.u.xi_squared(), state.m, state.u.volume)


# ---------------------------------------------------------------------------
# runs

@dataclass
class EnergyTrace:
    times: np.ndarray
    energy: np.ndarray
    flux: np.ndarray

    @property
    def residual(self) -> np.ndarray:
        """E(t) - E(0) + int_0^t int a |u_t|^2; zero for the exact flow."""
        return self.energy - self.energy[0] + self.flux

    def max_relative_residual(self) -> float:
        e0 = self.energy[0]
        return float(np.max(np.abs(self.residual)) / e0) if e0 > 0 else 0.0

    def relative_drift(self) -> float:
        e0 = self.energy[0]
        return float(abs(self.energy[-1] - e0) / e0) if e0 > 0 else 0.0

    def max_increase(self) -> float:
        """Largest step-to-step energy increase relative to E(0)."""
        if len(self.energy) < 2 or self.energy[0] == 0:
            return 0.0
        return float(max(0.0, np.max(np.diff(self.energy))) / self.energy[0])

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "E", "flux", "residual"])
            for row in zip(self.times, self.energy, self.flux, self.residual):
                w.writerow([f"{x:.17g}" for x in row])
        return path

    @classmethod
    def from_csv(cls, path) -> "EnergyTrace":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(data[:, 0], data[:, 1], data[:, 2])


@dataclass
class SimulationResult:
    trace: EnergyTrace
    final: WaveState
    snapshots: list = field(default_factory=list)   # (t, u GridField)


def run_simulation(state: WaveState, T: float, dt: float, sample_stride: int = 1,
                   snapshot_stride: int | None = None) -> SimulationResult:
    """Iterate Strang steps up to time T, recording energy and damping flux.

    The loop keeps (u_hat, v_hat) in Fourier space; only the velocity visits
    sample space, for the damping step.  With a == 0 that step is the
    identity and is skipped.
    """
    if not T > 0:
        raise ValueError("T must be positive")
    if not dt > 0:
        raise ValueError("dt must be positive")
    nsteps = max(1, int(round(T / dt)))
    dt = T / nsteps
    periods = state.u.periods
    real = _is_real(state.u, state.v)
    a = state.a.values.real
    damped = bool(np.any(a > 0))
    decay = np.exp(-a * dt)
    mid = np.exp(-a * dt / 2)
    dV = state.u.cell_volume
    xi2 = state.u.xi_squared()
    half = _Propagator(xi2, state.m, dt / 2)
    full = _Propagator(xi2, state.m, dt)
    uh = np.array(state.u.coefficients)
    vh = np.array(state.v.coefficients)
    vol = state.u.volume

    times, energies, fluxes = [state.t], [_energy_from_coefficients(uh, vh, xi2, state.m, vol)], [0.0]
    snapshots = [(state.t, state.u)] if snapshot_stride else []
    flux = 0.0
    last_good = (uh.copy(), vh.copy(), state.t)
    for step in range(1, nsteps + 1):
        if damped:
            uh, vh = half(uh, vh)
            v = np.fft.ifftn(vh)
            vm = v * mid
            flux += dt * dV * float(np.sum(a * np.abs(vm) ** 2))
            vh = np.fft.fftn(v * decay)
            uh, vh = half(uh, vh)
        else:
            uh, vh = full(uh, vh)
        t = state.t + step * dt
        record = step % sample_stride == 0 or step == nsteps
        if record:
            e = _energy_from_coefficients(uh, vh, xi2, state.m, vol)
            if not (math.isfinite(e) and math.isfinite(flux)):
                lu, lv, lt = last_good
                good = WaveState(GridField.from_coefficients(periods, lu, real),
                                 GridField.from_coefficients(periods, lv, real), state.a, state.m, lt)
                raise SimulationNaN(f"non-finite energy at t = {t:.6g}", good,
                                    {"t": t, "step": step, "energy": e, "flux": flux,
                                     "last_good_t": lt})
            last_good = (uh.copy(), vh.copy(), t)
            times.append(t)
            energies.append(e)
            fluxes.append(flux)
        if snapshot_stride and step % snapshot_stride == 0:
            snapshots.append((t, GridField.from_coefficients(periods, uh, real)))
    final = WaveState(GridField.from_coefficients(periods, uh, real),
                      GridField.from_coefficients(periods, vh, real), state.a, state.m, state.t + T)
    return SimulationResult(EnergyTrace(np.array(times), np.array(energies), np.array(fluxes)),
                            final, snapshots)


# ---------------------------------------------------------------------------
# decay fits and the constant-damping oracle

@dataclass(frozen=True)
class DecayFit:
    rate: float        # c in E ~ C exp(-c t)
    prefactor: float   # C
    r2: float


def fit_decay_rate(times, energies=None, window: tuple | None = None) -> DecayFit:
    """Least-squares line through log E(t) on the window.

    Accepts either (times, energies) arrays or an EnergyTrace as first argument.
    """
    if isinstance(times, EnergyTrace):
        times, energies = times.times, times.energy
    t = np.asarray(times, dtype=float)
    e = np.asarray(energies, dtype=float)
    if window is not None:
        lo, hi = window
        if lo < t[0] - 1e-12 or hi > t[-1] + 1e-12 or not lo < hi:
            raise ValueError(f"window {window} outside the trace [{t[0]}, {t[-1]}]")
        keep = (t >= lo) & (t <= hi)
        t, e = t[keep], e[keep]
    if len(t) < 2:
        raise ValueError("need at least two samples to fit")
    if np.any(e <= 0):
        raise ValueError("nonpositive energy in the fit window")
    y = np.log(e)
    slope, intercept = np.polyfit(t, y, 1)
    resid = y - (slope * t + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return DecayFit(float(-slope), float(math.exp(intercept)), r2)


def mode_decay_rate(xi2, m: float = 0.0, damping: float = 1.0):
    """-2 max Re(lambda), lambda^2 + c lambda + |xi|^2 + m = 0 (vectorised)."""
    k = np.asarray(xi2, dtype=float) + m
    disc = damping * damping - 4 * k
    re = np.where(disc > 0, (-damping + np.sqrt(np.maximum(disc, 0))) / 2, -damping / 2)
    return -2 * re


def excited_modes(u0: GridField, v0: GridField, tol: float = 1e-12) -> np.ndarray:
    """Boolean mask of nonzero-frequency modes carrying data."""
    amp = np.abs(u0.coefficients) + np.abs(v0.coefficients)
    mask = amp > tol * max(float(amp.max()), 1e-300)
    mask &= u0.xi_squared() > 0
    return mask


def oracle_rate(u0: GridField, v0: GridField, m: float = 0.0, damping: float = 1.0) -> float:
    """Slowest asymptotic energy decay rate among excited nonzero modes."""
    mask = excited_modes(u0, v0)
    if not mask.any():
        raise ValueError("no excited nonzero-frequency modes")
    return float(np.min(mode_decay_rate(u0.xi_squared()[mask], m, damping)))


def oracle_energy(u0: GridField, v0: GridField, times, m: float = 0.0,
                  damping: float = 1.0) -> np.ndarray:
    """Energy of the constant-damping solution, mode by mode via 2x2 matrix exponentials."""
    xi2 = np.broadcast_to(u0.xi_squared(), u0.resolution)
    uh, vh = u0.coefficients, v0.coefficients
    scale = 0.5 * u0.volume / uh.size ** 2
    times = np.asarray(times, dtype=float)
    out = np.zeros(len(times))
    active = (np.abs(uh) + np.abs(vh)) > 0
    levels = np.unique(xi2[active])
    for lev in levels:
        sel = active & (xi2 == lev)
        w2 = lev + m
        A = np.array([[0.0, 1.0], [-w2, -damping]])
        Y0 = np.stack([uh[sel], vh[sel]])
        for i, t in enumerate(times):
            Y = scipy.linalg.expm(A * t) @ Y0
            out[i] += scale * float(np.sum(w2 * np.abs(Y[0]) ** 2 + np.abs(Y[1]) ** 2))
    return out


# ---------------------------------------------------------------------------
# initial data

def plane_mode(torus_or_periods, resolution, k, amplitude: float = 1.0) -> GridField:
    """Real mode amplitude * cos(xi_k . x) with xi_k = 2 pi k / A."""
    base = GridField.zeros(torus_or_periods, resolution, dtype=float)
    xi = [2 * np.pi * kj / a for kj, a in zip(k, base.periods)]
    return GridField.from_function(base.periods, base.resolution,
                                   lambda *x: amplitude * np.cos(sum(c * xx for c, xx in zip(xi, x))))


def random_band_limited(torus_or_periods, resolution, kmax: int, rng: np.random.Generator,
                        zero_mean: bool = True) -> GridField:
    """Real random field with Fourier support in |k_j| <= kmax on every axis."""
    base = GridField.zeros(torus_or_periods, resolution, dtype=float)
    if any(2 * kmax >= n for n in base.resolution):
        raise ValueError("kmax not resolved by the grid")
    coeffs = np.zeros(base.resolution, dtype=complex)
    sl = []
    for n in base.resolution:
        idx = np.r_[0:kmax + 1, n - kmax:n]
        sl.append(idx)
    block = rng.normal(size=[len(s) for s in sl]) + 1j * rng.normal(size=[len(s) for s in sl])
    coeffs[np.ix_(*sl)] = block
    if zero_mean:
        coeffs[(0,) * base.dim] = 0
    vals = np.fft.ifftn(coeffs).real
    vals /= np.sqrt(base.cell_volume * np.sum(vals ** 2))
    return base.with_values(vals)


def scene_state(torus: FlatTorus, damping: Damping, resolution, u0: GridField, v0: GridField | None = None,
                m: float = 0.0) -> WaveState:
    a = rasterize_damping(torus, damping, resolution)
    if v0 is None:
        v0 = u0.with_values(np.zeros_like(u0.values))
    return WaveState(u0, v0, a, m)
