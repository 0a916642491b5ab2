"""Sampled fields on a flat torus and their Fourier coefficients.

Samples live on the uniform grid x_k = k A / n, k = 0..n-1, along every
axis.  Coefficients are numpy's unnormalised FFT, so the discrete Parseval
identity reads

    ||u||^2 = dV sum |u|^2 = (vol / N^2) sum |u_hat|^2,     N = prod(n).
"""
from __future__ import annotations

import json
from functools import cached_property
from pathlib import Path

import numpy as np

MIN_RESOLUTION = 8


def _periods(torus_or_periods) -> tuple:
    periods = getattr(torus_or_periods, "periods", torus_or_periods)
    out = tuple(float(p) for p in periods)
    if any(not p > 0 for p in out):
        raise ValueError("periods must be positive")
    return out


def check_resolution(resolution, dim: int) -> tuple:
    """Normalise a resolution (int or per-axis sequence); powers of two >= 8."""
    if np.isscalar(resolution):
        resolution = (int(resolution),) * dim
    res = tuple(int(n) for n in resolution)
    if len(res) != dim:
        raise ValueError(f"resolution has {len(res)} entries for a {dim}-torus")
    for n in res:
        if n < MIN_RESOLUTION or n & (n - 1):
            raise ValueError(f"resolution {n} is not a power of two >= {MIN_RESOLUTION}")
    return res


class GridField:
    """Complex (or real) samples on the tensor grid of a torus.

    Values are stored read-only so the cached coefficients can never go stale;
    derived fields are new objects.
    """

    def __init__(self, torus_or_periods, values):
        self.periods = _periods(torus_or_periods)
        values = np.array(values, copy=True)
        if not np.iscomplexobj(values):
            values = values.astype(float)
        check_resolution(values.shape, len(self.periods))
        values.setflags(write=False)
        self.values = values

    # construction -------------------------------------------------------
    @classmethod
    def zeros(cls, torus_or_periods, resolution, dtype=complex) -> "GridField":
        periods = _periods(torus_or_periods)
        return cls(periods, np.zeros(check_resolution(resolution, len(periods)), dtype=dtype))

    @classmethod
    def from_function(cls, torus_or_periods, resolution, fn) -> "GridField":
        """Sample fn(x_1, ..., x_d) on the grid (fn receives broadcastable arrays)."""
        periods = _periods(torus_or_periods)
        res = check_resolution(resolution, len(periods))
        mesh = np.meshgrid(*_axes(periods, res), indexing="ij", sparse=True)
        vals = np.broadcast_to(fn(*mesh), res)
        return cls(periods, vals)

    @classmethod
    def from_coefficients(cls, torus_or_periods, coeffs, real: bool = False) -> "GridField":
        vals = np.fft.ifftn(coeffs)
        return cls(torus_or_periods, vals.real if real else vals)

    def with_values(self, values) -> "GridField":
        return GridField(self.periods, values)

    # geometry -----------------------------------------------------------
    @property
    def dim(self) -> int:
        return len(self.periods)

    @property
    def resolution(self) -> tuple:
        return self.values.shape

    @property
    def volume(self) -> float:
        return float(np.prod(self.periods))

    @property
    def cell_volume(self) -> float:
        return self.volume / self.values.size

    def spacing(self, axis: int) -> float:
        return self.periods[axis] / self.resolution[axis]

    def axes(self) -> list:
        """1-D coordinate arrays of the grid."""
        return _axes(self.periods, self.resolution)

    def mesh(self) -> list:
        return np.meshgrid(*self.axes(), indexing="ij", sparse=True)

    def wavenumbers(self) -> list:
        """1-D angular wavenumbers xi = 2 pi k / A per axis (FFT ordering)."""
        return [2 * np.pi * np.fft.fftfreq(n, d=a / n) for a, n in zip(self.periods, self.resolution)]

    def xi_mesh(self) -> list:
        return np.meshgrid(*self.wavenumbers(), indexing="ij", sparse=True)

    def xi_squared(self) -> np.ndarray:
        return sum(x * x for x in self.xi_mesh())

    # spectral -------------------------------------------------------------
    @cached_property
    def coefficients(self) -> np.ndarray:
        c = np.fft.fftn(self.values)
        c.setflags(write=False)
        return c

    def norm(self) -> float:
        return float(np.sqrt(self.cell_volume * np.sum(np.abs(self.values) ** 2)))

    def coefficient_norm(self) -> float:
        return float(np.sqrt(self.volume / self.values.size ** 2
                             * np.sum(np.abs(self.coefficients) ** 2)))

    def inner(self, other: "GridField") -> complex:
        """<self, other> = int self * conj(other)."""
        self._check_compatible(other)
        return complex(self.cell_volume * np.vdot(other.values, self.values))

    def laplacian(self) -> "GridField":
        return GridField.from_coefficients(self.periods, -self.xi_squared() * self.coefficients,
                                           real=not np.iscomplexobj(self.values))

    def _check_compatible(self, other: "GridField"):
        if other.resolution != self.resolution or not np.allclose(other.periods, self.periods):
            raise ValueError("fields live on different grids")

    def __repr__(self) -> str:
        return f"GridField(periods={self.periods}, resolution={self.resolution})"


def _axes(periods, res) -> list:
    return [np.arange(n) * (a / n) for a, n in zip(periods, res)]


def periodic_offset(x, center: float, period: float):
    """x - center folded into [-A/2, A/2)."""
    return np.mod(np.asarray(x) - center + period / 2, period) - period / 2


# ---------------------------------------------------------------------------
# binary format: one JSON header line, then little-endian complex128 samples

def save_field(path, field: GridField) -> Path:
    path = Path(path)
    header = {"schema": "1", "dims": list(field.resolution), "periods": list(field.periods),
              "dtype": "<c16", "order": "C"}
    with path.open("wb") as fh:
        fh.write((json.dumps(header) + "\n").encode())
        fh.write(np.ascontiguousarray(field.values, dtype="<c16").tobytes())
    return path


def load_field(path) -> GridField:
    with Path(path).open("rb") as fh:
        header = json.loads(fh.readline().decode())
        if header.get("dtype") != "<c16":
            raise ValueError(f"unsupported dtype {header.get('dtype')!r}")
        data = np.frombuffer(fh.read(), dtype="<c16")
    dims = tuple(header["dims"])
    if data.size != int(np.prod(dims)):
        raise ValueError("field file is truncated")
    return GridField(header["periods"], data.reshape(dims))
