"""The vector field zeta . d_z projected on the sphere at infinity of R^{d-1} x R^{d-1}.

Two independent integrators are provided: the closed form of the flow
(straight lines z0 + s zeta0 normalised back to the unit sphere) and an
angle-coordinate ODE in which only theta_1 moves,

    dtheta_1/ds = -cos(theta_2) sin(theta_1)^2.

Their agreement is the test.  The circle flow dtheta/ds = -sin(theta)^2 is the
one-dimensional case.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class SpherePoint:
    z: np.ndarray
    zeta: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float).copy()
        zeta = np.asarray(self.zeta, dtype=float).copy()
        if z.shape != zeta.shape or z.ndim != 1:
            raise ValueError("z and zeta must be vectors of equal length")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "zeta", zeta)

    @classmethod
    def normalized(cls, z, zeta) -> "SpherePoint":
        z, zeta = np.asarray(z, float), np.asarray(zeta, float)
        r = math.sqrt(z @ z + zeta @ zeta)
        return cls(z / r, zeta / r)

    @classmethod
    def random(cls, d: int, rng: np.random.Generator) -> "SpherePoint":
        v = rng.normal(size=2 * (d - 1))
        return cls.normalized(v[: d - 1], v[d - 1:])

    def vector(self) -> np.ndarray:
        return np.concatenate([self.z, self.zeta])

    def norm_error(self) -> float:
        return abs(float(self.z @ self.z + self.zeta @ self.zeta) - 1.0)


def flow_closed_form(p0: SpherePoint, s: float) -> SpherePoint:
    """(z0 + s zeta0, zeta0) / |(z0 + s zeta0, zeta0)|; points with zeta0 = 0 are returned as is."""
    if not np.any(p0.zeta):
        return p0
    return SpherePoint.normalized(p0.z + s * p0.zeta, p0.zeta)


def _canonical_rotation(z: np.ndarray, zeta: np.ndarray) -> tuple[np.ndarray, int]:
    """Q in SO(d-1) with Q zeta = |zeta| e_1 and Q z in span(e_1, e_2).

    Returns Q and the sign of (Q z)_2 that SO(d-1) forces (only d - 1 = 2
    can need -1; higher dimensions flip an unused basis vector instead).
    """
    k = len(z)
    e1 = zeta / np.linalg.norm(zeta)
    perp = z - (z @ e1) * e1
    if np.linalg.norm(perp) > 1e-14:
        e2 = perp / np.linalg.norm(perp)
    else:
        # any unit vector orthogonal to e1
        trial = np.eye(k)[np.argmin(np.abs(e1))]
        trial = trial - (trial @ e1) * e1
        e2 = trial / np.linalg.norm(trial)
    basis = [e1, e2]
    for v in np.eye(k):
        w = v - sum((v @ b) * b for b in basis)
        if np.linalg.norm(w) > 1e-8 and len(basis) < k:
            basis.append(w / np.linalg.norm(w))
    Q = np.array(basis)
    sign = 1
    if np.linalg.det(Q) < 0:
        if k >= 3:
            Q[-1] = -Q[-1]
        else:
            Q[1] = -Q[1]
            sign = -1
    return Q, sign


def rotate_to_canonical(p0: SpherePoint):
    """Rotations (R_zeta, R_z) and the canonical point; identity when zeta = 0.

    The same rotation acts on z and zeta, which keeps zeta . d_z invariant.
    """
    k = len(p0.z)
    if k < 2:
        raise ValueError("canonical rotation needs d >= 3")
    if np.linalg.norm(p0.zeta) <= 1e-14:
        eye = np.eye(k)
        return eye, eye, p0
    Q, _ = _canonical_rotation(p0.z, p0.zeta)
    return Q, Q, SpherePoint(Q @ p0.z, Q @ p0.zeta)


def to_angles(canonical: SpherePoint) -> tuple[float, float, float]:
    """(theta_1, theta_2, theta_3) of a canonical point; theta_3 in {0, pi}."""
    z1, z2, c1 = canonical.z[0], canonical.z[1], canonical.zeta[0]
    theta1 = math.acos(max(-1.0, min(1.0, z1)))
    theta2 = math.atan2(abs(z2), c1)
    theta3 = 0.0 if z2 >= 0 else math.pi
    return theta1, theta2, theta3


def from_angles(theta1, theta2, theta3, k: int):
    """Canonical (z, zeta) arrays from angles; vectorised over theta1."""
    theta1 = np.asarray(theta1, dtype=float)
    shape = theta1.shape + (k,)
    z = np.zeros(shape)
    zeta = np.zeros(shape)
    z[..., 0] = np.cos(theta1)
    zeta[..., 0] = np.sin(theta1) * np.cos(theta2)
    z[..., 1] = np.sin(theta1) * np.sin(theta2) * np.cos(theta3)
    return z, zeta


def _rhs(theta1, cos2):
    s = np.sin(theta1)
    return -cos2 * s * s


def integrate_theta1(theta1, cos2, s: float, dt: float = 1e-3, record_every: int | None = None):
    """Classical RK4 for dtheta_1/ds = -cos(theta_2) sin^2(theta_1); vectorised.

    With ``record_every`` the states after every that-many steps are returned
    (including s = 0) alongside their times.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    theta = np.array(theta1, dtype=float)
    cos2 = np.asarray(cos2, dtype=float)
    n = int(math.ceil(abs(s) / dt - 1e-9)) if s else 0
    h = (s / n) if n else 0.0
    times, states = [0.0], [theta.copy()]
    for step in range(n):
        k1 = _rhs(theta, cos2)
        k2 = _rhs(theta + 0.5 * h * k1, cos2)
        k3 = _rhs(theta + 0.5 * h * k2, cos2)
        k4 = _rhs(theta + h * k3, cos2)
        theta = theta + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if record_every and (step + 1) % record_every == 0:
            times.append((step + 1) * h)
            states.append(theta.copy())
    if record_every:
        if times[-1] != n * h:
            times.append(n * h)
            states.append(theta.copy())
        return np.array(times), np.array(states)
    return theta


def flow_angle_ode(p0: SpherePoint, s: float, dt: float = 1e-3) -> SpherePoint:
    """Flow via canonical rotation, angle coordinates and RK4 on theta_1."""
    if np.linalg.norm(p0.zeta) <= 1e-14:
        return p0
    k = len(p0.z)
    Q, _, canon = rotate_to_canonical(p0)
    t1, t2, t3 = to_angles(canon)
    theta1 = integrate_theta1(t1, math.cos(t2), s, dt)
    z, zeta = from_angles(theta1, t2, t3, k)
    return SpherePoint.normalized(Q.T @ z, Q.T @ zeta)


def compare_integrators(points: list[SpherePoint], s_max: float = 100.0, dt: float = 1e-3,
                        record_every: int = 100) -> np.ndarray:
    """Sup over recorded s in [0, s_max] of |ODE - closed form|, per point.

    theta_1 is one scalar per point whatever the dimension, so all points share
    a single vectorised RK4 run.
    """
    out = np.zeros(len(points))
    moving = [i for i, p in enumerate(points) if np.linalg.norm(p.zeta) > 1e-14]
    if not moving:
        return out
    Qs, angles = [], []
    for i in moving:
        Q, _, canon = rotate_to_canonical(points[i])
        Qs.append(Q)
        angles.append(to_angles(canon))
    angles = np.array(angles)
    times, states = integrate_theta1(angles[:, 0], np.cos(angles[:, 1]), s_max, dt, record_every)
    for j, i in enumerate(moving):
        p = points[i]
        k = len(p.z)
        z, zeta = from_angles(states[:, j], angles[j, 1], angles[j, 2], k)
        z, zeta = z @ Qs[j], zeta @ Qs[j]            # each row becomes Q^T row
        r = np.sqrt(np.sum(z * z, axis=1) + np.sum(zeta * zeta, axis=1))
        ode = np.concatenate([z, zeta], axis=1) / r[:, None]
        zc = p.z[None, :] + times[:, None] * p.zeta[None, :]
        zc_zeta = np.broadcast_to(p.zeta, zc.shape)
        rc = np.sqrt(np.sum(zc * zc, axis=1) + np.sum(zc_zeta * zc_zeta, axis=1))
        closed = np.concatenate([zc, zc_zeta], axis=1) / rc[:, None]
        out[i] = float(np.max(np.linalg.norm(ode - closed, axis=1)))
    return out


def arccot(x: float) -> float:
    """Principal branch with values in (0, pi)."""
    return math.pi / 2 - math.atan(x)


def circle_flow_theta(theta0: float, s: float) -> float:
    """Exact solution of dtheta/ds = -sin(theta)^2 on the branch containing theta0."""
    k = math.floor(theta0 / math.pi)
    rem = theta0 - k * math.pi
    if rem == 0.0 or abs(math.sin(theta0)) < 1e-300:
        return theta0
    return k * math.pi + arccot(1.0 / math.tan(rem) + s)


def write_trajectory_csv(path, p0: SpherePoint, s_values, dt: float = 1e-3) -> Path:
    """Rows: s, z..., zeta..., theta_1, and the ODE/closed-form divergence."""
    path = Path(path)
    k = len(p0.z)
    s_values = np.asarray(list(s_values), dtype=float)
    if np.linalg.norm(p0.zeta) > 1e-14:
        Q, _, canon = rotate_to_canonical(p0)
        t1, t2, t3 = to_angles(canon)
    else:
        Q, t1, t2, t3 = np.eye(k), None, 0.0, 0.0
    header = (["s"] + [f"z{i + 1}" for i in range(k)] + [f"zeta{i + 1}" for i in range(k)]
              + ["theta1", "ode_divergence"])
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for s in s_values:
            cf = flow_closed_form(p0, s)
            if t1 is None:
                theta1 = math.acos(max(-1.0, min(1.0, float(cf.z[0])))) if k else 0.0
                ode = p0
            else:
                theta1 = float(integrate_theta1(t1, math.cos(t2), s, dt))
                z, zeta = from_angles(theta1, t2, t3, k)
                ode = SpherePoint.normalized(Q.T @ z, Q.T @ zeta)
            div = float(np.linalg.norm(ode.vector() - cf.vector()))
            w.writerow([f"{s:.17g}"] + [f"{x:.17g}" for x in cf.vector()]
                       + [f"{theta1:.17g}", f"{div:.17g}"])
    return path
