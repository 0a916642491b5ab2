"""Iterated orthonormal changes of coordinates straightening a closed geodesic.

Each stage acts on a pair of coordinates (i, r): with a = n_i P_i and
b = m_r P_r the current direction components,

    Xi_i = (a e_i + b e_r) / S,   Xi_r = (-b e_i + a e_r) / S,   S = (a^2 + b^2)^{1/2},

and G(x) = sum_j x_j Xi_j.  For integers p, q,

    alpha = P_i P_r (q n_i - p m_r) / S,   beta = (p n_i P_i^2 + q m_r P_r^2) / S

satisfy alpha Xi_r + beta Xi_i = p P_i e_i + q P_r e_r, which gives the twisted
periodicity u(G(x + alpha e_r)) = u(G(x - beta e_i)).  After the stage the
direction is S e_i, so the next stage pairs the next nonzero coordinate with i.
A last quarter turn moves the direction from its final axis to e_d.

Zero / nonzero decisions use the exact rational squares S^2, alpha^2 S^2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

DEFAULT_PQ = ((0, 1), (1, 0), (0, -1), (-1, 0), (1, 1), (1, -1), (-1, 1), (-1, -1))


class DegenerateAlpha(ValueError):
    """alpha = 0 for the requested (p, q), or for every default choice."""


@dataclass(frozen=True)
class ReductionStep:
    stage: int
    pair: tuple            # (i, r), 0-based coordinates
    matrix: np.ndarray     # columns are the new basis vectors
    S: float
    S2: Fraction           # exact S^2
    p: int
    q: int
    alpha: float
    beta: float
    alpha2S2: Fraction     # exact alpha^2 S^2
    beta2S2: Fraction
    identity: bool = False

    def to_json(self) -> dict:
        return {
            "stage": self.stage, "pair": list(self.pair), "identity": self.identity,
            "matrix": self.matrix.tolist(), "S": self.S, "S2": str(self.S2),
            "p": self.p, "q": self.q, "alpha": self.alpha, "beta": self.beta,
            "alpha2_S2": str(self.alpha2S2), "beta2_S2": str(self.beta2S2),
        }


@dataclass
class ReductionResult:
    periods: tuple
    n: tuple
    F: np.ndarray
    steps: list
    alignment: np.ndarray
    transverse_periods: list = field(default_factory=list)  # per stage, floats

    def direction(self) -> np.ndarray:
        v = np.array([k * float(a) for k, a in zip(self.n, self.periods)])
        return v / np.linalg.norm(v)

    def alignment_error(self) -> float:
        d = len(self.n)
        e = np.zeros(d)
        e[-1] = 1.0
        return float(np.linalg.norm(self.F.T @ self.direction() - e))

    def orthonormality_error(self) -> float:
        return float(np.max(np.abs(self.F.T @ self.F - np.eye(len(self.n)))))

    def to_json(self) -> dict:
        return {
            "periods": [str(a) for a in self.periods], "n": list(self.n),
            "F": self.F.tolist(), "steps": [s.to_json() for s in self.steps],
            "alignment": self.alignment.tolist(),
            "transverse_periods": self.transverse_periods,
            "alignment_error": self.alignment_error(),
            "orthonormality_error": self.orthonormality_error(),
        }


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def _stage(d, i, r, n_i, m_r, P_i2: Fraction, P_r2: Fraction, p, q, stage) -> ReductionStep:
    """One stage on the pair (i, r); P_i2, P_r2 are the exact squared periods."""
    S2 = n_i * n_i * P_i2 + m_r * m_r * P_r2
    alpha2S2 = P_i2 * P_r2 * (q * n_i - p * m_r) ** 2
    if alpha2S2 == 0:
        raise DegenerateAlpha(f"alpha = 0 for (p, q) = ({p}, {q})")
    beta_S = p * n_i * P_i2 + q * m_r * P_r2
    S = math.sqrt(S2)
    Pi, Pr = math.sqrt(P_i2), math.sqrt(P_r2)
    a, b = n_i * Pi, m_r * Pr
    G = np.eye(d)
    if n_i == 0:
        identity = True
    else:
        identity = False
        G[i, i], G[r, i] = a / S, b / S
        G[i, r], G[r, r] = -b / S, a / S
    alpha = Pi * Pr * (q * n_i - p * m_r) / S
    return ReductionStep(stage, (i, r), G, S, S2, p, q, alpha, float(beta_S) / S,
                         alpha2S2, beta_S * beta_S, identity)


def build_step(periods, n, p: int | None = None, q: int | None = None,
               pair: tuple | None = None) -> ReductionStep:
    """A single stage on the last two coordinates (or on ``pair``) of a direction n.

    With n on the pair equal to (0, n_r) the stage is the identity map, S = |n_r| P_r.
    """
    periods = tuple(_frac(a) for a in periods)
    n = tuple(int(x) for x in n)
    d = len(n)
    i, r = pair if pair is not None else (d - 2, d - 1)
    if n[i] == 0 and n[r] == 0:
        raise ValueError("both active components of n vanish")
    choices = [(p, q)] if p is not None and q is not None else DEFAULT_PQ
    last = None
    for pp, qq in choices:
        try:
            return _stage(d, i, r, n[i], n[r], periods[i] ** 2, periods[r] ** 2, pp, qq, 1)
        except DegenerateAlpha as err:
            last = err
    raise DegenerateAlpha(f"no admissible (p, q): {last}")


def reduce_geodesic(periods, n, pq: tuple | None = None) -> ReductionResult:
    """Compose stages until the direction of n is the last coordinate axis."""
    periods = tuple(_frac(a) for a in periods)
    n = tuple(int(x) for x in n)
    d = len(n)
    if len(periods) != d:
        raise ValueError("periods and n have different lengths")
    if not any(n) or math.gcd(*n) != 1:
        raise ValueError(f"{n} is not primitive")
    nz = [j for j in range(d) if n[j] != 0]
    r = nz[-1]
    m_r = n[r]
    P2 = [a * a for a in periods]
    F = np.eye(d)
    steps, transverse = [], []
    for stage, i in enumerate(reversed(nz[:-1]), start=1):
        choices = [pq] if pq is not None else DEFAULT_PQ
        step, last = None, None
        for p, q in choices:
            try:
                step = _stage(d, i, r, n[i], m_r, P2[i], P2[r], p, q, stage)
                break
            except DegenerateAlpha as err:
                last = err
        if step is None:
            raise DegenerateAlpha(f"stage {stage}: no admissible (p, q): {last}")
        steps.append(step)
        F = F @ step.matrix
        P2[i] = step.S2
        transverse.append([math.sqrt(x) for j, x in enumerate(P2) if j != r])
        r, m_r = i, 1
    R = np.eye(d)
    if not steps and n[r] < 0:
        # direction is -e_r: a half turn in the plane (r, j) reverses it with det +1
        j = next(x for x in range(d) if x != r)
        R[r, r] = R[j, j] = -1.0
    if r != d - 1:
        # quarter turn with T e_d = e_r, T e_r = -e_d
        T = np.zeros((d, d))
        for j in range(d):
            if j not in (r, d - 1):
                T[j, j] = 1.0
        T[r, d - 1] = 1.0
        T[d - 1, r] = -1.0
        R = R @ T
    F = F @ R
    return ReductionResult(periods, n, F, steps, R, transverse)


def _test_function(periods, modes: int = 3, seed: int = 7):
    """A fixed smooth Gamma-periodic trigonometric polynomial with `modes` frequencies per axis."""
    rng = np.random.default_rng(seed)
    d = len(periods)
    A = np.array([float(a) for a in periods])
    ks = rng.integers(-modes, modes + 1, size=(4 * modes * d, d))
    ks[: d * modes] = 0
    for j in range(d):
        ks[j * modes:(j + 1) * modes, j] = np.arange(1, modes + 1)
    amp = rng.normal(size=len(ks))
    phase = rng.uniform(0, 2 * np.pi, size=len(ks))
    freq = 2 * np.pi * ks / A

    def u(X):
        X = np.atleast_2d(X)
        return np.cos(X @ freq.T + phase) @ amp

    return u


def verify_periodicity(result: ReductionResult, trials: int = 100, seed: int = 0,
                       beta_shift: float = 0.0) -> dict:
    """Largest violation of each stage's twisted periodicity identity.

    For stage j with map H = G_1 ... G_j, checks
    u(H(x + sum_l k_l P_l e_l + k_r alpha e_r)) = u(H(x - k_r beta e_i)),
    the sum running over coordinates that are still genuine periods.
    ``beta_shift`` perturbs beta (negative control).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    u = _test_function(result.periods)
    d = len(result.n)
    P = np.array([float(a) for a in result.periods])
    H = np.eye(d)
    twisted = set()
    worst = 0.0
    per_stage = []
    if not result.steps:
        for _ in range(trials):
            x = rng.uniform(0, 1, size=d)
            k = rng.integers(-3, 4, size=d)
            # the period lattice seen in the new coordinates is F^T (k * P)
            worst = max(worst, abs(u(result.F @ (x + result.F.T @ (k * P))) - u(result.F @ x))[0])
        return {"max_discrepancy": float(worst), "per_stage": [], "trials": trials}
    for step in result.steps:
        i, r = step.pair
        H = H @ step.matrix
        beta = step.beta + beta_shift
        stage_worst = 0.0
        for _ in range(trials):
            x = rng.uniform(0, 1, size=d)
            k = rng.integers(-3, 4, size=d)
            shift = np.zeros(d)
            for l in range(d):
                if l not in twisted and l not in (i, r):
                    shift[l] = k[l] * P[l]
            shift[i] = k[i] * step.S
            shift[r] = k[r] * step.alpha
            rhs = x.copy()
            rhs[i] -= k[r] * beta
            diff = abs(u(H @ (x + shift)) - u(H @ rhs))[0]
            stage_worst = max(stage_worst, float(diff))
        per_stage.append(stage_worst)
        worst = max(worst, stage_worst)
        P[i] = step.S
        twisted.add(r)
    return {"max_discrepancy": float(worst), "per_stage": per_stage, "trials": trials}
