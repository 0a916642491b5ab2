"""Geodesics on rational flat tori, traced exactly against polyhedral dampings.

A closed geodesic with primitive direction n is X(t) = X_0 + t V with
V = (n_1 A_1, ..., n_d A_d), t in [0, 1).  Everything below works with that
unnormalised parameter so that all breakpoints are rational.

Condition checking enumerates primitive directions up to a bound N.  For
each direction the torus is viewed in coordinates w = X / A = M w' where M
is a unimodular completion of n; geodesics in direction n are then the
vertical lines of R^{d-1} x R modulo Z^d, indexed by their transverse
coordinate y in [0, 1)^{d-1}.  A line avoids every open polyhedron iff y
avoids every projected open polygon; the finitely many combinatorial types
of such lines are sampled and traced with union-interior semantics.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

from . import exact
from .exact import Q, dot, primitive_int, qvec
from .scene_geometry import (
    Contact, Damping, FlatTorus, PointKind, classify_contacts, classify_point,
    fold_point, is_damped_direction, translates_near,
)

ZERO = Q(0)


class Condition(str, enum.Enum):
    WGCC = "WGCC"
    SGCC = "SGCC"
    COND13 = "Cond13"
    FINITE_EXCEPTIONS = "FiniteExceptions"

    @classmethod
    def parse(cls, text: str) -> "Condition":
        key = text.strip().lower()
        aliases = {"wgcc": cls.WGCC, "sgcc": cls.SGCC, "cond13": cls.COND13,
                   "finexc": cls.FINITE_EXCEPTIONS, "finiteexceptions": cls.FINITE_EXCEPTIONS}
        if key not in aliases:
            raise ValueError(f"unknown condition {text!r}")
        return aliases[key]


class Result(str, enum.Enum):
    HOLDS = "Holds"
    FAILS = "Fails"
    UNKNOWN = "Unknown"


class Complement(str, enum.Enum):
    EMPTY = "Empty"
    FINITE_SET = "FiniteSet"
    POSITIVE_MEASURE = "PositiveMeasure"
    UNKNOWN = "Unknown"


# ---------------------------------------------------------------------------
# geodesics

@dataclass(frozen=True)
class Closed:
    n: tuple


@dataclass(frozen=True)
class Dense:
    basis: tuple
    generic: tuple = ()


@dataclass(frozen=True)
class Geodesic:
    base: tuple
    direction: Closed | Dense

    @classmethod
    def closed(cls, torus: FlatTorus, base, n) -> "Geodesic":
        n = tuple(int(x) for x in n)
        if len(n) != torus.dim:
            raise ValueError("direction has the wrong dimension")
        if primitive_int(n) != n:
            raise ValueError(f"{n} is not a primitive integer vector")
        return cls(fold_point(torus, base), Closed(n))

    @classmethod
    def dense(cls, torus: FlatTorus, base, basis) -> "Geodesic":
        basis = tuple(qvec(b) for b in basis)
        if len(basis) < 2 or exact.rank(basis) != len(basis):
            raise ValueError("dense geodesic needs >= 2 independent basis vectors")
        generic = tuple(sum(((k + 1) * b[j] for k, b in enumerate(basis)), ZERO)
                        for j in range(torus.dim))
        return cls(fold_point(torus, base), Dense(basis, generic))

    @property
    def is_closed(self) -> bool:
        return isinstance(self.direction, Closed)

    def velocity(self, torus: FlatTorus) -> tuple:
        if not self.is_closed:
            return self.direction.generic
        return tuple(Q(k) * a for k, a in zip(self.direction.n, torus.periods))

    def point(self, torus: FlatTorus, t) -> tuple:
        return exact.add(self.base, exact.scale(Q(t), self.velocity(torus)))

    def length(self, torus: FlatTorus) -> float:
        """Arclength of one period (display only)."""
        return math.sqrt(sum(float(v) ** 2 for v in self.velocity(torus)))

    def describe(self) -> dict:
        out = {"base": [str(x) for x in self.base]}
        if self.is_closed:
            out["n"] = list(self.direction.n)
        else:
            out["subspace"] = [[str(x) for x in b] for b in self.direction.basis]
        return out


def classify_direction(torus: FlatTorus, velocity) -> Closed:
    """Rational velocities always close up: the relation lattice has rank d - 1."""
    v = [Q(x) / a for x, a in zip(qvec(velocity), torus.periods)]
    if all(x == 0 for x in v):
        raise ValueError("zero velocity")
    return Closed(primitive_int(v))


# ---------------------------------------------------------------------------
# tracing

@dataclass(frozen=True)
class Piece:
    """Either a breakpoint (t0 == t1) or the open interval (t0, t1)."""
    t0: Q
    t1: Q
    kind: PointKind
    contacts: tuple

    @property
    def is_point(self) -> bool:
        return self.t0 == self.t1


@dataclass(frozen=True)
class _Hit:
    polyhedron: int
    translate: tuple
    t_lo: Q
    t_hi: Q
    parallel_faces: tuple  # faces containing the whole line


def _hits(geo: Geodesic, damping: Damping, torus: FlatTorus) -> list[_Hit]:
    X0, V = geo.base, geo.velocity(torus)
    X1 = exact.add(X0, V)
    lo = tuple(min(a, b) for a, b in zip(X0, X1))
    hi = tuple(max(a, b) for a, b in zip(X0, X1))
    out = []
    for i, poly in enumerate(damping.polyhedra):
        for g in translates_near(torus, poly, lo, hi):
            Y0 = exact.sub(X0, g)
            t_lo, t_hi, ok, par = ZERO, Q(1), True, []
            for f, h in enumerate(poly.halfspaces):
                rate = dot(h.normal, V)
                slack = h.slack(Y0)
                if rate == 0:
                    if slack < 0:
                        ok = False
                        break
                    if slack == 0:
                        par.append(f)
                elif rate > 0:
                    t_hi = min(t_hi, slack / rate)
                else:
                    t_lo = max(t_lo, slack / rate)
            if ok and t_lo <= t_hi:
                out.append(_Hit(i, g, t_lo, t_hi, tuple(par)))
    return out


def _contacts_at(damping: Damping, hits: list[_Hit], X, t) -> list[Contact]:
    out = []
    for hit in hits:
        if hit.t_lo <= t <= hit.t_hi:
            poly = damping.polyhedra[hit.polyhedron]
            out.append(Contact(hit.polyhedron, hit.translate,
                               poly.active_faces(exact.sub(X, hit.translate))))
    return out


def trace_pieces(geo: Geodesic, damping: Damping, torus: FlatTorus,
                 hits: list[_Hit] | None = None) -> list[Piece]:
    """Partition one period [0, 1) into breakpoints and open pieces of constant type."""
    if not geo.is_closed:
        raise ValueError("tracing needs a closed geodesic")
    hits = _hits(geo, damping, torus) if hits is None else hits
    bps = {ZERO, Q(1)}
    for h in hits:
        bps.update((h.t_lo, h.t_hi))
    bps = sorted(b for b in bps if 0 <= b <= 1)
    pieces = []

    def make(t0, t1):
        t = (t0 + t1) / 2
        X = geo.point(torus, t)
        contacts = _contacts_at(damping, hits, X, t)
        kind = classify_contacts(damping, torus, contacts)
        return Piece(t0, t1, kind, tuple(contacts))

    for a, b in zip(bps, bps[1:]):
        pieces.append(make(a, a))
        pieces.append(make(a, b))
    return pieces


@dataclass(frozen=True)
class TraceResult:
    geodesic: Geodesic
    intervals: tuple  # maximal open intervals (t0, t1); t1 may exceed 1 when wrapping

    @property
    def never(self) -> bool:
        return not self.intervals

    def max_gap(self, torus: FlatTorus) -> float:
        """Longest arclength stretch of one period spent outside Int(supp a)."""
        if not self.intervals:
            return math.inf
        ivs = sorted((float(a), float(b)) for a, b in self.intervals)
        gaps = [nxt[0] - cur[1] for cur, nxt in zip(ivs, ivs[1:])]
        gaps.append(ivs[0][0] + 1 - ivs[-1][1])
        return max(0.0, max(gaps)) * self.geodesic.length(torus)


def trace_to_interior(geo: Geodesic, damping: Damping, torus: FlatTorus,
                      pieces: list[Piece] | None = None) -> TraceResult:
    pieces = trace_pieces(geo, damping, torus) if pieces is None else pieces
    if all(p.kind is PointKind.INTERIOR for p in pieces):
        return TraceResult(geo, ((ZERO, Q(1)),))
    runs: list[list] = []
    current = None
    for p in pieces:
        if p.kind is PointKind.INTERIOR:
            if current is None:
                current = [p.t0, p.t1]
            else:
                current[1] = p.t1
        else:
            if current is not None and current[0] < current[1]:
                runs.append(current)
            current = None
    if current is not None and current[0] < current[1]:
        runs.append(current)
    # the breakpoint t = 0 == 1 joins a run ending at 1 with one starting at 0
    if len(runs) >= 2 and pieces[0].kind is PointKind.INTERIOR \
            and runs[0][0] == 0 and runs[-1][1] == 1:
        first = runs.pop(0)
        runs[-1][1] = 1 + first[1]
    return TraceResult(geo, tuple((a, b) for a, b in runs))


@dataclass(frozen=True)
class ContactSegment:
    polyhedron: int
    translate: tuple
    faces: tuple
    t_a: Q
    t_b: Q

    @property
    def punctual(self) -> bool:
        return self.t_a == self.t_b


def contact_segments(geo: Geodesic, damping: Damping, torus: FlatTorus) -> list[ContactSegment]:
    """Maximal parameter intervals on which the geodesic sits on the boundary of one polyhedron."""
    hits = _hits(geo, damping, torus)
    pieces = trace_pieces(geo, damping, torus, hits)
    out = []
    for hit in hits:
        run = None
        for p in pieces:
            inside = hit.t_lo <= p.t0 and p.t1 <= hit.t_hi
            if inside and p.kind is PointKind.BOUNDARY:
                run = [p.t0, p.t1] if run is None else [run[0], p.t1]
                continue
            if run is not None:
                out.append(_segment(damping, geo, torus, hit, run))
                run = None
        if run is not None:
            out.append(_segment(damping, geo, torus, hit, run))
    out.sort(key=lambda s: (s.t_a, s.t_b, s.polyhedron))
    return out


def _segment(damping, geo, torus, hit: _Hit, run) -> ContactSegment:
    t_a, t_b = run
    if t_a < t_b:
        faces = hit.parallel_faces
    else:
        X = exact.sub(geo.point(torus, t_a), hit.translate)
        faces = damping.polyhedra[hit.polyhedron].active_faces(X)
    return ContactSegment(hit.polyhedron, hit.translate, tuple(faces), t_a, t_b)


# ---------------------------------------------------------------------------
# damped normal directions

def _normal_basis(V: Sequence) -> list[tuple]:
    """Rational basis of the hyperplane orthogonal to V."""
    k = next(j for j, v in enumerate(V) if v != 0)
    basis = []
    for j in range(len(V)):
        if j == k:
            continue
        b = [ZERO] * len(V)
        b[j] = Q(1)
        b[k] = -Q(V[j]) / V[k]
        basis.append(tuple(b))
    return basis


def _nullspace(rows: list[tuple], n: int) -> list[tuple]:
    """Rational basis of {c : r.c = 0 for all rows}."""
    mat = [list(r) for r in rows]
    pivots = []
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, len(mat)) if mat[i][col] != 0), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        p = mat[r][col]
        mat[r] = [x / p for x in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][col] != 0:
                f = mat[i][col]
                mat[i] = [x - f * y for x, y in zip(mat[i], mat[r])]
        pivots.append(col)
        r += 1
    free = [c for c in range(n) if c not in pivots]
    out = []
    for fc in free:
        v = [ZERO] * n
        v[fc] = Q(1)
        for i, pc in enumerate(pivots):
            v[pc] = -mat[i][fc]
        out.append(tuple(v))
    return out


@dataclass(frozen=True)
class NormalCell:
    """A relatively open cone of normal directions on which damping status is constant."""
    signs: tuple
    dim: int
    representative: tuple  # direction in X coordinates (orthogonal to the geodesic)
    damped: bool

    def describe(self) -> dict:
        return {"dim": self.dim, "signs": list(self.signs), "damped": self.damped,
                "direction": [str(x) for x in self.representative]}


@dataclass(frozen=True)
class NormalDampingReport:
    geodesic: Geodesic
    hyperplanes: tuple   # face normals projected to the normal space (X coordinates)
    cells: tuple
    complement: Complement
    exceptional: tuple = ()   # FiniteSet directions
    witness: tuple | None = None  # PositiveMeasure / Unknown witness direction

    @property
    def damped_cells(self) -> list[NormalCell]:
        return [c for c in self.cells if c.damped]

    def describe(self) -> dict:
        out = {"complement": self.complement.value,
               "damped_cones": [c.describe() for c in self.damped_cells]}
        if self.exceptional:
            out["exceptional_directions"] = [[str(x) for x in v] for v in self.exceptional]
        if self.witness is not None:
            out["witness_direction"] = [str(x) for x in self.witness]
        return out


def _canon_hyperplane(h: tuple) -> tuple:
    lead = next(x for x in h if x != 0)
    return tuple(x / abs(lead) * (1 if lead > 0 else -1) for x in h)


def damped_normal_set(geo: Geodesic, damping: Damping, torus: FlatTorus,
                      pieces: list[Piece] | None = None) -> NormalDampingReport:
    """Exact damped / undamped decomposition of the normal sphere of a closed geodesic.

    The normal space is cut by the hyperplanes orthogonal to every face that
    contains a positive-length stretch of the geodesic.  Inside each cell of
    that arrangement the local picture at X + delta Xi is the same, so one
    representative per cell decides the status of the whole cell.
    """
    pieces = trace_pieces(geo, damping, torus) if pieces is None else pieces
    V = geo.velocity(torus)
    d = torus.dim
    B = _normal_basis(V)
    k = d - 1
    stretches = [p for p in pieces if not p.is_point and p.kind is PointKind.BOUNDARY]
    planes = {}
    for p in stretches:
        for c in p.contacts:
            poly = damping.polyhedra[c.polyhedron]
            for f in c.faces:
                nf = poly.halfspaces[f].normal
                if dot(nf, V) != 0:
                    raise RuntimeError("face along a contact stretch is not parallel to the geodesic")
                h = tuple(dot(nf, b) for b in B)
                planes.setdefault(_canon_hyperplane(h), nf)
    H = list(planes)
    points = [geo.point(torus, (p.t0 + p.t1) / 2) for p in stretches]

    def to_X(c):
        return primitive_int(tuple(sum((c[i] * B[i][j] for i in range(k)), ZERO) for j in range(d)))

    def damped(xi) -> bool:
        return any(is_damped_direction(damping, torus, X, xi) for X in points)

    cells = []

    def dfs(idx: int, signs: list, cons: list):
        if exact.feasible_point(cons, k) is None:
            return
        if idx < len(H):
            h = H[idx]
            neg = tuple(-x for x in h)
            dfs(idx + 1, signs + [1], cons + [(neg, ZERO, True)])
            dfs(idx + 1, signs + [-1], cons + [(h, ZERO, True)])
            dfs(idx + 1, signs + [0], cons + [(h, ZERO, False), (neg, ZERO, False)])
            return
        zero_rows = [H[i] for i, s in enumerate(signs) if s == 0]
        dim = k - exact.rank(zero_rows) if zero_rows else k
        if any(signs):
            rep = exact.feasible_point(cons, k)
            xi = to_X(rep)
            cells.append(NormalCell(tuple(signs), dim, xi, damped(xi)))
        else:
            null = _nullspace(zero_rows, k)
            if not null:
                return
            for sgn in (1, -1):
                xi = to_X(tuple(sgn * x for x in null[0]))
                cells.append(NormalCell(tuple(signs), dim, xi, damped(xi)))

    dfs(0, [], [])
    hyper_X = tuple(tuple(planes[h]) for h in H)
    undamped = [c for c in cells if not c.damped]
    if not stretches:
        xi = cells[0].representative if cells else None
        return NormalDampingReport(geo, hyper_X, tuple(cells), Complement.POSITIVE_MEASURE, (), xi)
    if not undamped:
        return NormalDampingReport(geo, hyper_X, tuple(cells), Complement.EMPTY)
    full = [c for c in undamped if c.dim == k]
    if k >= 2 and full:
        return NormalDampingReport(geo, hyper_X, tuple(cells), Complement.POSITIVE_MEASURE,
                                   (), full[0].representative)
    if all(c.dim == 1 for c in undamped):
        dirs = tuple(sorted({c.representative for c in undamped}))
        return NormalDampingReport(geo, hyper_X, tuple(cells), Complement.FINITE_SET, dirs)
    return NormalDampingReport(geo, hyper_X, tuple(cells), Complement.UNKNOWN,
                               (), undamped[0].representative)


# ---------------------------------------------------------------------------
# dense geodesics

def orbit_closure_meets_interior(geo: Geodesic, damping: Damping, torus: FlatTorus):
    """Does the subtorus (X_0 + F)/Gamma meet Int(supp a)?  Returns (bool, witness point)."""
    if geo.is_closed:
        raise ValueError("orbit closures are computed for dense geodesics")
    basis = geo.direction.basis
    L = []
    for b in basis:
        w = primitive_int([x / a for x, a in zip(b, torus.periods)])
        L.append(tuple(Q(x) * a for x, a in zip(w, torus.periods)))
    X0 = geo.base
    corners = [exact.add(X0, tuple(sum((s * l[j] for s, l in zip(ss, L)), ZERO)
                                   for j in range(torus.dim)))
               for ss in itertools.product((0, 1), repeat=len(L))]
    lo = tuple(min(c[j] for c in corners) for j in range(torus.dim))
    hi = tuple(max(c[j] for c in corners) for j in range(torus.dim))
    m = len(L)

    def point(s):
        return exact.add(X0, tuple(sum((si * l[j] for si, l in zip(s, L)), ZERO)
                                   for j in range(torus.dim)))

    touching = []
    for poly in damping.polyhedra:
        for g in translates_near(torus, poly, lo, hi):
            rows = []
            for h in poly.halfspaces:
                rows.append((tuple(dot(h.normal, l) for l in L),
                             h.offset + dot(h.normal, g) - dot(h.normal, X0)))
            s = exact.feasible_point([(a, b, True) for a, b in rows], m)
            if s is not None:
                return True, point(s)
            touching.append(rows)
    for rows in touching:
        cons = [(a, b, not all(x == 0 for x in a)) for a, b in rows]
        s = exact.feasible_point(cons, m)
        if s is None:
            s = exact.feasible_point([(a, b, False) for a, b in rows], m)
        if s is not None and classify_point(damping, torus, point(s)).kind is PointKind.INTERIOR:
            return True, point(s)
    return False, None


# ---------------------------------------------------------------------------
# transverse analysis of one direction

def primitive_directions(d: int, bound: int) -> list[tuple]:
    """Primitive integer vectors with max |n_j| <= bound, one per +- pair."""
    out = []
    for n in itertools.product(range(-bound, bound + 1), repeat=d):
        if not any(n):
            continue
        lead = next(x for x in n if x != 0)
        if lead < 0 or math.gcd(*n) != 1:
            continue
        out.append(n)
    out.sort(key=lambda n: (max(abs(x) for x in n), sum(abs(x) for x in n), n))
    return out


@dataclass
class _Polygon:
    poly: int
    shift: tuple       # transverse integer shift
    rows: list         # [(a, b)] facets, a.y <= b
    verts: list
    lo: tuple
    hi: tuple
    lifted: list       # [(r, c)] rows of the polyhedron in (y, t) coordinates (shift applied)


def _transverse(n: tuple, damping: Damping, torus: FlatTorus):
    """Project every polyhedron along n; return (M, polygons near [0,1]^{d-1})."""
    d = torus.dim
    M = exact.unimodular_completion(n)
    A = torus.periods
    k = d - 1
    out = []
    for i, poly in enumerate(damping.polyhedra):
        lifted = []
        for h in poly.halfspaces:
            an = [h.normal[j] * A[j] for j in range(d)]
            r = tuple(sum((an[j] * M[j][c] for j in range(d)), ZERO) for c in range(d))
            lifted.append((r, h.offset))
        proj = exact.project_last([(r, c, False) for r, c in lifted], d)
        rows = [(a, b) for a, b, _ in proj]
        verts = exact.box_vertices(proj, k)
        if k == 2:
            rows = [(a, b) for a, b in rows if sum(1 for v in verts if dot(a, v) == b) >= 2]
        lo = tuple(min(v[j] for v in verts) for j in range(k))
        hi = tuple(max(v[j] for v in verts) for j in range(k))
        ranges = [range(math.ceil(-hi[j]), math.floor(1 - lo[j]) + 1) for j in range(k)]
        for shift in itertools.product(*ranges):
            s = tuple(Q(x) for x in shift)
            out.append(_Polygon(
                i, shift,
                [(a, b + dot(a, s)) for a, b in rows],
                [exact.add(v, s) for v in verts],
                exact.add(lo, s), exact.add(hi, s),
                [(r, c + dot(r[:k], s)) for r, c in lifted],
            ))
    return M, out


def _in_open(pg: _Polygon, y) -> bool:
    return all(dot(a, y) < b for a, b in pg.rows)


def _in_closed(pg: _Polygon, y) -> bool:
    return all(dot(a, y) <= b for a, b in pg.rows)


def _candidates_1d(polys: list[_Polygon]):
    """Transverse circle for d = 2: uncovered endpoints and free gaps."""
    ivs = sorted((pg.lo[0], pg.hi[0]) for pg in polys)
    free = []
    cur = ZERO
    for lo, hi in ivs:
        if lo > cur:
            free.append((cur + lo) / 2)
        cur = max(cur, hi)
    if cur < 1:
        free.append((cur + 1) / 2)
    pts = set()
    for lo, hi in ivs:
        for e in (lo, hi):
            e = e - math.floor(e)
            if not any(a < e + j < b for a, b in ivs for j in (-1, 0, 1)):
                pts.add(e)
    free = [f - math.floor(f) for f in free]
    return sorted((p,) for p in pts), [(f,) for f in free]


def _line_param(y0, dv, a, b):
    """Solve a.(y0 + s dv) = b for s; None when parallel."""
    rate = dot(a, dv)
    if rate == 0:
        return None
    return (b - dot(a, y0)) / rate


def _open_interval_on_line(pg: _Polygon, y0, dv):
    lo, hi = None, None
    for a, b in pg.rows:
        rate = dot(a, dv)
        rhs = b - dot(a, y0)
        if rate == 0:
            if rhs <= 0:
                return None
        elif rate > 0:
            hi = rhs / rate if hi is None else min(hi, rhs / rate)
        else:
            lo = rhs / rate if lo is None else max(lo, rhs / rate)
    if lo is not None and hi is not None and lo >= hi:
        return None
    return lo, hi


def _subtract(lo, hi, opens):
    """Closed [lo, hi] minus a union of open intervals, as closed pieces."""
    pieces = [(lo, hi)]
    for a, b in opens:
        nxt = []
        for p, q in pieces:
            a_ = p - 1 if a is None else a
            b_ = q + 1 if b is None else b
            if b_ <= p or a_ >= q:
                nxt.append((p, q))
                continue
            if a_ >= p:
                nxt.append((p, a_))
            if b_ <= q:
                nxt.append((b_, q))
        pieces = nxt
    return pieces


def _bbox_meets(lo1, hi1, lo2, hi2) -> bool:
    return all(a <= d and c <= b for a, b, c, d in zip(lo1, hi1, lo2, hi2))


def _lifted_t(lifted_row, y0, dv):
    """t along the lifted face as an affine function (alpha, beta) of s, or None."""
    r, c = lifted_row
    rt = r[-1]
    if rt == 0:
        return None
    base = (c - dot(r[:-1], y0)) / rt
    slope = -dot(r[:-1], dv) / rt
    return base, slope


def _candidates_2d(polys: list[_Polygon]):
    """Sample every combinatorial type of uncovered transverse point for d = 3."""
    unit_lo, unit_hi = (ZERO, ZERO), (Q(1), Q(1))
    pts = set()
    free = []
    for pg in polys:
        for a, b in pg.rows:
            ends = [v for v in pg.verts if dot(a, v) == b]
            if len(ends) < 2:
                continue
            ends.sort()
            y0, y1 = ends[0], ends[-1]
            dv = exact.sub(y1, y0)
            s_lo, s_hi = ZERO, Q(1)
            for j in range(2):
                if dv[j] == 0:
                    if not 0 <= y0[j] <= 1:
                        s_lo, s_hi = Q(1), ZERO
                    continue
                c0, c1 = (0 - y0[j]) / dv[j], (1 - y0[j]) / dv[j]
                s_lo, s_hi = max(s_lo, min(c0, c1)), min(s_hi, max(c0, c1))
            if s_lo > s_hi:
                continue
            seg_lo = tuple(min(y0[j] + s_lo * dv[j], y0[j] + s_hi * dv[j]) for j in range(2))
            seg_hi = tuple(max(y0[j] + s_lo * dv[j], y0[j] + s_hi * dv[j]) for j in range(2))
            near = [q for q in polys if _bbox_meets(q.lo, q.hi, seg_lo, seg_hi)]
            opens = []
            for q in near:
                if q is pg:
                    continue
                iv = _open_interval_on_line(q, y0, dv)
                if iv is not None:
                    opens.append(iv)
            remaining = _subtract(s_lo, s_hi, opens)
            if not remaining:
                continue
            splits = set()
            for q in near:
                for a2, b2 in q.rows:
                    s = _line_param(y0, dv, a2, b2)
                    if s is not None:
                        splits.add(s)
            for p, q_ in remaining:
                cuts = sorted({p, q_} | {s for s in splits if p < s < q_})
                cuts = _refine_by_lifts(pg, near, y0, dv, cuts)
                for s in cuts:
                    pts.add(exact.add(y0, exact.scale(s, dv)))
                for s, s2 in zip(cuts, cuts[1:]):
                    mid = exact.add(y0, exact.scale((s + s2) / 2, dv))
                    pts.add(mid)
                    w = _free_side(near, mid, a)
                    if w is not None:
                        free.append(w)
    if not polys:
        free.append((Q(1, 2), Q(1, 2)))
    folded = {tuple(x - math.floor(x) for x in p) for p in pts}
    folded_free = [tuple(x - math.floor(x) for x in p) for p in free]
    return sorted(folded), folded_free


def _refine_by_lifts(pg, near, y0, dv, cuts):
    """Add the s values where the order of face crossings along the lifted line changes."""
    out = set(cuts)
    for p, q in zip(cuts, cuts[1:]):
        mid = exact.add(y0, exact.scale((p + q) / 2, dv))
        owners = [r for r in near if _in_closed(r, mid)]
        funcs = []
        for r in owners:
            for row in r.lifted:
                f = _lifted_t(row, y0, dv)
                if f is not None:
                    funcs.append(f)
        for (a1, b1), (a2, b2) in itertools.combinations(funcs, 2):
            db = b1 - b2
            if db == 0:
                continue
            v0, v1 = a1 - a2 + db * p, a1 - a2 + db * q
            lo, hi = min(v0, v1), max(v0, v1)
            for j in range(math.floor(lo), math.ceil(hi) + 1):
                s = (j - (a1 - a2)) / db
                if p < s < q:
                    out.add(s)
    return sorted(out)


def _free_side(near, mid, a):
    """If the side of the edge line opposite its polygon is locally uncovered, return a point there."""
    owners = [q for q in near if _in_closed(q, mid)]
    for q in owners:
        tight = [a2 for a2, b2 in q.rows if dot(a2, mid) == b2]
        if all(dot(a2, a) < 0 for a2 in tight):
            return None
    eta = Q(1, 4)
    for _ in range(80):
        w = exact.add(mid, exact.scale(eta, a))
        if not any(_in_closed(q, w) for q in near):
            return w
        eta /= 2
    return None


# ---------------------------------------------------------------------------
# verdicts

@dataclass
class Witness:
    geodesic: Geodesic
    evidence: dict

    def describe(self) -> dict:
        out = self.geodesic.describe()
        out["evidence"] = self.evidence
        return out


@dataclass
class ConditionVerdict:
    condition: Condition
    result: Result
    bound: int
    witnesses: list = field(default_factory=list)
    certified: bool = False
    notes: list = field(default_factory=list)

    @property
    def label(self) -> str:
        if self.result is Result.HOLDS and not self.certified:
            return f"Holds (bound {self.bound})"
        return self.result.value

    def to_json(self, max_witnesses: int = 50) -> dict:
        return {
            "condition": self.condition.value,
            "result": self.result.value,
            "label": self.label,
            "bound": self.bound,
            "certified": self.certified,
            "witnesses": [w.describe() for w in self.witnesses[:max_witnesses]],
            "witness_count": len(self.witnesses),
            "notes": list(self.notes),
        }


@dataclass
class SceneAnalysis:
    """Never-entering geodesics found up to a direction bound."""
    bound: int
    free: list = field(default_factory=list)            # Witness: misses closed supp(a)
    razing: list = field(default_factory=list)          # (Witness, NormalDampingReport)
    dense: list = field(default_factory=list)           # Witness: dense family avoiding Int
    late: list = field(default_factory=list)            # Witness: enters, but after the horizon
    notes: list = field(default_factory=list)
    complete: bool = True


def analyze_scene(damping: Damping, torus: FlatTorus, bound: int,
                  horizon: float | None = None, subspaces=None) -> SceneAnalysis:
    if bound < 1:
        raise ValueError("direction bound must be >= 1")
    if horizon is not None and not horizon > 0:
        raise ValueError("time horizon must be positive")
    d = torus.dim
    res = SceneAnalysis(bound)
    if d > 3:
        res.complete = False
        res.notes.append("transverse enumeration implemented for d <= 3; higher dimensions "
                         "only test the coordinate-axis lines through lattice-rational corners")
        _analyze_axes(damping, torus, res, horizon)
        return res
    dirs = primitive_directions(d, bound)
    seen_free = set()
    for n in dirs:
        M, polys = _transverse(n, damping, torus)
        if d == 2:
            pts, free = _candidates_1d(polys)
        else:
            pts, free = _candidates_2d(polys)
        if free:
            y = free[0]
            geo = _lift(torus, M, y, n)
            if n not in seen_free:
                seen_free.add(n)
                tr = trace_to_interior(geo, damping, torus)
                pcs = trace_pieces(geo, damping, torus)
                if tr.never and all(p.kind is PointKind.EXTERIOR for p in pcs):
                    res.free.append(Witness(geo, {"kind": "misses_support"}))
        for y in pts:
            geo = _lift(torus, M, y, n)
            pieces = trace_pieces(geo, damping, torus)
            tr = trace_to_interior(geo, damping, torus, pieces)
            if tr.never:
                if all(p.kind is PointKind.EXTERIOR for p in pieces):
                    res.free.append(Witness(geo, {"kind": "misses_support"}))
                    continue
                rep = damped_normal_set(geo, damping, torus, pieces)
                res.razing.append((Witness(geo, {"kind": "razes_boundary",
                                                 "normal": rep.describe()}), rep))
            elif horizon is not None:
                gap = tr.max_gap(torus)
                if gap >= horizon:
                    res.late.append(Witness(geo, {"kind": "late_entry", "gap": gap}))
    if d == 3:
        _analyze_planes(damping, torus, dirs, res, subspaces)
    return res


def _lift(torus: FlatTorus, M, y, n) -> Geodesic:
    d = torus.dim
    wp = tuple(y) + (ZERO,)
    w = tuple(sum((M[j][c] * wp[c] for c in range(d)), ZERO) for j in range(d))
    X = tuple(x * a for x, a in zip(w, torus.periods))
    return Geodesic.closed(torus, X, n)


def _analyze_axes(damping, torus, res: SceneAnalysis, horizon):
    d = torus.dim
    for axis in range(d):
        n = tuple(1 if j == axis else 0 for j in range(d))
        coords = {ZERO}
        for poly in damping.polyhedra:
            for v in poly.vertices:
                coords.update(v[j] for j in range(d) if j != axis)
        coords = sorted(coords)
        for combo in itertools.product(coords, repeat=d - 1):
            base = list(combo)
            base.insert(axis, ZERO)
            geo = Geodesic.closed(torus, base, n)
            pieces = trace_pieces(geo, damping, torus)
            if trace_to_interior(geo, damping, torus, pieces).never:
                if all(p.kind is PointKind.EXTERIOR for p in pieces):
                    res.free.append(Witness(geo, {"kind": "misses_support"}))
                else:
                    rep = damped_normal_set(geo, damping, torus, pieces)
                    res.razing.append((Witness(geo, {"kind": "razes_boundary",
                                                     "normal": rep.describe()}), rep))
            if len(res.razing) + len(res.free) > 200:
                return


def _plane_normals(dirs, subspaces, torus) -> list[tuple]:
    ms = set()
    for n1, n2 in itertools.combinations(dirs, 2):
        c = exact.cross3(n1, n2)
        if any(c):
            m = primitive_int(c)
            if next(x for x in m if x != 0) < 0:
                m = tuple(-x for x in m)
            ms.add(m)
    for basis in subspaces or ():
        b = [[Q(x) / a for x, a in zip(v, torus.periods)] for v in basis]
        if len(b) == 2:
            c = exact.cross3(b[0], b[1])
            if any(c):
                m = primitive_int(c)
                if next(x for x in m if x != 0) < 0:
                    m = tuple(-x for x in m)
                ms.add(m)
    return sorted(ms, key=lambda m: (max(abs(x) for x in m), m))


def _analyze_planes(damping, torus, dirs, res: SceneAnalysis, subspaces):
    """Two-dimensional orbit closures (X_0 + F)/Gamma indexed by the primitive normal m."""
    A = torus.periods
    wverts = [[tuple(x / a for x, a in zip(v, A)) for v in poly.vertices]
              for poly in damping.polyhedra]
    for m in _plane_normals(dirs, subspaces, torus):
        ivs = []
        for verts in wverts:
            vals = [dot(m, v) for v in verts]
            lo, hi = min(vals), max(vals)
            for j in range(math.ceil(-hi), math.floor(1 - lo) + 1):
                ivs.append((lo + j, hi + j))
        ivs.sort()
        gaps, cur = [], ZERO
        for lo, hi in ivs:
            if lo > cur:
                gaps.append((cur, lo))
            cur = max(cur, hi)
        if cur < 1:
            gaps.append((cur, Q(1)))
        cands = set()
        for lo, hi in ivs:
            for e in (lo, hi):
                e = e - math.floor(e)
                if not any(a < e + j < b for a, b in ivs for j in (-1, 0, 1)):
                    cands.add(e)
        free_c = [(a + b) / 2 for a, b in gaps]
        if not ivs:
            free_c = [Q(1, 2)]
        basis = _plane_basis(m, A)
        for c in sorted(cands) + free_c:
            j = next(i for i, x in enumerate(m) if x != 0)
            w0 = [ZERO] * 3
            w0[j] = c / m[j]
            X0 = tuple(x * a for x, a in zip(w0, A))
            geo = Geodesic.dense(torus, X0, basis)
            meets, _ = orbit_closure_meets_interior(geo, damping, torus)
            if not meets:
                kind = "coset_misses_support" if c in free_c else "coset_avoids_interior"
                res.dense.append(Witness(geo, {"kind": kind, "plane_normal": list(m)}))


def _plane_basis(m, A) -> list[tuple]:
    """Lattice basis (X coordinates) of the plane orthogonal to m in w coordinates.

    Rows 1..d-1 of M^-1, for M a unimodular completion of m, are integer
    vectors orthogonal to m spanning that lattice.
    """
    Minv = exact.int_matrix_inverse(exact.unimodular_completion(primitive_int(m)))
    return [tuple(Q(x) * a for x, a in zip(row, A)) for row in Minv[:-1]]


def check_conditions(damping: Damping, torus: FlatTorus, conditions, bound: int = 3,
                     horizon: float | None = None, subspaces=None,
                     analysis: SceneAnalysis | None = None) -> dict:
    """Verdicts for several conditions from one shared scene analysis."""
    conds = [c if isinstance(c, Condition) else Condition.parse(c) for c in conditions]
    an = analysis or analyze_scene(damping, torus, bound, horizon, subspaces)
    return {c: _verdict(c, an) for c in conds}


def check_condition(damping: Damping, torus: FlatTorus, condition, bound: int = 3,
                    horizon: float | None = None, subspaces=None) -> ConditionVerdict:
    return next(iter(check_conditions(damping, torus, [condition], bound, horizon,
                                      subspaces).values()))


def _sorted(ws: list) -> list:
    return sorted(ws, key=lambda w: (w.geodesic.describe().get("n", []),
                                     [Q(x) for x in w.geodesic.describe()["base"]]))


def _verdict(cond: Condition, an: SceneAnalysis) -> ConditionVerdict:
    razing = [w for w, _ in an.razing]
    notes = list(an.notes)
    unknown = not an.complete
    if cond is Condition.WGCC:
        fails = an.free + [w for w in an.dense if w.evidence["kind"] == "coset_misses_support"]
    elif cond is Condition.SGCC:
        fails = an.free + razing + an.dense + an.late
    elif cond is Condition.COND13:
        fails = an.free + [w for w, rep in an.razing if rep.complement is not Complement.EMPTY]
        fails += an.dense  # a dense orbit avoiding the interior cannot be damped in every direction
    else:
        fails = an.free + [w for w, rep in an.razing
                           if rep.complement is Complement.POSITIVE_MEASURE]
        undecided = [w for w, rep in an.razing if rep.complement is Complement.UNKNOWN]
        if an.dense or undecided:
            unknown = True
            notes.append("dense families or unclassified complements present; "
                         "finite-exception status not decided for them")
    if fails:
        return ConditionVerdict(cond, Result.FAILS, an.bound, _sorted(fails), True, notes)
    if unknown:
        return ConditionVerdict(cond, Result.UNKNOWN, an.bound, [], False, notes)
    notes.append(f"no failing geodesic among primitive directions with max|n_j| <= {an.bound}")
    return ConditionVerdict(cond, Result.HOLDS, an.bound, [], False, notes)
