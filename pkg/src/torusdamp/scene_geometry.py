"""Flat tori, rational polyhedra and characteristic-function dampings.

Everything here is exact: coordinates, periods and half-space data are
exact rationals, and point classification against the damped set is
decided without rounding.  The damped set is the closed union of the
polyhedra and their lattice translates; "interior" is the interior of
that union, so abutting polyhedra behave as one region.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

from . import exact
from .exact import Q, dot, qvec, to_q

MAX_DIM = 6


class SceneError(ValueError):
    """Raised for malformed or invalid scenes."""


@dataclass(frozen=True)
class FlatTorus:
    periods: tuple

    def __post_init__(self):
        periods = qvec(self.periods)
        object.__setattr__(self, "periods", periods)
        if not 2 <= len(periods) <= MAX_DIM:
            raise SceneError(f"torus dimension must be in [2, {MAX_DIM}], got {len(periods)}")
        if any(p <= 0 for p in periods):
            raise SceneError("torus periods must be positive")

    @property
    def dim(self) -> int:
        return len(self.periods)

    @property
    def volume(self) -> Q:
        return math.prod(self.periods, start=Q(1))


@dataclass(frozen=True)
class HalfSpace:
    """The closed half-space {X : normal . X <= offset}."""

    normal: tuple
    offset: Q

    def __post_init__(self):
        object.__setattr__(self, "normal", qvec(self.normal))
        object.__setattr__(self, "offset", to_q(self.offset))
        if all(x == 0 for x in self.normal):
            raise SceneError("half-space normal must be nonzero")

    def slack(self, X) -> Q:
        """offset - normal . X; nonnegative inside, zero on the face."""
        return self.offset - dot(self.normal, X)

    def shifted(self, shift) -> "HalfSpace":
        return HalfSpace(self.normal, self.offset + dot(self.normal, shift))


@dataclass(frozen=True)
class Polyhedron:
    halfspaces: tuple
    label: str = ""

    def __post_init__(self):
        hs = tuple(self.halfspaces)
        if not hs:
            raise SceneError("polyhedron needs at least one half-space")
        dims = {len(h.normal) for h in hs}
        if len(dims) != 1:
            raise SceneError("half-space normals have inconsistent dimensions")
        object.__setattr__(self, "halfspaces", hs)

    @property
    def dim(self) -> int:
        return len(self.halfspaces[0].normal)

    def constraints(self, strict: bool = False, shift=None) -> list:
        shift = shift or (Q(0),) * self.dim
        return [(h.normal, h.offset + dot(h.normal, shift), strict) for h in self.halfspaces]

    def contains(self, X) -> bool:
        return all(h.slack(X) >= 0 for h in self.halfspaces)

    def active_faces(self, X) -> tuple[int, ...]:
        return tuple(i for i, h in enumerate(self.halfspaces) if h.slack(X) == 0)

    @cached_property
    def interior_point(self) -> tuple | None:
        return exact.feasible_point(self.constraints(strict=True), self.dim)

    def is_bounded(self) -> bool:
        rows = [(h.normal, Q(0), False) for h in self.halfspaces]
        for j in range(self.dim):
            for sign in (1, -1):
                e = tuple(Q(-sign if i == j else 0) for i in range(self.dim))
                if exact.feasible_point(rows + [(e, Q(-1), False)], self.dim) is not None:
                    return False
        return True

    @cached_property
    def vertices(self) -> list[tuple]:
        return exact.box_vertices(self.constraints(), self.dim)

    @cached_property
    def bbox(self) -> tuple[tuple, tuple]:
        verts = self.vertices
        if not verts:
            raise SceneError(f"polyhedron {self.label!r} has no vertices")
        lo = tuple(min(v[j] for v in verts) for j in range(self.dim))
        hi = tuple(max(v[j] for v in verts) for j in range(self.dim))
        return lo, hi

    @cached_property
    def volume(self) -> Q:
        """Exact volume, available for axis-aligned boxes only."""
        lo, hi = self.bbox
        for h in self.halfspaces:
            if sum(1 for x in h.normal if x != 0) != 1:
                raise SceneError("exact volume implemented for boxes only")
        return math.prod((b - a for a, b in zip(lo, hi)), start=Q(1))


@dataclass(frozen=True)
class Damping:
    polyhedra: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "polyhedra", tuple(self.polyhedra))

    def __len__(self) -> int:
        return len(self.polyhedra)

    def labels(self) -> list[str]:
        return [p.label for p in self.polyhedra]


class PointKind(enum.Enum):
    INTERIOR = "Interior"
    BOUNDARY = "Boundary"
    EXTERIOR = "Exterior"


@dataclass(frozen=True)
class Contact:
    polyhedron: int
    translate: tuple
    faces: tuple


@dataclass(frozen=True)
class PointClass:
    kind: PointKind
    contacts: tuple = ()


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, kind: str, detail: str, witness=None):
        self.violations.append({"kind": kind, "detail": detail, "witness": witness})


def fold_point(torus: FlatTorus, X) -> tuple:
    """Reduce X modulo the period lattice into [0, A_1) x ... x [0, A_d)."""
    X = qvec(X)
    return tuple(x - math.floor(x / a) * a for x, a in zip(X, torus.periods))


def translates_near(torus: FlatTorus, poly: Polyhedron, lo, hi) -> list[tuple]:
    """Lattice vectors g with (poly + g) meeting the closed box [lo, hi]."""
    plo, phi = poly.bbox
    ranges = []
    for j, a in enumerate(torus.periods):
        kmin = math.ceil((lo[j] - phi[j]) / a)
        kmax = math.floor((hi[j] - plo[j]) / a)
        if kmin > kmax:
            return []
        ranges.append(range(kmin, kmax + 1))
    return [tuple(k * a for k, a in zip(ks, torus.periods)) for ks in itertools.product(*ranges)]


def containing(damping: Damping, torus: FlatTorus, X) -> list[Contact]:
    """All (polyhedron, translate) pairs whose closure contains X, with active faces."""
    out = []
    for i, poly in enumerate(damping.polyhedra):
        for g in translates_near(torus, poly, X, X):
            Y = exact.sub(X, g)
            if poly.contains(Y):
                out.append(Contact(i, g, poly.active_faces(Y)))
    return out


def cones_cover(cones: Sequence[Sequence[tuple]], dim: int) -> bool:
    """Do the closed cones {v : n.v <= 0 for n in cone} cover all of R^dim?

    Searches for a direction violating one inequality of every cone; such a
    direction exists iff the union misses an open set of directions.
    """
    if any(len(c) == 0 for c in cones):
        return True
    if not cones:
        return False
    order = sorted(range(len(cones)), key=lambda i: len(cones[i]))

    def search(idx: int, chosen: list) -> bool:
        if exact.feasible_point(chosen, dim) is None:
            return False
        if idx == len(order):
            return True
        for n in cones[order[idx]]:
            neg = tuple(-x for x in n)
            if search(idx + 1, chosen + [(neg, Q(0), True)]):
                return True
        return False

    return not search(0, [])


def classify_contacts(damping: Damping, torus: FlatTorus, contacts: list[Contact]) -> PointKind:
    if not contacts:
        return PointKind.EXTERIOR
    cones = []
    for c in contacts:
        poly = damping.polyhedra[c.polyhedron]
        cones.append([poly.halfspaces[f].normal for f in c.faces])
    return PointKind.INTERIOR if cones_cover(cones, torus.dim) else PointKind.BOUNDARY


def classify_point(damping: Damping, torus: FlatTorus, X) -> PointClass:
    """Interior / Boundary / Exterior of X relative to supp(a), with wrap-around."""
    X = fold_point(torus, X)
    contacts = containing(damping, torus, X)
    kind = classify_contacts(damping, torus, contacts)
    if kind is PointKind.BOUNDARY:
        return PointClass(kind, tuple(contacts))
    return PointClass(kind)


def is_damped_direction(damping: Damping, torus: FlatTorus, X, direction) -> bool:
    """Is X + delta * direction in Int(supp a) for every small delta > 0?"""
    X = fold_point(torus, X)
    direction = qvec(direction)
    contacts = containing(damping, torus, X)
    if not contacts:
        return False
    # Step small enough not to cross any face plane that X is not already on.
    delta = None
    for i, poly in enumerate(damping.polyhedra):
        for g in translates_near(torus, poly, [x - 1 for x in X], [x + 1 for x in X]):
            Y = exact.sub(X, g)
            for h in poly.halfspaces:
                rate = dot(h.normal, direction)
                s = h.slack(Y)
                if rate != 0 and s != 0:
                    t = s / rate
                    if t > 0 and (delta is None or t < delta):
                        delta = t
    norm1 = sum(abs(x) for x in direction) or Q(1)
    cap = Q(1, 4) / norm1
    delta = cap if delta is None else min(delta / 2, cap)
    P = exact.add(X, exact.scale(delta, direction))
    return classify_point(damping, torus, P).kind is PointKind.INTERIOR


def validate_scene(damping: Damping, torus: FlatTorus) -> ValidationReport:
    """Check dimensions, boundedness, nonempty interiors and disjointness exactly."""
    report = ValidationReport()
    usable = []
    for i, poly in enumerate(damping.polyhedra):
        if poly.dim != torus.dim:
            report.add("dimension", f"polyhedron {i} has dimension {poly.dim}, torus {torus.dim}")
            continue
        if not poly.is_bounded():
            report.add("unbounded", f"polyhedron {i} is unbounded")
            continue
        if poly.interior_point is None:
            report.add("empty_interior", f"polyhedron {i} has empty interior")
            continue
        lo, hi = poly.bbox
        if any(b - a > p for a, b, p in zip(lo, hi, torus.periods)):
            report.add("too_large", f"polyhedron {i} does not fit in one fundamental cuboid",
                       [str(x) for x in exact.sub(hi, lo)])
            continue
        usable.append(i)
    for i, j in itertools.combinations_with_replacement(usable, 2):
        pi, pj = damping.polyhedra[i], damping.polyhedra[j]
        lo, hi = pi.bbox
        for g in translates_near(torus, pj, lo, hi):
            if i == j and all(x == 0 for x in g):
                continue
            cons = pi.constraints(strict=True) + pj.constraints(strict=True, shift=g)
            w = exact.feasible_point(cons, torus.dim)
            if w is not None:
                report.add("overlap", f"polyhedra {i} and {j} have intersecting interiors",
                           [str(x) for x in w])
                break
    return report


def box(lo, hi, label: str = "") -> Polyhedron:
    """Axis-aligned box [lo, hi] as a polyhedron."""
    lo, hi = qvec(lo), qvec(hi)
    d = len(lo)
    hs = []
    for j in range(d):
        e = tuple(Q(1 if i == j else 0) for i in range(d))
        hs.append(HalfSpace(e, hi[j]))
        hs.append(HalfSpace(tuple(-x for x in e), -lo[j]))
    return Polyhedron(tuple(hs), label)


def _shell(d: int) -> list[Polyhedron]:
    """Disjoint convex pieces of {|x_i| >= 1/2 for some i < d} on [-1, 1]^d."""
    half, one = Q(1, 2), Q(1)
    pieces = []
    for i in range(d - 1):
        lo, hi = [], []
        for j in range(d):
            if j < i:
                lo.append(-half), hi.append(half)
            elif j == i:
                lo.append(half), hi.append(half + one)
            else:
                lo.append(-one), hi.append(one)
        pieces.append(box(lo, hi, label=f"shell_{i + 1}"))
    return pieces


def _fig4_1(alpha_l, alpha_r, alpha_t, alpha_b) -> tuple[FlatTorus, Damping]:
    aL, aR, aT, aB = (to_q(a) for a in (alpha_l, alpha_r, alpha_t, alpha_b))
    if min(aL, aR, aT, aB) < 0:
        raise SceneError("prism coefficients must be nonnegative")
    half = Q(1, 2)
    H = lambda n, c: HalfSpace(n, c)  # noqa: E731
    # X = (x1, x2, y); each prism lives inside the tunnel |x1|, |x2| <= 1/2.
    prism_r = Polyhedron((
        H((0, 0, 1), -half), H((0, 0, -1), 1),
        H((-1, 0, 0), 0), H((1, 0, 0), half),
        H((-aR, 1, 0), 0), H((0, -1, 0), half),
    ), "prism_R")
    prism_t = Polyhedron((
        H((0, 0, 1), 0), H((0, 0, -1), half),
        H((0, -1, 0), 0), H((0, 1, 0), half),
        H((-1, -aT, 0), 0), H((1, 0, 0), half),
    ), "prism_T")
    prism_l = Polyhedron((
        H((0, 0, 1), half), H((0, 0, -1), 0),
        H((1, 0, 0), 0), H((-1, 0, 0), half),
        H((aL, -1, 0), 0), H((0, 1, 0), half),
    ), "prism_L")
    prism_b = Polyhedron((
        H((0, 0, 1), 1), H((0, 0, -1), -half),
        H((0, 1, 0), 0), H((0, -1, 0), half),
        H((1, aB, 0), 0), H((-1, 0, 0), half),
    ), "prism_B")
    torus = FlatTorus((2, 2, 2))
    return torus, Damping(tuple(_shell(3)) + (prism_r, prism_t, prism_l, prism_b))


def _tunnel(d: int) -> tuple[FlatTorus, Damping]:
    if not 3 <= d <= MAX_DIM:
        raise SceneError(f"tunnel_d needs 3 <= d <= {MAX_DIM}")
    half = Q(1, 2)
    slabs = []
    for i in range(d - 1):
        for sign, ylo in ((-1, Q(-1) + Q(i, d - 1)), (1, Q(i, d - 1))):
            lo = [-half] * (d - 1) + [ylo]
            hi = [half] * (d - 1) + [ylo + Q(1, d - 1)]
            if sign < 0:
                hi[i] = Q(0)
            else:
                lo[i] = Q(0)
            slabs.append(box(lo, hi, label=f"slab_{'-' if sign < 0 else '+'}{i + 1}"))
    return FlatTorus((2,) * d), Damping(tuple(_shell(d)) + tuple(slabs))


def _checkerboard(variant: str) -> tuple[FlatTorus, Damping]:
    if variant == "a":
        torus = FlatTorus((2, 2))
        cells = [((0, 0), (1, 1)), ((1, 1), (2, 2))]
    elif variant == "b":
        # 3x3 parity colouring; the odd period glues cells across the wrap.
        torus = FlatTorus((3, 3))
        cells = [((i, j), (i + 1, j + 1)) for i in range(3) for j in range(3) if (i + j) % 2 == 0]
    elif variant == "c":
        torus = FlatTorus((3, 2))
        cells = [((0, 0), ("3/2", 1)), (("3/2", 1), (3, 2))]
    else:
        raise SceneError(f"unknown checkerboard variant {variant!r}")
    polys = tuple(box(lo, hi, label=f"cell_{k}") for k, (lo, hi) in enumerate(cells))
    return torus, Damping(polys)


PRESETS = ("fig4_1", "fig5_1", "checkerboard2d", "tunnel_d", "band2d", "empty2d", "full2d")


def preset_scene(name: str) -> tuple[FlatTorus, Damping]:
    """Build a named scene.  Parameters follow a colon: ``fig4_1:1/10,1/10,1/10,1/10``."""
    base, _, params = name.partition(":")
    args = [p.strip() for p in params.split(",")] if params else []
    if base == "fig4_1":
        if len(args) not in (0, 1, 4):
            raise SceneError("fig4_1 takes one or four coefficients")
        if not args:
            args = ["1/10"] * 4
        elif len(args) == 1:
            args = args * 4
        return _fig4_1(*args)
    if base == "fig5_1":
        return _fig4_1(0, 0, 0, 0)
    if base == "checkerboard2d":
        return _checkerboard(args[0] if args else "a")
    if base == "tunnel_d":
        return _tunnel(int(args[0]) if args else 3)
    if base == "band2d":
        # damping avoids the band |x_2| < 1/2 on [-1, 1]^2
        torus = FlatTorus((2, 2))
        return torus, Damping((box((-1, "1/2"), (1, "3/2"), label="band_complement"),))
    if base == "empty2d":
        return FlatTorus((2, 2)), Damping(())
    if base == "full2d":
        return FlatTorus((2, 2)), Damping((box((0, 0), (2, 2), label="everything"),))
    raise SceneError(f"unknown preset {name!r}; known: {', '.join(PRESETS)}")


def _parse_rational(value, where: str) -> Q:
    if isinstance(value, bool) or isinstance(value, float):
        raise SceneError(f"{where}: non-rational numeric {value!r}; write rationals as \"p/q\" strings")
    try:
        return to_q(value)
    except (TypeError, ValueError, ZeroDivisionError) as err:
        raise SceneError(f"{where}: cannot parse rational {value!r}") from err


def scene_from_dict(doc: dict) -> tuple[FlatTorus, Damping]:
    """Parse {"periods": [...], "polyhedra": [{"halfspaces": [{"n": [...], "c": ...}]}]}."""
    if not isinstance(doc, dict) or "periods" not in doc:
        raise SceneError("scene document needs a 'periods' list")
    torus = FlatTorus(tuple(_parse_rational(p, f"periods[{i}]")
                            for i, p in enumerate(doc["periods"])))
    polys = []
    for k, pd in enumerate(doc.get("polyhedra", [])):
        hs = []
        for f, hd in enumerate(pd.get("halfspaces", [])):
            where = f"polyhedra[{k}].halfspaces[{f}]"
            normal = tuple(_parse_rational(x, where + ".n") for x in hd["n"])
            hs.append(HalfSpace(normal, _parse_rational(hd["c"], where + ".c")))
        polys.append(Polyhedron(tuple(hs), pd.get("label", f"poly_{k}")))
    return torus, Damping(tuple(polys))


def scene_to_dict(torus: FlatTorus, damping: Damping) -> dict:
    return {
        "periods": [str(p) for p in torus.periods],
        "polyhedra": [
            {"label": p.label,
             "halfspaces": [{"n": [str(x) for x in h.normal], "c": str(h.offset)}
                            for h in p.halfspaces]}
            for p in damping.polyhedra
        ],
    }


def load_scene(path) -> tuple[FlatTorus, Damping]:
    import json
    with open(path) as fh:
        return scene_from_dict(json.load(fh))
