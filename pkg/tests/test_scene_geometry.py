import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from torusdamp.exact import Q
from torusdamp.scene_geometry import (Damping, FlatTorus, HalfSpace, PointKind, Polyhedron, SceneError,
                                      box, classify_point, fold_point, load_scene, preset_scene,
                                      scene_from_dict, scene_to_dict, validate_scene)


def test_fold_point_examples():
    t = FlatTorus((2, 2, 2))
    assert fold_point(t, (3, -1, 0)) == (1, 1, 0)
    assert fold_point(t, (0, 0, 0)) == (0, 0, 0)
    assert fold_point(FlatTorus((1, "3/2")), ("5/2", "-1/4")) == (Q(1, 2), Q(5, 4))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.fractions(min_value=-20, max_value=20, max_denominator=12), min_size=3, max_size=3),
       st.lists(st.integers(-4, 4), min_size=3, max_size=3))
def test_fold_point_is_lattice_invariant(x, k):
    t = FlatTorus((2, "3/2", 1))
    shifted = [xi + ki * a for xi, ki, a in zip(map(Q, x), k, t.periods)]
    folded = fold_point(t, x)
    assert fold_point(t, shifted) == folded
    assert all(0 <= f < a for f, a in zip(folded, t.periods))


def test_classify_fig4_1(fig4_1):
    torus, damping = fig4_1
    assert classify_point(damping, torus, ("3/4", 0, 0)).kind is PointKind.INTERIOR
    # the origin lies on prism faces (closed prisms touch the axis), so it is
    # a boundary point of the support; it is not in the interior either way
    assert classify_point(damping, torus, (0, 0, 0)).kind is PointKind.BOUNDARY
    assert classify_point(damping, torus, ("1/4", "1/4", "-1/4")).kind is PointKind.INTERIOR


def test_classify_empty_damping():
    torus = FlatTorus((2, 2))
    assert classify_point(Damping(()), torus, ("1/3", "5/7")).kind is PointKind.EXTERIOR


def test_classify_union_interior_across_faces():
    # two boxes sharing the face x = 1: points on the face are interior to the union
    torus = FlatTorus((4, 4))
    damping = Damping((box((0, 0), (1, 1)), box((1, 0), (2, 1))))
    assert classify_point(damping, torus, (1, "1/2")).kind is PointKind.INTERIOR
    assert classify_point(damping, torus, (1, 1)).kind is PointKind.BOUNDARY


def test_validate_scene_examples(fig5_1):
    torus, damping = fig5_1
    assert validate_scene(damping, torus).ok
    cube = box((0, 0, 0), (1, 1, 1))
    rep = validate_scene(Damping((cube, cube)), FlatTorus((2, 2, 2)))
    assert not rep.ok and any(v["kind"] == "overlap" for v in rep.violations)


def test_validate_rejects_contradictory_halfspaces():
    poly = Polyhedron((HalfSpace((1, 0), 0), HalfSpace((-1, 0), -1),
                       HalfSpace((0, 1), 1), HalfSpace((0, -1), 0)))
    rep = validate_scene(Damping((poly,)), FlatTorus((2, 2)))
    assert not rep.ok
    assert rep.violations[0]["kind"] in {"empty_interior", "unbounded"}


def test_presets_shapes():
    torus, damping = preset_scene("fig4_1:1/10,1/10,1/10,1/10")
    assert torus.periods == (2, 2, 2)
    assert len([p for p in damping.polyhedra if p.label.startswith("prism")]) == 4
    torus, damping = preset_scene("tunnel_d:4")
    slabs = [p for p in damping.polyhedra if p.label.startswith("slab")]
    assert torus.dim == 4 and len(slabs) == 6
    assert validate_scene(damping, torus).ok
    with pytest.raises(SceneError):
        preset_scene("no_such_scene")


def test_scene_round_trip(tmp_path, fig4_1):
    torus, damping = fig4_1
    path = tmp_path / "scene.json"
    path.write_text(json.dumps(scene_to_dict(torus, damping)))
    t2, d2 = load_scene(path)
    assert t2 == torus
    assert [p.halfspaces for p in d2.polyhedra] == [p.halfspaces for p in damping.polyhedra]


def test_scene_rejects_floats():
    with pytest.raises(SceneError, match="non-rational"):
        scene_from_dict({"periods": [2, 0.5], "polyhedra": []})
