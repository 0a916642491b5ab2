from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from torusdamp import exact
from torusdamp.exact import Q


def test_to_q_accepts_exact_inputs():
    assert exact.to_q("3/4") == Q(3, 4)
    assert exact.to_q(Fraction(-1, 3)) == Q(-1, 3)
    assert exact.to_q(5) == 5


@pytest.mark.parametrize("bad", [0.5, True, None])
def test_to_q_rejects_inexact(bad):
    with pytest.raises(TypeError):
        exact.to_q(bad)


def test_primitive_int():
    assert exact.primitive_int((Q(2), Q(4), Q(0))) == (1, 2, 0)
    assert exact.primitive_int((Q(1, 2), Q(-1, 3))) == (3, -2)
    with pytest.raises(ValueError):
        exact.primitive_int((0, 0))


def test_strict_feasibility_distinguishes_open_and_closed():
    # 0 <= x <= 0 is feasible, 0 < x < 0 is not
    closed = [((Q(1),), Q(0), False), ((Q(-1),), Q(0), False)]
    strict = [((Q(1),), Q(0), True), ((Q(-1),), Q(0), True)]
    assert exact.feasible_point(closed, 1) == (Q(0),)
    assert exact.feasible_point(strict, 1) is None


def test_feasible_point_satisfies_constraints():
    # triangle x > 0, y > 0, x + y < 1
    cons = [((Q(-1), Q(0)), Q(0), True), ((Q(0), Q(-1)), Q(0), True), ((Q(1), Q(1)), Q(1), True)]
    p = exact.feasible_point(cons, 2)
    assert p is not None
    assert all(exact.dot(a, p) < b for a, b, _ in cons)


def test_det_and_solve():
    m = [[2, 1], [1, 1]]
    assert exact.det(m) == 1
    assert exact.solve(m, [3, 2]) == (Q(1), Q(1))
    assert exact.solve([[1, 1], [2, 2]], [1, 2]) is None


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-7, 7), min_size=2, max_size=4).filter(lambda v: any(v)))
def test_unimodular_completion(v):
    n = exact.primitive_int([Q(x) for x in v])
    M = exact.unimodular_completion(n)
    assert abs(exact.det(M)) == 1
    assert tuple(row[-1] for row in M) == n
    inv = exact.int_matrix_inverse(M)
    prod = [[sum(inv[i][k] * M[k][j] for k in range(len(n))) for j in range(len(n))]
            for i in range(len(n))]
    assert prod == [[int(i == j) for j in range(len(n))] for i in range(len(n))]
