import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from torusdamp.lattice_reduction import DegenerateAlpha, build_step, reduce_geodesic, verify_periodicity

R2 = 1 / math.sqrt(2)


def test_build_step_example():
    step = build_step((1, 1, 1), (0, 1, 1), p=0, q=1)
    assert step.S2 == 2 and step.S == pytest.approx(math.sqrt(2), abs=1e-15)
    np.testing.assert_allclose(step.matrix[:, 1], [0, R2, R2], atol=1e-15)
    np.testing.assert_allclose(step.matrix[:, 2], [0, -R2, R2], atol=1e-15)
    assert step.alpha == pytest.approx(R2, abs=1e-15)
    assert step.beta == pytest.approx(R2, abs=1e-15)
    assert step.alpha2S2 == 1      # alpha^2 S^2 = 1 exactly


def test_build_step_degenerate_alpha():
    with pytest.raises(DegenerateAlpha):
        build_step((1, 1, 1), (0, 1, 1), p=1, q=1)


def test_build_step_axis_aligned_is_identity():
    step = build_step((2, 2, 2), (0, 0, 1))
    assert step.identity
    np.testing.assert_array_equal(step.matrix, np.eye(3))
    assert step.S == 2
    # first admissible default is (p, q) = (1, 0): alpha = -A_{d-1}
    assert (step.p, step.q) == (1, 0) and step.alpha == -2


def test_reduce_axis_aligned():
    res = reduce_geodesic((2, 2, 2), (0, 0, 1))
    np.testing.assert_array_equal(res.F, np.eye(3))
    assert res.steps == []


def test_reduce_single_stage():
    res = reduce_geodesic((1, 1, 1), (0, 1, 1))
    assert len(res.steps) == 1
    np.testing.assert_allclose(res.transverse_periods[0], [1, math.sqrt(2)], atol=1e-15)
    assert res.alignment_error() < 1e-12


def test_reduce_two_stages():
    res = reduce_geodesic((1, 1, 1), (1, 1, 1))
    assert len(res.steps) == 2 and not any(s.identity for s in res.steps)
    e3 = np.linalg.solve(res.F, np.ones(3) / math.sqrt(3))
    np.testing.assert_allclose(e3, [0, 0, 1], atol=1e-12)


def test_reduce_rejects_non_primitive():
    with pytest.raises(ValueError):
        reduce_geodesic((1, 1), (2, 2))


def test_periodicity_and_negative_control():
    res = reduce_geodesic((1, 1, 1), (0, 1, 1))
    assert verify_periodicity(res, trials=100)["max_discrepancy"] <= 1e-10
    assert verify_periodicity(res, trials=100, beta_shift=1.0)["max_discrepancy"] > 1e-3
    ident = reduce_geodesic((2, 2, 2), (0, 0, 1))
    assert verify_periodicity(ident, trials=20)["max_discrepancy"] < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=2, max_size=4).filter(lambda v: math.gcd(*v) == 1),
       st.sampled_from([(1, 1, 1, 1), (2, 2, 2, 2), (1, 2, 3, 5)]))
def test_reduction_properties(n, periods):
    res = reduce_geodesic(periods[:len(n)], n)
    assert res.orthonormality_error() < 1e-12
    assert res.alignment_error() < 1e-12
    assert all(s.alpha2S2 != 0 for s in res.steps)
    assert verify_periodicity(res, trials=10)["max_discrepancy"] < 1e-9
