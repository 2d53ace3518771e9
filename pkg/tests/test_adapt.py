import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from vvpctl.adapt import adaptive_loop, dorfler_mark
from vvpctl.harness import dof_slope
from vvpctl.problems import make_problem

eta_sq = arrays(float, st.integers(1, 80), elements=st.floats(0, 1e3))
thetas = st.floats(0.05, 0.95)


def test_dorfler_example():
    assert dorfler_mark(np.array([9.0, 4.0, 1.0]), 0.6) == {0}


def test_dorfler_near_one_marks_all_nonzero():
    eta = np.array([3.0, 0.0, 1.0, 2.0, 0.0])
    assert dorfler_mark(eta, 0.999999) == {0, 2, 3}


@pytest.mark.parametrize("n", [1, 3, 4, 7, 10, 33])
def test_dorfler_equal_indicators(n):
    assert len(dorfler_mark(np.ones(n), 0.5)) == math.ceil(0.25 * n)


def test_dorfler_tie_break_by_index():
    assert dorfler_mark(np.array([1.0, 2.0, 2.0, 2.0]), 0.7) == {1, 2}


def test_dorfler_bad_theta():
    for t in (0.0, 1.0, -0.1):
        with pytest.raises(ValueError):
            dorfler_mark(np.ones(3), t)


def test_dorfler_zero_total():
    assert dorfler_mark(np.zeros(4), 0.5) == set()


@given(eta_sq, thetas)
def test_dorfler_property_and_minimality(eta, theta):
    total = math.fsum(eta.tolist())
    marked = dorfler_mark(eta, theta)
    if total == 0.0:
        assert marked == set()
        return
    s = math.fsum(eta[list(marked)].tolist())
    assert s >= theta ** 2 * total
    # dropping the smallest marked indicator breaks the bulk criterion
    smallest = min(marked, key=lambda i: (eta[i], -i))
    rest = math.fsum(eta[list(marked - {smallest})].tolist())
    assert rest < theta ** 2 * total
    # no smaller set can reach the bulk: the largest |marked| - 1 values fall short
    top = np.sort(eta)[::-1][: len(marked) - 1]
    assert math.fsum(top.tolist()) < theta ** 2 * total


def test_budget_below_initial_dofs_gives_one_record():
    recs = adaptive_loop(make_problem("ex51"), "cg", max_dofs=10, start_level=2)
    assert len(recs) == 1


@pytest.mark.parametrize("scheme", ["cg", "dg"])
def test_dofs_strictly_increase(scheme):
    recs = adaptive_loop(make_problem("ex53_l"), scheme, max_dofs=3000, start_level=2)
    assert len(recs) >= 3
    d = [r.dofs_total for r in recs]
    assert all(b > a for a, b in zip(d, d[1:]))


@pytest.mark.slow
def test_bulk_marking_on_a_smooth_problem_behaves_like_uniform(ex51_cg_augmented):
    # theta = 0.9 marks almost everything; compare the eta-vs-DOF slope of
    # both runs over the same DOF range (start level 3 is uniform level 2)
    recs = adaptive_loop(make_problem("ex51"), "cg", theta=0.9, max_dofs=60000, start_level=3)
    uniform = ex51_cg_augmented.records
    assert recs[0].dofs_total == uniform[0].dofs_total
    assert abs(dof_slope(recs) - dof_slope(uniform)) <= 0.2
