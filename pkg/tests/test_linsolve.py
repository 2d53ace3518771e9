import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, strategies as st

from vvpctl.linsolve import Factorization, SingularMatrixError, SparseSystem, solve


def test_identity():
    s = SparseSystem(4)
    for i in range(4):
        s.add(i, i, 1.0)
    s.rhs = np.eye(4)[0]
    x, res = solve(s)
    assert np.array_equal(x, np.eye(4)[0])
    assert res == 0.0


def test_small_saddle():
    a = sp.csc_matrix(np.array([[2.0, 1.0], [1.0, 0.0]]))
    x, res = solve(a, np.array([3.0, 1.0]))
    assert np.allclose(x, [1.0, 1.0], atol=1e-15)


def _random_system(rng, n=50):
    a = sp.random(n, n, density=0.1, random_state=rng, format="csc") + sp.identity(n) * 5.0
    return sp.csc_matrix(a), rng.standard_normal(n)


def test_random_against_dense_oracle():
    rng = np.random.default_rng(7)
    a, b = _random_system(rng)
    x, res = solve(a, b)
    ref = np.linalg.solve(a.toarray(), b)
    assert res <= 1e-10
    assert np.abs(x - ref).max() <= 1e-8


def test_transpose_solve():
    rng = np.random.default_rng(8)
    a, b = _random_system(rng)
    x, res = Factorization(a).solve(b, trans="T")
    assert np.abs(a.T @ x - b).max() <= 1e-10
    assert res <= 1e-10


def test_bitwise_determinism():
    rng = np.random.default_rng(9)
    a, b = _random_system(rng, 80)
    x1, _ = solve(a, b)
    x2, _ = solve(a.copy(), b.copy())
    assert x1.tobytes() == x2.tobytes()


@given(st.integers(0, 2 ** 32 - 1))
def test_triplet_order_does_not_matter(seed):
    rng = np.random.default_rng(seed)
    n = 12
    rows = rng.integers(0, n, 60)
    cols = rng.integers(0, n, 60)
    vals = rng.standard_normal(60)
    s1, s2 = SparseSystem(n), SparseSystem(n)
    for i, j, v in zip(rows, cols, vals):
        s1.add(i, j, v)
    for k in rng.permutation(60):
        s2.add(rows[k], cols[k], vals[k])
    a1, a2 = s1.finalize(), s2.finalize()
    assert np.array_equal(a1.indptr, a2.indptr)
    assert np.array_equal(a1.indices, a2.indices)
    assert a1.data.tobytes() == a2.data.tobytes()


def test_structurally_singular():
    a = sp.csc_matrix(np.array([[1.0, 0.0], [0.0, 0.0]]))
    with pytest.raises(SingularMatrixError) as exc:
        solve(a, np.ones(2))
    assert exc.value.row == 1


def test_numerically_singular():
    a = sp.csc_matrix(np.array([[1.0, 2.0], [2.0, 4.0]]))
    with pytest.raises(SingularMatrixError):
        solve(a, np.ones(2))


def test_out_of_range_triplet():
    s = SparseSystem(2)
    s.add(0, 2, 1.0)
    with pytest.raises(IndexError):
        s.finalize()
