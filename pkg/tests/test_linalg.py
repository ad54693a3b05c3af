import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from factornorm import linalg
from factornorm.core import BooleanMatrix
from factornorm.errors import ContractError

K3 = np.ones((3, 3)) - np.eye(3)
K5 = np.ones((5, 5)) - np.eye(5)
L2 = np.array([[1.0, 0.0], [1.0, 1.0]])

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def sym(n):
    return arrays(float, (n, n), elements=finite).map(lambda a: (a + a.T) / 2)


@pytest.mark.parametrize("method", ["lapack", "jacobi"])
class TestExamples:
    def test_identity_eigen(self, method):
        np.testing.assert_allclose(linalg.sym_eigen(np.eye(2), method).eigenvalues, [1, 1], atol=1e-12)

    def test_k3_spectrum(self, method):
        np.testing.assert_allclose(linalg.sym_eigen(K3, method).eigenvalues, [2, -1, -1], atol=1e-10)

    def test_zero_spectrum(self, method):
        np.testing.assert_allclose(linalg.sym_eigen(np.zeros((3, 3)), method).eigenvalues, [0, 0, 0], atol=0)

    def test_svd_identity(self, method):
        np.testing.assert_allclose(linalg.svd(np.eye(3), method).singular_values, [1, 1, 1], atol=1e-12)

    def test_svd_lower_triangular(self, method):
        s = linalg.svd(L2, method).singular_values
        phi = (1 + math.sqrt(5)) / 2
        np.testing.assert_allclose(s, [phi, phi - 1], atol=1e-10)
        assert s.sum() == pytest.approx(math.sqrt(5), abs=1e-10)

    def test_svd_rank_one(self, method):
        np.testing.assert_allclose(linalg.svd(np.ones((2, 3)), method).singular_values, [math.sqrt(6), 0], atol=1e-10)


def test_trace_norm_examples():
    assert linalg.trace_norm(K5) == pytest.approx(8, abs=1e-10)
    assert linalg.trace_norm(np.eye(7)) == pytest.approx(7, abs=1e-12)
    assert linalg.trace_norm(L2) == pytest.approx(math.sqrt(5), abs=1e-10)
    assert linalg.trace_norm(np.zeros((3, 4))) == 0
    assert linalg.trace_norm(BooleanMatrix.identity(4)) == pytest.approx(4)


def test_contract_errors():
    with pytest.raises(ContractError):
        linalg.sym_eigen(np.ones((2, 3)))
    with pytest.raises(ContractError):
        linalg.sym_eigen(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ContractError):
        linalg.svd(np.array([[np.nan]]))


def test_descending_ties_keep_order():
    ev = linalg.sym_eigen(np.diag([1.0, 3.0, 3.0, 2.0])).eigenvalues
    assert list(ev) == [3, 3, 2, 1]


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 12).flatmap(sym))
def test_eigen_invariants(A):
    for method in ("lapack", "jacobi"):
        sp = linalg.sym_eigen(A, method)
        Q = sp.eigenvectors
        assert np.abs(Q.T @ Q - np.eye(len(A))).max() <= 1e-8
        scale = max(np.abs(A).max(), 1e-300)
        assert np.abs(sp.reconstruct() - A).max() <= 1e-7 * scale + 1e-300
        assert np.all(np.diff(sp.eigenvalues) <= 1e-12)


@settings(max_examples=40, deadline=None)
@given(st.tuples(st.integers(1, 9), st.integers(1, 9)).flatmap(lambda s: arrays(float, s, elements=finite)))
def test_svd_invariants_and_jacobi_agrees(M):
    ref = linalg.svd(M)
    jac = linalg.svd(M, "jacobi")
    s1 = ref.singular_values[0] if ref.singular_values.size else 0.0
    for d in (ref, jac):
        assert np.all(d.singular_values >= 0)
        assert np.abs(d.reconstruct() - M).max() <= 1e-7 * max(s1, 1e-300) + 1e-300
    np.testing.assert_allclose(jac.singular_values, ref.singular_values, atol=1e-8 * max(s1, 1))


@settings(max_examples=40, deadline=None)
@given(st.tuples(st.integers(1, 9), st.integers(1, 9)).flatmap(lambda s: arrays(float, s, elements=finite)))
def test_trace_norm_dominates_frobenius(M):
    assert linalg.trace_norm(M) >= linalg.frobenius(M) - 1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 10).flatmap(sym))
def test_trace_norm_equals_abs_eigen_sum(A):
    lam = linalg.sym_eigen(A).eigenvalues
    assert linalg.trace_norm(A) == pytest.approx(np.abs(lam).sum(), abs=1e-7 * max(1, np.abs(lam).sum()))


@settings(max_examples=30, deadline=None)
@given(
    st.tuples(st.integers(1, 8), st.integers(1, 8)).flatmap(lambda s: arrays(float, s, elements=finite)),
    st.randoms(use_true_random=False),
)
def test_singular_values_permutation_invariant(M, rnd):
    r = list(range(M.shape[0]))
    c = list(range(M.shape[1]))
    rnd.shuffle(r)
    rnd.shuffle(c)
    np.testing.assert_allclose(
        linalg.singular_values(M[np.ix_(r, c)]), linalg.singular_values(M), atol=1e-8 * max(1, np.abs(M).max())
    )
