import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from factornorm.core import BooleanMatrix, Factorization, Graph, SubmatrixSelection, make_rng, resolve_budget
from factornorm.errors import ContractError


class TestBooleanMatrix:
    def test_counts(self):
        M = BooleanMatrix([[1, 0, 1], [0, 0, 1]])
        assert M.row_ones.tolist() == [2, 1] and M.col_ones.tolist() == [1, 0, 2]
        assert M.ones_total == 3 and M.density == 0.5

    def test_frozen_copy(self):
        a = np.eye(2, dtype=bool)
        M = BooleanMatrix(a)
        a[0, 1] = True
        assert not M.bits[0, 1]
        with pytest.raises(ValueError):
            M.bits[0, 0] = False

    def test_rejects_non_binary(self):
        with pytest.raises(ContractError):
            BooleanMatrix([[2]])
        with pytest.raises(ContractError):
            BooleanMatrix([1, 0])

    def test_complement_transpose(self):
        M = BooleanMatrix([[1, 0]])
        assert M.complement() == BooleanMatrix([[0, 1]])
        assert M.T.shape == (2, 1)


class TestSelection:
    def test_validation(self):
        with pytest.raises(ContractError):
            SubmatrixSelection((1, 0), (0,), (2, 2))
        with pytest.raises(ContractError):
            SubmatrixSelection((), (0,), (2, 2))
        with pytest.raises(ContractError):
            SubmatrixSelection((0,), (2,), (2, 2))

    def test_apply_checks_shape(self):
        sel = SubmatrixSelection.full((2, 2))
        with pytest.raises(ContractError):
            sel.apply(BooleanMatrix.identity(3))

    def test_transpose(self):
        sel = SubmatrixSelection((0, 2), (1,), (3, 2))
        assert sel.transpose() == SubmatrixSelection((1,), (0, 2), (2, 3))


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 8), st.integers(1, 8), st.data())
def test_lift_composes(m, n, data):
    rows = data.draw(st.sets(st.integers(0, m - 1), min_size=1))
    cols = data.draw(st.sets(st.integers(0, n - 1), min_size=1))
    outer = SubmatrixSelection.from_indices(rows, cols, (m, n))
    ir = data.draw(st.sets(st.integers(0, len(rows) - 1), min_size=1))
    ic = data.draw(st.sets(st.integers(0, len(cols) - 1), min_size=1))
    inner = SubmatrixSelection.from_indices(ir, ic, outer.shape)
    A = np.arange(m * n).reshape(m, n)
    assert np.array_equal(outer.lift(inner).apply(A), inner.apply(outer.apply(A)))


class TestFactorization:
    def test_norms_and_error(self):
        F = Factorization.of(np.array([[3.0, 4.0]]), np.array([[1.0], [0.0]]), np.array([[3.0]]))
        assert F.max_row_norm == 5 and F.max_col_norm == 1 and F.reconstruction_error == 0

    def test_balanced(self):
        F = Factorization.of(np.array([[4.0]]), np.array([[1.0]])).balanced()
        assert F.max_row_norm == pytest.approx(2) and F.max_col_norm == pytest.approx(2)

    def test_shape_mismatch(self):
        with pytest.raises(ContractError):
            Factorization.of(np.ones((2, 2)), np.ones((3, 2)))
        with pytest.raises(ContractError):
            Factorization.of(np.ones((2, 1)), np.ones((1, 2)), np.ones((3, 3)))

    def test_nonfinite(self):
        with pytest.raises(ContractError):
            Factorization.of(np.array([[np.nan]]), np.ones((1, 1)))


class TestGraph:
    def test_normalizes_edges(self):
        G = Graph(3, [(2, 0), (0, 2), (1, 2)])
        assert G.edges == ((0, 2), (1, 2)) and G.m == 2

    def test_rejects(self):
        with pytest.raises(ContractError):
            Graph(2, [(1, 1)])
        with pytest.raises(ContractError):
            Graph(2, [(0, 2)])
        with pytest.raises(ContractError):
            Graph.from_adjacency(np.array([[0, 1], [0, 0]]))

    def test_induced_and_cut(self):
        G = Graph(4, [(0, 1), (1, 2), (2, 3)])
        H = G.induced([1, 2, 3])
        assert H.edges == ((0, 1), (1, 2))
        assert G.cut_size([True, False, True, False]) == 3

    def test_without_isolated(self):
        H, keep = Graph(5, [(1, 3)]).without_isolated()
        assert keep == [1, 3] and H.edges == ((0, 1),)


def test_rng_streams():
    assert np.array_equal(make_rng(3, 1).random(4), make_rng(3, 1).random(4))
    assert not np.array_equal(make_rng(0, 1).random(4), make_rng(0, 2).random(4))
    assert not np.array_equal(make_rng(0, 1, 0).random(4), make_rng(0, 1, 1).random(4))


def test_budget_presets():
    assert resolve_budget(None).name == "default"
    assert resolve_budget("thorough").rounding_trials == 512
    with pytest.raises(ContractError, match="unknown budget"):
        resolve_budget("huge")
