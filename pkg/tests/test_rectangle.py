import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_max_mono_side

from factornorm import linalg
from factornorm.core import BooleanMatrix, Factorization, SubmatrixSelection
from factornorm.errors import ContractError
from factornorm.gamma2 import gamma2_upper_als
from factornorm.generators import ConstructionParams, PointLineParams, gen_point_line, gen_random_boolean, tight_example
from factornorm.rectangle import (
    BrilliantWitness,
    brilliant_scan,
    constant_submatrix_integer,
    find_all_zeros_rectangle,
    find_mono_rectangle,
    gamma2_decrement_step,
    project_step,
    trace_to_gamma_submatrix,
)


def exact_factorization(M: BooleanMatrix) -> Factorization:
    sv = linalg.svd(M.to_float())
    r = np.sqrt(sv.singular_values)
    return Factorization.of(sv.left * r, r[:, None] * sv.right, M.to_float())


def test_vectorized_oracle_matches_naive():
    rng = np.random.default_rng(0)
    for _ in range(30):
        bits = rng.random((int(rng.integers(1, 5)), int(rng.integers(1, 5)))) < 0.5
        m, n = bits.shape
        best = 0
        for r in range(1, m + 1):
            for c in range(1, n + 1):
                for R in itertools.combinations(range(m), r):
                    for C in itertools.combinations(range(n), c):
                        block = bits[np.ix_(R, C)]
                        if block.all() or not block.any():
                            best = max(best, min(r, c))
        assert brute_max_mono_side(BooleanMatrix(bits)) == best


class TestBrilliantScan:
    def test_one_by_one(self):
        M = BooleanMatrix([[1]])
        w = brilliant_scan(M, Factorization.of(np.ones((1, 1)), np.ones((1, 1)), M))
        assert (w.kind, w.index, w.threshold) == ("row", 0, 1) and w.score == pytest.approx(1)

    def test_all_ones_rank_one(self):
        M = BooleanMatrix.ones(2, 2)
        w = brilliant_scan(M, Factorization.of(np.ones((2, 1)), np.ones((1, 2)), M))
        assert (w.kind, w.index) == ("row", 0)
        assert w.score == pytest.approx(2) and w.threshold == 2

    def test_rejects_inexact(self):
        M = BooleanMatrix.identity(2)
        with pytest.raises(ContractError):
            brilliant_scan(M, Factorization.of(np.ones((2, 1)), np.ones((1, 2))))

    @pytest.mark.parametrize("seed", range(40))
    def test_random_als(self, seed):
        M = gen_random_boolean(8, 8, 0.4, seed=seed)
        if M.is_zero():
            return
        w = brilliant_scan(M, gamma2_upper_als(M, seed=seed))
        assert w.score >= w.threshold - 1e-6


class TestProjectStep:
    def test_projection_formula(self):
        M = BooleanMatrix([[1, 0], [1, 1]])
        U = np.array([[1.0, 0.0], [1.0, 1.0]])
        V = np.eye(2)
        F = Factorization.of(U, V, M)
        _, Fn = project_step(M, F, BrilliantWitness("row", 0, 2.0, 1))
        np.testing.assert_allclose(Fn.U[1], [0.0, 1.0])
        np.testing.assert_allclose(Fn.U[0], [0.0, 0.0])

    def test_identity_row_witness(self):
        M = BooleanMatrix.identity(2)
        F = Factorization.of(np.eye(2), np.eye(2), M)
        Mn, Fn = project_step(M, F, brilliant_scan(M, F))
        assert Mn.bits.tolist() == [[False], [True]]
        np.testing.assert_allclose(Fn.U[0], 0)
        assert Fn.error_against(Mn) <= 1e-12

    def test_zero_row_keeps_columns(self):
        M = BooleanMatrix([[0, 0, 0], [1, 0, 1]])
        U = np.array([[1.0, 0.0], [0.0, 1.0]])
        V = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 1.0]])
        F = Factorization.of(U, V, M)
        Mn, Fn, lg = project_step(M, F, BrilliantWitness("row", 0, 1.0, 0), return_log=True)
        assert Mn.shape == M.shape and lg.deleted == 0
        np.testing.assert_allclose(Fn.U[0], 0)

    def test_stale_witness(self):
        M = BooleanMatrix([[0, 0], [0, 1]])
        F = Factorization.of(np.array([[0.0], [1.0]]), np.array([[0.0, 1.0]]), M)
        with pytest.raises(ContractError, match="stale"):
            project_step(M, F, BrilliantWitness("row", 0, 0.0, 0))

    @pytest.mark.parametrize("seed", range(20))
    def test_frobenius_bookkeeping(self, seed):
        M = gen_random_boolean(10, 9, 0.3, seed=seed)
        if M.is_zero():
            return
        F = gamma2_upper_als(M, seed=seed)
        w = brilliant_scan(M, F)
        Mn, Fn, lg = project_step(M, F, w, return_log=True)
        bound = (F.max_row_norm if w.kind == "row" else F.max_col_norm) ** 2
        assert lg.frobenius_before - lg.frobenius_after >= lg.deleted / bound - 1e-6
        assert Fn.error_against(Mn) <= 1e-6


class TestDecrement:
    def test_identity8(self):
        M = BooleanMatrix.identity(8)
        cert = gamma2_decrement_step(M, exact_factorization(M))
        assert cert.upper_after <= math.sqrt((1 - 0.25) * 1) + 1e-6
        assert cert.selection.is_constant(M, False)

    def test_block_complement(self):
        bits = np.ones((16, 16), dtype=bool)
        bits[:8, :8] = bits[8:, 8:] = False
        M = BooleanMatrix(bits)
        assert M.density <= 0.5
        cert = gamma2_decrement_step(M, gamma2_upper_als(M))
        sub = cert.selection.apply(M)
        assert sub.density <= 0.5
        assert cert.upper_after <= cert.bound + 1e-6
        assert cert.factorization.error_against(sub) <= 1e-6 or cert.upper_after == 0

    def test_zero_stop_gives_zero_selection(self):
        M = BooleanMatrix.identity(16)
        cert = gamma2_decrement_step(M, exact_factorization(M))
        if cert.stop == "zero":
            assert cert.upper_after == 0 and cert.selection.is_constant(M, False)
            assert cert.selection.side >= 16 // 4

    def test_precondition(self):
        M = BooleanMatrix.ones(3, 3)
        with pytest.raises(ContractError):
            gamma2_decrement_step(M, gamma2_upper_als(M))

    @pytest.mark.parametrize("seed", range(15))
    def test_certificate_invariants(self, seed):
        M = gen_random_boolean(24, 24, 0.3, seed=seed)
        cert = gamma2_decrement_step(M, gamma2_upper_als(M, seed=seed), seed=seed)
        sub = cert.selection.apply(M)
        assert cert.upper_after <= math.sqrt((cert.upper_before - 1 / (4 * cert.upper_before)) * cert.upper_before) + 1e-6
        if cert.upper_after > 0:
            assert cert.factorization.error_against(sub) <= 1e-6
        else:
            assert sub.is_zero()


class TestAllZeros:
    def test_zero_matrix(self):
        assert find_all_zeros_rectangle(BooleanMatrix.zeros(4, 4)).shape == (4, 4)

    @pytest.mark.parametrize("n", [4, 5, 6, 8, 12, 16])
    def test_identity(self, n):
        sel = find_all_zeros_rectangle(BooleanMatrix.identity(n))
        assert sel.is_constant(BooleanMatrix.identity(n), False)
        assert sel.side >= n // 2

    def test_point_line(self):
        M = gen_point_line(PointLineParams(3, 5))
        tr = {}
        sel = find_all_zeros_rectangle(M, trace=tr)
        assert sel.is_constant(M, False) and sel.side >= 1
        chain = tr["chain"]
        assert all(b < a + 1e-6 for a, b in zip(chain, chain[1:]))

    def test_density_precondition(self):
        with pytest.raises(ContractError):
            find_all_zeros_rectangle(BooleanMatrix.ones(4, 4))

    @pytest.mark.parametrize("seed", range(10))
    def test_chain_decreases(self, seed):
        M = gen_random_boolean(30, 30, 0.25, seed=seed)
        tr = {}
        find_all_zeros_rectangle(M, seed=seed, trace=tr)
        chain = tr["chain"]
        assert all(b < a + 1e-6 for a, b in zip(chain, chain[1:]))
        if tr.get("pipeline_shape"):
            assert chain[-1] == 0


class TestMono:
    def test_all_ones_rect(self):
        sel, color = find_mono_rectangle(BooleanMatrix.ones(5, 3))
        assert color == 1 and sel.shape == (5, 3)

    def test_identity6(self):
        sel, color = find_mono_rectangle(BooleanMatrix.identity(6))
        assert color == 0 and sel.side >= 3

    def test_tight_example_envelope(self):
        ex = tight_example(ConstructionParams(3, 100, seed=1))
        M = ex.matrix
        sel, color = find_mono_rectangle(M)
        assert color == 0 and sel.is_constant(M, False)
        # the all-zeros side is bounded by 8 * 2^-ell * n (= n for ell = 3)
        assert sel.side / M.rows <= 8 * 2.0**-3 + 1e-9

    def test_empty(self):
        with pytest.raises(ContractError):
            find_mono_rectangle(BooleanMatrix.zeros(0, 3))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 10), st.integers(1, 14), st.sampled_from([0.1, 0.3, 0.5, 0.7, 0.9]), st.integers(0, 2**32))
def test_mono_sound_and_below_oracle(m, n, d, seed):
    M = gen_random_boolean(m, n, d, seed)
    sel, color = find_mono_rectangle(M, budget="fast", seed=seed)
    assert sel.is_constant(M, bool(color))
    assert sel.side <= brute_max_mono_side(M)


class TestTraceToGamma:
    def test_identity(self):
        M = BooleanMatrix.identity(4)
        sel, F = trace_to_gamma_submatrix(M, 0.5)
        assert sel.shape == (2, 2) and F.product_norm <= 2 + 1e-6
        assert F.error_against(sel.apply(M)) <= 1e-9

    def test_all_ones(self):
        M = BooleanMatrix.ones(4, 4)
        sel, F = trace_to_gamma_submatrix(M, 0.25)
        assert sel.shape == (3, 3) and F.product_norm <= 4 + 1e-6

    def test_k9(self):
        A = BooleanMatrix(np.ones((9, 9), dtype=bool) & ~np.eye(9, dtype=bool))
        sel, F = trace_to_gamma_submatrix(A, 0.5)
        assert sel.side >= 5
        assert F.product_norm <= 2 * 16 / 9 + 1e-6

    def test_epsilon_range(self):
        with pytest.raises(ContractError):
            trace_to_gamma_submatrix(BooleanMatrix.identity(3), 0.6)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 12), st.integers(2, 12), st.floats(0.05, 0.5), st.integers(0, 2**32))
def test_trace_to_gamma_certificate(m, n, eps, seed):
    M = gen_random_boolean(m, n, 0.5, seed)
    sel, F = trace_to_gamma_submatrix(M, eps)
    gamma = linalg.trace_norm(M.to_float()) / math.sqrt(m * n)
    assert len(sel.rows) >= (1 - eps) * m - 1e-9 and len(sel.cols) >= (1 - eps) * n - 1e-9
    assert F.error_against(sel.apply(M)) <= 1e-6
    assert F.product_norm <= gamma / eps + 1e-6


class TestConstantInteger:
    def test_constant(self):
        sel, t = constant_submatrix_integer(np.full((3, 3), 2))
        assert t == 2 and sel.shape == (3, 3)

    def test_diag_majority_zero(self):
        M = np.diag([1, 1, 0, 0])
        sel, t = constant_submatrix_integer(M)
        assert t == 0 and sel.is_constant(M, 0)

    def test_two_values(self):
        I3 = np.eye(3, dtype=int)
        M = I3 - 2 * (np.ones((3, 3), dtype=int) - I3)
        sel, t = constant_submatrix_integer(M)
        assert t == -2 and sel.is_constant(M, -2) and sel.side >= 1

    def test_ties_take_lowest(self):
        M = np.array([[1, 3], [3, 1]])
        _, t = constant_submatrix_integer(M)
        assert t == 1

    def test_empty(self):
        with pytest.raises(ContractError):
            constant_submatrix_integer(np.zeros((0, 0), dtype=int))

    @pytest.mark.parametrize("seed", range(10))
    def test_random_recount(self, seed):
        rng = np.random.default_rng(seed)
        M = rng.integers(-2, 3, size=(12, 10))
        sel, t = constant_submatrix_integer(M, seed=seed)
        assert sel.is_constant(M, t) and len(sel.rows) >= 1 and len(sel.cols) >= 1


def test_selection_lift_roundtrip():
    outer = SubmatrixSelection.from_indices([1, 3, 4], [0, 2], (5, 3))
    inner = SubmatrixSelection.from_indices([0, 2], [1], (3, 2))
    assert outer.lift(inner).rows == (1, 4) and outer.lift(inner).cols == (2,)
