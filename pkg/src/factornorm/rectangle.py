"""Monochromatic rectangles from bounded factorization norm.

The core loop: find a brilliant row (or column) of a factorization, project
every row vector off it, and drop the columns it meets. The Frobenius mass of
the factor falls by the number of dropped columns over ``gamma``, so after
enough steps the surviving vectors are short and the submatrix has a smaller
certified norm. Iterating the decrement ends in an all-zeros submatrix.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .core import BooleanMatrix, Factorization, SubmatrixSelection, as_boolean, resolve_budget
from .discrepancy import sparsify
from .errors import ContractError, InvariantViolation, NumericalError, PartialResultError
from .gamma2 import gamma2_upper_als
from .graphs import extend_constant, greedy_zero_rectangle

log = logging.getLogger(__name__)

BRILLIANCE_TOL = 1e-6
ZERO_VECTOR = 1e-9
RECON_TOL = 1e-6


@dataclass(frozen=True)
class BrilliantWitness:
    kind: str  # "row" | "col"
    index: int
    score: float
    threshold: int


def _scores(U: np.ndarray) -> np.ndarray:
    G = U @ U.T
    return np.einsum("ij,ij->i", G, G)


def brilliant_scan(M, F: Factorization) -> BrilliantWitness:
    """First row ``r`` (then first column) with ``sum_i <u_r, u_i>^2 >= d_r``."""
    B = as_boolean(M)
    if B.is_zero():
        raise ContractError("brilliant scan needs a nonzero matrix")
    if F.shape != B.shape:
        raise ContractError(f"factorization shape {F.shape} does not match matrix {B.shape}")
    err = F.error_against(B)
    if err > RECON_TOL:
        raise ContractError(f"factorization does not reproduce the matrix (error {err:.2e})")
    U, V = F.U, F.V
    rs = _scores(U)
    rn = np.sqrt(np.einsum("ij,ij->i", U, U))
    ok = (rn > ZERO_VECTOR) & (rs >= B.row_ones - BRILLIANCE_TOL)
    if ok.any():
        r = int(np.argmax(ok))
        return BrilliantWitness("row", r, float(rs[r]), int(B.row_ones[r]))
    cs = _scores(V.T)
    cn = np.sqrt(np.einsum("ij,ij->j", V, V))
    ok = (cn > ZERO_VECTOR) & (cs >= B.col_ones - BRILLIANCE_TOL)
    if ok.any():
        c = int(np.argmax(ok))
        return BrilliantWitness("col", c, float(cs[c]), int(B.col_ones[c]))
    raise InvariantViolation("no brilliant row or column; the factorization is numerically broken")


@dataclass(frozen=True)
class ProjectionLog:
    deleted: int
    frobenius_before: float  # squared Frobenius norm of the projected factor
    frobenius_after: float
    kept: tuple[int, ...]  # surviving indices on the shrinking side


def project_step(M, F: Factorization, w: BrilliantWitness, return_log: bool = False):
    """Project off the witness vector and drop the lines it meets.

    Row witness ``r``: ``u_j <- u_j - <u_r,u_j>/|u_r|^2 u_r`` for every row, keep
    the columns with ``M[r, j] = 0``. Column witnesses act symmetrically.
    Returns ``(M', F')`` and optionally a :class:`ProjectionLog`.
    """
    B = as_boolean(M)
    U, V = np.array(F.U), np.array(F.V)
    if w.kind == "row":
        ur = U[w.index]
        nr = ur @ ur
        if math.sqrt(nr) <= ZERO_VECTOR:
            raise ContractError(f"stale witness: row {w.index} has a zero factor vector")
        before = float(np.sum(U * U))
        U = U - np.outer(U @ ur / nr, ur)
        U[w.index] = 0.0
        keep = np.flatnonzero(~B.bits[w.index])
        V = V[:, keep]
        Mn = BooleanMatrix(B.bits[:, keep])
        after = float(np.sum(U * U))
        deleted = B.cols - keep.size
    elif w.kind == "col":
        vc = V[:, w.index]
        nc = vc @ vc
        if math.sqrt(nc) <= ZERO_VECTOR:
            raise ContractError(f"stale witness: column {w.index} has a zero factor vector")
        before = float(np.sum(V * V))
        V = V - np.outer(vc, vc @ V / nc)
        V[:, w.index] = 0.0
        keep = np.flatnonzero(~B.bits[:, w.index])
        U = U[keep]
        Mn = BooleanMatrix(B.bits[keep])
        after = float(np.sum(V * V))
        deleted = B.rows - keep.size
    else:
        raise ContractError(f"unknown witness kind {w.kind!r}")
    Fn = Factorization.of(U, V, Mn)
    if return_log:
        return Mn, Fn, ProjectionLog(int(deleted), before, after, tuple(int(k) for k in keep))
    return Mn, Fn


@dataclass(frozen=True)
class DecrementCertificate:
    selection: SubmatrixSelection
    factorization: Factorization
    upper_before: float
    upper_after: float
    stop: str = ""
    steps: int = 0
    sparsified_shape: tuple = ()

    @property
    def bound(self) -> float:
        g = self.upper_before
        return math.sqrt(max(g - 1 / (4 * g), 0.0) * g) if g > 0 else 0.0


def _clean(bits: np.ndarray, U: np.ndarray, V: np.ndarray):
    # an all-zero line of M may carry a tiny nonzero vector; zeroing it keeps UV = M
    U[~bits.any(axis=1)] = 0.0
    V[:, ~bits.any(axis=0)] = 0.0


def gamma2_decrement_step(M, F: Factorization, budget=None, seed: int = 0, square: bool | None = None,
                          trace: dict | None = None) -> DecrementCertificate:
    """One norm-decrement step: a submatrix with certified norm at most
    ``sqrt((gamma - 1/(4 gamma)) gamma)`` where ``gamma = ||U||_row ||V||_col``.

    Sparsify to 0.1-fraction rows and columns, run brilliant projections until
    the matrix is zero or a side drops below half its starting size, prune the
    factor vectors with squared norm above ``gamma - 1/(4 gamma)``, and (for
    square input) square off by ascending one-count.
    """
    B = as_boolean(M)
    budget = resolve_budget(budget)
    if B.is_zero():
        raise ContractError("decrement step needs a nonzero matrix")
    if B.density > 0.5 + 1e-12:
        raise ContractError(f"decrement step needs p(M) <= 1/2, got {B.density:.4f}")
    if F.error_against(B) > RECON_TOL:
        raise ContractError("factorization does not reproduce the matrix")
    square = (B.rows == B.cols) if square is None else square
    F = F.balanced()
    gamma = F.product_norm
    tr = trace if trace is not None else {}
    # -- sparsify to 0.1-fraction lines
    try:
        sel0 = sparsify(B, budget.sparsify_target, gamma_hint=gamma, epsilon=0.5, budget=budget, seed=seed)
    except PartialResultError as exc:
        sel0 = exc.best
        tr["sparsify_partial"] = True
    M0 = sel0.apply(B)
    m0, n0 = M0.shape
    F0 = F.restrict(sel0.rows, sel0.cols, M0)
    rows = np.array(sel0.rows)
    cols = np.array(sel0.cols)
    U, V = np.array(F0.U), np.array(F0.V)
    bits = M0.bits
    _clean(bits, U, V)
    steps, frob = 0, []
    stop = "zero"
    while True:
        if not bits.any():
            stop = "zero"
            break
        if bits.shape[1] < n0 / 2:
            stop = "cols"
            break
        if bits.shape[0] < m0 / 2:
            stop = "rows"
            break
        Mi = BooleanMatrix(bits)
        Fi = Factorization.of(U, V, Mi)
        w = brilliant_scan(Mi, Fi)
        Mn, Fn, lg = project_step(Mi, Fi, w, return_log=True)
        sq = Fi.max_row_norm**2 if w.kind == "row" else Fi.max_col_norm**2
        frob.append((w.kind, lg.deleted, lg.frobenius_before - lg.frobenius_after, lg.deleted / sq))
        keep = np.array(lg.kept, dtype=int)
        if w.kind == "row":
            cols = cols[keep]
        else:
            rows = rows[keep]
        bits = Mn.bits
        U, V = np.array(Fn.U), np.array(Fn.V)
        _clean(bits, U, V)
        steps += 1
    tr.update(steps=steps, stop=stop, frobenius=frob, sparsified=(m0, n0))
    if stop == "zero":
        # any zero submatrix of the final matrix; keep all of it
        sel = SubmatrixSelection(tuple(rows.tolist()), tuple(cols.tolist()), B.shape)
        if square:
            s = min(len(rows), len(cols))
            sel = SubmatrixSelection(sel.rows[:s], sel.cols[:s], B.shape)
        Fz = Factorization.zero(*sel.shape)
        return DecrementCertificate(sel, Fz, gamma, 0.0, stop, steps, (m0, n0))
    thresh = gamma - 1 / (4 * gamma)
    if stop == "cols":
        r2 = np.einsum("ij,ij->i", U, U)
        keep_r = np.flatnonzero(r2 <= thresh + 1e-12)
        if keep_r.size == 0:
            raise InvariantViolation("no short row vectors survive the pruning")
        U, rows, bits = U[keep_r], rows[keep_r], bits[keep_r]
    else:
        c2 = np.einsum("ij,ij->j", V, V)
        keep_c = np.flatnonzero(c2 <= thresh + 1e-12)
        if keep_c.size == 0:
            raise InvariantViolation("no short column vectors survive the pruning")
        V, cols, bits = V[:, keep_c], cols[keep_c], bits[:, keep_c]
    if square:
        s = min(bits.shape)
        if bits.shape[0] > s:
            pick = np.sort(np.argsort(bits.sum(axis=1), kind="stable")[:s])
            U, rows, bits = U[pick], rows[pick], bits[pick]
        elif bits.shape[1] > s:
            pick = np.sort(np.argsort(bits.sum(axis=0), kind="stable")[:s])
            V, cols, bits = V[:, pick], cols[pick], bits[:, pick]
    order_r, order_c = np.argsort(rows), np.argsort(cols)
    rows, cols = rows[order_r], cols[order_c]
    U, V = U[order_r], V[:, order_c]
    sel = SubmatrixSelection(tuple(rows.tolist()), tuple(cols.tolist()), B.shape)
    Fs = Factorization.of(U, V, sel.apply(B))
    if Fs.reconstruction_error > RECON_TOL:
        raise NumericalError("decrement factorization drifted", {"reconstruction": Fs.reconstruction_error})
    cert = DecrementCertificate(sel, Fs, gamma, Fs.product_norm, stop, steps, (m0, n0))
    if cert.upper_after > cert.bound + 1e-6:
        raise InvariantViolation(f"decrement bound violated: {cert.upper_after:.6f} > {cert.bound:.6f}")
    return cert


# ---------------------------------------------------------------------------
# pipelines
# ---------------------------------------------------------------------------


def _bigger(a: SubmatrixSelection | None, b: SubmatrixSelection | None):
    if a is None:
        return b
    if b is None:
        return a
    ka = (a.side, len(a.rows) * len(a.cols))
    kb = (b.side, len(b.rows) * len(b.cols))
    return b if kb > ka else a


def find_all_zeros_rectangle(M, budget=None, seed: int = 0, trace: dict | None = None) -> SubmatrixSelection:
    """All-zeros submatrix by repeated norm decrements.

    Needs ``p(M) <= 1/2``. Rectangular input is handled directly. The
    decrement chain runs at most ``4 ceil(gamma^2)`` times; the greedy row
    sweep is also run, the larger result is extended to a maximal all-zeros
    rectangle and verified by recount.
    """
    B = as_boolean(M)
    budget = resolve_budget(budget)
    if B.rows == 0 or B.cols == 0:
        raise ContractError("empty matrix")
    if B.density > 0.5 + 1e-12:
        raise ContractError(f"all-zeros search needs p(M) <= 1/2, got {B.density:.4f}")
    tr = trace if trace is not None else {}
    if B.is_zero():
        tr.update(chain=[], source="trivial")
        return SubmatrixSelection.full(B.shape)
    square = B.rows == B.cols
    F = gamma2_upper_als(B, iterations=budget.als_iterations, seed=seed)
    gamma0 = F.product_norm
    guard = 4 * math.ceil(gamma0**2)
    chain = [gamma0]
    sel = SubmatrixSelection.full(B.shape)
    cur, Fc = B, F
    pipeline = None
    failure = None
    for it in range(guard):
        try:
            cert = gamma2_decrement_step(cur, Fc, budget=budget, seed=seed + it, square=square)
        except (InvariantViolation, NumericalError, ContractError) as exc:
            failure = f"{type(exc).__name__}: {exc}"
            break
        sel = sel.lift(cert.selection)
        cur = sel.apply(B)
        chain.append(cert.upper_after)
        if cur.is_zero():
            pipeline = sel
            break
        Fc = cert.factorization
        # a fresh factorization of the smaller matrix may certify a lower norm
        try:
            alt = gamma2_upper_als(cur, iterations=budget.als_iterations, seed=seed)
            if alt.product_norm < Fc.product_norm:
                Fc = alt
        except (NumericalError, ContractError):
            pass
    greedy = greedy_zero_rectangle(B)
    tr.update(chain=chain, guard=guard, pipeline_shape=pipeline.shape if pipeline else None)
    if pipeline is None:
        tr["failure"] = failure or "iteration guard exceeded"
        if greedy is None:
            raise PartialResultError("no all-zeros rectangle found", best=None, trace=tr)
    best = _bigger(pipeline, greedy)
    tr["source"] = "decrement" if best is pipeline else "greedy"
    if budget.extend:
        best = extend_constant(B, best, False)
    if not best.is_constant(B, False):
        raise InvariantViolation("all-zeros selection failed recount")
    tr["shape"] = best.shape
    return best


def find_mono_rectangle(M, budget=None, seed: int = 0, trace: dict | None = None) -> tuple[SubmatrixSelection, int]:
    """Monochromatic rectangle: zeros of ``M`` if ``p(M) <= 1/2``, else zeros of ``J - M``."""
    B = as_boolean(M)
    if B.rows == 0 or B.cols == 0:
        raise ContractError("empty matrix")
    if B.density <= 0.5:
        sel, color = find_all_zeros_rectangle(B, budget, seed, trace), 0
    else:
        sel, color = find_all_zeros_rectangle(B.complement(), budget, seed, trace), 1
    if not sel.is_constant(B, bool(color)):
        raise InvariantViolation("monochromatic selection failed recount")
    return sel, color


def trace_to_gamma_submatrix(M, epsilon: float) -> tuple[SubmatrixSelection, Factorization]:
    """Keep the ``ceil((1-eps) m)`` shortest rows of ``U = A Sigma^{1/2}`` and the
    ``ceil((1-eps) n)`` shortest columns of ``V = Sigma^{1/2} B``.

    The restricted factorization certifies ``gamma_2 <= gamma / eps`` for
    ``gamma = ||M||_tr / sqrt(mn)``.
    """
    A = M.to_float() if isinstance(M, BooleanMatrix) else np.asarray(M, dtype=float)
    if not 0 < epsilon <= 0.5:
        raise ContractError(f"epsilon must lie in (0, 1/2], got {epsilon}")
    m, n = A.shape
    sv = linalg.svd(A)
    rs = np.sqrt(sv.singular_values)
    U = sv.left * rs
    V = rs[:, None] * sv.right
    mk = math.ceil((1 - epsilon) * m - 1e-12)
    nk = math.ceil((1 - epsilon) * n - 1e-12)
    rows = np.sort(np.argsort(np.einsum("ij,ij->i", U, U), kind="stable")[:mk])
    cols = np.sort(np.argsort(np.einsum("ij,ij->j", V, V), kind="stable")[:nk])
    sel = SubmatrixSelection(tuple(rows.tolist()), tuple(cols.tolist()), (m, n))
    F = Factorization.of(U[rows], V[:, cols], A[np.ix_(rows, cols)])
    return sel, F


def _interp_indicator(values: np.ndarray, S: list[int], t: int) -> np.ndarray:
    """``q(x) = 1 - prod_{k != t}(x - k) / prod_{k != t}(t - k)`` evaluated exactly."""
    others = [k for k in S if k != t]
    denom = 1
    for k in others:
        denom *= t - k
    out = np.empty(values.shape, dtype=bool)
    for x in np.unique(values):
        num = 1
        for k in others:
            num *= int(x) - k
        q = 1 - num / denom if denom else 1  # numerator and denominator are exact ints
        if q not in (0, 1):
            raise InvariantViolation(f"interpolation polynomial is not Boolean at {x}")
        out[values == x] = bool(q)
    return out


def constant_submatrix_integer(M, budget=None, seed: int = 0, trace: dict | None = None):
    """Submatrix of an integer matrix on which every entry equals ``t``.

    ``t`` is the most frequent value (smallest on ties). The Boolean matrix
    ``N = q(M)`` built from the interpolation polynomial vanishes exactly where
    ``M == t``; it is sparsified with ``delta = 0.49`` and searched for an
    all-zeros rectangle. Returns ``(selection, t)``.
    """
    A = np.asarray(M)
    if A.ndim != 2 or A.size == 0:
        raise ContractError("constant submatrix needs a nonempty 2-d integer matrix")
    if not np.all(A == np.round(A)):
        raise ContractError("matrix entries must be integers")
    A = A.astype(np.int64)
    budget = resolve_budget(budget)
    tr = trace if trace is not None else {}
    vals, counts = np.unique(A, return_counts=True)
    t = int(vals[np.argmax(counts)])  # unique() sorts, argmax takes the first maximum
    bound = int(np.abs(A).max())
    S = list(range(-bound, bound + 1))
    N = BooleanMatrix(_interp_indicator(A, S, t))
    tr.update(t=t, support=S, density=N.density)
    if N.is_zero():
        return SubmatrixSelection.full(A.shape), t
    gamma = gamma2_upper_als(N, iterations=budget.als_iterations, seed=seed).product_norm
    tr["gamma_N"] = gamma
    if N.density <= 0.5:
        sp = SubmatrixSelection.full(N.shape)
    else:
        try:
            sp = sparsify(N, 0.49, gamma_hint=gamma, budget=budget, seed=seed)
        except PartialResultError as exc:
            sp = exc.best
            tr["sparsify_partial"] = True
    sub = sp.apply(N)
    if sub.density > 0.5:
        sel = greedy_zero_rectangle(N)
    else:
        sel = sp.lift(find_all_zeros_rectangle(sub, budget=budget, seed=seed))
    sel = extend_constant(A, sel, t) if budget.extend else sel
    if not sel.is_constant(A, t):
        raise InvariantViolation("constant selection failed recount")
    return sel, t
