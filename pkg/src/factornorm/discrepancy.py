"""Density statistics, discrepancy bounds, half-sized density decrements and
the iterated sparsifier.

For ``N = M - p(M) J`` the discrepancy is ``max_{A,B} |N[A x B]|``; every
estimate carries the witness ``(A, B)`` that attains its value.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .core import BooleanMatrix, Factorization, SubmatrixSelection, as_boolean, make_rng, resolve_budget
from .errors import ContractError, InvariantViolation, LimitError, PartialResultError

log = logging.getLogger(__name__)

EXACT_LIMIT = 16


@dataclass(frozen=True)
class DensityStats:
    p: float
    ones: int
    row_ones: np.ndarray
    col_ones: np.ndarray


@dataclass(frozen=True)
class DiscrepancyEstimate:
    value: float
    witness: SubmatrixSelection
    exact: bool

    def recompute(self, M) -> float:
        return witness_value(M, self.witness.rows, self.witness.cols)


def density_stats(M) -> DensityStats:
    B = as_boolean(M)
    return DensityStats(B.density, B.ones_total, B.row_ones.copy(), B.col_ones.copy())


def witness_value(M, rows, cols) -> float:
    """``| |M[A x B]| - p(M) |A| |B| |`` computed from integer counts."""
    B = as_boolean(M)
    rows = np.asarray(rows, dtype=int)
    cols = np.asarray(cols, dtype=int)
    ones = int(B.bits[np.ix_(rows, cols)].sum())
    m, n = B.shape
    # |ones*mn - |M| |A||B|| / mn keeps the subtraction exact
    return abs(ones * m * n - B.ones_total * len(rows) * len(cols)) / (m * n)


def _best_cols(N: np.ndarray, rowmask: np.ndarray) -> tuple[float, np.ndarray]:
    s = N[rowmask].sum(axis=0)
    pos, neg = s > 0, s < 0
    vp, vn = s[pos].sum(), -s[neg].sum()
    if vp >= vn:
        return vp, pos
    return vn, neg


def _estimate(M: BooleanMatrix, rowmask, colmask, exact: bool) -> DiscrepancyEstimate:
    rows = np.flatnonzero(rowmask)
    cols = np.flatnonzero(colmask)
    if rows.size == 0:
        rows = np.array([0])
    if cols.size == 0:
        cols = np.array([0])
    sel = SubmatrixSelection(tuple(rows.tolist()), tuple(cols.tolist()), M.shape)
    return DiscrepancyEstimate(witness_value(M, sel.rows, sel.cols), sel, exact)


def disc_exact_small(M) -> DiscrepancyEstimate:
    """Exact discrepancy by enumerating subsets of the smaller side.

    For each subset ``A`` the best ``B`` is the set of columns with positive
    (or negative) sum in ``N[A, :]``, whichever total is larger in absolute
    value; positive wins ties.
    """
    B = as_boolean(M)
    m, n = B.shape
    if m == 0 or n == 0:
        raise ContractError("empty matrix")
    if min(m, n) > EXACT_LIMIT:
        raise LimitError(
            f"exact discrepancy enumerates subsets of the smaller side, which must be <= {EXACT_LIMIT} "
            f"(got {min(m, n)}); use disc_lower_rounding"
        )
    transposed = m > n
    W = B.T if transposed else B
    k, n2 = W.shape
    N = W.to_float() - W.density
    best_val, best_mask, best_cols = -1.0, 1, None
    masks = np.arange(1, 1 << k, dtype=np.int64)
    chunk = max(1, (1 << 20) // max(n2, 1))
    bitsel = (masks[:, None] >> np.arange(k)[None, :]) & 1
    for start in range(0, len(masks), chunk):
        S = bitsel[start : start + chunk].astype(float) @ N
        vp = np.where(S > 0, S, 0).sum(axis=1)
        vn = -np.where(S < 0, S, 0).sum(axis=1)
        v = np.maximum(vp, vn)
        i = int(np.argmax(v))
        if v[i] > best_val + 1e-12:
            best_val = v[i]
            best_mask = int(masks[start + i])
            row = S[i]
            best_cols = row > 0 if vp[i] >= vn[i] else row < 0
    rowmask = ((best_mask >> np.arange(k)) & 1).astype(bool)
    if best_cols is None:
        best_cols = np.zeros(n2, dtype=bool)
    if transposed:
        rowmask, best_cols = best_cols, rowmask
    return _estimate(B, rowmask, best_cols, exact=True)


def _refine(N: np.ndarray, rowmask: np.ndarray, colmask: np.ndarray, rounds: int = 2):
    """Alternate best-response: best columns for the rows, then best rows for those columns."""
    best = abs(N[np.ix_(rowmask, colmask)].sum()) if rowmask.any() and colmask.any() else 0.0
    out = (best, rowmask, colmask)
    for _ in range(rounds):
        if not rowmask.any():
            break
        _, colmask = _best_cols(N, rowmask)
        if not colmask.any():
            break
        _, rowmask = _best_cols(N.T, colmask)
        if not rowmask.any():
            break
        val = abs(N[np.ix_(rowmask, colmask)].sum())
        if val > out[0]:
            out = (val, rowmask, colmask)
    return out


def shifted_factorization(F: Factorization, p: float) -> tuple[np.ndarray, np.ndarray]:
    """Unit-ball vectors for ``N = M - pJ`` from a factorization of ``M``:
    ``N = [U, -p 1] [V ; 1^T]`` with rows and columns scaled into the unit ball."""
    F = F.balanced()
    m, n = F.shape
    Ux = np.hstack([F.U, np.full((m, 1), -p)])
    Vy = np.vstack([F.V, np.ones((1, n))])
    ru = np.sqrt(np.einsum("ij,ij->i", Ux, Ux)).max()
    cv = np.sqrt(np.einsum("ij,ij->j", Vy, Vy)).max()
    return Ux / ru, Vy / cv


def disc_lower_rounding(M, F: Factorization, trials: int = 128, seed: int = 0) -> DiscrepancyEstimate:
    """Discrepancy lower bound by random-hyperplane rounding of the factor vectors.

    Each trial draws a Gaussian direction ``g``, splits rows by the sign of
    ``<x_i, g>`` and columns by ``<y_j, g>``, scores the four sign combinations
    and one best-response refinement. The best single entry is always a
    candidate. The value is attained by its witness, hence never exceeds
    ``disc(M)``.
    """
    B = as_boolean(M)
    m, n = B.shape
    p = B.density
    N = B.to_float() - p
    err = F.error_against(B)
    if err > 1e-6:
        raise ContractError(f"factorization does not reproduce the matrix (error {err:.2e})")
    X, Y = shifted_factorization(F, p)
    # baseline: best single entry
    if B.ones_total:
        i, j = np.argwhere(B.bits)[0]
        base = (1 - p, i, j)
    else:
        base = (0.0, 0, 0)
    if B.ones_total < m * n and (base[0] < p):
        i, j = np.argwhere(~B.bits)[0]
        base = (p, i, j)
    best_val = base[0]
    best_r = np.zeros(m, dtype=bool)
    best_c = np.zeros(n, dtype=bool)
    best_r[base[1]] = True
    best_c[base[2]] = True
    for t in range(trials):
        g = make_rng(seed, 0xD15C, t).standard_normal(X.shape[1])
        a = X @ g >= 0
        b = Y.T @ g >= 0
        for ra in (a, ~a):
            if not ra.any():
                continue
            for cb in (b, ~b):
                if not cb.any():
                    continue
                val = abs(N[np.ix_(ra, cb)].sum())
                if val > best_val + 1e-12:
                    best_val, best_r, best_c = val, ra, cb
            val, rr, cc = _refine(N, ra, b if b.any() else ~b)
            if val > best_val + 1e-12:
                best_val, best_r, best_c = val, rr, cc
    return _estimate(B, best_r, best_c, exact=False)


# ---------------------------------------------------------------------------
# density decrement
# ---------------------------------------------------------------------------


def _select_half(bits: np.ndarray, row_first: bool, row_score=None) -> tuple[np.ndarray, np.ndarray]:
    m, n = bits.shape
    hm, hn = math.ceil(m / 2), math.ceil(n / 2)
    if row_first:
        score = bits.sum(axis=1) if row_score is None else row_score
        rows = np.sort(np.argsort(score, kind="stable")[:hm])
        cols = np.sort(np.argsort(bits[rows].sum(axis=0), kind="stable")[:hn])
    else:
        score = bits.sum(axis=0) if row_score is None else row_score
        cols = np.sort(np.argsort(score, kind="stable")[:hn])
        rows = np.sort(np.argsort(bits[:, cols].sum(axis=1), kind="stable")[:hm])
    return rows, cols


def sparse_witness(M, seed: int = 0, starts: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """A pair ``(A, B)`` with ``N[A x B]`` very negative, by alternating best responses."""
    B = as_boolean(M)
    N = B.to_float() - B.density
    best = (0.0, None, None)
    m, n = B.shape
    for s in range(starts):
        rng = make_rng(seed, 0x5BA, s)
        rows = rng.random(m) < 0.5 if s else B.row_ones <= np.median(B.row_ones)
        if not rows.any():
            rows[0] = True
        for _ in range(4):
            sc = N[rows].sum(axis=0)
            cols = sc < 0
            if not cols.any():
                break
            sr = N[:, cols].sum(axis=1)
            rows = sr < 0
            if not rows.any():
                break
        if rows.any() and cols.any():
            val = -N[np.ix_(rows, cols)].sum()
            if val > best[0]:
                best = (val, rows.copy(), cols.copy())
    return best[1], best[2]


def half_density_submatrix(M, seed: int = 0) -> SubmatrixSelection:
    """``ceil(m/2) x ceil(n/2)`` selection of lowest density among three greedy
    constructions: rows then columns by ascending one-count, the reverse
    order, and a sparse-witness-guided choice. Never denser than ``M``."""
    B = as_boolean(M)
    m, n = B.shape
    if m < 2 or n < 2:
        raise ContractError(f"half-sized submatrix needs at least 2 rows and 2 columns, got {B.shape}")
    bits = B.bits
    cands = [_select_half(bits, True), _select_half(bits, False)]
    wr, wc = sparse_witness(B, seed)
    if wr is not None:
        # prefer rows that are sparse on the witness columns, and vice versa
        cands.append(_select_half(bits, True, bits[:, wc].sum(axis=1) - 0.5 * wr))
        cands.append(_select_half(bits, False, bits[wr].sum(axis=0) - 0.5 * wc))
    best = None
    for rows, cols in cands:
        dens = bits[np.ix_(rows, cols)].mean()
        if best is None or dens < best[0] - 1e-15:
            best = (dens, rows, cols)
    sel = SubmatrixSelection(tuple(best[1].tolist()), tuple(best[2].tolist()), B.shape)
    if best[0] > B.density + 1e-12:
        raise InvariantViolation("half-sized selection is denser than its parent")
    return sel


# ---------------------------------------------------------------------------
# sparsifier
# ---------------------------------------------------------------------------


@dataclass
class SparsifyTrace:
    guard: int
    epsilon: float
    gamma: float
    densities: list = field(default_factory=list)
    shapes: list = field(default_factory=list)
    iterations: int = 0
    pruned_shape: tuple | None = None


def _prune(M: BooleanMatrix, sel: SubmatrixSelection, delta: float) -> SubmatrixSelection:
    sub = sel.apply(M)
    mI, nI = sub.shape
    keep_r = np.flatnonzero(sub.row_ones <= delta * nI / 2)
    keep_c = np.flatnonzero(sub.col_ones <= delta * mI / 2)
    if keep_r.size == 0 or keep_c.size == 0:
        return sel
    return sel.lift(SubmatrixSelection(tuple(keep_r.tolist()), tuple(keep_c.tolist()), sub.shape))


def _delta_ok(M: BooleanMatrix, sel: SubmatrixSelection, delta: float) -> bool:
    sub = sel.apply(M)
    m2, n2 = sub.shape
    return bool(np.all(sub.row_ones <= delta * n2 + 1e-12) and np.all(sub.col_ones <= delta * m2 + 1e-12))


def sparsify(M, delta: float, gamma_hint: float, epsilon: float | None = None, c: float | None = None,
             budget=None, seed: int = 0, trace: SparsifyTrace | None = None) -> SubmatrixSelection:
    """Submatrix whose rows have at most ``delta n'`` ones and columns at most ``delta m'``.

    Halves with :func:`half_density_submatrix` until the density is at most
    ``delta/4`` (guard ``ceil(c (gamma/eps^2) log(1/delta))`` halvings), then
    deletes rows with more than ``delta n_I / 2`` ones and columns with more
    than ``delta m_I / 2`` ones. ``epsilon`` defaults to ``1 - p(M)``.
    """
    B = as_boolean(M)
    if not 0 < delta < 0.5:
        raise ContractError(f"delta must lie in (0, 1/2), got {delta}")
    budget = resolve_budget(budget)
    c = budget.sparsify_c if c is None else c
    p0 = B.density
    eps = (1.0 - p0) if epsilon is None else float(epsilon)
    if eps <= 0:
        raise ContractError("sparsifier needs p(M) <= 1 - epsilon with epsilon > 0 (matrix is all ones)")
    if p0 > 1 - eps + 1e-12:
        raise ContractError(f"p(M) = {p0:.4f} exceeds 1 - epsilon = {1 - eps:.4f}")
    gamma = max(float(gamma_hint), 1.0)
    guard = math.ceil(c * gamma / eps**2 * math.log(1 / delta))
    tr = trace if trace is not None else SparsifyTrace(guard, eps, gamma)
    tr.guard, tr.epsilon, tr.gamma = guard, eps, gamma
    sel = SubmatrixSelection.full(B.shape)
    cur = B
    best = (cur.density, sel)
    tr.densities.append(cur.density)
    tr.shapes.append(cur.shape)
    it = 0
    while cur.density > delta / 4:
        if it >= guard or cur.rows < 2 or cur.cols < 2:
            pr = _prune(B, best[1], delta)
            tr.pruned_shape = pr.shape
            tr.iterations = it
            raise PartialResultError(
                f"density {cur.density:.4f} did not reach delta/4 = {delta / 4:.4f} "
                f"after {it} halvings (guard {guard})",
                best=pr,
                trace=tr,
            )
        half = half_density_submatrix(cur, seed=seed + it)
        sel = sel.lift(half)
        cur = sel.apply(B)
        it += 1
        tr.densities.append(cur.density)
        tr.shapes.append(cur.shape)
        if cur.density < best[0]:
            best = (cur.density, sel)
    tr.iterations = it
    out = _prune(B, sel, delta)
    tr.pruned_shape = out.shape
    if not _delta_ok(B, out, delta):
        raise InvariantViolation("pruned selection violates the per-row/per-column delta bound")
    log.debug("sparsify: %d halvings, shape %s -> %s", it, B.shape, out.shape)
    return out
