"""Certified lower/upper brackets on the gamma_2 factorization norm.

Upper bounds always come with an explicit factorization ``M = UV``; lower
bounds come with unit vectors ``u, v`` such that ``||M o (u v^T)||_tr`` is the
reported value.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .core import BooleanMatrix, Factorization, as_boolean, make_rng, resolve_budget
from .errors import ContractError, NumericalError

log = logging.getLogger(__name__)

EXACT_TOL = 1e-6
RIDGE = 1e-10
WEIGHT_FLOOR = 1e-14


@dataclass(frozen=True)
class Gamma2Bracket:
    lower: float
    lower_witness: tuple[np.ndarray, np.ndarray]
    upper: float
    upper_witness: Factorization
    lower_method: str = ""
    upper_method: str = ""
    candidates: dict = field(default_factory=dict)

    @property
    def gap(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float, tol: float = 1e-6) -> bool:
        return self.lower - tol <= value <= self.upper + tol


def _real(M) -> np.ndarray:
    if isinstance(M, BooleanMatrix):
        return M.to_float()
    return np.asarray(M, dtype=float)


def dual_value(M, u, v) -> float:
    """``||M o (u v^T)||_tr`` for the given vectors (no normalization applied)."""
    A = _real(M)
    return linalg.trace_norm(np.asarray(u, float)[:, None] * A * np.asarray(v, float)[None, :])


def _unit(x: np.ndarray) -> np.ndarray:
    nrm = np.linalg.norm(x)
    return x / nrm if nrm > 0 else np.full(len(x), 1.0 / np.sqrt(len(x)))


# ---------------------------------------------------------------------------
# lower bounds
# ---------------------------------------------------------------------------


def gamma2_lower_normalized_trace(M) -> float:
    """``||M||_tr / sqrt(mn)``."""
    A = _real(M)
    m, n = A.shape
    if m == 0 or n == 0:
        return 0.0
    return linalg.trace_norm(A) / np.sqrt(m * n)


def degree_weighted_start(M) -> tuple[np.ndarray, np.ndarray]:
    """``u(i) = sqrt(d_i / f)`` over rows, ``v`` uniform over columns."""
    B = as_boolean(M)
    m, n = B.shape
    f = B.ones_total
    u = np.sqrt(B.row_ones / f) if f else np.full(m, 1 / np.sqrt(m))
    v = np.full(n, 1 / np.sqrt(n))
    return u, v


def _ascent(A: np.ndarray, u: np.ndarray, v: np.ndarray, iterations: int):
    u, v = _unit(u), _unit(v)
    best = (dual_value(A, u, v), u, v)
    for it in range(1, iterations + 1):
        K = u[:, None] * A * v[None, :]
        sv = linalg.svd(K)
        P = sv.left @ sv.right  # polar factor = subgradient of the trace norm
        G = A * P
        gu = G @ v
        gv = G.T @ u
        step = 0.5 / np.sqrt(it)
        u = _unit(u + step * gu)
        v = _unit(v + step * gv)
        val = dual_value(A, u, v)
        if val > best[0]:
            best = (val, u, v)
    return best


def gamma2_lower_dual(M, restarts: int = 16, iterations: int = 100, seed: int = 0):
    """Best ``||M o (uv^T)||_tr`` over projected subgradient ascents.

    Starts: uniform vectors, the degree-weighted vectors, then ``restarts``
    random positive starts. Returns ``(value, u, v)``; any value returned is a
    lower bound on gamma_2(M).
    """
    A = _real(M)
    m, n = A.shape
    if not np.any(A):
        raise ContractError("gamma_2 dual bound requested for the zero matrix")
    starts = [(np.ones(m), np.ones(n))]
    if isinstance(M, BooleanMatrix) or np.all((A == 0) | (A == 1)):
        starts.append(degree_weighted_start(A))
    for r in range(restarts):
        rng = make_rng(seed, 0x6A2D, r)
        starts.append((rng.random(m) + 1e-3, rng.random(n) + 1e-3))
    best = None
    for u0, v0 in starts:
        cand = _ascent(A, u0, v0, iterations)
        # strict '>' keeps the lowest start index on ties
        if best is None or cand[0] > best[0]:
            best = cand
    return best


# ---------------------------------------------------------------------------
# upper bounds
# ---------------------------------------------------------------------------


def _min_norm_solve(U: np.ndarray, M: np.ndarray) -> np.ndarray:
    """Ridge least squares ``argmin ||UV - M||^2 + ridge ||V||^2``."""
    k = U.shape[1]
    G = U.T @ U + RIDGE * np.eye(k)
    return np.linalg.solve(G, U.T @ M)


def _repair(U: np.ndarray, V: np.ndarray, A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """One alternating least-squares pass that pulls ``UV`` back onto ``A``."""
    V = _min_norm_solve(U, A)
    U = _min_norm_solve(V.T, A.T).T
    return U, V


def _weighted_factor(A: np.ndarray, p: np.ndarray, q: np.ndarray, rank_cap: int):
    sp, sq = np.sqrt(p), np.sqrt(q)
    K = sp[:, None] * A * sq[None, :]
    sv = linalg.svd(K)
    s = sv.singular_values
    if s.size == 0 or s[0] == 0.0:
        return None
    r = int(np.count_nonzero(s > s[0] * max(A.shape) * np.finfo(float).eps * 10))
    r = min(r, rank_cap)
    rs = np.sqrt(s[:r])
    U = (sv.left[:, :r] * rs) / sp[:, None]
    V = (rs[:, None] * sv.right[:r]) / sq[None, :]
    return U, V, float(s.sum())


def gamma2_upper_als(M, rank_cap: int | None = None, iterations: int = 100, seed: int = 0) -> Factorization:
    """Exact factorization ``M = UV`` with small ``||U||_row * ||V||_col``.

    Starts from the truncated SVD. Each pass reweights rows and columns by
    their current squared factor norms (p_i <- p_i ||u_i||^2 / f), refactors the
    reweighted matrix by SVD, and repairs the product with a ridge
    least-squares pass. The best balanced factorization seen is returned.
    ``seed`` jitters the initial weights when nonzero.
    """
    B = as_boolean(M)
    A = B.to_float()
    m, n = A.shape
    if B.is_zero():
        raise ContractError("gamma_2 upper bound requested for the all-zero matrix")
    rank_cap = min(m, n) if rank_cap is None else int(rank_cap)

    # zero rows/columns carry zero factor vectors and do not take part in the weights
    rmask = B.row_ones > 0
    cmask = B.col_ones > 0
    Ar = A[np.ix_(rmask, cmask)]
    mr, nr = Ar.shape
    p = np.full(mr, 1.0 / mr)
    q = np.full(nr, 1.0 / nr)
    if seed:
        rng = make_rng(seed, 0xA15)
        p = p * (1 + 0.05 * rng.random(mr))
        q = q * (1 + 0.05 * rng.random(nr))
        p, q = p / p.sum(), q / q.sum()

    best: Factorization | None = None
    history = []
    for it in range(max(1, iterations)):
        out = _weighted_factor(Ar, p, q, rank_cap)
        if out is None:
            break
        Uw, Vw, f = out
        err = np.abs(Uw @ Vw - Ar).max()
        if err > EXACT_TOL:
            Uw, Vw = _repair(Uw, Vw, Ar)
            err = np.abs(Uw @ Vw - Ar).max()
        row2 = np.einsum("ij,ij->i", Uw, Uw)
        col2 = np.einsum("ij,ij->j", Vw, Vw)
        if err <= EXACT_TOL:
            U = np.zeros((m, Uw.shape[1]))
            V = np.zeros((Vw.shape[0], n))
            U[rmask] = Uw
            V[:, cmask] = Vw
            cand = Factorization.of(U, V, A).balanced()
            if cand.reconstruction_error <= EXACT_TOL and (best is None or cand.product_norm < best.product_norm):
                best = cand
        elif it == 0:
            raise ContractError(
                f"rank_cap={rank_cap} is below the rank of M (reconstruction error {err:.2e})"
            )
        history.append(np.sqrt(row2.max() * col2.max()))
        p = np.maximum(p * row2 / f, WEIGHT_FLOOR)
        q = np.maximum(q * col2 / f, WEIGHT_FLOOR)
        p, q = p / p.sum(), q / q.sum()
        if len(history) > 5 and abs(history[-2] - history[-1]) < 1e-13 * history[-1]:
            break
    if best is None:
        raise NumericalError("no exact factorization found", {"iterations": iterations})
    return best


def _weights_lower_bound(M, iterations: int) -> tuple[float, np.ndarray, np.ndarray]:
    """Lower bound from the same reweighting run: ``u = sqrt(p)``, ``v = sqrt(q)``."""
    B = as_boolean(M)
    A = B.to_float()
    m, n = A.shape
    rmask = B.row_ones > 0
    cmask = B.col_ones > 0
    Ar = A[np.ix_(rmask, cmask)]
    p = np.full(Ar.shape[0], 1.0 / Ar.shape[0])
    q = np.full(Ar.shape[1], 1.0 / Ar.shape[1])
    best = (0.0, None, None)
    for _ in range(max(1, iterations)):
        out = _weighted_factor(Ar, p, q, min(Ar.shape))
        if out is None:
            break
        Uw, Vw, f = out
        if f > best[0]:
            u = np.zeros(m)
            v = np.zeros(n)
            u[rmask] = np.sqrt(p)
            v[cmask] = np.sqrt(q)
            best = (f, u, v)
        row2 = np.einsum("ij,ij->i", Uw, Uw)
        col2 = np.einsum("ij,ij->j", Vw, Vw)
        p = np.maximum(p * row2 / f, WEIGHT_FLOOR)
        q = np.maximum(q * col2 / f, WEIGHT_FLOOR)
        p, q = p / p.sum(), q / q.sum()
    # recompute with exactly normalized vectors so the value is what the witness certifies
    u, v = _unit(best[1]), _unit(best[2])
    return dual_value(A, u, v), u, v


def gamma2_upper_rank(M, tol: float = 1e-9, max_iter: int = 20000) -> Factorization:
    """Factorization with product norm close to ``sqrt(rank M)``.

    Puts the columns of a rank factorization in John position: D-optimal
    design weights ``w`` on the columns (Frank-Wolfe with away steps) give
    ``G = sum_j w_j v_j v_j^T`` and the factorization
    ``U' = sqrt(r) U G^{1/2}``, ``V' = G^{-1/2} V / sqrt(r)``. Rows then satisfy
    ``||u'_i||^2 = r sum_j w_j M_ij^2 <= r`` for a Boolean M, and columns
    ``||v'_j||^2 = v_j^T G^{-1} v_j / r``, which tends to 1.
    """
    B = as_boolean(M)
    A = B.to_float()
    if B.is_zero():
        raise ContractError("rank route requested for the all-zero matrix")
    sv = linalg.svd(A)
    s = sv.singular_values
    r = int(np.count_nonzero(s > s[0] * max(A.shape) * np.finfo(float).eps * 10))
    U0 = sv.left[:, :r] * s[:r]
    V_all = sv.right[:r]
    # zero columns of M take no design weight; their factor columns stay zero
    live = np.flatnonzero(B.col_ones > 0)
    V0 = V_all[:, live]
    n = V0.shape[1]
    w = np.full(n, 1.0 / n)
    G = (V0 * w) @ V0.T
    Ginv = np.linalg.inv(G)
    for _ in range(max_iter):
        kappa = np.einsum("ij,ij->j", V0, Ginv @ V0)
        j_add = int(np.argmax(kappa))
        if kappa[j_add] <= r * (1 + tol):
            break
        support = np.flatnonzero(w > 0)
        j_away = int(support[np.argmin(kappa[support])])
        if r - kappa[j_away] > kappa[j_add] - r:
            # away step: move weight off the least informative support point
            k = kappa[j_away]
            beta = (k / r - 1) / (k - 1) if k != 1 else -w[j_away]
            beta = max(beta, -w[j_away] / (1 - w[j_away])) if w[j_away] < 1 else beta
            j = j_away
        else:
            k = kappa[j_add]
            beta = (k / r - 1) / (k - 1)
            j = j_add
        w = (1 - beta) * w
        w[j] += beta
        w[np.abs(w) < 1e-18] = 0.0
        # Sherman-Morrison for G <- (1-beta) G + beta v v^T
        vj = V0[:, j]
        Gi = Ginv / (1 - beta)
        Gv = Gi @ vj
        Ginv = Gi - beta * np.outer(Gv, Gv) / (1 + beta * vj @ Gv)
    G = (V0 * w) @ V0.T
    evals, evecs = np.linalg.eigh(G)
    evals = np.maximum(evals, 1e-300)
    Gh = (evecs * np.sqrt(evals)) @ evecs.T
    Gmh = (evecs / np.sqrt(evals)) @ evecs.T
    U = np.sqrt(r) * U0 @ Gh
    V = Gmh @ V_all / np.sqrt(r)
    U, V = _repair(U, V, A) if np.abs(U @ V - A).max() > EXACT_TOL else (U, V)
    return Factorization.of(U, V, A).balanced()


def gamma2_psd_exact(A) -> float:
    """gamma_2 of a PSD matrix is its largest diagonal entry."""
    A = np.asarray(A, dtype=float)
    ok, lam = linalg.is_psd(A)
    if not ok:
        raise ContractError(f"matrix is not positive semidefinite (lambda_min = {lam:.3e})")
    return float(np.max(np.diag(A))) if A.size else 0.0


# ---------------------------------------------------------------------------
# bracket
# ---------------------------------------------------------------------------


def gamma2_bracket(M, budget=None, seed: int = 0, include_rank_route: bool = True) -> Gamma2Bracket:
    """Combine every implemented bound into one certified interval."""
    from .graphs import gamma2_upper_from_degeneracy

    budget = resolve_budget(budget)
    B = as_boolean(M)
    if B.is_zero():
        raise ContractError("gamma_2 bracket requested for the all-zero matrix")
    m, n = B.shape
    A = B.to_float()

    lowers = {}
    uniform = (np.full(m, 1 / np.sqrt(m)), np.full(n, 1 / np.sqrt(n)))
    lowers["normalized_trace"] = (gamma2_lower_normalized_trace(B), uniform)
    val, u, v = gamma2_lower_dual(B, budget.dual_restarts, budget.dual_iterations, seed)
    lowers["dual_ascent"] = (val, (u, v))
    val, u, v = _weights_lower_bound(B, budget.als_iterations)
    lowers["reweighting"] = (val, (u, v))

    uppers = {}
    uppers["als"] = gamma2_upper_als(B, iterations=budget.als_iterations, seed=seed)
    deg = gamma2_upper_from_degeneracy(B)
    uppers["degeneracy_split"] = deg.combined
    if include_rank_route:
        try:
            uppers["sqrt_rank"] = gamma2_upper_rank(B)
        except (NumericalError, np.linalg.LinAlgError) as exc:  # pragma: no cover - defensive
            log.warning("rank route failed: %s", exc)

    valid_uppers = {k: f for k, f in uppers.items() if f.error_against(A) <= EXACT_TOL}
    lo_name = max(lowers, key=lambda k: lowers[k][0])
    up_name = min(valid_uppers, key=lambda k: valid_uppers[k].product_norm)
    lo_val, lo_wit = lowers[lo_name]
    up = valid_uppers[up_name]
    return Gamma2Bracket(
        lower=float(lo_val),
        lower_witness=lo_wit,
        upper=float(up.product_norm),
        upper_witness=up,
        lower_method=lo_name,
        upper_method=up_name,
        candidates={
            "lower": {k: float(x[0]) for k, x in lowers.items()},
            "upper": {k: float(f.product_norm) for k, f in uppers.items()},
        },
    )
