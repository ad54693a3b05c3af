"""Graph-side algorithms on bi-adjacency matrices and simple graphs.

Degeneracy peeling and the two-part split certificate, four-cycle checks, the
degree regularization step, the degree-weighted trace lower bound, the
all-ones (Zarankiewicz) pipeline, greedy Turan cliques and the
smallest-eigenvalue clique pipeline.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import linalg
from .core import BooleanMatrix, Factorization, Graph, SubmatrixSelection, as_boolean
from .errors import ContractError, InvariantViolation, PartialResultError

log = logging.getLogger(__name__)

ROW, COL = "row", "col"


# ---------------------------------------------------------------------------
# bipartite graphs and degeneracy
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BipartiteGraph:
    """Bipartite graph given by its bi-adjacency matrix (rows = side a)."""

    adjacency: BooleanMatrix

    def __post_init__(self):
        object.__setattr__(self, "adjacency", as_boolean(self.adjacency))

    @property
    def side_a(self) -> int:
        return self.adjacency.rows

    @property
    def side_b(self) -> int:
        return self.adjacency.cols

    @property
    def degrees_a(self) -> np.ndarray:
        return self.adjacency.row_ones

    @property
    def degrees_b(self) -> np.ndarray:
        return self.adjacency.col_ones

    @property
    def edge_count(self) -> int:
        return self.adjacency.ones_total

    @property
    def average_degree(self) -> float:
        v = self.side_a + self.side_b
        return 2.0 * self.edge_count / v if v else 0.0


def _bits(M) -> np.ndarray:
    if isinstance(M, BipartiteGraph):
        return M.adjacency.bits
    return as_boolean(M).bits


@dataclass(frozen=True)
class DegeneracyReport:
    degeneracy: int
    elimination_order: tuple[tuple[str, int], ...]  # (side, index), side in {"row", "col"}
    removal_degrees: tuple[int, ...]  # remaining degree of each vertex when removed

    def position(self) -> dict[tuple[str, int], int]:
        return {v: k for k, v in enumerate(self.elimination_order)}


def degeneracy_order(M) -> DegeneracyReport:
    """Min-degree peeling of the bipartite graph of ``M``.

    Ties go to the row side first, then to the lowest index.
    """
    bits = _bits(M)
    m, n = bits.shape
    deg_r = bits.sum(axis=1).astype(np.int64)
    deg_c = bits.sum(axis=0).astype(np.int64)
    alive_r = np.ones(m, dtype=bool)
    alive_c = np.ones(n, dtype=bool)
    big = np.iinfo(np.int64).max
    order, degs = [], []
    for _ in range(m + n):
        dr = np.where(alive_r, deg_r, big)
        dc = np.where(alive_c, deg_c, big)
        ir = int(np.argmin(dr)) if m else -1
        ic = int(np.argmin(dc)) if n else -1
        best_r = dr[ir] if m else big
        best_c = dc[ic] if n else big
        if best_r <= best_c:
            order.append((ROW, ir))
            degs.append(int(best_r))
            alive_r[ir] = False
            deg_c -= bits[ir].astype(np.int64) * alive_c
        else:
            order.append((COL, ic))
            degs.append(int(best_c))
            alive_c[ic] = False
            deg_r -= bits[:, ic].astype(np.int64) * alive_r
    return DegeneracyReport(max(degs, default=0), tuple(order), tuple(degs))


def replay_degeneracy(M, report: DegeneracyReport) -> bool:
    """Check that replaying the order never removes a vertex of degree above ``d``."""
    bits = _bits(M)
    alive_r = np.ones(bits.shape[0], dtype=bool)
    alive_c = np.ones(bits.shape[1], dtype=bool)
    for side, idx in report.elimination_order:
        if side == ROW:
            deg = int(bits[idx, alive_c].sum())
            alive_r[idx] = False
        else:
            deg = int(bits[alive_r, idx].sum())
            alive_c[idx] = False
        if deg > report.degeneracy:
            return False
    return not alive_r.any() and not alive_c.any()


@dataclass(frozen=True)
class DegeneracySplit:
    bound: float  # sqrt(max row count of M1) + sqrt(max col count of M2)
    part_rows: Factorization  # M1 = M1 . I
    part_cols: Factorization  # M2 = I . M2
    combined: Factorization  # a single factorization of M with product norm == bound
    M1: BooleanMatrix
    M2: BooleanMatrix
    report: DegeneracyReport


def gamma2_upper_from_degeneracy(M) -> DegeneracySplit:
    """Split ``M = M1 + M2`` along the peeling order.

    An edge goes to ``M1`` when its row is removed before its column, so rows of
    ``M1`` and columns of ``M2`` have at most ``d`` ones. The trivial
    factorizations ``M1 = M1 I`` and ``M2 = I M2`` certify
    ``gamma_2(M) <= sqrt(D1) + sqrt(D2) <= 2 sqrt(d)``. ``combined`` glues them
    into ``[a M1, b I] [I/a ; M2/b]`` with ``a^2/b^2 = 1/sqrt(D1 D2)``, which
    attains the same product norm.
    """
    B = as_boolean(M)
    bits = B.bits
    m, n = bits.shape
    rep = degeneracy_order(B)
    pos_r = np.empty(m, dtype=np.int64)
    pos_c = np.empty(n, dtype=np.int64)
    for k, (side, idx) in enumerate(rep.elimination_order):
        (pos_r if side == ROW else pos_c)[idx] = k
    row_first = pos_r[:, None] < pos_c[None, :]
    M1 = bits & row_first
    M2 = bits & ~row_first
    A = B.to_float()
    F1 = Factorization.of(M1.astype(float), np.eye(n), M1)
    F2 = Factorization.of(np.eye(m), M2.astype(float), M2)
    D1 = int(M1.sum(axis=1).max(initial=0))
    D2 = int(M2.sum(axis=0).max(initial=0))
    if D1 == 0 and D2 == 0:
        combined = Factorization.zero(m, n)
    elif D1 == 0:
        combined = Factorization.of(np.eye(m), M2.astype(float), A)
    elif D2 == 0:
        combined = Factorization.of(M1.astype(float), np.eye(n), A)
    else:
        a = (D1 * D2) ** -0.125
        b = 1.0 / a
        U = np.hstack([a * M1, b * np.eye(m)])
        V = np.vstack([np.eye(n) / a, M2 / b])
        combined = Factorization.of(U, V, A)
    bound = math.sqrt(D1) + math.sqrt(D2)
    return DegeneracySplit(bound, F1, F2, combined, BooleanMatrix(M1), BooleanMatrix(M2), rep)


# ---------------------------------------------------------------------------
# four cycles
# ---------------------------------------------------------------------------


def is_c4_free(M) -> tuple[bool, tuple[tuple[int, int], tuple[int, int]] | None]:
    """``(True, None)`` or ``(False, ((r1, r2), (c1, c2)))`` for the first 2x2 all-ones block."""
    bits = _bits(M)
    X = bits.astype(np.int64)
    C = X @ X.T
    np.fill_diagonal(C, 0)
    hits = np.argwhere(np.triu(C, 1) >= 2)
    if hits.size == 0:
        return True, None
    r1, r2 = (int(x) for x in hits[0])  # argwhere is row-major, hence lexicographic
    common = np.flatnonzero(bits[r1] & bits[r2])
    return False, ((r1, r2), (int(common[0]), int(common[1])))


# ---------------------------------------------------------------------------
# regularization
# ---------------------------------------------------------------------------


def _peel_densest(bits: np.ndarray, rows: np.ndarray, cols: np.ndarray):
    """Greedy peeling for a large average-degree induced subgraph.

    Returns the best prefix, then removes vertices of degree below half the
    current average until none is left.
    """
    alive_r = np.zeros(bits.shape[0], dtype=bool)
    alive_c = np.zeros(bits.shape[1], dtype=bool)
    alive_r[rows] = True
    alive_c[cols] = True
    sub = bits & alive_r[:, None] & alive_c[None, :]
    deg_r = sub.sum(axis=1).astype(np.int64)
    deg_c = sub.sum(axis=0).astype(np.int64)
    e = int(sub.sum())
    v = int(alive_r.sum() + alive_c.sum())
    best = (2 * e / v if v else 0.0, alive_r.copy(), alive_c.copy())
    big = np.iinfo(np.int64).max
    while v > 1:
        dr = np.where(alive_r, deg_r, big)
        dc = np.where(alive_c, deg_c, big)
        ir, ic = int(np.argmin(dr)), int(np.argmin(dc))
        if dr[ir] <= dc[ic]:
            alive_r[ir] = False
            e -= int(dr[ir])
            deg_c -= bits[ir].astype(np.int64) * alive_c
        else:
            alive_c[ic] = False
            e -= int(dc[ic])
            deg_r -= bits[:, ic].astype(np.int64) * alive_r
        v -= 1
        avg = 2 * e / v
        if avg > best[0] + 1e-12:
            best = (avg, alive_r.copy(), alive_c.copy())
    _, ar, ac = best
    return _min_degree_cleanup(bits, ar, ac)


def _min_degree_cleanup(bits, ar, ac):
    ar, ac = ar.copy(), ac.copy()
    while True:
        sub = bits & ar[:, None] & ac[None, :]
        e = int(sub.sum())
        v = int(ar.sum() + ac.sum())
        if v == 0:
            return ar, ac, 0.0
        avg = 2 * e / v
        dr = sub.sum(axis=1)
        dc = sub.sum(axis=0)
        low_r = ar & (dr < avg / 2)
        low_c = ac & (dc < avg / 2)
        if not low_r.any() and not low_c.any():
            return ar, ac, avg
        ar &= ~low_r
        ac &= ~low_c


@dataclass(frozen=True)
class RegularizeResult:
    selection: SubmatrixSelection
    capped_side: str  # "row": ||N||_row^2 <= 6 d', "col": ||N||_col^2 <= 6 d'
    d_prime: float
    d_initial: float
    d_core: float


def _conditions(bits_sub: np.ndarray):
    m, n = bits_sub.shape
    e = int(bits_sub.sum())
    d = 2 * e / (m + n)
    dr, dc = bits_sub.sum(axis=1), bits_sub.sum(axis=0)
    min_ok = dr.min() >= d / 2 and dc.min() >= d / 2
    return d, min_ok, dr.max() <= 6 * d, dc.max() <= 6 * d


def regularize_degrees(M, max_rounds: int = 8) -> RegularizeResult:
    """Submatrix of large average degree ``d'`` whose rows and columns all have at
    least ``d'/2`` ones, and where one side has all degrees at most ``6 d'``.

    Peel to a dense core, drop the vertices of degree above ``2 d_0`` on its
    larger side, and peel again. The conditions are rechecked on the output;
    the drop/peel round repeats up to ``max_rounds`` times.
    """
    B = as_boolean(M)
    if B.is_zero():
        raise ContractError("regularization needs a nonzero matrix")
    bits = B.bits
    m, n = bits.shape
    d_initial = 2 * B.ones_total / (m + n)
    ar, ac, d0 = _peel_densest(bits, np.arange(m), np.arange(n))
    d_core = d0
    last = None
    for _ in range(max_rounds):
        rows, cols = np.flatnonzero(ar), np.flatnonzero(ac)
        sub = bits[np.ix_(rows, cols)]
        d, min_ok, row_cap, col_cap = _conditions(sub)
        if min_ok and (row_cap or col_cap):
            side = ROW if row_cap and (len(rows) >= len(cols) or not col_cap) else COL
            sel = SubmatrixSelection(tuple(rows), tuple(cols), B.shape)
            log.debug("regularize: d=%.3f core=%.3f d'=%.3f side=%s", d_initial, d_core, d, side)
            return RegularizeResult(sel, side, d, d_initial, d_core)
        last = SubmatrixSelection(tuple(rows), tuple(cols), B.shape)
        # drop high-degree vertices on the larger side, then re-densify
        if len(rows) >= len(cols):
            high = ar & (np.where(ar, (bits & ac[None, :]).sum(axis=1), 0) > 2 * d)
            ar = ar & ~high
        else:
            high = ac & (np.where(ac, (bits & ar[:, None]).sum(axis=0), 0) > 2 * d)
            ac = ac & ~high
        ar, ac, _ = _peel_densest(bits, np.flatnonzero(ar), np.flatnonzero(ac))
        if not ar.any() or not ac.any():
            break
    raise PartialResultError("degree conditions not reached within the round guard", best=last)


def c4_lower_certificate(M) -> float:
    """Degree-weighted trace lower bound on gamma_2 for a four-cycle-free matrix.

    On the regularized submatrix ``N`` (oriented so that the columns are the
    capped side) take ``u_i = sqrt(d_i / f)`` and ``v_j = 1/sqrt(n)`` and return
    ``||N o (u v^T)||_tr``.
    """
    B = as_boolean(M)
    free, bad = is_c4_free(B)
    if not free:
        raise ContractError(f"matrix contains a four-cycle at rows {bad[0]}, columns {bad[1]}")
    if B.is_zero():
        raise ContractError("four-cycle certificate needs a nonzero matrix")
    reg = regularize_degrees(B)
    N = reg.selection.apply(B)
    if reg.capped_side == ROW:
        N = N.T
    return degree_weighted_trace(N)


def degree_weighted_trace(N) -> float:
    N = as_boolean(N)
    d = N.row_ones.astype(float)
    f = d.sum()
    u = np.sqrt(d / f)
    v = np.full(N.cols, 1.0 / math.sqrt(N.cols))
    return linalg.trace_norm(u[:, None] * N.to_float() * v[None, :])


# ---------------------------------------------------------------------------
# all-ones rectangles
# ---------------------------------------------------------------------------


def greedy_zero_rectangle(M) -> SubmatrixSelection | None:
    """Row-sorted sweep for a large all-zeros rectangle.

    From each seed row (and also from the global ascending row order) add rows
    in order of fewest ones on the surviving column set; keep the best side,
    then the best area. ``None`` when ``M`` has no zero entry.
    """
    B = as_boolean(M)
    bits = B.bits
    m, n = bits.shape
    if B.ones_total == m * n:
        return None
    zero = ~bits
    best = None  # (side, area, rows, cols)

    def consider(rows, colmask):
        k = int(colmask.sum())
        if not rows or k == 0:
            return
        key = (min(len(rows), k), len(rows) * k)
        nonlocal best
        if best is None or key > best[:2]:
            best = (key[0], key[1], sorted(rows), np.flatnonzero(colmask).tolist())

    seeds = list(np.argsort(B.row_ones, kind="stable"))
    for start in seeds:
        colmask = zero[start].copy()
        rows = [int(start)]
        consider(rows, colmask)
        used = np.zeros(m, dtype=bool)
        used[start] = True
        while True:
            # rows compatible with the largest part of the surviving columns
            overlap = (zero & colmask[None, :]).sum(axis=1)
            overlap[used] = -1
            r = int(np.argmax(overlap))
            if overlap[r] <= 0:
                break
            colmask = colmask & zero[r]
            rows.append(r)
            used[r] = True
            consider(rows, colmask)
    return SubmatrixSelection.from_indices(best[2], best[3], B.shape)


def extend_constant(M, sel: SubmatrixSelection, value) -> SubmatrixSelection:
    """Grow a constant selection until no row or column can be added."""
    A = M.bits if isinstance(M, BooleanMatrix) else np.asarray(M)
    rows = set(sel.rows)
    cols = set(sel.cols)
    target = A == value
    changed = True
    while changed:
        changed = False
        cl = sorted(cols)
        ok_rows = np.flatnonzero(target[:, cl].all(axis=1))
        new_r = [int(r) for r in ok_rows if int(r) not in rows]
        if new_r:
            rows.update(new_r)
            changed = True
        rl = sorted(rows)
        ok_cols = np.flatnonzero(target[rl, :].all(axis=0))
        new_c = [int(c) for c in ok_cols if int(c) not in cols]
        if new_c:
            cols.update(new_c)
            changed = True
    return SubmatrixSelection.from_indices(rows, cols, sel.parent_shape)


def _dense_cores(bits: np.ndarray):
    """Peeling prefixes: the best average-degree core and the largest
    best-density core (density = edges / (rows * cols))."""
    m, n = bits.shape
    alive_r = np.ones(m, dtype=bool)
    alive_c = np.ones(n, dtype=bool)
    deg_r = bits.sum(axis=1).astype(np.int64)
    deg_c = bits.sum(axis=0).astype(np.int64)
    e = int(bits.sum())
    big = np.iinfo(np.int64).max
    best_avg = (2 * e / (m + n), alive_r.copy(), alive_c.copy())
    best_den = (e / (m * n), alive_r.copy(), alive_c.copy())
    nr, nc = m, n
    while nr > 1 or nc > 1:
        dr = np.where(alive_r, deg_r, big) if nr > 1 else np.full(m, big)
        dc = np.where(alive_c, deg_c, big) if nc > 1 else np.full(n, big)
        ir, ic = int(np.argmin(dr)), int(np.argmin(dc))
        if dr[ir] <= dc[ic]:
            alive_r[ir] = False
            e -= int(dr[ir])
            deg_c -= bits[ir].astype(np.int64) * alive_c
            nr -= 1
        else:
            alive_c[ic] = False
            e -= int(dc[ic])
            deg_r -= bits[:, ic].astype(np.int64) * alive_r
            nc -= 1
        avg = 2 * e / (nr + nc)
        den = e / (nr * nc)
        if avg > best_avg[0] + 1e-12:
            best_avg = (avg, alive_r.copy(), alive_c.copy())
        if den > best_den[0] + 1e-12:
            best_den = (den, alive_r.copy(), alive_c.copy())
    return [best_avg, best_den]


def zarankiewicz_allones(M, gamma_hint: float | None = None, t: int = 1, budget=None, seed: int = 0,
                         report: dict | None = None) -> SubmatrixSelection | None:
    """Large all-ones rectangle: dense core, then the zeros pipeline on ``J - core``.

    Greedy peeling stands in for the dense-subgraph lemma. On each candidate
    core ``N`` the complement ``J - N`` is sparsified with ``delta = 0.49`` and
    searched for an all-zeros rectangle; a greedy all-ones sweep on ``M`` is
    also tried. The largest verified all-ones selection is returned (``None``
    if ``M`` has no one entry). ``t`` is the requested side; a smaller side is
    reported, not an error.
    """
    from .discrepancy import sparsify
    from .rectangle import find_all_zeros_rectangle

    B = as_boolean(M)
    if B.is_zero():
        if report is not None:
            report.update(side=0, target=t, reached=False)
        return None
    bits = B.bits
    candidates = []
    stages = []
    for den, ar, ac in _dense_cores(bits):
        rows, cols = np.flatnonzero(ar), np.flatnonzero(ac)
        core = SubmatrixSelection(tuple(rows), tuple(cols), B.shape)
        N = core.apply(B)
        comp = N.complement()
        info = {"core_shape": list(core.shape), "core_edges": N.ones_total, "score": float(den)}
        if comp.is_zero():
            inner = SubmatrixSelection.full(N.shape)
        else:
            try:
                try:
                    sp = sparsify(comp, 0.49, gamma_hint=(gamma_hint or 1.0) + 1.0, budget=budget)
                except PartialResultError as exc:
                    sp = exc.best
                    info["sparsify_partial"] = True
                sub = sp.apply(comp)
                zr = find_all_zeros_rectangle(sub, budget=budget, seed=seed)
                inner = sp.lift(zr)
            except (PartialResultError, ContractError) as exc:
                info["pipeline_error"] = str(exc)
                inner = None
        if inner is not None:
            sel = core.lift(inner)
            if sel.is_constant(B, True):
                candidates.append(("core", sel))
                info["side"] = sel.side
        stages.append(info)
    g = greedy_zero_rectangle(B.complement())
    if g is not None:
        candidates.append(("greedy", g))
    extended = [(src, extend_constant(B, sel, True)) for src, sel in candidates]
    extended = [(src, s) for src, s in extended if s.is_constant(B, True)]
    src, best = max(extended, key=lambda c: (c[1].side, len(c[1].rows) * len(c[1].cols)))
    if report is not None:
        report.update(side=best.side, target=t, reached=best.side >= t, source=src, cores=stages)
    return best


# ---------------------------------------------------------------------------
# cliques
# ---------------------------------------------------------------------------


def turan_clique(G: Graph) -> list[int]:
    """Greedy clique: take the vertex with most neighbours inside the candidate
    set (fewest non-neighbours), then restrict the candidates to its
    neighbourhood. Output size is at least ``n / (dbar + 1)`` with ``dbar`` the
    average degree of the complement.
    """
    adj = G.adj
    cand = np.ones(G.n, dtype=bool)
    clique = []
    while cand.any():
        inside = (adj & cand[None, :]).sum(axis=1)
        inside = np.where(cand, inside, -1)
        v = int(np.argmax(inside))
        clique.append(v)
        cand = cand & adj[v]
    return sorted(clique)


def turan_bound(G: Graph) -> int:
    if G.n == 0:
        return 0
    comp_edges = G.n * (G.n - 1) // 2 - G.m
    dbar = 2 * comp_edges / G.n
    return math.ceil(G.n / (dbar + 1) - 1e-12)


def extend_clique(G: Graph, clique: Sequence[int]) -> list[int]:
    """Add vertices (lowest index first) while the set stays a clique."""
    members = list(clique)
    common = np.ones(G.n, dtype=bool)
    for v in members:
        common &= G.adj[v]
    while True:
        cand = np.flatnonzero(common)
        if cand.size == 0:
            return sorted(members)
        v = int(cand[0])
        members.append(v)
        common &= G.adj[v]


def tripartite_min_eigenvalue(A: Sequence[int], B: Sequence[int], C: Sequence[int], G: Graph) -> float:
    """Smallest eigenvalue of ``G[A u B u C]`` for the forbidden three-part pattern."""
    A, B, C = list(A), list(B), list(C)
    k = len(A)
    if len(B) != k or len(C) != k or k == 0:
        raise ContractError(f"parts must have equal positive size, got {len(A)}, {len(B)}, {len(C)}")
    allv = A + B + C
    if len(set(allv)) != 3 * k:
        raise ContractError("parts are not disjoint")
    adj = G.adj
    for a in A:
        for b in B:
            if adj[a, b]:
                raise ContractError(f"edge between the first two parts: ({a}, {b})")
    for x in A + B:
        for c in C:
            if not adj[x, c]:
                raise ContractError(f"missing edge to the third part: ({x}, {c})")
    lam = linalg.sym_eigen(G.induced(allv).adjacency_float()).min
    if lam > -k / 3 + 1e-8:
        raise InvariantViolation(f"smallest eigenvalue {lam:.6f} exceeds -k/3 = {-k / 3:.6f}")
    return lam


def smallest_eigenvalue_clique(G: Graph, lam: float, budget=None, seed: int = 0,
                               report: dict | None = None) -> list[int]:
    """Clique in a graph whose adjacency spectrum is bounded below by ``-lam``.

    All-ones rectangle ``X x Y`` in the adjacency matrix, a check that ``X``
    holds no two edgeless ``k``-sets (``k = ceil(3 lam + 1)``), Turan on
    ``G[X]``, then extension to a maximal clique of ``G``.
    """
    if G.n == 0:
        raise ContractError("empty vertex set")
    lam_min = linalg.sym_eigen(G.adjacency_float()).min if G.n else 0.0
    if lam_min < -lam - 1e-8:
        raise ContractError(f"smallest eigenvalue {lam_min:.6f} is below -lambda = {-lam:.6f}")
    rep = report if report is not None else {}
    rep["lambda_min"] = lam_min
    k = math.ceil(3 * lam + 1)
    rep["k"] = k
    sel = zarankiewicz_allones(G.adjacency, gamma_hint=2 * lam, budget=budget, seed=seed)
    if sel is None:
        clique = turan_clique(G)
        rep.update(fallback=True, clique_size=len(clique))
        return clique
    X, Y = list(sel.rows), list(sel.cols)
    rep.update(X=len(X), Y=len(Y))
    GX = G.induced(X)
    comp = GX.complement()
    pair = zarankiewicz_allones(comp.adjacency, gamma_hint=2 * lam + 2, budget=budget, seed=seed)
    u = pair.side if pair is not None else 0
    rep["independent_pair_side"] = u
    if pair is not None and u >= k and len(Y) >= k:
        # would contradict the spectral bound through the three-part pattern
        Aset = [X[i] for i in pair.rows[:k]]
        Bset = [X[j] for j in pair.cols[:k]]
        tripartite_min_eigenvalue(Aset, Bset, Y[:k], G)
        raise InvariantViolation("found a forbidden three-part pattern in a graph with bounded spectrum")
    inner = turan_clique(GX)
    clique = extend_clique(G, [X[i] for i in inner])
    if not G.is_clique(clique):
        raise InvariantViolation("clique verification failed")
    rep.update(turan_on_X=len(inner), clique_size=len(clique), fallback=False)
    return clique
