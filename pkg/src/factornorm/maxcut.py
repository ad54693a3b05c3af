"""MaxCut: exact and local search, Edwards bound, energy, spectral hyperplane
rounding, surplus composition and the inverse-MaxCut clique pipeline."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg
from .core import BooleanMatrix, Graph, SubmatrixSelection, make_rng, resolve_budget
from .discrepancy import sparsify
from .errors import ContractError, LimitError, NumericalError, PartialResultError
from .graphs import extend_clique, extend_constant, turan_clique
from .rectangle import find_all_zeros_rectangle, trace_to_gamma_submatrix

log = logging.getLogger(__name__)

EXACT_LIMIT = 24
TIE_TOL = 1e-12


@dataclass(frozen=True)
class CutReport:
    partition: np.ndarray  # bool per vertex; True = side X
    cut_size: int
    surplus: float
    method: str
    trials_used: int = 0

    @classmethod
    def of(cls, G: Graph, partition, method: str, trials_used: int = 0) -> "CutReport":
        side = np.asarray(partition, dtype=bool).copy()
        side.setflags(write=False)
        c = G.cut_size(side)
        return cls(side, c, c - G.m / 2, method, trials_used)

    def verify(self, G: Graph) -> bool:
        return G.cut_size(self.partition) == self.cut_size and self.surplus == self.cut_size - G.m / 2


def graph_energy(G: Graph) -> float:
    """Sum of absolute adjacency eigenvalues."""
    if G.n == 0:
        return 0.0
    return float(np.abs(linalg.sym_eigen(G.adjacency_float()).eigenvalues).sum())


def edwards_bound(m: int) -> float:
    if m < 0:
        raise ContractError("edge count must be nonnegative")
    return m / 2 + (math.sqrt(8 * m + 1) - 1) / 8


def _cut_table(adj: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """Cut sizes of the induced graph on ``idx`` for every mask over ``idx``."""
    k = len(idx)
    masks = np.arange(1 << k, dtype=np.int64)
    X = ((masks[:, None] >> np.arange(k)[None, :]) & 1).astype(np.int32)
    A = adj[np.ix_(idx, idx)].astype(np.int32)
    deg = A.sum(axis=1)
    # edges cut = sum_{a in S} deg(a) - 2 e(S)
    inner = np.einsum("ij,jk,ik->i", X, A, X) // 2
    return X @ deg - 2 * inner, X


def maxcut_exact(G: Graph) -> CutReport:
    """Exhaustive search over ``2^(n-1)`` bipartitions (last vertex fixed to side 0).

    The vertices are split into a low and a high half; the cut value of every
    pair of half-masks is assembled from two tables and one bilinear product.
    """
    n = G.n
    if n > EXACT_LIMIT:
        raise LimitError(f"exact MaxCut is limited to n <= {EXACT_LIMIT} (got {n}); use local search (--mode local) instead")
    if n <= 1 or G.m == 0:
        return CutReport.of(G, np.zeros(n, dtype=bool), "exact")
    adj = G.adj
    free = n - 1  # vertex n-1 stays on side 0
    h = free // 2
    low = np.arange(h)
    high = np.arange(h, free)
    cut_l, XL = _cut_table(adj, low)
    cut_h, XH = _cut_table(adj, high)
    last = n - 1
    # edges to the fixed vertex are cut when the other end is on side 1
    to_last_l = XL @ adj[low, last].astype(np.int32)
    to_last_h = XH @ adj[high, last].astype(np.int32)
    A_lh = adj[np.ix_(low, high)].astype(np.int32)
    deg_l_to_h = XL @ A_lh.sum(axis=1)  # sum over chosen low vertices of their high-neighbours
    deg_h_to_l = XH @ A_lh.sum(axis=0)
    best = (-1, 0, 0)
    chunk = max(1, (1 << 22) // max(len(cut_h), 1))
    for s in range(0, len(cut_l), chunk):
        sl = slice(s, s + chunk)
        cross = deg_l_to_h[sl, None] + deg_h_to_l[None, :] - 2 * (XL[sl] @ A_lh @ XH.T)
        tot = (cut_l[sl] + to_last_l[sl])[:, None] + (cut_h + to_last_h)[None, :] + cross
        i = int(np.argmax(tot))
        a, b = divmod(i, tot.shape[1])
        if tot[a, b] > best[0]:
            best = (int(tot[a, b]), s + a, b)
    part = np.zeros(n, dtype=bool)
    part[low] = XL[best[1]].astype(bool)
    part[high] = XH[best[2]].astype(bool)
    rep = CutReport.of(G, part, "exact")
    if rep.cut_size != best[0]:
        raise NumericalError("exact MaxCut table disagrees with recount", {"table": best[0], "recount": rep.cut_size})
    return rep


def _local_opt(adj: np.ndarray, side: np.ndarray) -> np.ndarray:
    s = np.where(side, 1, -1).astype(np.int64)
    A = adj.astype(np.int64)
    while True:
        # gain of flipping v = (same-side neighbours) - (cross neighbours)
        gain = s * (A @ s)
        v = int(np.argmax(gain))
        if gain[v] <= 0:
            return s > 0
        s[v] = -s[v]


def maxcut_local_search(G: Graph, restarts: int = 32, seed: int = 0) -> CutReport:
    """Best-improvement single-vertex flips from random partitions."""
    if G.n == 0:
        return CutReport.of(G, np.zeros(0, dtype=bool), "local", 0)
    best = None
    for r in range(max(1, restarts)):
        side = make_rng(seed, 0x10CA1, r).random(G.n) < 0.5
        side = _local_opt(G.adj, side)
        c = G.cut_size(side)
        if best is None or c > best[0]:
            best = (c, side)
    return CutReport.of(G, best[1], "local", max(1, restarts))


def best_cut(G: Graph, budget=None, seed: int = 0) -> CutReport:
    budget = resolve_budget(budget)
    if G.n <= EXACT_LIMIT:
        return maxcut_exact(G)
    return maxcut_local_search(G, budget.local_restarts, seed)


# ---------------------------------------------------------------------------
# spectral rounding
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RoundingEmbedding:
    vectors: np.ndarray  # row i is x_i
    M_prime: np.ndarray
    negative_eigenvalue_sum: float
    residuals: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.vectors.shape[0]


def spectral_embedding(G: Graph) -> RoundingEmbedding:
    """Unit vectors from the negative eigenspace of the adjacency matrix.

    ``M = sum_{lambda_i < 0} v_i v_i^T`` has ``<A, M> = -E(G)/2``; setting its
    diagonal to one gives a PSD ``M'`` with Gram vectors ``x_i``.
    """
    if G.m == 0:
        raise ContractError("spectral embedding needs at least one edge")
    if np.any(G.degrees() == 0):
        raise ContractError("remove isolated vertices before building the embedding")
    A = G.adjacency_float()
    sp = linalg.sym_eigen(A)
    neg = sp.eigenvalues < -1e-10
    Q = sp.eigenvectors[:, neg]
    M = Q @ Q.T
    Mp = M.copy()
    np.fill_diagonal(Mp, 1.0)
    w, P = np.linalg.eigh(Mp)
    X = P * np.sqrt(np.clip(w, 0.0, None))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    neg_sum = float(sp.eigenvalues[neg].sum())
    energy = float(np.abs(sp.eigenvalues).sum())
    res = {
        "inner_AM_plus_half_energy": abs(float(np.sum(A * M)) + energy / 2),
        "gram": float(np.abs(X @ X.T - Mp).max()),
        "lambda_min": float(w.min()),
        "frobenius_sq": float(np.sum(Mp * Mp)),
    }
    if (
        res["inner_AM_plus_half_energy"] > 1e-6
        or res["gram"] > 1e-7
        or res["lambda_min"] < -1e-7
        or res["frobenius_sq"] > 2 * G.n + 1e-9
    ):
        raise NumericalError("spectral embedding failed verification", res)
    X.setflags(write=False)
    Mp.setflags(write=False)
    return RoundingEmbedding(X, Mp, neg_sum, res)


@dataclass(frozen=True)
class RoundingResult:
    cut: CutReport
    closed_form_expectation: float
    mean_cut: float
    std_cut: float
    trials: int

    @property
    def standard_error(self) -> float:
        return self.std_cut / math.sqrt(self.trials) if self.trials else float("inf")


def closed_form_expectation(emb: RoundingEmbedding, G: Graph) -> float:
    if G.m == 0:
        return 0.0
    e = G.edge_array()
    ip = np.clip(emb.M_prime[e[:, 0], e[:, 1]], -1.0, 1.0)
    return float(np.sum(np.arccos(ip)) / math.pi)


def hyperplane_round_surplus(emb: RoundingEmbedding, G: Graph, trials: int = 128, seed: int = 0) -> RoundingResult:
    """Random-hyperplane cuts of the embedding; best cut, sample mean and std.

    Vertex ``i`` goes to side X when ``<x_i, g> >= 0`` (or within 1e-12 of 0).
    """
    if emb.n != G.n:
        raise ContractError("embedding and graph have different vertex counts")
    X = emb.vectors
    e = G.edge_array()
    cuts = np.empty(trials, dtype=np.int64)
    best = None
    for t in range(trials):
        g = make_rng(seed, 0x4EB, t).standard_normal(X.shape[1])
        proj = X @ g
        side = (proj >= 0) | (np.abs(proj) < TIE_TOL)
        c = int(np.count_nonzero(side[e[:, 0]] != side[e[:, 1]])) if G.m else 0
        cuts[t] = c
        if best is None or c > best[0]:
            best = (c, side)
    side = best[1] if best is not None else np.ones(G.n, dtype=bool)
    rep = CutReport.of(G, side, "spectral", trials)
    std = float(cuts.std(ddof=1)) if trials > 1 else 0.0
    return RoundingResult(rep, closed_form_expectation(emb, G), float(cuts.mean()) if trials else 0.0, std, trials)


# ---------------------------------------------------------------------------
# surplus composition
# ---------------------------------------------------------------------------


def surplus_compose(G: Graph, parts: Sequence[Sequence[int]], part_cuts: Sequence[CutReport]) -> CutReport:
    """Glue per-part cuts into a cut of ``G`` with surplus at least their sum.

    Parts are oriented one at a time, keeping the orientation that cuts more
    edges to the vertices already placed; leftover vertices then join the side
    that cuts more of their placed edges. Each choice is at least the average
    of its two options, which is what the random-orientation argument needs.
    """
    parts = [list(p) for p in parts]
    if len(parts) != len(part_cuts):
        raise ContractError("one cut report per part is required")
    seen = set()
    for p in parts:
        for v in p:
            if v in seen:
                raise ContractError(f"parts overlap at vertex {v}")
            if not 0 <= v < G.n:
                raise ContractError(f"vertex {v} out of range")
            seen.add(v)
    for p, rep in zip(parts, part_cuts):
        H = G.induced(p)
        if len(rep.partition) != len(p) or not rep.verify(H):
            raise ContractError("part cut does not match its induced subgraph")
    adj = G.adj
    side = np.zeros(G.n, dtype=bool)
    placed = np.zeros(G.n, dtype=bool)
    for p, rep in zip(parts, part_cuts):
        idx = np.array(p, dtype=int)
        s = np.asarray(rep.partition, dtype=bool)
        cross = adj[np.ix_(idx, np.flatnonzero(placed))]
        other = side[placed]
        keep = int(np.count_nonzero(cross & (s[:, None] != other[None, :])))
        flip = int(np.count_nonzero(cross & (s[:, None] == other[None, :])))
        side[idx] = s if keep >= flip else ~s
        placed[idx] = True
    for v in range(G.n):
        if placed[v]:
            continue
        nb = adj[v] & placed
        on_x = int(np.count_nonzero(side[nb]))
        on_y = int(np.count_nonzero(~side[nb]))
        side[v] = on_y > on_x  # join the side opposite the majority
        placed[v] = True
    rep = CutReport.of(G, side, "composed")
    total = sum(r.surplus for r in part_cuts)
    if rep.surplus < total:
        raise NumericalError("composed surplus fell below the part sum", {"surplus": rep.surplus, "sum": total})
    return rep


# ---------------------------------------------------------------------------
# inverse MaxCut
# ---------------------------------------------------------------------------


def inverse_maxcut_clique(G: Graph, budget=None, seed: int = 0) -> tuple[list[int], dict]:
    """Clique from small surplus: energy, trace-to-gamma submatrix, sparsified
    complement, all-ones rectangle ``X x Y``, Turan on ``G[X]``.

    Every stage's realized sizes are recorded in the returned report. If a
    stage degenerates, the clique comes from Turan on ``G`` itself.
    """
    budget = resolve_budget(budget)
    if G.m == 0:
        raise ContractError("inverse MaxCut pipeline needs at least one edge")
    H, keep = G.without_isolated()
    rep: dict = {"n": H.n, "m": H.m}
    cut = best_cut(H, budget, seed)
    sqm = math.sqrt(H.m)
    alpha = cut.surplus / sqm
    energy = graph_energy(H)
    rep.update(cut=cut.cut_size, surplus=cut.surplus, cut_method=cut.method, alpha=alpha, energy=energy,
               energy_over_surplus=energy / cut.surplus if cut.surplus else None,
               energy_over_alpha_n=energy / (alpha * H.n) if alpha else None)
    eps_raw = 1 / (72 * alpha**2) if alpha > 0 else 0.5
    eps = min(eps_raw, 0.5)
    rep.update(epsilon=eps, epsilon_clamped=eps_raw > 0.5)

    def fallback(reason: str):
        clique = turan_clique(G)
        rep.update(fallback=reason, clique_size=len(clique))
        return clique, rep

    A = H.adjacency
    try:
        sel_b, Fb = trace_to_gamma_submatrix(A, eps)
        Bm = sel_b.apply(A)
        rep.update(B_shape=list(Bm.shape), B_gamma=Fb.product_norm, B_ones=Bm.ones_total)
        comp = Bm.complement()
        if comp.is_zero():
            sp = SubmatrixSelection.full(Bm.shape)
        else:
            try:
                sp = sparsify(comp, 0.49, gamma_hint=Fb.product_norm + 1, budget=budget, seed=seed)
            except PartialResultError as exc:
                sp = exc.best
                rep["sparsify_partial"] = True
        Bp = sp.apply(Bm)
        rep["Bprime_shape"] = list(Bp.shape)
        zeros = find_all_zeros_rectangle(Bp.complement(), budget=budget, seed=seed)
        ones = sel_b.lift(sp.lift(zeros))
    except (ContractError, NumericalError, PartialResultError) as exc:
        return fallback(f"{type(exc).__name__}: {exc}")
    if not ones.is_constant(A, True):
        return fallback("all-ones rectangle failed recount")
    if ones.rows and ones.cols:
        ones = extend_constant(A, ones, True)
    if not ones.rows:
        return fallback("empty all-ones rectangle")
    X, Y = list(ones.rows), list(ones.cols)
    t = min(len(X), len(Y))
    ex = H.induced(X).m
    ey = H.induced(Y).m
    x_def = len(X) * (len(X) - 1) // 2 - ex
    y_def = len(Y) * (len(Y) - 1) // 2 - ey
    rep.update(X=len(X), Y=len(Y), t=t, x_missing=x_def, y_missing=y_def,
               surplus_inequality=cut.surplus >= (t + x_def + y_def) / 2 - 1e-9 if len(X) == len(Y) else None,
               turan_envelope=t * t / (4 * alpha * sqm + t) if alpha > 0 else None)
    inner = turan_clique(H.induced(X))
    clique_h = extend_clique(H, [X[i] for i in inner])
    clique = sorted(keep[v] for v in clique_h)
    if not G.is_clique(clique):
        return fallback("clique failed verification")
    rep.update(turan_on_X=len(inner), clique_size=len(clique), fallback=None)
    return clique, rep
