"""Seeded instance generators: the sparse set-system example with a norm-sqrt(l)
factorization, point-line incidence matrices, random Boolean matrices and a
few canonical graph and matrix families."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .core import BooleanMatrix, Factorization, Graph, make_rng
from .errors import ContractError, InvariantViolation, LimitError

MAX_ATTEMPTS = 8


# ---------------------------------------------------------------------------
# set-system example
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstructionParams:
    """Inputs ``ell``, ``k``, ``seed``; the remaining fields are filled by the generator."""

    ell: int
    k: int
    seed: int = 0
    p: float | None = None
    X: int | None = None  # sampled family size
    Y: int | None = None  # pairs meeting in >= 2 elements
    Y_prime: int | None = None  # pairs meeting in exactly 1 element
    n: int | None = None
    attempt: int | None = None
    zeros_envelope: float | None = None  # 8 * 2^-ell * n, side bound for all-zeros squares

    def realized_p(self) -> float:
        return float(self.k) ** (1.5 - self.ell)

    def validate(self) -> None:
        if self.ell < 3:
            raise ContractError(f"ell must be at least 3, got {self.ell}")
        if self.k < self.ell:
            raise ContractError(f"ground set size k={self.k} is smaller than ell={self.ell}")
        if self.realized_p() * math.comb(self.k, self.ell) < 2:
            raise ContractError(f"expected family size below 2 for ell={self.ell}, k={self.k}")


@dataclass(frozen=True)
class TightExample:
    matrix: BooleanMatrix
    factorization: Factorization
    family: tuple[tuple[int, ...], ...]  # F' in lexicographic order; A = first n, B = next n
    sampled: tuple[tuple[int, ...], ...]  # F before pruning
    params: ConstructionParams


def _sample_family(rng: np.random.Generator, k: int, ell: int, p: float) -> list[tuple[int, ...]]:
    # binomial count, then distinct uniform subsets by rejection
    count = int(rng.binomial(math.comb(k, ell), p))
    seen: set[tuple[int, ...]] = set()
    while len(seen) < count:
        seen.add(tuple(sorted(int(x) for x in rng.choice(k, size=ell, replace=False))))
    return sorted(seen)


def _intersections(family: Sequence[tuple[int, ...]], k: int) -> np.ndarray:
    C = np.zeros((len(family), k), dtype=np.int64)
    for i, s in enumerate(family):
        C[i, list(s)] = 1
    return C @ C.T


def family_diagnostics(family: Sequence[tuple[int, ...]], k: int) -> tuple[int, int]:
    """``(Y, Y')``: pairs meeting in at least two elements, and in exactly one."""
    if len(family) < 2:
        return 0, 0
    I = _intersections(family, k)
    iu = np.triu_indices(len(family), 1)
    vals = I[iu]
    return int(np.count_nonzero(vals >= 2)), int(np.count_nonzero(vals == 1))


def prune_family(family: Sequence[tuple[int, ...]], k: int) -> list[tuple[int, ...]]:
    """Pairs in lexicographic order; when both members survive and meet in
    two or more elements, the later one is dropped."""
    fam = list(family)
    if len(fam) < 2:
        return fam
    I = _intersections(fam, k)
    alive = np.ones(len(fam), dtype=bool)
    for i in range(len(fam)):
        if not alive[i]:
            continue
        later = np.flatnonzero(I[i, i + 1:] >= 2) + i + 1
        alive[later] = False
    return [s for s, a in zip(fam, alive) if a]


def tight_example(params: ConstructionParams) -> TightExample:
    params.validate()
    ell, k = params.ell, params.k
    p = params.realized_p()
    for attempt in range(MAX_ATTEMPTS):
        rng = make_rng(params.seed, 0x7167, attempt)
        sampled = _sample_family(rng, k, ell, p)
        kept = prune_family(sampled, k)
        n = len(kept) // 2
        if n >= 1:
            break
    else:
        raise LimitError(f"family too small after pruning in {MAX_ATTEMPTS} attempts (ell={ell}, k={k})")
    A, B = kept[:n], kept[n:2 * n]
    U = np.zeros((n, k))
    V = np.zeros((k, n))
    for i, s in enumerate(A):
        U[i, list(s)] = 1.0
    for j, s in enumerate(B):
        V[list(s), j] = 1.0
    prod = U @ V
    if not np.all((prod == 0) | (prod == 1)):
        raise InvariantViolation("set-system product is not Boolean")
    M = BooleanMatrix(prod == 1)
    F = Factorization.of(U, V, M.to_float())
    Y, Yp = family_diagnostics(sampled, k)
    out = replace(params, p=p, X=len(sampled), Y=Y, Y_prime=Yp, n=n, attempt=attempt,
                  zeros_envelope=8 * 2.0**-ell * n)
    return TightExample(M, F, tuple(kept), tuple(sampled), out)


def gen_tight_example(params: ConstructionParams) -> tuple[BooleanMatrix, Factorization]:
    """``M = UV`` from characteristic vectors of a pruned random ``ell``-uniform
    family; every factor vector has norm ``sqrt(ell)`` so ``gamma_2(M) <= ell``."""
    ex = tight_example(params)
    return ex.matrix, ex.factorization


# ---------------------------------------------------------------------------
# point-line incidences
# ---------------------------------------------------------------------------


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % d for d in range(2, math.isqrt(p) + 1))


@dataclass(frozen=True)
class PointLineParams:
    q: int
    p: int
    modular: bool = True

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not 1 <= self.q <= self.p:
            raise ContractError(f"need 1 <= q <= p, got q={self.q}, p={self.p}")
        if self.modular and not is_prime(self.p):
            raise ContractError(f"modular point-line matrix needs p prime, got {self.p}")


def gen_point_line(params: PointLineParams) -> BooleanMatrix:
    """Rows ``(x, x')`` and columns ``(y, y')`` over ``[q] x {0..p-1}``, index
    ``(x-1) p + x'``; entry one iff ``x y + x' = y'`` (mod ``p`` if modular)."""
    params.validate()
    q, p = params.q, params.p
    x = np.repeat(np.arange(1, q + 1), p)
    xp = np.tile(np.arange(p), q)
    lhs = x[:, None] * x[None, :] + xp[:, None]  # columns share the index layout
    rhs = xp[None, :]
    if params.modular:
        lhs = lhs % p
    return BooleanMatrix(lhs == rhs)


# ---------------------------------------------------------------------------
# random and structured families
# ---------------------------------------------------------------------------


def gen_random_boolean(m: int, n: int, density: float, seed: int = 0) -> BooleanMatrix:
    if not 0.0 <= density <= 1.0:
        raise ContractError(f"density must lie in [0, 1], got {density}")
    if m < 0 or n < 0:
        raise ContractError("dimensions must be nonnegative")
    return BooleanMatrix(make_rng(seed, 0xB001).random((m, n)) < density)


def _complete(n: int) -> Graph:
    return Graph(n, itertools.combinations(range(n), 2))


def complete_minus_matching(n: int, pairs: int) -> Graph:
    """``K_n`` with the disjoint edges ``(0,1), (2,3), ...`` (``pairs`` of them) removed."""
    if 2 * pairs > n:
        raise ContractError(f"cannot remove {pairs} disjoint edges from K_{n}")
    drop = {(2 * i, 2 * i + 1) for i in range(pairs)}
    return Graph(n, [e for e in itertools.combinations(range(n), 2) if e not in drop])


def _ints(sizes, kind: str) -> list[int]:
    vals = [sizes] if isinstance(sizes, (int, np.integer)) else list(sizes)
    if not vals or any(not isinstance(v, (int, np.integer)) or v < 0 for v in vals):
        raise ContractError(f"{kind} needs nonnegative integer sizes, got {sizes!r}")
    return [int(v) for v in vals]


def permutation_blowup(blocks, seed: int = 0) -> BooleanMatrix:
    """Block-diagonal all-ones blocks with rows and columns shuffled by ``seed``.

    An integer ``b`` gives a ``b x b`` block, a pair ``(r, c)`` an ``r x c`` block.
    """
    shapes = []
    for b in blocks:
        if isinstance(b, (int, np.integer)):
            shapes.append((int(b), int(b)))
        else:
            r, c = b
            shapes.append((int(r), int(c)))
    if not shapes or any(r < 1 or c < 1 for r, c in shapes):
        raise ContractError(f"blow-up blocks must be positive, got {blocks!r}")
    m, n = sum(r for r, _ in shapes), sum(c for _, c in shapes)
    bits = np.zeros((m, n), dtype=bool)
    r0 = c0 = 0
    for r, c in shapes:
        bits[r0:r0 + r, c0:c0 + c] = True
        r0 += r
        c0 += c
    rng = make_rng(seed, 0xB10)
    return BooleanMatrix(bits[rng.permutation(m)][:, rng.permutation(n)])


STRUCTURED_KINDS = ("complete", "odd_clique", "disjoint_cliques", "permutation_blowup", "bipartite_complete")


def gen_structured(kind: str, sizes, seed: int = 0):
    """Canonical families. Graph kinds return a ``Graph``; ``permutation_blowup``
    returns a ``BooleanMatrix``."""
    if kind == "complete":
        (n,) = _ints(sizes, kind)[:1]
        return _complete(n)
    if kind == "odd_clique":
        (n,) = _ints(sizes, kind)[:1]
        if n % 2 == 0:
            raise ContractError(f"odd_clique needs an odd size, got {n}")
        return _complete(n)
    if kind == "disjoint_cliques":
        parts = _ints(sizes, kind)
        edges, off = [], 0
        for s in parts:
            edges += [(a + off, b + off) for a, b in itertools.combinations(range(s), 2)]
            off += s
        return Graph(off, edges)
    if kind == "bipartite_complete":
        vals = _ints(sizes, kind)
        if len(vals) != 2:
            raise ContractError("bipartite_complete needs two part sizes")
        a, b = vals
        return Graph(a + b, [(i, a + j) for i in range(a) for j in range(b)])
    if kind == "permutation_blowup":
        return permutation_blowup(sizes, seed)
    raise ContractError(f"unknown structured kind {kind!r}; choose from {STRUCTURED_KINDS}")
