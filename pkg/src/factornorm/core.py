"""Shared data types: Boolean matrices, submatrix selections, factorizations, graphs.

Also the seeded random-number plumbing and the effort presets used by the
pipelines.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import ContractError

# ---------------------------------------------------------------------------
# randomness
# ---------------------------------------------------------------------------


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    """Counter-based (Philox) generator; ``keys`` derive independent sub-streams."""
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF, *(int(k) for k in keys)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


# ---------------------------------------------------------------------------
# effort presets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Budget:
    """Iteration counts for the heuristic parts of the pipelines.

    ======================  ====  =======  ========
    field                   fast  default  thorough
    ======================  ====  =======  ========
    als_iterations            30      100       300
    dual_restarts              4       16        32
    dual_iterations           40      100       300
    rounding_trials           64      128       512
    local_restarts             8       32       128
    ======================  ====  =======  ========
    """

    als_iterations: int = 100
    dual_restarts: int = 16
    dual_iterations: int = 100
    rounding_trials: int = 128
    local_restarts: int = 32
    sparsify_c: float = 8.0
    sparsify_target: float = 0.1
    extend: bool = True
    name: str = "default"

    @classmethod
    def preset(cls, name: str) -> "Budget":
        try:
            return PRESETS[name]
        except KeyError:
            raise ContractError(f"unknown budget preset {name!r}; choose from {sorted(PRESETS)}") from None


PRESETS = {
    "fast": Budget(30, 4, 40, 64, 8, name="fast"),
    "default": Budget(name="default"),
    "thorough": Budget(300, 32, 300, 512, 128, name="thorough"),
}


def resolve_budget(budget) -> Budget:
    if budget is None:
        return PRESETS["default"]
    if isinstance(budget, str):
        return Budget.preset(budget)
    return budget


# ---------------------------------------------------------------------------
# Boolean matrices
# ---------------------------------------------------------------------------


class BooleanMatrix:
    """Dense 0/1 matrix with cached one-counts.

    The bit array is copied and frozen on construction.
    """

    def __init__(self, data):
        arr = np.asarray(data)
        if arr.ndim != 2:
            raise ContractError(f"Boolean matrix must be 2-dimensional, got shape {arr.shape}")
        if arr.dtype != bool:
            if arr.size and not np.all((arr == 0) | (arr == 1)):
                raise ContractError("Boolean matrix entries must be 0 or 1")
            arr = arr.astype(bool)
        else:
            arr = arr.copy()
        arr.setflags(write=False)
        self.bits = arr

    @classmethod
    def zeros(cls, m: int, n: int) -> "BooleanMatrix":
        return cls(np.zeros((m, n), dtype=bool))

    @classmethod
    def ones(cls, m: int, n: int) -> "BooleanMatrix":
        return cls(np.ones((m, n), dtype=bool))

    @classmethod
    def identity(cls, n: int) -> "BooleanMatrix":
        return cls(np.eye(n, dtype=bool))

    @property
    def shape(self) -> tuple[int, int]:
        return self.bits.shape

    @property
    def rows(self) -> int:
        return self.bits.shape[0]

    @property
    def cols(self) -> int:
        return self.bits.shape[1]

    @cached_property
    def row_ones(self) -> np.ndarray:
        return self.bits.sum(axis=1)

    @cached_property
    def col_ones(self) -> np.ndarray:
        return self.bits.sum(axis=0)

    @cached_property
    def ones_total(self) -> int:
        return int(self.bits.sum())

    @property
    def density(self) -> float:
        size = self.bits.size
        return self.ones_total / size if size else 0.0

    def is_zero(self) -> bool:
        return self.ones_total == 0

    def to_float(self) -> np.ndarray:
        return self.bits.astype(float)

    def complement(self) -> "BooleanMatrix":
        return BooleanMatrix(~self.bits)

    def transpose(self) -> "BooleanMatrix":
        return BooleanMatrix(self.bits.T)

    @property
    def T(self) -> "BooleanMatrix":
        return self.transpose()

    def take(self, rows, cols) -> "BooleanMatrix":
        return BooleanMatrix(self.bits[np.ix_(np.asarray(rows, dtype=int), np.asarray(cols, dtype=int))])

    def __eq__(self, other):
        return isinstance(other, BooleanMatrix) and np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash((self.shape, self.bits.tobytes()))

    def __repr__(self):
        return f"BooleanMatrix({self.rows}x{self.cols}, ones={self.ones_total})"


def as_boolean(M) -> BooleanMatrix:
    return M if isinstance(M, BooleanMatrix) else BooleanMatrix(M)


# ---------------------------------------------------------------------------
# selections
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SubmatrixSelection:
    """Row and column index sets of a submatrix, both strictly increasing."""

    rows: tuple[int, ...]
    cols: tuple[int, ...]
    parent_shape: tuple[int, int]

    def __post_init__(self):
        rows = tuple(int(i) for i in self.rows)
        cols = tuple(int(j) for j in self.cols)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "parent_shape", (int(self.parent_shape[0]), int(self.parent_shape[1])))
        m, n = self.parent_shape
        for name, idx, bound in (("row", rows, m), ("column", cols, n)):
            if not idx:
                raise ContractError(f"selection has no {name}s")
            if idx[0] < 0 or idx[-1] >= bound:
                raise ContractError(f"{name} index out of range for parent of shape {self.parent_shape}")
            if any(b <= a for a, b in zip(idx, idx[1:])):
                raise ContractError(f"{name} indices must be strictly increasing")

    @classmethod
    def from_indices(cls, rows: Iterable[int], cols: Iterable[int], parent_shape) -> "SubmatrixSelection":
        return cls(tuple(sorted(set(int(i) for i in rows))), tuple(sorted(set(int(j) for j in cols))), parent_shape)

    @classmethod
    def full(cls, shape) -> "SubmatrixSelection":
        return cls(tuple(range(shape[0])), tuple(range(shape[1])), shape)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.cols)

    @property
    def side(self) -> int:
        return min(len(self.rows), len(self.cols))

    def apply(self, M):
        if isinstance(M, BooleanMatrix):
            if M.shape != self.parent_shape:
                raise ContractError(f"selection made for {self.parent_shape}, matrix is {M.shape}")
            return M.take(self.rows, self.cols)
        arr = np.asarray(M)
        return arr[np.ix_(self.rows, self.cols)]

    def lift(self, inner: "SubmatrixSelection") -> "SubmatrixSelection":
        """Express ``inner`` (a selection of ``self.apply(M)``) in terms of the parent."""
        if inner.parent_shape != self.shape:
            raise ContractError("inner selection does not match this selection's shape")
        return SubmatrixSelection(
            tuple(self.rows[i] for i in inner.rows), tuple(self.cols[j] for j in inner.cols), self.parent_shape
        )

    def transpose(self) -> "SubmatrixSelection":
        return SubmatrixSelection(self.cols, self.rows, (self.parent_shape[1], self.parent_shape[0]))

    def is_constant(self, M, value) -> bool:
        block = self.apply(M)
        if isinstance(block, BooleanMatrix):
            block = block.bits
        return bool(np.all(block == value))


# ---------------------------------------------------------------------------
# factorizations
# ---------------------------------------------------------------------------


def _row_norms(U: np.ndarray) -> np.ndarray:
    return np.sqrt(np.einsum("ij,ij->i", U, U)) if U.size else np.zeros(U.shape[0])


def _col_norms(V: np.ndarray) -> np.ndarray:
    return np.sqrt(np.einsum("ij,ij->j", V, V)) if V.size else np.zeros(V.shape[1])


@dataclass(frozen=True)
class Factorization:
    """A pair ``U`` (m x k), ``V`` (k x n) with cached norm data.

    ``reconstruction_error`` is ``max|UV - target|`` for the target supplied at
    construction (NaN when no target was given).
    """

    U: np.ndarray
    V: np.ndarray
    max_row_norm: float = field(init=False)
    max_col_norm: float = field(init=False)
    reconstruction_error: float = float("nan")

    def __post_init__(self):
        U = np.array(self.U, dtype=float, copy=True)
        V = np.array(self.V, dtype=float, copy=True)
        if U.ndim != 2 or V.ndim != 2 or U.shape[1] != V.shape[0]:
            raise ContractError(f"incompatible factor shapes {U.shape} and {V.shape}")
        if not (np.all(np.isfinite(U)) and np.all(np.isfinite(V))):
            raise ContractError("factor matrices must be finite")
        U.setflags(write=False)
        V.setflags(write=False)
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "max_row_norm", float(_row_norms(U).max(initial=0.0)))
        object.__setattr__(self, "max_col_norm", float(_col_norms(V).max(initial=0.0)))

    @classmethod
    def of(cls, U, V, target=None) -> "Factorization":
        U = np.asarray(U, dtype=float)
        V = np.asarray(V, dtype=float)
        err = float("nan")
        if target is not None:
            T = target.to_float() if isinstance(target, BooleanMatrix) else np.asarray(target, dtype=float)
            P = U @ V
            if P.shape != T.shape:
                raise ContractError(f"factorization product has shape {P.shape}, target {T.shape}")
            err = float(np.abs(P - T).max(initial=0.0))
        return cls(U, V, reconstruction_error=err)

    @classmethod
    def zero(cls, m: int, n: int) -> "Factorization":
        return cls(np.zeros((m, 1)), np.zeros((1, n)), reconstruction_error=0.0)

    @property
    def shape(self) -> tuple[int, int]:
        return self.U.shape[0], self.V.shape[1]

    @property
    def inner_dim(self) -> int:
        return self.U.shape[1]

    @property
    def product_norm(self) -> float:
        """``||U||_row * ||V||_col``, an upper bound on gamma_2 of the product."""
        return self.max_row_norm * self.max_col_norm

    def row_norms(self) -> np.ndarray:
        return _row_norms(self.U)

    def col_norms(self) -> np.ndarray:
        return _col_norms(self.V)

    def product(self) -> np.ndarray:
        return self.U @ self.V

    def error_against(self, target) -> float:
        T = target.to_float() if isinstance(target, BooleanMatrix) else np.asarray(target, dtype=float)
        return float(np.abs(self.product() - T).max(initial=0.0))

    def balanced(self) -> "Factorization":
        """Rescale so that ``||U||_row == ||V||_col`` (product unchanged)."""
        r, c = self.max_row_norm, self.max_col_norm
        if r == 0.0 or c == 0.0:
            return self
        s = np.sqrt(c / r)
        return Factorization(self.U * s, self.V / s, reconstruction_error=self.reconstruction_error)

    def restrict(self, rows: Sequence[int], cols: Sequence[int], target=None) -> "Factorization":
        U = self.U[np.asarray(rows, dtype=int)]
        V = self.V[:, np.asarray(cols, dtype=int)]
        if target is None:
            return Factorization(U, V, reconstruction_error=self.reconstruction_error)
        return Factorization.of(U, V, target)


# ---------------------------------------------------------------------------
# graphs
# ---------------------------------------------------------------------------


class Graph:
    """Simple undirected graph on vertices ``0..n-1``."""

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()):
        n = int(n)
        if n < 0:
            raise ContractError("vertex count must be nonnegative")
        clean = set()
        for a, b in edges:
            a, b = int(a), int(b)
            if a == b:
                raise ContractError(f"self-loop at vertex {a}")
            if not (0 <= a < n and 0 <= b < n):
                raise ContractError(f"edge ({a}, {b}) out of range for n={n}")
            clean.add((min(a, b), max(a, b)))
        self.n = n
        self.edges: tuple[tuple[int, int], ...] = tuple(sorted(clean))
        adj = np.zeros((n, n), dtype=bool)
        if self.edges:
            e = np.array(self.edges)
            adj[e[:, 0], e[:, 1]] = True
            adj[e[:, 1], e[:, 0]] = True
        adj.setflags(write=False)
        self.adj = adj

    @classmethod
    def from_adjacency(cls, A) -> "Graph":
        A = np.asarray(A)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ContractError("adjacency matrix must be square")
        if np.any(np.diag(A) != 0):
            raise ContractError("adjacency matrix has nonzero diagonal")
        if not np.array_equal(A != 0, (A != 0).T):
            raise ContractError("adjacency matrix is not symmetric")
        i, j = np.nonzero(np.triu(A != 0, 1))
        return cls(A.shape[0], zip(i.tolist(), j.tolist()))

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def adjacency(self) -> BooleanMatrix:
        return BooleanMatrix(self.adj)

    def adjacency_float(self) -> np.ndarray:
        return self.adj.astype(float)

    def degrees(self) -> np.ndarray:
        return self.adj.sum(axis=1)

    def edge_array(self) -> np.ndarray:
        return np.array(self.edges, dtype=int).reshape(-1, 2)

    def induced(self, vertices: Sequence[int]) -> "Graph":
        """Induced subgraph, relabelled so that ``vertices[k]`` becomes ``k``."""
        vs = np.asarray(list(vertices), dtype=int)
        if len(set(vs.tolist())) != len(vs):
            raise ContractError("induced subgraph vertex list has repeats")
        return Graph.from_adjacency(self.adj[np.ix_(vs, vs)])

    def complement(self) -> "Graph":
        comp = ~self.adj
        np.fill_diagonal(comp, False)
        return Graph.from_adjacency(comp)

    def without_isolated(self) -> tuple["Graph", list[int]]:
        keep = np.flatnonzero(self.degrees() > 0).tolist()
        return self.induced(keep), keep

    def is_clique(self, vertices: Sequence[int]) -> bool:
        vs = list(vertices)
        if len(vs) <= 1:
            return len(set(vs)) == len(vs)
        sub = self.adj[np.ix_(vs, vs)]
        return bool(np.all(sub | np.eye(len(vs), dtype=bool))) and len(set(vs)) == len(vs)

    def cut_size(self, partition) -> int:
        side = np.asarray(partition, dtype=bool)
        if side.shape != (self.n,):
            raise ContractError(f"partition must have length {self.n}")
        if not self.edges:
            return 0
        e = self.edge_array()
        return int(np.count_nonzero(side[e[:, 0]] != side[e[:, 1]]))

    def __eq__(self, other):
        return isinstance(other, Graph) and self.n == other.n and self.edges == other.edges

    def __hash__(self):
        return hash((self.n, self.edges))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"
