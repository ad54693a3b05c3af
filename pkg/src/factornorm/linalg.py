"""Dense linear-algebra kernels: symmetric eigendecomposition, SVD, norms.

The default route is LAPACK through numpy. Cyclic Jacobi (two-sided for the
symmetric eigenproblem, one-sided Hestenes for the SVD) is kept as an
independent pure-numpy implementation; pass ``method="jacobi"`` or call the
``jacobi_*`` functions directly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import BooleanMatrix
from .errors import ContractError, NumericalError

SYMMETRY_TOL = 1e-10


@dataclass(frozen=True)
class SpectralData:
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # orthonormal columns, same order

    @property
    def n(self) -> int:
        return len(self.eigenvalues)

    def reconstruct(self) -> np.ndarray:
        Q = self.eigenvectors
        return (Q * self.eigenvalues) @ Q.T

    @property
    def min(self) -> float:
        return float(self.eigenvalues[-1]) if self.n else 0.0

    @property
    def max(self) -> float:
        return float(self.eigenvalues[0]) if self.n else 0.0


@dataclass(frozen=True)
class SvdData:
    singular_values: np.ndarray  # descending, length min(m, n)
    left: np.ndarray  # m x k, orthonormal columns
    right: np.ndarray  # k x n, orthonormal rows

    def reconstruct(self) -> np.ndarray:
        return (self.left * self.singular_values) @ self.right


def _as_real(M) -> np.ndarray:
    if isinstance(M, BooleanMatrix):
        return M.to_float()
    A = np.asarray(M, dtype=float)
    if A.ndim != 2:
        raise ContractError(f"expected a 2-d matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ContractError("matrix has non-finite entries")
    return A


def _check_symmetric(A: np.ndarray) -> None:
    if A.shape[0] != A.shape[1]:
        raise ContractError(f"symmetric eigendecomposition needs a square matrix, got {A.shape}")
    if A.size and np.abs(A - A.T).max() > SYMMETRY_TOL * max(1.0, np.abs(A).max()):
        raise ContractError("matrix is not symmetric within 1e-10")


def _descending(values: np.ndarray) -> np.ndarray:
    # stable sort keeps original index order among exact ties
    return np.argsort(-values, kind="stable")


def sym_eigen(A, method: str = "lapack") -> SpectralData:
    """Eigenvalues (descending) and orthonormal eigenvectors of a symmetric matrix."""
    A = _as_real(A)
    _check_symmetric(A)
    if method == "jacobi":
        return jacobi_eigen(A)
    if method != "lapack":
        raise ContractError(f"unknown method {method!r}")
    if A.shape[0] == 0:
        return SpectralData(np.zeros(0), np.zeros((0, 0)))
    w, Q = np.linalg.eigh((A + A.T) / 2)
    order = _descending(w)
    return SpectralData(w[order], Q[:, order])


def svd(M, method: str = "lapack") -> SvdData:
    """Thin SVD with descending singular values."""
    M = _as_real(M)
    if method == "jacobi":
        return jacobi_svd(M)
    if method != "lapack":
        raise ContractError(f"unknown method {method!r}")
    m, n = M.shape
    if m == 0 or n == 0:
        return SvdData(np.zeros(0), np.zeros((m, 0)), np.zeros((0, n)))
    try:
        a, s, bt = np.linalg.svd(M, full_matrices=False)
    except np.linalg.LinAlgError:
        # gesdd occasionally fails to converge; the Jacobi route does not
        return jacobi_svd(M)
    return SvdData(s, a, bt)


def singular_values(M) -> np.ndarray:
    M = _as_real(M)
    if M.size == 0:
        return np.zeros(0)
    try:
        return np.linalg.svd(M, compute_uv=False)
    except np.linalg.LinAlgError:
        return jacobi_svd(M).singular_values


def trace_norm(M) -> float:
    """Sum of singular values."""
    return float(singular_values(M).sum())


def frobenius(M) -> float:
    return float(np.linalg.norm(_as_real(M)))


def numerical_rank(M, rtol: float | None = None) -> int:
    s = singular_values(M)
    if s.size == 0 or s[0] == 0.0:
        return 0
    shape = _as_real(M).shape
    tol = (rtol if rtol is not None else max(shape) * np.finfo(float).eps) * s[0]
    return int(np.count_nonzero(s > tol))


def is_psd(A, tol: float = 1e-8) -> tuple[bool, float]:
    lam = sym_eigen(A).min
    return lam >= -tol, lam


# ---------------------------------------------------------------------------
# Jacobi kernels
# ---------------------------------------------------------------------------


def jacobi_eigen(A, tol: float = 1e-12, max_sweeps: int = 100) -> SpectralData:
    """Cyclic two-sided Jacobi rotations.

    Stops once the off-diagonal Frobenius mass falls below ``tol * ||A||_F``.
    """
    A = _as_real(A)
    _check_symmetric(A)
    n = A.shape[0]
    Q = np.eye(n)
    amax = float(np.abs(A).max()) if n else 0.0
    if amax == 0.0:
        return SpectralData(np.zeros(n), Q)
    # work on the max-normalized matrix so squares neither underflow nor overflow
    a = (A + A.T) / (2 * amax)
    scale = np.linalg.norm(a)
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))  # direct, avoids cancellation
        if off < tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                qp = Q[:, p].copy()
                qq = Q[:, q].copy()
                Q[:, p] = c * qp - s * qq
                Q[:, q] = s * qp + c * qq
    else:
        raise NumericalError("Jacobi eigensolver did not converge", {"sweeps": max_sweeps})
    w = np.diag(a) * amax
    order = _descending(w)
    return SpectralData(w[order], Q[:, order])


def jacobi_svd(M, tol: float = 1e-13, max_sweeps: int = 100) -> SvdData:
    """One-sided (Hestenes) Jacobi: orthogonalize the columns of M by rotations.

    Wide matrices are handled through the transpose.
    """
    M = _as_real(M)
    m, n = M.shape
    if m < n:
        t = jacobi_svd(M.T, tol, max_sweeps)
        return SvdData(t.singular_values, t.right.T, t.left.T)
    amax = float(np.abs(M).max()) if M.size else 0.0
    W = M / amax if amax > 0 else M.copy()
    V = np.eye(n)
    # columns this small are treated as converged zeros
    negligible = (np.finfo(float).eps * np.linalg.norm(W)) ** 2
    for _ in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = W[:, p] @ W[:, p]
                beta = W[:, q] @ W[:, q]
                gamma = W[:, p] @ W[:, q]
                if gamma == 0.0 or abs(gamma) <= tol * np.sqrt(alpha * beta) or min(alpha, beta) <= negligible:
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = np.sign(zeta) / (abs(zeta) + np.hypot(zeta, 1.0)) if zeta != 0 else 1.0
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                wp = W[:, p].copy()
                W[:, p] = c * wp - s * W[:, q]
                W[:, q] = s * wp + c * W[:, q]
                vp = V[:, p].copy()
                V[:, p] = c * vp - s * V[:, q]
                V[:, q] = s * vp + c * V[:, q]
        if not rotated:
            break
    else:
        raise NumericalError("one-sided Jacobi SVD did not converge", {"sweeps": max_sweeps})
    sv = np.linalg.norm(W, axis=0)
    order = _descending(sv)
    sv = sv[order]
    W = W[:, order]
    V = V[:, order]
    left = np.zeros((m, n))
    nz = sv > 0
    left[:, nz] = W[:, nz] / sv[nz]
    if not np.all(nz):
        # complete the basis for zero singular values
        basis, _ = np.linalg.qr(np.hstack([left[:, nz], np.eye(m)]))
        fill = basis[:, int(nz.sum()) : n]
        left[:, ~nz] = fill[:, : int((~nz).sum())]
    return SvdData(sv * amax if amax > 0 else sv, left, V.T)
