"""Sparse storage, a Jacobi-preconditioned CG, direct solve, and spectral
condition numbers.

The CG accepts anything exposing ``matvec`` and ``diagonal`` so the same
loop drives both assembled CSR matrices and matrix-free tensor-product
operators.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spla

from .errors import (
    DimensionMismatch,
    MaxIterations,
    NonpositiveDiagonal,
    SingularMatrix,
)


@dataclass
class SparseMatrix:
    """CSR triple with a cached scipy handle for products and factorization."""

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray

    def __post_init__(self):
        self._csr = sps.csr_matrix(
            (self.data, self.indices, self.indptr), shape=(self.n, self.n)
        )

    @property
    def shape(self):
        return (self.n, self.n)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        if len(x) != self.n:
            raise DimensionMismatch(f"vector length {len(x)} vs matrix {self.n}")
        return self._csr @ x

    def diagonal(self) -> np.ndarray:
        return self._csr.diagonal()

    def to_scipy(self) -> sps.csr_matrix:
        return self._csr

    def to_dense(self) -> np.ndarray:
        return self._csr.toarray()

    def __add__(self, other: "SparseMatrix") -> "SparseMatrix":
        s = (self._csr + other._csr).tocsr()
        return SparseMatrix(self.n, s.indptr, s.indices, s.data)

    def scaled(self, c: float) -> "SparseMatrix":
        return SparseMatrix(self.n, self.indptr, self.indices, c * self.data)


def from_coo(n, rows, cols, vals) -> SparseMatrix:
    m = sps.coo_matrix(
        (np.asarray(vals, dtype=float), (rows, cols)), shape=(n, n)
    ).tocsr()
    m.sum_duplicates()
    return SparseMatrix(n, m.indptr, m.indices, m.data)


def pcg(A, b, tol=1e-12, maxiter=None, x0=None):
    """Jacobi-preconditioned conjugate gradients.

    Stops when ||b - Ax|| / ||b|| <= tol; returns (x, iterations).  Raises
    NonpositiveDiagonal if the preconditioner is unusable and MaxIterations
    if the budget runs out.
    """
    b = np.asarray(b, dtype=float)
    n = len(b)
    d = A.diagonal()
    if len(d) != n:
        raise DimensionMismatch(f"rhs length {n} vs operator {len(d)}")
    if np.any(d <= 0.0):
        raise NonpositiveDiagonal("operator diagonal has nonpositive entries")
    if maxiter is None:
        maxiter = max(1000, 40 * n)
    nb = np.linalg.norm(b)
    if nb == 0.0:
        return np.zeros(n), 0
    x = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float).copy()
    r = b - A.matvec(x)
    z = r / d
    p = z.copy()
    rz = r @ z
    for it in range(1, maxiter + 1):
        Ap = A.matvec(p)
        pAp = p @ Ap
        if pAp <= 0.0:
            # loss of positive definiteness in finite precision; refresh
            r = b - A.matvec(x)
            if np.linalg.norm(r) / nb <= tol:
                return x, it
            raise MaxIterations(
                f"conjugate gradients broke down at iteration {it}"
            )
        alpha = rz / pAp
        x += alpha * p
        r -= alpha * Ap
        if np.linalg.norm(r) / nb <= tol:
            # guard against drift between the recurrence and the true residual
            r_true = b - A.matvec(x)
            if np.linalg.norm(r_true) / nb <= tol:
                return x, it
            r = r_true
        z = r / d
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise MaxIterations(f"no convergence within {maxiter} iterations")


def direct_solve(A: SparseMatrix, b: np.ndarray) -> np.ndarray:
    """Sparse LU solve; raises SingularMatrix when factorization fails."""
    if len(b) != A.n:
        raise DimensionMismatch(f"rhs length {len(b)} vs matrix {A.n}")
    try:
        lu = spla.splu(A.to_scipy().tocsc())
        x = lu.solve(np.asarray(b, dtype=float))
    except RuntimeError as exc:
        raise SingularMatrix(str(exc)) from exc
    if not np.all(np.isfinite(x)):
        raise SingularMatrix("factorization produced non-finite solution")
    return x


def scn(A, dense_cutoff=2000) -> float:
    """Scaled condition number: lambda_max / lambda_min of D^(-1/2) S D^(-1/2)
    where S is the symmetric part of A and D its diagonal.  Returns inf when
    that matrix is not positive definite (including nonpositive diagonals).

    Dense symmetric eigensolve below ``dense_cutoff`` rows, Lanczos above
    (1e-6 relative accuracy is plenty for reporting)."""
    S = A.to_scipy() if isinstance(A, SparseMatrix) else sps.csr_matrix(A)
    S = (S + S.T) * 0.5
    d = S.diagonal()
    if np.any(d <= 0.0):
        return np.inf
    inv_sqrt = sps.diags(1.0 / np.sqrt(d))
    S = (inv_sqrt @ S @ inv_sqrt).tocsr()
    n = S.shape[0]
    if n == 1:
        v = S[0, 0]
        return 1.0 if v > 0 else np.inf
    if n < dense_cutoff:
        ev = np.linalg.eigvalsh(S.toarray())
        lo, hi = ev[0], ev[-1]
    else:
        hi = spla.eigsh(S, k=1, which="LA", tol=1e-6,
                        return_eigenvectors=False)[0]
        try:
            lo = spla.eigsh(S, k=1, sigma=0.0, which="LM", tol=1e-6,
                            return_eigenvectors=False)[0]
        except RuntimeError:
            # singular shift; fall back to the slow but safe end of spectrum
            lo = spla.eigsh(S, k=1, which="SA", tol=1e-6,
                            return_eigenvectors=False)[0]
    if lo <= 0.0:
        return np.inf
    return float(hi / lo)
