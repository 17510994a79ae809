"""Compressed sparse row matrices and a preconditioned conjugate-gradient solver.

Storage and matrix-vector products are delegated to scipy.sparse (CSR); the
CG loop itself is written here so that iteration counts, the preconditioner,
and the reduction order are fully under our control.  All dot products use
numpy's deterministic pairwise summation, so repeated solves with identical
inputs are bit-identical.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp


class SolverFailure(RuntimeError):
    """Raised by callers when a linear solve does not converge."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class SparseMatrix:
    """CSR matrix with sorted, duplicate-free columns per row."""

    __slots__ = ("csr",)

    def __init__(self, mat):
        csr = sp.csr_matrix(mat)
        csr.sum_duplicates()
        csr.sort_indices()
        self.csr = csr

    @classmethod
    def from_triplets(cls, rows, cols, values, shape) -> "SparseMatrix":
        return cls(sp.coo_matrix((values, (rows, cols)), shape=shape))

    @property
    def rows(self) -> int:
        return self.csr.shape[0]

    @property
    def cols(self) -> int:
        return self.csr.shape[1]

    @property
    def row_offsets(self) -> np.ndarray:
        return self.csr.indptr

    @property
    def col_indices(self) -> np.ndarray:
        return self.csr.indices

    @property
    def values(self) -> np.ndarray:
        return self.csr.data

    @property
    def nnz(self) -> int:
        return self.csr.nnz

    def diagonal(self) -> np.ndarray:
        return self.csr.diagonal()

    def toarray(self) -> np.ndarray:
        return self.csr.toarray()

    def max_asymmetry(self) -> float:
        """max |A - A^T| relative to max |A| (0 for exactly symmetric)."""
        d = abs(self.csr - self.csr.T)
        scale = max(abs(self.csr).max(), 1e-300)
        return float(d.max()) / scale if d.nnz else 0.0

    def __repr__(self):
        return f"SparseMatrix({self.rows}x{self.cols}, nnz={self.nnz})"


def matvec(A: SparseMatrix, x) -> np.ndarray:
    """Exact CSR product A @ x."""
    x = np.asarray(x, dtype=float)
    if x.shape != (A.cols,):
        raise ValueError(f"dimension mismatch: matrix is {A.rows}x{A.cols}, vector has shape {x.shape}")
    return A.csr @ x


@dataclass
class SolveReport:
    iterations: int
    final_relative_residual: float
    converged: bool


def cg_solve(A: SparseMatrix, b, tol: float = 1e-10, max_iter: int | None = None,
             precond: str = "jacobi", x0=None) -> tuple[np.ndarray, SolveReport]:
    """Conjugate gradients for SPD systems, optionally Jacobi preconditioned.

    Convergence criterion: ||b - A x||_2 <= tol * ||b||_2.  Non-convergence
    is reported, not raised; the caller decides.
    """
    b = np.asarray(b, dtype=float)
    if A.rows != A.cols:
        raise ValueError(f"cg_solve requires a square matrix, got {A.rows}x{A.cols}")
    if b.shape != (A.rows,):
        raise ValueError(f"dimension mismatch: matrix is {A.rows}x{A.cols}, rhs has shape {b.shape}")
    if precond not in ("none", "jacobi"):
        raise ValueError(f"unknown preconditioner {precond!r}")
    if max_iter is None:
        max_iter = 10 * A.rows

    b_norm = np.linalg.norm(b)
    if b_norm == 0.0:
        return np.zeros_like(b), SolveReport(0, 0.0, True)

    if precond == "jacobi":
        diag = A.diagonal()
        if np.any(diag <= 0.0):
            raise ValueError("jacobi preconditioner requires a positive diagonal")
        dinv = 1.0 / diag
    else:
        dinv = None

    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)
    r = b - A.csr @ x
    res = np.linalg.norm(r)
    if res <= tol * b_norm:
        return x, SolveReport(0, float(res / b_norm), True)

    z = dinv * r if dinv is not None else r
    p = z.copy()
    rz = float(r @ z)
    for it in range(1, max_iter + 1):
        Ap = A.csr @ p
        pAp = float(p @ Ap)
        if pAp <= 0.0:
            # loss of positive definiteness: report and bail
            return x, SolveReport(it, float(np.linalg.norm(b - A.csr @ x) / b_norm), False)
        alpha = rz / pAp
        x += alpha * p
        r -= alpha * Ap
        res = np.linalg.norm(r)
        if res <= tol * b_norm:
            return x, SolveReport(it, float(res / b_norm), True)
        z = dinv * r if dinv is not None else r
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    return x, SolveReport(max_iter, float(res / b_norm), False)
