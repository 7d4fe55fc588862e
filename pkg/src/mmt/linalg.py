"""Dense real matrix kernels: products, the symplectic form, block handling.

All functions take and return plain ``numpy.ndarray`` values in row-major
layout. Public constructors reject non-finite entries; the hot integration
loops skip revalidation and watch for divergence themselves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularMatrixError

SOLVE_PIVOT_RTOL = 1e-12


def as_mat(entries, rows=None, cols=None) -> np.ndarray:
    """Validate ``entries`` as a finite 2-D float matrix and return a copy."""
    a = np.array(entries, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"matrix must be 2-D, got shape {a.shape}")
    if rows is not None and a.shape != (rows, cols):
        raise ValueError(f"expected shape ({rows}, {cols}), got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite (no NaN/Inf)")
    return a


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product with an explicit conformability check."""
    if a.shape[-1] != b.shape[0]:
        raise ValueError(f"matmul shape mismatch: {a.shape} x {b.shape}")
    return a @ b


def symplectic_matrix(n: int) -> np.ndarray:
    """The 2n x 2n symplectic form [[0, I], [-I, 0]]."""
    j = np.zeros((2 * n, 2 * n))
    j[:n, n:] = np.eye(n)
    j[n:, :n] = -np.eye(n)
    return j


def apply_J(n: int, a: np.ndarray) -> np.ndarray:
    """Left-multiply by the symplectic form without forming it.

    Rows 0..n-1 of the result are rows n..2n-1 of ``a``; rows n..2n-1 are
    the negated top rows. Agrees bit-for-bit with ``symplectic_matrix(n) @ a``.
    """
    if a.shape[0] != 2 * n:
        raise ValueError(f"apply_J needs 2n={2 * n} rows, got shape {a.shape}")
    return np.concatenate((a[n:], -a[:n]), axis=0)


def solve_linear(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve a @ x = b by Gaussian elimination with partial pivoting.

    Raises SingularMatrixError when the best available pivot falls below
    ``SOLVE_PIVOT_RTOL`` times the infinity norm of the original matrix.
    """
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"solve_linear needs a square matrix, got {a.shape}")
    b = np.array(b, dtype=float)
    one_dim = b.ndim == 1
    if one_dim:
        b = b[:, None]
    if b.shape[0] != a.shape[0]:
        raise ValueError(f"solve_linear rhs mismatch: {a.shape} vs {b.shape}")

    n = a.shape[0]
    scale = np.max(np.sum(np.abs(a), axis=1))
    threshold = SOLVE_PIVOT_RTOL * scale
    for col in range(n):
        pivot_row = col + int(np.argmax(np.abs(a[col:, col])))
        pivot = a[pivot_row, col]
        if abs(pivot) <= threshold:
            raise SingularMatrixError(
                f"pivot {abs(pivot):.3e} below threshold {threshold:.3e} "
                f"in column {col}"
            )
        if pivot_row != col:
            a[[col, pivot_row]] = a[[pivot_row, col]]
            b[[col, pivot_row]] = b[[pivot_row, col]]
        factors = a[col + 1:, col] / pivot
        a[col + 1:, col:] -= factors[:, None] * a[col, col:]
        b[col + 1:] -= factors[:, None] * b[col]
    x = np.empty_like(b)
    for row in range(n - 1, -1, -1):
        x[row] = (b[row] - a[row, row + 1:] @ x[row + 1:]) / a[row, row]
    return x[:, 0] if one_dim else x


def symplectic_defect(n: int, t: np.ndarray) -> float:
    """Frobenius norm of T^t J T - J; zero exactly when T is symplectic."""
    if t.shape != (2 * n, 2 * n):
        raise ValueError(f"expected ({2 * n}, {2 * n}) matrix, got {t.shape}")
    j = symplectic_matrix(n)
    return float(np.linalg.norm(t.T @ j @ t - j))


@dataclass(frozen=True)
class BlockMat2n:
    """Four n x n blocks of a 2n x 2n matrix, labelled row-major.

    ``split``/``flatten`` round-trip bit-identically.
    """

    n: int
    b11: np.ndarray
    b12: np.ndarray
    b21: np.ndarray
    b22: np.ndarray

    def __post_init__(self):
        for name in ("b11", "b12", "b21", "b22"):
            block = getattr(self, name)
            if block.shape != (self.n, self.n):
                raise ValueError(
                    f"block {name} must be ({self.n}, {self.n}), got {block.shape}"
                )
            if not np.all(np.isfinite(block)):
                raise ValueError(f"block {name} has non-finite entries")

    @classmethod
    def split(cls, m: np.ndarray) -> "BlockMat2n":
        rows, cols = m.shape
        if rows != cols or rows % 2:
            raise ValueError(f"cannot split shape {m.shape} into 2n x 2n blocks")
        n = rows // 2
        return cls(n, m[:n, :n].copy(), m[:n, n:].copy(),
                   m[n:, :n].copy(), m[n:, n:].copy())

    def flatten(self) -> np.ndarray:
        top = np.concatenate((self.b11, self.b12), axis=1)
        bottom = np.concatenate((self.b21, self.b22), axis=1)
        return np.concatenate((top, bottom), axis=0)
