"""Small dense linear algebra: batched determinants and null vectors."""
from __future__ import annotations

import numpy as np

from ..errors import DegenerateSystemError, UsageError


def det(M) -> np.ndarray | float:
    """Determinant of a square matrix or a stack ``(..., n, n)`` of them.

    Gaussian elimination with partial pivoting on row-equilibrated copies.
    Each row is divided by its largest entry before elimination and the
    scales are multiplied back at the end, so rows of wildly different
    magnitude (typical of derivative matrices) do not swamp one another.
    A zero row or two identical rows give exactly 0.
    """
    A = np.array(M, dtype=float)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise UsageError(f"det needs square matrices, got shape {A.shape}")
    n = A.shape[-1]
    if n == 0:
        return 1.0
    batch = A.shape[:-2]
    A = A.reshape((-1, n, n))
    scale = np.max(np.abs(A), axis=2)
    zero_row = np.any(scale == 0, axis=1)
    scale[scale == 0] = 1.0
    A = A / scale[:, :, None]
    sign = np.ones(A.shape[0])
    idx = np.arange(A.shape[0])
    orig = scale.copy()
    for k in range(n - 1):
        # largest pivot; ties (common after row scaling) go to the row of larger
        # original scale, so the elimination does not depend on the row order
        mag = np.abs(A[:, k:, k])
        tied = mag == mag.max(axis=1, keepdims=True)
        p = k + np.argmax(np.where(tied, orig[:, k:], -1.0), axis=1)
        swap = p != k
        if np.any(swap):
            rows_k = A[idx, k].copy()
            A[idx, k] = A[idx, p]
            A[idx, p] = rows_k
            o = orig[idx, k].copy()
            orig[idx, k] = orig[idx, p]
            orig[idx, p] = o
            sign[swap] = -sign[swap]
        piv = A[:, k, k]
        safe = np.where(piv == 0, 1.0, piv)
        factors = A[:, k + 1:, k] / safe[:, None]
        factors[piv == 0] = 0.0
        A[:, k + 1:, k:] -= factors[:, :, None] * A[:, k, None, k:]
    # sorted scale product: independent of row order, so a row swap flips only the sign
    d = sign * np.prod(np.diagonal(A, axis1=1, axis2=2), axis=1) * np.prod(np.sort(scale, axis=1), axis=1)
    d[zero_row] = 0.0
    d = d.reshape(batch)
    return float(d) if d.ndim == 0 else d


def null_vector(M, rel_tol: float = 1e-13) -> np.ndarray:
    """Unit vector spanning the kernel of an ``(n-1) x n`` matrix.

    Rows are normalized, then the last right singular vector is taken.  The
    sign is fixed so that the entry of largest magnitude is positive.  Raises
    :class:`DegenerateSystemError` when the rows are numerically dependent
    (the kernel is not one-dimensional).
    """
    A = np.array(M, dtype=float)
    if A.ndim != 2 or A.shape[1] != A.shape[0] + 1:
        raise UsageError(f"null_vector needs an (n-1) x n matrix, got {A.shape}")
    norms = np.linalg.norm(A, axis=1)
    if np.any(norms == 0):
        raise DegenerateSystemError("zero row in interpolation system")
    A = A / norms[:, None]
    _, s, vt = np.linalg.svd(A)
    if s.size and s[-1] <= rel_tol * s[0]:
        raise DegenerateSystemError(
            f"rank-deficient system (singular value ratio {s[-1] / s[0]:.3g})")
    v = vt[-1]
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    return v
