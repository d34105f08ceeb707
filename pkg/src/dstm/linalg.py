"""Small dense complex linear algebra for 4x4 and 8x8 code matrices.

Everything here works on numpy ``complex128`` arrays.  The elimination
kernel is compiled with numba because the brute-force coding-gain scan
over an 8-antenna codebook runs it on ~8.4 million difference matrices.
"""

from __future__ import annotations

import numba
import numpy as np

__all__ = [
    "DimensionError",
    "as_matrix",
    "determinant",
    "rank",
    "unitarity_defect",
    "eliminate_batch",
    "pair_scan",
]

DEFAULT_RANK_TOL = 1e-9


class DimensionError(ValueError):
    """Raised when a matrix has the wrong shape for an operation."""


def as_matrix(m) -> np.ndarray:
    """Convert ``m`` to a finite 2-D complex array."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return a


def _square(m) -> np.ndarray:
    a = as_matrix(m)
    if a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionError(f"expected a non-empty square matrix, got shape {a.shape}")
    return a


@numba.njit(cache=True)
def _eliminate(w, tol):
    # Row-echelon reduction with partial pivoting, in place on ``w``.
    # A column whose best pivot has |p| <= tol * max|w_ij| is skipped
    # without advancing the pivot row.  Returns (det, rank); det is the
    # signed pivot product, or 0 when the matrix is rank deficient.
    rows, cols = w.shape
    scale2 = 0.0
    for i in range(rows):
        for j in range(cols):
            v = w[i, j].real * w[i, j].real + w[i, j].imag * w[i, j].imag
            if v > scale2:
                scale2 = v
    thr2 = tol * tol * scale2
    r = 0
    det = 1.0 + 0.0j
    for c in range(cols):
        if r == rows:
            break
        p = r
        best = w[r, c].real * w[r, c].real + w[r, c].imag * w[r, c].imag
        for i in range(r + 1, rows):
            v = w[i, c].real * w[i, c].real + w[i, c].imag * w[i, c].imag
            if v > best:
                best = v
                p = i
        if best == 0.0 or best <= thr2:
            continue
        if p != r:
            for j in range(cols):
                t = w[r, j]
                w[r, j] = w[p, j]
                w[p, j] = t
            det = -det
        piv = w[r, c]
        det *= piv
        for i in range(r + 1, rows):
            f = w[i, c] / piv
            if f != 0.0:
                for j in range(c + 1, cols):
                    w[i, j] -= f * w[r, j]
            w[i, c] = 0.0
        r += 1
    if r < rows or r < cols:
        det = 0.0 + 0.0j
    return det, r


@numba.njit(cache=True)
def _eliminate_batch(a, tol):
    n = a.shape[0]
    dets = np.empty(n, np.complex128)
    ranks = np.empty(n, np.int64)
    w = np.empty((a.shape[1], a.shape[2]), np.complex128)
    for b in range(n):
        w[:, :] = a[b]
        d, r = _eliminate(w, tol)
        dets[b] = d
        ranks[b] = r
    return dets, ranks


@numba.njit(cache=True)
def _pair_scan(mats, tol, start, stop):
    # For every pair k < l with start <= k < stop: determinant of the
    # difference Gram, |det(U_k - U_l)|^2, and rank of U_k - U_l.
    n, d, _ = mats.shape
    w = np.empty((d, d), np.complex128)
    min_det = np.inf
    min_rank = d
    arg_k = -1
    arg_l = -1
    for k in range(start, stop):
        for l in range(k + 1, n):
            for i in range(d):
                for j in range(d):
                    w[i, j] = mats[k, i, j] - mats[l, i, j]
            det, r = _eliminate(w, tol)
            g = det.real * det.real + det.imag * det.imag
            if r < min_rank:
                min_rank = r
            if g < min_det:
                min_det = g
                arg_k = k
                arg_l = l
    return min_det, min_rank, arg_k, arg_l


def determinant(m) -> complex:
    """Determinant by LU factorisation with partial pivoting.

    Examples
    --------
    >>> determinant(2 * np.eye(4))
    (16+0j)
    """
    w = _square(m).copy()
    det, _ = _eliminate(w, 0.0)
    return complex(det)


def rank(m, tol: float = DEFAULT_RANK_TOL) -> int:
    """Numerical rank of ``m``.

    Counts the pivots of Gaussian elimination with partial pivoting whose
    magnitude exceeds ``tol`` times the largest entry of ``m`` (the largest
    pivot elimination could start from).  An empty matrix has rank 0.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = np.asarray(m, dtype=np.complex128)
    if a.size == 0:
        return 0
    w = as_matrix(a).copy()
    _, r = _eliminate(w, tol)
    return int(r)


def unitarity_defect(m) -> float:
    """Largest absolute entry of ``m m^H - I``."""
    a = _square(m)
    return float(np.abs(a @ a.conj().T - np.eye(a.shape[0])).max())


def eliminate_batch(mats, tol: float = DEFAULT_RANK_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Determinants and ranks of a stack of square matrices.

    Parameters
    ----------
    mats : array_like, shape (B, n, n)
    tol : float
        Relative pivot threshold, as in :func:`rank`.  Matrices found rank
        deficient at this threshold report a determinant of exactly 0.

    Returns
    -------
    dets : ndarray of complex, shape (B,)
    ranks : ndarray of int, shape (B,)
    """
    a = np.ascontiguousarray(mats, dtype=np.complex128)
    if a.ndim != 3 or a.shape[1] != a.shape[2]:
        raise DimensionError(f"expected a stack of square matrices, got shape {a.shape}")
    return _eliminate_batch(a, float(tol))


def pair_scan(mats, tol: float = DEFAULT_RANK_TOL, chunk: int = 256):
    """Scan all unordered pairs of a matrix set.

    Returns ``(min_det, min_rank, (k, l))`` where ``min_det`` is the
    smallest ``det((U_k - U_l)(U_k - U_l)^H)`` and ``(k, l)`` attains it.
    For square differences that determinant equals ``|det(U_k - U_l)|^2``,
    which is what gets evaluated (it needs no Gram product and is real and
    non-negative by construction).
    """
    a = np.ascontiguousarray(mats, dtype=np.complex128)
    if a.ndim != 3 or a.shape[1] != a.shape[2]:
        raise DimensionError(f"expected a stack of square matrices, got shape {a.shape}")
    if a.shape[0] < 2:
        raise ValueError("need at least two matrices")
    best = (np.inf, a.shape[1], (-1, -1))
    for start in range(0, a.shape[0], chunk):
        stop = min(start + chunk, a.shape[0])
        d, r, k, l = _pair_scan(a, float(tol), start, stop)
        if d < best[0]:
            best = (d, best[1], (int(k), int(l)))
        best = (best[0], min(best[1], int(r)), best[2])
    return float(best[0]), int(best[1]), best[2]
