"""Differential encoder and the two non-coherent decoders.

Received blocks are ``(N_R, N_T)`` arrays; the batch functions take a
leading frame axis.  Both decoders maximise ``Re tr(R_t^H R_{t-1} U)``;
the group-wise decoder exploits that this metric is linear in the real
symbol slots and the codebook is a product over groups, so each group can
be searched on its own.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .codebook import Codebook
from .linalg import DimensionError, unitarity_defect

__all__ = [
    "RENORM_PERIOD",
    "gram_schmidt",
    "differential_encode",
    "trace_metric",
    "slot_correlations",
    "full_ml_decode",
    "full_ml_decode_batch",
    "groupwise_decode",
    "groupwise_decode_batch",
]

# Re-unitarise the differential chain this often to stop round-off drift.
RENORM_PERIOD = 512


def gram_schmidt(m: np.ndarray) -> np.ndarray:
    """Orthonormalise the rows of a square matrix (modified Gram-Schmidt)."""
    q = np.array(m, dtype=np.complex128)
    for i in range(q.shape[0]):
        for j in range(i):
            q[i] -= np.vdot(q[j], q[i]) * q[j]
        q[i] /= np.linalg.norm(q[i])
    return q


def differential_encode(
    labels: Sequence[int], cb: Codebook, C0=None, renorm_period: int = RENORM_PERIOD
) -> np.ndarray:
    """Chain ``C_t = C_{t-1} U(label_t)`` starting from ``C0``.

    Returns the stack ``C_1 .. C_T`` (``C0`` itself is not included).
    """
    C = np.eye(cb.n_tx, dtype=np.complex128) if C0 is None else np.asarray(C0, np.complex128)
    if C.shape != (cb.n_tx, cb.n_tx):
        raise DimensionError(f"C0 must be {cb.n_tx}x{cb.n_tx}")
    if unitarity_defect(C) > 1e-10:
        raise ValueError("C0 must be unitary")
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    if labels.size and (labels.min() < 0 or labels.max() >= cb.size):
        raise ValueError(f"labels must lie in 0..{cb.size - 1}")
    out = np.empty((labels.size, cb.n_tx, cb.n_tx), dtype=np.complex128)
    for t, lab in enumerate(labels):
        C = C @ cb.matrices[lab]
        if (t + 1) % renorm_period == 0:
            C = gram_schmidt(C)
        out[t] = C
    return out


def _check_pair(R_t, R_prev, n_tx):
    R_t = np.asarray(R_t, dtype=np.complex128)
    R_prev = np.asarray(R_prev, dtype=np.complex128)
    if R_t.shape != R_prev.shape or R_t.shape[-1] != n_tx:
        raise DimensionError(
            f"received blocks {R_t.shape} and {R_prev.shape} do not match N_T={n_tx}"
        )
    return R_t, R_prev


def trace_metric(R_t, R_prev, U) -> float:
    """``Re tr(R_t^H R_prev U)``."""
    U = np.asarray(U, dtype=np.complex128)
    R_t, R_prev = _check_pair(np.atleast_2d(R_t), np.atleast_2d(R_prev), U.shape[0])
    return float(np.real(np.trace(R_t.conj().T @ R_prev @ U)))


def _outer(R_t: np.ndarray, R_prev: np.ndarray) -> np.ndarray:
    # X[f, i, j] = sum_r R_prev[f, r, i] conj(R_t[f, r, j]), so that
    # Re tr(R_t^H R_prev U) = Re sum_ij X_ij U_ij.
    return np.einsum("fri,frj->fij", R_prev, R_t.conj())


def slot_correlations(R_t, R_prev, cb: Codebook) -> np.ndarray:
    """``Re tr(R_t^H R_prev D_k)`` for every real-slot basis matrix ``D_k``.

    Inputs have shape (F, N_R, N_T); output (F, 2 n_sym).
    """
    R_t, R_prev = _check_pair(R_t, R_prev, cb.n_tx)
    X = _outer(R_t, R_prev).reshape(R_t.shape[0], -1)
    basis = cb.dispersion.basis.reshape(2 * cb.dispersion.n_sym, -1)
    return (X @ basis.T).real


def full_ml_decode_batch(R_t, R_prev, cb: Codebook, chunk: int = 2048) -> np.ndarray:
    """Exhaustive search over all code matrices, one label per frame.

    Ties go to the smallest label.
    """
    R_t, R_prev = _check_pair(R_t, R_prev, cb.n_tx)
    X = _outer(R_t, R_prev).reshape(R_t.shape[0], -1)
    # Re(x . u) = x.re u.re - x.im u.im, as one real product
    Xr = np.hstack([X.real, -X.imag])
    U = cb.matrices.reshape(cb.size, -1)
    Ur = np.hstack([U.real, U.imag])
    out = np.empty(X.shape[0], dtype=np.int64)
    for s in range(0, X.shape[0], chunk):
        metric = Xr[s : s + chunk] @ Ur.T
        out[s : s + chunk] = np.argmax(metric, axis=1)
    return out


def groupwise_decode_batch(R_t, R_prev, cb: Codebook, with_count: bool = False):
    """Independent per-group searches, one label per frame.

    With ``with_count`` also returns the number of candidate points scored
    for each frame (the sum of the group constellation sizes).
    """
    t = slot_correlations(R_t, R_prev, cb)
    picks = []
    evaluated = 0
    for g in cb.groups:
        scores = t[:, list(g.slots)] @ g.points.T
        evaluated += scores.shape[1]
        picks.append(np.argmax(scores, axis=1))
    labels = np.asarray(cb.join_label(picks), dtype=np.int64)
    if with_count:
        return labels, evaluated
    return labels


def full_ml_decode(R_t, R_prev, cb: Codebook) -> int:
    R_t, R_prev = np.atleast_2d(R_t), np.atleast_2d(R_prev)
    return int(full_ml_decode_batch(R_t[None], R_prev[None], cb)[0])


def groupwise_decode(R_t, R_prev, cb: Codebook, with_count: bool = False):
    R_t, R_prev = np.atleast_2d(R_t), np.atleast_2d(R_prev)
    res = groupwise_decode_batch(R_t[None], R_prev[None], cb, with_count=with_count)
    if with_count:
        return int(res[0][0]), res[1]
    return int(res[0])
