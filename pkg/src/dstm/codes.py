"""Square space-time block codes and their dispersion-matrix form.

Every builder maps a complex symbol vector to a square code matrix whose
rows are antennas and columns are time slots::

    ostbc4      4x4, 3 symbols, rate 3/4 orthogonal design
    ostbc4_half 4x4, 2 symbols, rate 1/2 (Alamouti on the diagonal twice)
    qostbc4     4x4, 4 symbols, rate 1 quasi-orthogonal design
    ostbc8      8x8, 4 symbols, rate 1/2 orthogonal design
    qostbc8     8x8, 6 symbols, rate 3/4 ABBA of two ostbc4 blocks

All of them are real-linear in the symbols, so each has an exact
representation ``C(c) = sum_k Re(c_k) A_k + Im(c_k) jB_k``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "LinearDispersion",
    "StructureError",
    "build_ostbc4",
    "build_ostbc4_half",
    "build_qostbc4",
    "build_ostbc8",
    "build_qostbc8",
    "extract_dispersion",
    "gram_params_qo4",
    "BUILDERS",
]


class StructureError(ValueError):
    """A builder is not linear in the real and imaginary symbol parts."""


def _symbols(c, n: int) -> np.ndarray:
    s = np.asarray(c, dtype=np.complex128).reshape(-1)
    if s.size != n:
        raise ValueError(f"expected {n} symbols, got {s.size}")
    if not np.all(np.isfinite(s)):
        raise ValueError("symbols must be finite")
    return s


def build_ostbc4(c) -> np.ndarray:
    """Rate-3/4 orthogonal code for four antennas.

    ``C C^H = (|c1|^2 + |c2|^2 + |c3|^2) I``.
    """
    c1, c2, c3 = _symbols(c, 3)
    k = np.conj
    return np.array(
        [
            [c1, 0, c2, -c3],
            [0, c1, k(c3), k(c2)],
            [-k(c2), -c3, k(c1), 0],
            [k(c3), -c2, 0, k(c1)],
        ],
        dtype=np.complex128,
    )


def _alamouti(c1, c2) -> np.ndarray:
    return np.array([[c1, -np.conj(c2)], [c2, np.conj(c1)]], dtype=np.complex128)


def build_ostbc4_half(c) -> np.ndarray:
    """Rate-1/2 square orthogonal code for four antennas.

    The Alamouti block repeated on the diagonal, so the Gram matrix is
    ``(|c1|^2 + |c2|^2) I_4``.
    """
    c1, c2 = _symbols(c, 2)
    out = np.zeros((4, 4), dtype=np.complex128)
    out[:2, :2] = out[2:, 2:] = _alamouti(c1, c2)
    return out


def build_qostbc4(c) -> np.ndarray:
    """Rate-1 quasi-orthogonal code for four antennas.

    The Gram matrix is ``alpha`` on the diagonal and ``+/-beta`` on the
    anti-diagonal, see :func:`gram_params_qo4`.
    """
    c1, c2, c3, c4 = _symbols(c, 4)
    k = np.conj
    return np.array(
        [
            [c1, -k(c2), -k(c3), c4],
            [c2, k(c1), -k(c4), -c3],
            [c3, -k(c4), k(c1), -c2],
            [c4, k(c3), k(c2), c1],
        ],
        dtype=np.complex128,
    )


def build_ostbc8(c) -> np.ndarray:
    """Rate-1/2 square orthogonal code for eight antennas.

    Built by the usual doubling step from the four-antenna design::

        [[ G(c1, c2, c3),  c4 I  ],
         [ -c4* I,        G(...)^H ]]

    which keeps ``C C^H = (sum |c_i|^2) I_8``.
    """
    c1, c2, c3, c4 = _symbols(c, 4)
    g = build_ostbc4([c1, c2, c3])
    eye = np.eye(4)
    return np.block([[g, c4 * eye], [-np.conj(c4) * eye, g.conj().T]])


def build_qostbc8(c) -> np.ndarray:
    """Rate-3/4 quasi-orthogonal code for eight antennas.

    ``[[A, B], [B, A]]`` with ``A = ostbc4(c1, c2, c3)`` and
    ``B = ostbc4(c4, c5, c6)``; symbols pair up as (c1, c4), (c2, c5),
    (c3, c6).
    """
    s = _symbols(c, 6)
    a = build_ostbc4(s[:3])
    b = build_ostbc4(s[3:])
    return np.block([[a, b], [b, a]])


@dataclass(frozen=True)
class LinearDispersion:
    """A code as fixed dispersion matrices.

    Attributes
    ----------
    n_tx : int
    n_sym : int
    A : ndarray, shape (n_sym, n_tx, n_tx)
        Matrix multiplied by the real part of each symbol.
    B : ndarray, shape (n_sym, n_tx, n_tx)
        ``jB_k`` is multiplied by the imaginary part of symbol ``k``.
    """

    n_tx: int
    n_sym: int
    A: np.ndarray
    B: np.ndarray

    @property
    def basis(self) -> np.ndarray:
        """Real-slot basis, shape (2 n_sym, n_tx, n_tx).

        Slot ``2k`` is ``A_k`` (real part of symbol k), slot ``2k+1`` is
        ``jB_k`` (imaginary part).
        """
        out = np.empty((2 * self.n_sym, self.n_tx, self.n_tx), dtype=np.complex128)
        out[0::2] = self.A
        out[1::2] = 1j * self.B
        return out

    def codeword(self, c) -> np.ndarray:
        s = _symbols(c, self.n_sym)
        return np.tensordot(s.real, self.A, axes=1) + 1j * np.tensordot(s.imag, self.B, axes=1)

    def from_real(self, x) -> np.ndarray:
        """Code matrices for real slot vectors ``x`` of shape (..., 2 n_sym)."""
        x = np.asarray(x, dtype=float)
        return np.tensordot(x, self.basis, axes=([-1], [0]))


def extract_dispersion(
    builder: Callable, n_sym: int, n_tx: int, rng: np.random.Generator | None = None
) -> LinearDispersion:
    """Read the dispersion matrices off a code builder.

    ``A_k`` is the builder output for a unit real symbol in slot ``k`` and
    ``jB_k`` for a unit imaginary one.  The result is checked against the
    builder at a random symbol vector; a residual above 1e-9 means the
    builder is not linear and :class:`StructureError` is raised.
    """
    A = np.empty((n_sym, n_tx, n_tx), dtype=np.complex128)
    B = np.empty((n_sym, n_tx, n_tx), dtype=np.complex128)
    for k in range(n_sym):
        e = np.zeros(n_sym, dtype=np.complex128)
        e[k] = 1.0
        A[k] = builder(e)
        B[k] = builder(1j * e) / 1j
    disp = LinearDispersion(n_tx, n_sym, A, B)

    rng = np.random.default_rng(0) if rng is None else rng
    probe = rng.standard_normal(n_sym) + 1j * rng.standard_normal(n_sym)
    residual = np.abs(disp.codeword(probe) - builder(probe)).max()
    if residual > 1e-9:
        raise StructureError(f"builder is not linear in the symbols (residual {residual:.3g})")
    return disp


def gram_params_qo4(c) -> tuple[float, float]:
    """``(alpha, beta)`` of the four-antenna quasi-orthogonal Gram matrix.

    ``alpha = sum |c_i|^2`` and ``beta = 2 Re(c1 c4* - c2 c3*)``.
    """
    c1, c2, c3, c4 = _symbols(c, 4)
    alpha = float(np.sum(np.abs([c1, c2, c3, c4]) ** 2))
    beta = float(2.0 * np.real(c1 * np.conj(c4) - c2 * np.conj(c3)))
    return alpha, beta


# name -> (builder, n_sym, n_tx)
BUILDERS = {
    "ostbc4": (build_ostbc4, 3, 4),
    "ostbc4_half": (build_ostbc4_half, 2, 4),
    "qostbc4": (build_qostbc4, 4, 4),
    "ostbc8": (build_ostbc8, 4, 8),
    "qostbc8": (build_qostbc8, 6, 8),
}
