"""Quasi-static flat Rayleigh fading with additive white Gaussian noise.

SNR convention: code matrices are unitary, so each channel use radiates
unit total power and each receive antenna sees unit mean signal power.
The SNR per receive antenna is therefore ``1 / sigma2``.
"""

from __future__ import annotations

import numpy as np

from .linalg import DimensionError

__all__ = ["sample_rayleigh", "complex_noise", "transmit", "snr_db_to_sigma2"]


def sample_rayleigh(n_r: int, n_t: int, rng: np.random.Generator) -> np.ndarray:
    """``(n_r, n_t)`` matrix of iid CN(0, 1) gains."""
    if n_r < 1 or n_t < 1:
        raise ValueError("channel dimensions must be positive")
    z = rng.standard_normal((n_r, n_t, 2))
    return (z[..., 0] + 1j * z[..., 1]) * np.sqrt(0.5)


def complex_noise(shape, sigma2: float, rng: np.random.Generator) -> np.ndarray:
    """iid CN(0, sigma2) samples."""
    if sigma2 < 0:
        raise ValueError("noise variance must be non-negative")
    z = rng.standard_normal(tuple(shape) + (2,))
    return (z[..., 0] + 1j * z[..., 1]) * np.sqrt(sigma2 / 2.0)


def transmit(H, C, sigma2: float, rng: np.random.Generator) -> np.ndarray:
    """``R = H C + N`` with ``N`` iid CN(0, sigma2)."""
    H = np.asarray(H, dtype=np.complex128)
    C = np.asarray(C, dtype=np.complex128)
    if H.ndim != 2 or C.ndim != 2 or H.shape[1] != C.shape[0]:
        raise DimensionError(f"cannot multiply channel {H.shape} by codeword {C.shape}")
    # noise is always drawn so the RNG stream does not depend on sigma2
    return H @ C + complex_noise((H.shape[0], C.shape[1]), sigma2, rng)


def snr_db_to_sigma2(snr_db: float) -> float:
    return 10.0 ** (-snr_db / 10.0)
