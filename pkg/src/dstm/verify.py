"""Self-check batteries run by ``dstm verify`` and the acceptance suite."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import complex_noise, sample_rayleigh
from .codebook import Codebook
from .constellations import best_thetas
from .link import full_ml_decode_batch, groupwise_decode_batch

__all__ = ["ThetaCheck", "theorem1_check", "equivalence_check", "unitarity_check", "noiseless_check"]


@dataclass
class ThetaCheck:
    M: int
    best: np.ndarray
    expected: tuple[float, ...]
    passed: bool


def theorem1_check(Ms=range(2, 13), steps: int = 64) -> list[ThetaCheck]:
    """Sweep the rotation for each ``M`` and compare with the optimum.

    A case passes when every best grid point lies within one grid step of
    an expected optimum and at least one expected optimum is hit.
    """
    out = []
    for M in Ms:
        grid = math.pi / (steps * M)
        expected = (math.pi / M,) if M % 2 == 0 else (math.pi / (2 * M), 3 * math.pi / (2 * M))
        best = best_thetas(M, steps)
        near = [min(abs(b - e) for e in expected) <= grid * (1 + 1e-9) for b in best]
        hit = any(np.min(np.abs(best - e)) <= grid * (1 + 1e-9) for e in expected)
        out.append(ThetaCheck(M, best, expected, bool(all(near) and hit)))
    return out


def _instances(cb: Codebook, trials: int, rng: np.random.Generator):
    # Half the instances follow the differential model at a random SNR in
    # [0, 30] dB with 1 or 2 receive antennas; the rest are unstructured
    # Gaussian pairs.
    n_rx = 1 + (rng.random() < 0.5)
    half = trials // 2
    H = np.stack([sample_rayleigh(n_rx, cb.n_tx, rng) for _ in range(half)])
    sent = rng.integers(cb.size, size=half)
    sigma2 = 10.0 ** (-rng.uniform(0, 30, size=half) / 10.0)
    n1 = complex_noise((half, n_rx, cb.n_tx), 1.0, rng) * np.sqrt(sigma2)[:, None, None]
    n2 = complex_noise((half, n_rx, cb.n_tx), 1.0, rng) * np.sqrt(sigma2)[:, None, None]
    R_prev = H + n1
    R_t = H @ cb.matrices[sent] + n2
    rest = trials - half
    G_t = complex_noise((rest, n_rx, cb.n_tx), 1.0, rng)
    G_prev = complex_noise((rest, n_rx, cb.n_tx), 1.0, rng)
    return np.concatenate([R_t, G_t]), np.concatenate([R_prev, G_prev])


def equivalence_check(cb: Codebook, trials: int = 10_000, seed: int = 0) -> int:
    """Number of instances where group-wise and full search disagree."""
    rng = np.random.default_rng(seed)
    R_t, R_prev = _instances(cb, trials, rng)
    return int(np.sum(groupwise_decode_batch(R_t, R_prev, cb) != full_ml_decode_batch(R_t, R_prev, cb)))


def unitarity_check(cb: Codebook) -> float:
    """Largest unitarity defect over the codebook."""
    g = cb.matrices @ cb.matrices.conj().transpose(0, 2, 1)
    return float(np.abs(g - np.eye(cb.n_tx)).max())


def noiseless_check(cb: Codebook, channels: int = 50, seed: int = 0, decoder: str = "groupwise") -> int:
    """Labels lost over a noiseless link, every label sent once per channel.

    Each channel draw encodes the full label sequence differentially from
    the identity and decodes block by block.
    """
    rng = np.random.default_rng(seed)
    decode = groupwise_decode_batch if decoder == "groupwise" else full_ml_decode_batch
    wrong = 0
    for _ in range(channels):
        H = sample_rayleigh(1, cb.n_tx, rng)
        while np.linalg.norm(H) <= 1e-6:
            H = sample_rayleigh(1, cb.n_tx, rng)
        order = rng.permutation(cb.size)
        C = np.empty((cb.size + 1, cb.n_tx, cb.n_tx), dtype=np.complex128)
        C[0] = np.eye(cb.n_tx)
        for i, lab in enumerate(order):
            C[i + 1] = C[i] @ cb.matrices[lab]
        R = H @ C
        R_prev, R_t = R[:-1], R[1:]
        wrong += int(np.sum(decode(R_t, R_prev, cb) != order))
    return wrong
