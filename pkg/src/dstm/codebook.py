"""Unitary codebooks built from a linear code and joint constellations.

A codebook is the Cartesian product of its decoding groups.  Each group
owns a set of real symbol slots (slot ``2k`` is ``Re c_k``, slot ``2k+1``
is ``Im c_k``) and a constellation whose rows fill those slots.  Labels
enumerate the product with group 0 in the most significant position.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .codes import LinearDispersion
from .constellations import JointGroupSet, PairwiseSet
from .linalg import DEFAULT_RANK_TOL, pair_scan

__all__ = [
    "ConstellationError",
    "DecodingGroup",
    "Codebook",
    "assemble",
    "diversity_rank",
    "coding_gain",
    "coding_gain_fast_ostbc",
    "detmin_fast_qo",
    "fast_coding_gain",
    "spectral_efficiency",
    "codebook_to_dict",
    "export_codebook",
]

UNITARY_TOL = 1e-10


class ConstellationError(ValueError):
    """The constellation produces a non-unitary code matrix."""


@dataclass(frozen=True)
class DecodingGroup:
    slots: tuple[int, ...]
    constellation: Union[JointGroupSet, PairwiseSet]

    def __post_init__(self):
        object.__setattr__(self, "slots", tuple(int(s) for s in self.slots))
        if len(self.slots) != self.points.shape[1]:
            raise ValueError(
                f"group has {len(self.slots)} slots but points of width {self.points.shape[1]}"
            )

    @property
    def points(self) -> np.ndarray:
        c = self.constellation
        return c.as_real() if isinstance(c, PairwiseSet) else c.points

    @property
    def L(self) -> int:
        return self.points.shape[0]

    @property
    def bits(self) -> int:
        return int(math.log2(self.L))


@dataclass(frozen=True)
class Codebook:
    """All code matrices of a DSTM scheme, in label order."""

    n_tx: int
    dispersion: LinearDispersion
    groups: tuple[DecodingGroup, ...]
    matrices: np.ndarray
    vectors: np.ndarray
    family: str = "orthogonal"
    name: str = ""
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def size(self) -> int:
        return self.matrices.shape[0]

    @property
    def labels(self) -> np.ndarray:
        return np.arange(self.size)

    @property
    def group_sizes(self) -> tuple[int, ...]:
        return tuple(g.L for g in self.groups)

    @property
    def strides(self) -> tuple[int, ...]:
        sizes = self.group_sizes
        return tuple(int(np.prod(sizes[i + 1 :], dtype=np.int64)) for i in range(len(sizes)))

    def split_label(self, label):
        """Per-group point indices for ``label`` (scalar or array)."""
        label = np.asarray(label)
        return [(label // s) % g.L for s, g in zip(self.strides, self.groups)]

    def join_label(self, indices) -> np.ndarray:
        return sum(np.asarray(i) * s for i, s in zip(indices, self.strides))

    def bits_of(self, label: int) -> str:
        nbits = int(round(math.log2(self.size)))
        return format(int(label), f"0{nbits}b")


def assemble(
    dispersion: LinearDispersion,
    groups: Sequence[DecodingGroup],
    family: str = "orthogonal",
    name: str = "",
) -> Codebook:
    """Enumerate every code matrix of the product constellation.

    Raises
    ------
    ValueError
        If the group slots do not partition the code's real slots.
    ConstellationError
        If any matrix is not unitary within 1e-10; the message names the
        first offending label.
    """
    groups = tuple(groups)
    n_slots = 2 * dispersion.n_sym
    used = [s for g in groups for s in g.slots]
    if sorted(used) != list(range(n_slots)):
        raise ValueError(f"group slots {used} do not partition slots 0..{n_slots - 1}")

    sizes = [g.L for g in groups]
    n = int(np.prod(sizes))
    x = np.zeros((n, n_slots))
    idx = np.indices(sizes).reshape(len(sizes), -1)
    for g, i in zip(groups, idx):
        x[:, list(g.slots)] = g.points[i]
    mats = dispersion.from_real(x)

    gram = mats @ mats.conj().transpose(0, 2, 1)
    defect = np.abs(gram - np.eye(dispersion.n_tx)).reshape(n, -1).max(axis=1)
    bad = np.flatnonzero(defect > UNITARY_TOL)
    if bad.size:
        k = int(bad[0])
        raise ConstellationError(
            f"code matrix for label {k} is not unitary (defect {defect[k]:.3g}); "
            f"{bad.size} of {n} labels affected"
        )
    return Codebook(dispersion.n_tx, dispersion, groups, mats, x, family, name)


def _matrices(cb) -> np.ndarray:
    return cb.matrices if isinstance(cb, Codebook) else np.asarray(cb, dtype=np.complex128)


def _scan(cb, tol: float):
    if isinstance(cb, Codebook):
        key = ("scan", tol)
        if key not in cb._cache:
            cb._cache[key] = pair_scan(cb.matrices, tol)
        return cb._cache[key]
    return pair_scan(_matrices(cb), tol)


def diversity_rank(cb, tol: float = DEFAULT_RANK_TOL) -> int:
    """Minimum rank of ``U_k - U_l`` over all pairs of code matrices."""
    return _scan(cb, tol)[1]


def coding_gain(cb, tol: float = DEFAULT_RANK_TOL) -> float:
    """Brute-force coding gain over every pair of code matrices.

    ``min N_T det((U_k - U_l)(U_k - U_l)^H)^(1/N_T)``; 0 when some
    difference is rank deficient.  Accepts a :class:`Codebook` or a stack
    of matrices.
    """
    mats = _matrices(cb)
    n_tx = mats.shape[1]
    min_det, min_rank, _ = _scan(cb, tol)
    if min_rank < n_tx:
        return 0.0
    return n_tx * min_det ** (1.0 / n_tx)


def coding_gain_fast_ostbc(cset: JointGroupSet, n_tx: int) -> float:
    """Coding gain of an orthogonal-code DSTM from its constellation alone.

    The distance determinant of an orthogonal code is
    ``(sum |delta_i|^2)^N_T``, so the gain is ``N_T`` times the minimum
    squared distance between constellation points.
    """
    p = cset.points
    d2 = np.sum((p[:, None, :] - p[None, :, :]) ** 2, axis=2)
    iu = np.triu_indices(p.shape[0], 1)
    return float(n_tx * d2[iu].min())


def detmin_fast_qo(pset: PairwiseSet, n_tx: int = 4) -> float:
    """Minimum distance determinant of a quasi-orthogonal DSTM, closed form.

    For two points of the half-zero pair family the quantity
    ``v = |da + db|^2 |da - db|^2`` takes two forms:

    * both points in the same half: ``v = |da|^4`` (or ``|db|^4``), smallest
      for neighbouring phases, ``(2P (1 - cos(2 pi / M)))^2``;
    * one point in each half: ``v = 4 P^2 sin^2(2 pi n / M - theta)`` for
      integer ``n``.

    The determinant is ``v^(N_T / 2)`` (squared for four antennas, fourth
    power for the 8x8 ABBA code).
    """
    if pset.M is None or pset.theta is None:
        raise ValueError("closed form needs a pairwise set with M and theta")
    M, theta, P = pset.M, pset.theta, pset.power
    same_half = (2.0 * P * (1.0 - math.cos(2.0 * math.pi / M))) ** 2
    n = np.arange(M)
    cross = float(np.min(4.0 * P**2 * np.sin(2.0 * np.pi * n / M - theta) ** 2))
    v = min(same_half, cross)
    return v ** (n_tx / 2)


def fast_coding_gain(cb: Codebook) -> float:
    """Closed-form coding gain, dispatched on the code family."""
    if cb.family == "quasi-orthogonal":
        dets = [detmin_fast_qo(g.constellation, cb.n_tx) for g in cb.groups]
        return cb.n_tx * min(dets) ** (1.0 / cb.n_tx)
    sets = [
        g.constellation.as_group() if isinstance(g.constellation, PairwiseSet) else g.constellation
        for g in cb.groups
    ]
    return min(coding_gain_fast_ostbc(s, cb.n_tx) for s in sets)


def spectral_efficiency(cb: Codebook) -> float:
    """Bits per channel use, ``log2(N) / N_T``."""
    return math.log2(cb.size) / cb.n_tx


def codebook_to_dict(cb: Codebook) -> dict:
    """JSON-ready description of a codebook.

    Matrices are nested row lists of ``[re, im]`` entries, in label order.
    """

    def cpx(a):
        return [[[float(z.real), float(z.imag)] for z in row] for row in a]

    return {
        "name": cb.name,
        "family": cb.family,
        "n_tx": cb.n_tx,
        "n_sym": cb.dispersion.n_sym,
        "size": cb.size,
        "bits": int(round(math.log2(cb.size))),
        "groups": [
            {"slots": list(g.slots), "size": g.L, "points": g.points.tolist()} for g in cb.groups
        ],
        "labels": [cb.bits_of(k) for k in range(cb.size)],
        "matrices": [cpx(m) for m in cb.matrices],
    }


def export_codebook(cb: Codebook, path) -> None:
    Path(path).write_text(json.dumps(codebook_to_dict(cb)) + "\n")
