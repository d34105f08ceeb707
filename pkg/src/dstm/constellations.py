"""Joint constellation sets.

Three families feed the codebooks:

* spherical codes, scaled into tri-symbol / quad-symbol groups for the
  orthogonal codes,
* the half-zero symbol-pair family for the quasi-orthogonal codes, with
  its optimum rotation,
* plain PSK for the orthogonal-code baselines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

__all__ = [
    "SphericalCode",
    "JointGroupSet",
    "PairwiseSet",
    "UnsupportedConfiguration",
    "BitMappingError",
    "SPHERE_3X16",
    "BEST_KNOWN_ANGLES",
    "builtin_sphere",
    "load_sphere",
    "save_sphere",
    "min_angle",
    "optimize_sphere",
    "sphere_to_joint",
    "qo_pairwise",
    "theorem1_theta",
    "psk",
    "pair_determinants",
    "theta_sweep",
    "best_thetas",
]

# Optimal 16-point code in 3-D, stored at radius sqrt(0.5).
SPHERE_3X16 = np.array(
    [
        [0.089527456, 0.681333248, -0.166642852],
        [-0.418469889, 0.545080831, 0.166642852],
        [0.057360813, 0.436534568, 0.5533058],
        [-0.268116333, 0.349236773, -0.5533058],
        [-0.681333248, 0.089527456, -0.166642852],
        [-0.545080831, -0.418469889, 0.166642852],
        [-0.436534568, 0.057360813, 0.5533058],
        [-0.349236773, -0.268116333, -0.5533058],
        [-0.089527456, -0.681333248, -0.166642852],
        [0.418469889, -0.545080831, 0.166642852],
        [-0.057360813, -0.436534568, 0.5533058],
        [0.268116333, -0.349236773, -0.5533058],
        [0.681333248, -0.089527456, -0.166642852],
        [0.545080831, 0.418469889, 0.166642852],
        [0.436534568, -0.057360813, 0.5533058],
        [0.349236773, 0.268116333, -0.5533058],
    ]
)

# Best known minimum angles (degrees) for the codes we ship.
BEST_KNOWN_ANGLES = {(3, 8): 74.8585, (3, 16): 52.2444, (4, 64): 42.3062}

# Bundled optimizer output must be within this many degrees of the table.
_BUNDLED_SLACK = {(3, 8): 0.9, (4, 64): 1.0}


class UnsupportedConfiguration(ValueError):
    pass


class BitMappingError(ValueError):
    """Constellation size is not a power of two."""


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class SphericalCode:
    """``n`` unit vectors in ``dim`` dimensions."""

    points: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.points, dtype=float)
        if p.ndim != 2 or p.shape[0] < 2:
            raise ValueError("a spherical code needs at least two points")
        if not np.all(np.isfinite(p)):
            raise ValueError("coordinates must be finite")
        if np.abs(np.linalg.norm(p, axis=1) - 1.0).max() > 1e-12:
            raise ValueError("spherical code points must have unit norm")
        object.__setattr__(self, "points", p)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def n(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class JointGroupSet:
    """Real constellation points for one decoding group.

    Row ``i`` is the point carrying label ``i``; its entries are written
    into the group's real symbol slots in order.
    """

    points: np.ndarray
    power: float

    def __post_init__(self):
        p = np.asarray(self.points, dtype=float)
        if p.ndim != 2:
            raise ValueError("points must be a 2-D array")
        if not _is_pow2(p.shape[0]):
            raise BitMappingError(f"{p.shape[0]} points cannot carry a whole number of bits")
        if np.abs(np.sum(p**2, axis=1) - self.power).max() > 1e-12:
            raise ValueError("every point must have squared norm equal to the power")
        object.__setattr__(self, "points", p)

    @property
    def group_dim(self) -> int:
        return self.points.shape[1]

    @property
    def L(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class PairwiseSet:
    """Complex symbol pairs ``(a_k, b_k)`` for a quasi-orthogonal group.

    ``M`` and ``theta`` are ``None`` for hand-made sets.
    """

    pairs: np.ndarray
    power: float
    M: int | None = None
    theta: float | None = None
    nu: float = field(init=False)

    def __post_init__(self):
        p = np.asarray(self.pairs, dtype=np.complex128)
        if p.ndim != 2 or p.shape[1] != 2:
            raise ValueError("pairs must have shape (L, 2)")
        object.__setattr__(self, "pairs", p)
        object.__setattr__(self, "nu", float(np.real(p[0, 0] * np.conj(p[0, 1]))))

    @property
    def L(self) -> int:
        return self.pairs.shape[0]

    def cross_terms(self) -> np.ndarray:
        """``Re(a_k b_k^*)`` for every pair."""
        return np.real(self.pairs[:, 0] * np.conj(self.pairs[:, 1]))

    def powers(self) -> np.ndarray:
        return np.sum(np.abs(self.pairs) ** 2, axis=1)

    def as_real(self) -> np.ndarray:
        """Pairs as real rows ``(Re a, Im a, Re b, Im b)``."""
        a, b = self.pairs[:, 0], self.pairs[:, 1]
        return np.column_stack([a.real, a.imag, b.real, b.imag])

    def as_group(self) -> JointGroupSet:
        return JointGroupSet(self.as_real(), self.power)


def min_angle(s: SphericalCode | np.ndarray) -> float:
    """Smallest angle in degrees between two distinct points."""
    p = s.points if isinstance(s, SphericalCode) else np.asarray(s, dtype=float)
    p = p / np.linalg.norm(p, axis=1, keepdims=True)
    g = p @ p.T
    iu = np.triu_indices(p.shape[0], 1)
    return float(np.degrees(np.arccos(np.clip(g[iu].max(), -1.0, 1.0))))


def _normalize_rows(rows: np.ndarray, what: str) -> np.ndarray:
    radii = np.linalg.norm(rows, axis=1)
    if np.abs(radii - radii.mean()).max() > 1e-6:
        raise ValueError(f"{what}: points do not share a common radius")
    if radii.mean() == 0:
        raise ValueError(f"{what}: points are at the origin")
    return rows / radii[:, None]


def _parse_rows(text: str, what: str) -> np.ndarray:
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append([float(tok) for tok in line.split()])
        except ValueError as exc:
            raise ValueError(f"{what}:{lineno}: {exc}") from None
    if len(rows) < 2:
        raise ValueError(f"{what}: need at least two points, found {len(rows)}")
    if len({len(r) for r in rows}) != 1:
        raise ValueError(f"{what}: rows have different lengths")
    return np.array(rows, dtype=float)


def load_sphere(path) -> SphericalCode:
    """Read a spherical code from a whitespace-separated coordinate file.

    Points may be stored at any common radius; they are rescaled to unit
    norm.  Lines starting with ``#`` are comments.
    """
    path = Path(path)
    rows = _parse_rows(path.read_text(), str(path))
    return SphericalCode(_normalize_rows(rows, str(path)))


def save_sphere(s: SphericalCode, path, comment: str | None = None) -> None:
    lines = []
    if comment:
        lines += [f"# {c}" for c in comment.splitlines()]
    lines += [" ".join(f"{x:.17g}" for x in row) for row in s.points]
    Path(path).write_text("\n".join(lines) + "\n")


def builtin_sphere(d: int, n: int) -> SphericalCode:
    """One of the shipped spherical codes: (3, 8), (3, 16) or (4, 64)."""
    if (d, n) == (3, 16):
        return SphericalCode(_normalize_rows(SPHERE_3X16, "3x16 code"))
    if (d, n) not in _BUNDLED_SLACK:
        raise UnsupportedConfiguration(f"no built-in spherical code for d={d}, n={n}")
    name = f"sphere_{d}x{n}.txt"
    text = resources.files("dstm.data").joinpath(name).read_text()
    code = SphericalCode(_normalize_rows(_parse_rows(text, name), name))
    if code.dim != d or code.n != n:
        raise ValueError(f"{name} holds a ({code.dim}, {code.n}) code")
    target = BEST_KNOWN_ANGLES[(d, n)]
    if min_angle(code) < target - _BUNDLED_SLACK[(d, n)]:
        raise ValueError(f"{name}: min angle {min_angle(code):.4f} too far below {target}")
    return code


def _descend(p: np.ndarray, iterations: int) -> tuple[np.ndarray, float]:
    # Projected descent on a scale-free inverse-power potential whose
    # exponent grows over the run, so late iterations act on the closest
    # pairs only.  Keeps the best configuration seen.
    best, best_angle = p.copy(), min_angle(p)
    for it in range(iterations):
        frac = it / iterations
        s = 6.0 + 200.0 * frac**2
        diff = p[:, None, :] - p[None, :, :]
        dist = np.sqrt(np.sum(diff**2, axis=2))
        np.fill_diagonal(dist, np.inf)
        dmin = dist.min()
        w = (dmin / dist) ** (s + 2.0)
        force = np.einsum("ij,ijk->ik", w, diff)
        force -= np.sum(force * p, axis=1, keepdims=True) * p
        fmax = np.linalg.norm(force, axis=1).max()
        if fmax == 0.0:
            break
        step = dmin * (0.1 * (1.0 - frac) ** 2 + 1e-4)
        p = p + (step / fmax) * force
        p /= np.linalg.norm(p, axis=1, keepdims=True)
        a = min_angle(p)
        if a > best_angle:
            best, best_angle = p.copy(), a
    return best, best_angle


def optimize_sphere(
    d: int, n: int, seed: int = 0, iterations: int = 2000, restarts: int = 32
) -> SphericalCode:
    """Spread ``n`` points on the unit sphere in ``d`` dimensions.

    Each restart draws a random start from ``default_rng([seed, restart])``
    and runs a repulsion descent; the best configuration over all restarts
    is returned.  Output is deterministic for fixed arguments.
    """
    if d < 2 or n < 2:
        raise ValueError("need d >= 2 and n >= 2")
    best, best_angle = None, -1.0
    for r in range(restarts):
        rng = np.random.default_rng([seed, r])
        p = rng.standard_normal((n, d))
        p /= np.linalg.norm(p, axis=1, keepdims=True)
        p, a = _descend(p, iterations)
        if a > best_angle:
            best, best_angle = p, a
    best = best / np.linalg.norm(best, axis=1, keepdims=True)
    return SphericalCode(best)


def sphere_to_joint(s: SphericalCode, power: float) -> JointGroupSet:
    """Scale a spherical code to a joint constellation of the given power."""
    if power <= 0:
        raise ValueError("power must be positive")
    if not _is_pow2(s.n):
        raise BitMappingError(f"{s.n} points cannot carry a whole number of bits")
    p = s.points * (math.sqrt(power) / np.linalg.norm(s.points, axis=1, keepdims=True))
    return JointGroupSet(p, power)


def qo_pairwise(M: int, theta: float, n_groups: int = 2) -> PairwiseSet:
    """The half-zero symbol-pair family with ``2M`` pairs.

    Pairs ``k = 1..M`` are ``(rho e^{j 2 pi k / M}, 0)`` and pairs
    ``M + m`` are ``(0, rho e^{j (2 pi m / M + theta)})``, with
    ``rho^2 = 1 / n_groups`` so that ``n_groups`` pairs fill unit power.
    """
    if M < 2:
        raise ValueError("M must be at least 2")
    if not 0.0 <= theta < 2.0 * math.pi / M:
        raise ValueError(f"theta must lie in [0, 2pi/M), got {theta}")
    if n_groups not in (2, 3):
        raise ValueError("n_groups must be 2 or 3")
    power = 1.0 / n_groups
    rho = math.sqrt(power)
    k = np.arange(1, M + 1)
    pairs = np.zeros((2 * M, 2), dtype=np.complex128)
    pairs[:M, 0] = rho * np.exp(2j * np.pi * k / M)
    pairs[M:, 1] = rho * np.exp(1j * (2 * np.pi * k / M + theta))
    return PairwiseSet(pairs, power, M=M, theta=float(theta))


def theorem1_theta(M: int) -> float:
    """Optimum rotation for :func:`qo_pairwise`.

    ``pi / M`` for even ``M``.  For odd ``M`` both ``pi / 2M`` and
    ``3 pi / 2M`` are optimal; the smaller is returned.
    """
    if M < 2:
        raise ValueError("M must be at least 2")
    return math.pi / M if M % 2 == 0 else math.pi / (2 * M)


def psk(n: int, power: float = 1.0) -> JointGroupSet:
    """``n``-PSK of radius ``sqrt(power)`` as rows ``(Re, Im)``."""
    if not _is_pow2(n) or n < 2:
        raise BitMappingError(f"PSK size must be a power of two, got {n}")
    phase = 2 * np.pi * np.arange(n) / n
    pts = math.sqrt(power) * np.column_stack([np.cos(phase), np.sin(phase)])
    return JointGroupSet(pts, power)


def pair_determinants(s: PairwiseSet) -> tuple[np.ndarray, np.ndarray]:
    """``[|da + db|^2 |da - db|^2]^2`` over all unordered pairs of points.

    Returns the values and a boolean mask marking pairs where one point is
    from each half of the set (the rotation-dependent pairs).  The mask is
    all False for sets without ``M``.
    """
    L = s.L
    k, l = np.triu_indices(L, 1)
    da = s.pairs[k, 0] - s.pairs[l, 0]
    db = s.pairs[k, 1] - s.pairs[l, 1]
    v = (np.abs(da + db) ** 2 * np.abs(da - db) ** 2) ** 2
    if s.M is None:
        cross = np.zeros(v.shape, dtype=bool)
    else:
        cross = (k < s.M) != (l < s.M)
    return v, cross


def theta_sweep(M: int, steps: int = 64, n_groups: int = 2):
    """Score rotations ``theta = i pi / (steps M)`` over ``[0, 2 pi / M)``.

    Returns ``(thetas, overall, cross)``: the minimum pair determinant over
    all pairs, and over the rotation-dependent pairs only.
    """
    thetas = np.arange(2 * steps) * math.pi / (steps * M)
    overall = np.empty(thetas.size)
    cross = np.empty(thetas.size)
    for i, t in enumerate(thetas):
        v, mask = pair_determinants(qo_pairwise(M, float(t), n_groups))
        overall[i] = v.min()
        cross[i] = v[mask].min()
    return thetas, overall, cross


def best_thetas(M: int, steps: int = 64, rtol: float = 1e-9) -> np.ndarray:
    """All grid rotations that maximise the sweep score.

    Rotations are ranked by the overall minimum determinant first; where
    that is flat (the rotation-independent pairs dominate) the minimum
    over rotation-dependent pairs breaks the tie.
    """
    thetas, overall, cross = theta_sweep(M, steps)
    top = overall >= overall.max() * (1 - rtol)
    c = np.where(top, cross, -np.inf)
    top &= c >= c.max() * (1 - rtol)
    return thetas[top]
