"""Block-error-rate simulation of a DSTM link.

A frame sends the identity reference block followed by ``frame_len - 1``
differentially encoded data blocks over one channel draw.  Each frame
takes its randomness from ``default_rng([seed, frame_index])``: channel,
then labels, then noise.  The same frame stream is reused at every SNR
point, and results do not depend on how frames are split across workers.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .channel import sample_rayleigh, snr_db_to_sigma2
from .codebook import Codebook
from .link import full_ml_decode_batch, groupwise_decode_batch
from .schemes import SchemeSpec

__all__ = [
    "SimConfig",
    "BlerPoint",
    "ci95_halfwidth",
    "run_frame",
    "simulate_frames",
    "run_bler",
    "required_snr",
    "CSV_COLUMNS",
    "points_to_csv",
    "write_csv",
    "read_csv",
    "write_manifest",
]

DECODERS = ("groupwise", "full-ml")
CSV_COLUMNS = ("scheme", "n_tx", "n_rx", "snr_db", "blocks", "errors", "bler", "ci95")


@dataclass(frozen=True)
class SimConfig:
    scheme: SchemeSpec
    snr_db: tuple[float, ...]
    n_rx: int = 1
    max_blocks: int = 100_000
    max_errors: int | None = 200
    frame_len: int = 9
    seed: int = 0
    decoder: str = "groupwise"
    workers: int = 1
    chunk_frames: int = 256

    def __post_init__(self):
        object.__setattr__(self, "snr_db", tuple(float(s) for s in self.snr_db))
        if not self.snr_db:
            raise ValueError("snr_db must not be empty")
        if self.frame_len < 2:
            raise ValueError("frame_len must be at least 2")
        if self.max_blocks < 1000:
            raise ValueError("max_blocks must be at least 1000")
        if self.max_errors is not None and self.max_errors < 1:
            raise ValueError("max_errors must be positive")
        if self.decoder not in DECODERS:
            raise ValueError(f"decoder must be one of {DECODERS}")
        if self.n_rx < 1 or self.workers < 1 or self.chunk_frames < 1:
            raise ValueError("n_rx, workers and chunk_frames must be positive")

    @property
    def n_tx(self) -> int:
        return self.scheme.n_tx

    def as_dict(self) -> dict:
        d = asdict(self)
        d["scheme"] = self.scheme.as_dict()
        d["snr_db"] = list(self.snr_db)
        return d


@dataclass(frozen=True)
class BlerPoint:
    snr_db: float
    blocks: int
    errors: int
    bler: float = field(init=False)
    ci95: float = field(init=False)

    def __post_init__(self):
        if not 0 <= self.errors <= self.blocks or self.blocks < 1:
            raise ValueError("need 0 <= errors <= blocks and blocks >= 1")
        object.__setattr__(self, "bler", self.errors / self.blocks)
        object.__setattr__(self, "ci95", ci95_halfwidth(self.errors, self.blocks))


def ci95_halfwidth(errors: int, blocks: int) -> float:
    """Half-width of the normal-approximation 95% binomial interval."""
    p = errors / blocks
    return 1.96 * math.sqrt(p * (1.0 - p) / blocks)


def _decode(R_t, R_prev, cb: Codebook, decoder: str) -> np.ndarray:
    if decoder == "groupwise":
        return groupwise_decode_batch(R_t, R_prev, cb)
    return full_ml_decode_batch(R_t, R_prev, cb)


def _frames(cb, H, labels, z, sigma2, decoder) -> np.ndarray:
    # H (F, n_r, n_t); labels (F, T-1); z (F, T, n_r, n_t, 2) standard normals
    F, T = z.shape[0], z.shape[1]
    noise = (z[..., 0] + 1j * z[..., 1]) * math.sqrt(sigma2 / 2.0)
    C = np.broadcast_to(np.eye(cb.n_tx, dtype=np.complex128), (F, cb.n_tx, cb.n_tx))
    R_prev = H @ C + noise[:, 0]
    errors = np.zeros(F, dtype=np.int64)
    for t in range(1, T):
        sent = labels[:, t - 1]
        C = C @ cb.matrices[sent]
        R = H @ C + noise[:, t]
        errors += _decode(R, R_prev, cb, decoder) != sent
        R_prev = R
    return errors


def _draw(rng: np.random.Generator, n_labels: int, frame_len: int, n_r: int, n_t: int):
    labels = rng.integers(n_labels, size=frame_len - 1)
    z = rng.standard_normal((frame_len, n_r, n_t, 2))
    return labels, z


def run_frame(
    cb: Codebook, H, sigma2: float, rng: np.random.Generator, frame_len: int = 9,
    decoder: str = "groupwise",
) -> tuple[int, int]:
    """Simulate one frame over a fixed channel ``H``.

    Returns ``(blocks, errors)`` where ``blocks = frame_len - 1``.
    """
    if frame_len < 2:
        raise ValueError("frame_len must be at least 2")
    H = np.asarray(H, dtype=np.complex128)
    labels, z = _draw(rng, cb.size, frame_len, H.shape[0], cb.n_tx)
    errors = _frames(cb, H[None], labels[None], z[None], sigma2, decoder)
    return frame_len - 1, int(errors[0])


def simulate_frames(
    cb: Codebook, seed: int, start: int, count: int, sigma2: float,
    frame_len: int = 9, n_rx: int = 1, decoder: str = "groupwise",
) -> np.ndarray:
    """Per-frame error counts for frames ``start .. start + count - 1``."""
    H = np.empty((count, n_rx, cb.n_tx), dtype=np.complex128)
    labels = np.empty((count, frame_len - 1), dtype=np.int64)
    z = np.empty((count, frame_len, n_rx, cb.n_tx, 2))
    for i in range(count):
        rng = np.random.default_rng([seed, start + i])
        H[i] = sample_rayleigh(n_rx, cb.n_tx, rng)
        labels[i], z[i] = _draw(rng, cb.size, frame_len, n_rx, cb.n_tx)
    return _frames(cb, H, labels, z, sigma2, decoder)


def _chunk_job(args):
    spec, seed, start, count, sigma2, frame_len, n_rx, decoder = args
    return simulate_frames(spec.build(), seed, start, count, sigma2, frame_len, n_rx, decoder)


def _run_point(config: SimConfig, snr_db: float, pool) -> BlerPoint:
    per_frame = config.frame_len - 1
    max_frames = math.ceil(config.max_blocks / per_frame)
    sigma2 = snr_db_to_sigma2(snr_db)
    cb = config.scheme.build()
    results: list[np.ndarray] = []
    done = 0
    while done < max_frames:
        jobs = []
        for _ in range(config.workers):
            if done >= max_frames:
                break
            count = min(config.chunk_frames, max_frames - done)
            jobs.append((config.scheme, config.seed, done, count, sigma2,
                         config.frame_len, config.n_rx, config.decoder))
            done += count
        if pool is None:
            results += [simulate_frames(cb, *job[1:]) for job in jobs]
        else:
            results += list(pool.map(_chunk_job, jobs))
        if config.max_errors is not None and sum(int(r.sum()) for r in results) >= config.max_errors:
            break
    errs = np.concatenate(results)
    # Stop at the first frame that reaches the error budget; this depends
    # only on frame order, not on how frames were batched.
    if config.max_errors is not None:
        cum = np.cumsum(errs)
        hit = np.flatnonzero(cum >= config.max_errors)
        if hit.size:
            errs = errs[: hit[0] + 1]
    return BlerPoint(snr_db, int(errs.size * per_frame), int(errs.sum()))


def run_bler(config: SimConfig) -> list[BlerPoint]:
    """BLER at every SNR point of ``config``."""
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            return [_run_point(config, s, pool) for s in config.snr_db]
    return [_run_point(config, s, None) for s in config.snr_db]


def _crossing(snr: np.ndarray, y: np.ndarray, target: float) -> float | None:
    ly = np.log10(y)
    lt = math.log10(target)
    for i in range(len(snr) - 1):
        if ly[i] >= lt > ly[i + 1]:
            frac = (ly[i] - lt) / (ly[i] - ly[i + 1])
            return float(snr[i] + frac * (snr[i + 1] - snr[i]))
    return None


def required_snr(points: Sequence[BlerPoint], target: float):
    """SNR at which the BLER curve crosses ``target``.

    Interpolates ``log10(BLER)`` linearly between neighbouring points.
    Returns ``(estimate, low, high)``, the bounds coming from the lower and
    upper edges of the 95% intervals, or ``None`` when the sweep does not
    bracket the target.
    """
    pts = sorted(points, key=lambda p: p.snr_db)
    snr = np.array([p.snr_db for p in pts])
    floor = np.array([0.5 / p.blocks for p in pts])
    p = np.maximum([q.bler for q in pts], floor)
    hw = np.array([q.ci95 for q in pts])
    est = _crossing(snr, p, target)
    lo = _crossing(snr, np.maximum(p - hw, floor), target)
    hi = _crossing(snr, p + hw, target)
    if est is None or lo is None or hi is None:
        return None
    return est, lo, hi


def points_to_csv(config: SimConfig, points: Sequence[BlerPoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for p in points:
        w.writerow([config.scheme.label, config.n_tx, config.n_rx, repr(p.snr_db),
                    p.blocks, p.errors, repr(p.bler), repr(p.ci95)])
    return buf.getvalue()


def write_csv(path, config: SimConfig, points: Sequence[BlerPoint]) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        fh.write(points_to_csv(config, points))


def read_csv(path) -> tuple[str, list[BlerPoint]]:
    """Scheme label and points from a results file."""
    with open(path, newline="", encoding="ascii") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: no data rows")
    pts = [BlerPoint(float(r["snr_db"]), int(r["blocks"]), int(r["errors"])) for r in rows]
    return rows[0]["scheme"], pts


def write_manifest(path, config: SimConfig, points: Sequence[BlerPoint], wall_clock: float) -> None:
    doc = {
        "config": config.as_dict(),
        "points": [asdict(p) for p in points],
        "wall_clock_s": round(wall_clock, 3),
        "finished": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")
