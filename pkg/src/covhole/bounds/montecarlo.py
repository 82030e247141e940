"""Monte Carlo estimate of the probability that the origin lies in a triangular hole.

A trial is one Poisson draw in B(O, r_c). The disk B(O, r_s) and the annulus
are independent under the Poisson law, so each trial first draws only the
inner count; any inner point makes the origin covered and ends the trial
without sampling the annulus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numba
import numpy as np

from ..geometry import RngStream
from .integrals import BoundSpec

CHUNK = 1 << 16

NO_HOLE = 0
HOLE_WITH_CLOSEST = 1
HOLE_WITHOUT_CLOSEST = 2


@dataclass(frozen=True)
class ProportionEstimate:
    p_hat: float
    ci95_halfwidth: float
    trials: int

    @classmethod
    def from_count(cls, hits: int, trials: int) -> ProportionEstimate:
        if trials <= 0:
            raise ValueError("trials must be positive")
        p = hits / trials
        return cls(p, 1.96 * math.sqrt(p * (1.0 - p) / trials), trials)


@numba.njit(cache=True)
def _classify(xs, ys, r_s, r_c):
    """0: origin not in a triangular hole; 1: it is, and the closest node spans such a triangle; 2: it is, but not via the closest node."""
    n = xs.shape[0]
    if n < 3:
        return 0
    d2 = xs * xs + ys * ys
    k = 0
    for i in range(1, n):
        if d2[i] < d2[k]:
            k = i
    if d2[k] <= r_s * r_s:
        return 0
    # relative slack so constructed cases sitting exactly on r_c survive rounding
    rc2 = r_c * r_c * (1.0 + 1e-12)
    # no triangle can hold the origin past r_c/sqrt(3)
    if d2[k] > rc2 / 3.0:
        return 0
    found = False
    for a in range(n):
        for b in range(a + 1, n):
            dx = xs[a] - xs[b]
            dy = ys[a] - ys[b]
            if dx * dx + dy * dy > rc2:
                continue
            for c in range(b + 1, n):
                ex = xs[a] - xs[c]
                ey = ys[a] - ys[c]
                if ex * ex + ey * ey > rc2:
                    continue
                fx = xs[b] - xs[c]
                fy = ys[b] - ys[c]
                if fx * fx + fy * fy > rc2:
                    continue
                # orientation of the origin against each directed side
                s1 = xs[a] * ys[b] - ys[a] * xs[b]
                s2 = xs[b] * ys[c] - ys[b] * xs[c]
                s3 = xs[c] * ys[a] - ys[c] * xs[a]
                if s1 + s2 + s3 == 0.0:
                    continue
                neg = s1 < 0.0 or s2 < 0.0 or s3 < 0.0
                pos = s1 > 0.0 or s2 > 0.0 or s3 > 0.0
                if neg and pos:
                    continue
                if a == k or b == k or c == k:
                    return 1
                found = True
    return 2 if found else 0


@numba.njit(cache=True)
def _classify_batch(xs, ys, offsets, r_s, r_c):
    m = offsets.shape[0] - 1
    out = np.zeros(m, dtype=np.int8)
    for t in range(m):
        lo = offsets[t]
        hi = offsets[t + 1]
        out[t] = _classify(xs[lo:hi], ys[lo:hi], r_s, r_c)
    return out


def origin_in_triangular_hole(points: Iterable[Sequence[float]], r_s: float, r_c: float) -> bool:
    """Origin uncovered and inside the hull of some pairwise-within-``r_c`` triple."""
    p = np.asarray([tuple(q) for q in points], dtype=float).reshape(-1, 2)
    return _classify(np.ascontiguousarray(p[:, 0]), np.ascontiguousarray(p[:, 1]), float(r_s), float(r_c)) != NO_HOLE


def classify_trials(points_per_trial: Sequence[np.ndarray], r_s: float, r_c: float) -> np.ndarray:
    """Outcome code for each trial given explicitly as an (n, 2) array."""
    sizes = np.array([len(p) for p in points_per_trial], dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
    pts = np.concatenate([np.asarray(p, dtype=float).reshape(-1, 2) for p in points_per_trial]) if len(sizes) else np.zeros((0, 2))
    return _classify_batch(np.ascontiguousarray(pts[:, 0]), np.ascontiguousarray(pts[:, 1]), offsets, float(r_s), float(r_c))


def _chunk_counts(lam: float, r_s: float, r_c: float, m: int, stream: RngStream) -> tuple[int, int]:
    gen = stream.generator()
    inner = gen.poisson(lam * math.pi * r_s * r_s, size=m)
    live = int(np.count_nonzero(inner == 0))
    if live == 0:
        return 0, 0
    counts = gen.poisson(lam * math.pi * (r_c * r_c - r_s * r_s), size=live)
    total = int(counts.sum())
    u = gen.random(total)
    phi = gen.random(total) * (2.0 * math.pi)
    rad = np.sqrt(r_s * r_s + u * (r_c * r_c - r_s * r_s))
    offsets = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    codes = _classify_batch(rad * np.cos(phi), rad * np.sin(phi), offsets, r_s, r_c)
    return int(np.count_nonzero(codes)), int(np.count_nonzero(codes == HOLE_WITHOUT_CLOSEST))


@lru_cache(maxsize=256)
def simulate_counts(lam: float, gamma: float, r_s: float, trials: int, seed: int) -> tuple[int, int]:
    """(hole hits, residual hits) over ``trials``; chunk k uses stream (seed, k)."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    r_c = gamma * r_s
    hits = residual = 0
    for k, start in enumerate(range(0, trials, CHUNK)):
        h, r = _chunk_counts(lam, r_s, r_c, min(CHUNK, trials - start), RngStream(seed, k))
        hits += h
        residual += r
    return hits, residual


def estimate_proportion(spec: BoundSpec) -> ProportionEstimate:
    hits, _ = simulate_counts(spec.lam, spec.gamma, spec.r_s, spec.trials, spec.seed)
    return ProportionEstimate.from_count(hits, spec.trials)


def residual_term_mc(spec: BoundSpec) -> ProportionEstimate:
    """Fraction of trials in a triangular hole whose closest node spans no origin-containing triangle."""
    _, residual = simulate_counts(spec.lam, spec.gamma, spec.r_s, spec.trials, spec.seed)
    return ProportionEstimate.from_count(residual, spec.trials)
