"""Halton low-discrepancy sampling and hierarchical extremum search.

The search scans a batch of Halton points per level, then shrinks the box
around the incumbent best and scans again. Gradient methods are deliberately
avoided: the surrogate landscape can have local optima, and dense
low-discrepancy coverage plus shrinking finds the basin without derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from .errors import DimensionTooLarge
from .spline import SplineModel, evaluate_batch

MAX_DIMENSIONS = 64

Direction = Literal["maximize", "minimize"]


def _first_primes(count: int) -> tuple[int, ...]:
    primes: list[int] = []
    n = 2
    while len(primes) < count:
        if all(n % p for p in primes):
            primes.append(n)
        n += 1
    return tuple(primes)


PRIMES = _first_primes(MAX_DIMENSIONS)


def _check_prime(base: int) -> None:
    if base < 2 or any(base % k == 0 for k in range(2, int(base**0.5) + 1)):
        raise ValueError(f"base {base} is not prime")


def halton(index: int, base: int) -> float:
    """Radical inverse of ``index`` in a prime base; lies in (0, 1)."""
    if index < 1:
        raise ValueError("index must be >= 1")
    _check_prime(base)
    result = 0.0
    f = 1.0
    i = index
    while i > 0:
        f /= base
        result += f * (i % base)
        i //= base
    return result


def halton_point(index: int, d: int) -> np.ndarray:
    """d-dimensional Halton point using the first d primes as bases."""
    if d > MAX_DIMENSIONS:
        raise DimensionTooLarge(f"{d} > {MAX_DIMENSIONS} provisioned primes")
    return np.array([halton(index, PRIMES[k]) for k in range(d)])


def halton_block(start: int, count: int, d: int) -> np.ndarray:
    """Rows ``start .. start+count-1`` of the d-dimensional sequence.

    Vectorized per base; bit-identical to repeated :func:`halton_point`.
    """
    if start < 1:
        raise ValueError("start index must be >= 1")
    if d > MAX_DIMENSIONS:
        raise DimensionTooLarge(f"{d} > {MAX_DIMENSIONS} provisioned primes")
    idx = np.arange(start, start + count, dtype=np.int64)
    out = np.empty((count, d))
    for k in range(d):
        base = PRIMES[k]
        i = idx.copy()
        f = 1.0
        col = np.zeros(count)
        while i.max(initial=0) > 0:
            f /= base
            col += (i % base) * f
            i //= base
        out[:, k] = col
    return out


@dataclass(frozen=True)
class SearchConfig:
    samples_per_level: int = 8192
    levels: int = 6
    shrink_factor: float = 0.5
    stall_tolerance: float = 1e-12
    max_total_samples: int = 8192 * 6

    def __post_init__(self):
        if self.samples_per_level < 1 or self.levels < 1 or self.max_total_samples < 1:
            raise ValueError("sample counts and levels must be positive")
        if not 0.0 < self.shrink_factor < 1.0:
            raise ValueError("shrink_factor must lie in (0, 1)")
        if self.stall_tolerance < 0.0:
            raise ValueError("stall_tolerance must be non-negative")


@dataclass(frozen=True, eq=False)
class SearchReport:
    best_x: tuple[float, ...]
    best_value: float
    levels_run: int
    samples_used: int
    stalled: bool
    trace_points: Optional[np.ndarray] = None   # (samples_used, d)
    trace_values: Optional[np.ndarray] = None   # (samples_used,)


def search(
    model: SplineModel,
    lo,
    hi,
    direction: Direction,
    cfg: SearchConfig,
    *,
    keep_trace: bool = False,
) -> SearchReport:
    """Hierarchical Halton scan for the surrogate extremum inside [lo, hi].

    Levels stop early when one improves the incumbent by at most
    ``stall_tolerance`` or when the sample budget runs out. The Halton index
    continues across levels so shrunken boxes see fresh points. Ties go to
    the lowest sample index, which keeps the result deterministic however
    the per-level evaluations are scheduled.

    Shrunken boxes are centered on the incumbent and may straddle the
    original box; samples are clipped back inside, which piles them onto the
    boundary exactly where extrema of monotone surrogates live (raw Halton
    coordinates never touch 0 or 1).
    """
    if direction not in ("maximize", "minimize"):
        raise ValueError(f"unknown direction {direction!r}")
    orig_lo = np.asarray(lo, dtype=float)
    orig_hi = np.asarray(hi, dtype=float)
    d = orig_lo.shape[0]
    space_lo, space_hi = model.space.lows, model.space.highs
    if np.any(orig_lo < space_lo) or np.any(orig_hi > space_hi) or np.any(orig_lo > orig_hi):
        raise ValueError("search box must lie within the model's space")

    sign = 1.0 if direction == "maximize" else -1.0
    cur_lo, cur_hi = orig_lo.copy(), orig_hi.copy()
    index = 1
    samples_used = 0
    levels_run = 0
    stalled = False
    best_signed = -np.inf
    best_x = orig_lo.copy()
    traces: list[tuple[np.ndarray, np.ndarray]] = []

    for level in range(cfg.levels):
        count = min(cfg.samples_per_level, cfg.max_total_samples - samples_used)
        if count <= 0:
            break
        u = halton_block(index, count, d)
        index += count
        xs = cur_lo + u * (cur_hi - cur_lo)
        np.clip(xs, orig_lo, orig_hi, out=xs)
        values = evaluate_batch(model, xs)
        samples_used += count
        levels_run += 1
        if keep_trace:
            traces.append((xs, values))

        signed = sign * values
        k = int(np.argmax(signed))  # first index wins ties
        prev_best = best_signed
        if signed[k] > best_signed:
            best_signed = signed[k]
            best_x = xs[k].copy()

        if level > 0 and best_signed - prev_best <= cfg.stall_tolerance:
            stalled = True
            break

        size = (cur_hi - cur_lo) * cfg.shrink_factor
        cur_lo = best_x - size / 2.0
        cur_hi = best_x + size / 2.0

    trace_points = trace_values = None
    if keep_trace and traces:
        trace_points = np.vstack([t[0] for t in traces])
        trace_values = np.concatenate([t[1] for t in traces])

    return SearchReport(
        best_x=tuple(float(v) for v in best_x),
        best_value=float(sign * best_signed),
        levels_run=levels_run,
        samples_used=samples_used,
        stalled=stalled,
        trace_points=trace_points,
        trace_values=trace_values,
    )
