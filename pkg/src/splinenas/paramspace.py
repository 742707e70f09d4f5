"""Bounded search boxes: corner designs, normalization, and spacing rules.

A space is an ordered list of named, bounded dimensions. Distances between
configurations are measured in *metric coordinates*: each dimension mapped to
[0, 1] when ``normalize`` is on (the default — mixed ranges like [32, 150]
and [32, 2400] would otherwise let wide dimensions dominate), raw parameter
units when it is off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import InvalidConfig, OutOfBox

Point = tuple[float, ...]


def _round_half_up(v: float) -> float:
    return math.floor(v + 0.5)


@dataclass(frozen=True)
class Dimension:
    name: str
    min: float
    max: float
    integer: bool = False

    def __post_init__(self):
        if not self.name or not isinstance(self.name, str):
            raise InvalidConfig("dimension name must be a non-empty string")
        if not (math.isfinite(self.min) and math.isfinite(self.max)):
            raise InvalidConfig(f"{self.name}: bounds must be finite")
        if not self.min < self.max:
            raise InvalidConfig(f"{self.name}: need min < max, got [{self.min}, {self.max}]")
        if self.integer:
            if self.min != int(self.min) or self.max != int(self.max):
                raise InvalidConfig(f"{self.name}: integer dimension needs whole-number bounds")
            if self.max - self.min < 1:
                raise InvalidConfig(f"{self.name}: integer dimension needs max - min >= 1")


@dataclass(frozen=True)
class ParamSpace:
    dims: tuple[Dimension, ...]
    normalize: bool = True

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(self.dims))
        if len(self.dims) < 1:
            raise InvalidConfig("need at least one dimension")
        names = [d.name for d in self.dims]
        if len(set(names)) != len(names):
            raise InvalidConfig("dimension names must be unique")

    @property
    def d(self) -> int:
        return len(self.dims)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(dim.name for dim in self.dims)

    @cached_property
    def lows(self) -> np.ndarray:
        return np.array([dim.min for dim in self.dims], dtype=float)

    @cached_property
    def highs(self) -> np.ndarray:
        return np.array([dim.max for dim in self.dims], dtype=float)

    @cached_property
    def spans(self) -> np.ndarray:
        return self.highs - self.lows


def contains(space: ParamSpace, p) -> bool:
    p = np.asarray(p, dtype=float)
    if p.shape != (space.d,):
        return False
    return bool(np.all(p >= space.lows) and np.all(p <= space.highs))


def snap(space: ParamSpace, p) -> Point:
    """Round integer dimensions half-up and clamp everything to the box."""
    p = np.array(p, dtype=float)
    for k, dim in enumerate(space.dims):
        if dim.integer:
            p[k] = _round_half_up(p[k])
    p = np.clip(p, space.lows, space.highs)
    return tuple(float(v) for v in p)


def initial_design(space: ParamSpace) -> list[Point]:
    """Corner design spanning the box with full affine rank: the all-max and
    all-min corners, the (rounded) midpoint, then the corners with a single
    coordinate flipped to its min and to its max. Duplicates are dropped, so
    the count is 2d+3 for d >= 3 and 5 for d = 2."""
    lows, highs = space.lows, space.highs
    mid = (lows + highs) / 2.0

    candidates = [tuple(highs), tuple(lows), snap(space, mid)]
    for k in range(space.d):
        corner = highs.copy()
        corner[k] = lows[k]
        candidates.append(tuple(corner))
    for k in range(space.d):
        corner = lows.copy()
        corner[k] = highs[k]
        candidates.append(tuple(corner))

    out: list[Point] = []
    seen: set[Point] = set()
    for cand in candidates:
        cand = tuple(float(v) for v in cand)
        if cand not in seen:
            seen.add(cand)
            out.append(cand)
    return out


def normalize(space: ParamSpace, p) -> np.ndarray:
    """Map a point to [0, 1]^d (identity when the space is non-normalizing)."""
    p = np.asarray(p, dtype=float)
    if not contains(space, p):
        raise OutOfBox(f"point {tuple(p)} is outside the box")
    return metric_coords(space, p)


def denormalize(space: ParamSpace, u) -> Point:
    """Inverse of :func:`normalize` up to integer snapping."""
    u = np.asarray(u, dtype=float)
    p = space.lows + u * space.spans if space.normalize else u
    return snap(space, p)


def metric_coords(space: ParamSpace, p) -> np.ndarray:
    """Coordinates used for all distance computations; no box check, so
    extrapolated points map outside [0, 1]."""
    p = np.asarray(p, dtype=float)
    if space.normalize:
        return (p - space.lows) / space.spans
    return p.copy()


def metric_matrix(space: ParamSpace, pts) -> np.ndarray:
    pts = np.asarray(pts, dtype=float).reshape(-1, space.d)
    if space.normalize:
        return (pts - space.lows) / space.spans
    return pts.copy()


def admissible(
    space: ParamSpace,
    candidate,
    existing: Sequence,
    delta_min: float,
) -> bool:
    """True iff the candidate keeps metric distance >= delta_min to every
    existing point (vacuously true for an empty list)."""
    existing = list(existing)
    if not existing:
        return True
    c = metric_coords(space, candidate)
    others = metric_matrix(space, existing)
    dists = np.linalg.norm(others - c, axis=1)
    return bool(np.min(dists) >= delta_min)
