"""Two-dimensional slices of a fitted surrogate, exported as CSV.

A projection fixes all but two dimensions and samples the surrogate on a
regular grid over the free pair — the data behind contour/heatmap plots of
the accuracy surface.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import BadDimensionNames, OutOfBox
from .spline import SplineModel, evaluate_batch

DEFAULT_RESOLUTION = 64


@dataclass(frozen=True, eq=False)
class ProjectionGrid:
    free: tuple[str, str]
    fixed: dict[str, float]
    axes: tuple[np.ndarray, np.ndarray]   # grid coordinates per free dim
    values: np.ndarray                    # (resolution, resolution)


def project(
    model: SplineModel,
    free: tuple[str, str],
    fixed: Mapping[str, float],
    resolution: int = DEFAULT_RESOLUTION,
) -> ProjectionGrid:
    space = model.space
    names = list(space.names)
    if len(free) != 2 or free[0] == free[1]:
        raise BadDimensionNames("need two distinct free dimension names")
    expected_fixed = set(names) - set(free)
    if set(free) - set(names) or set(fixed) != expected_fixed:
        raise BadDimensionNames(
            f"free {sorted(free)} plus fixed {sorted(fixed)} must cover "
            f"{names} exactly once"
        )
    if resolution < 2:
        raise ValueError("resolution must be at least 2")

    i0, i1 = names.index(free[0]), names.index(free[1])
    base = np.empty(space.d)
    for name, value in fixed.items():
        k = names.index(name)
        if not space.dims[k].min <= value <= space.dims[k].max:
            raise OutOfBox(f"fixed {name}={value} is outside [{space.dims[k].min}, {space.dims[k].max}]")
        base[k] = value

    ax0 = np.linspace(space.dims[i0].min, space.dims[i0].max, resolution)
    ax1 = np.linspace(space.dims[i1].min, space.dims[i1].max, resolution)
    pts = np.tile(base, (resolution * resolution, 1))
    g0, g1 = np.meshgrid(ax0, ax1, indexing="ij")
    pts[:, i0] = g0.ravel()
    pts[:, i1] = g1.ravel()
    values = evaluate_batch(model, pts).reshape(resolution, resolution)
    return ProjectionGrid(free=(free[0], free[1]), fixed=dict(fixed), axes=(ax0, ax1), values=values)


def write_grid_csv(grid: ProjectionGrid, path) -> None:
    """Long-format CSV: one row per grid cell, header = free dims + value."""
    fixed_desc = ",".join(f"{k}={format(v, '.17g')}" for k, v in grid.fixed.items())
    lines = [f"# fixed: {fixed_desc}", f"{grid.free[0]},{grid.free[1]},value"]
    ax0, ax1 = grid.axes
    for i, a in enumerate(ax0):
        for j, b in enumerate(ax1):
            lines.append(
                f"{format(a, '.17g')},{format(b, '.17g')},{format(grid.values[i, j], '.17g')}"
            )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
