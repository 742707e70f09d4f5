import numpy as np
import pytest

from splinenas import Dimension, ParamSpace, SupportPoint, admissible


def unit_space(d: int, normalize: bool = True) -> ParamSpace:
    return ParamSpace(
        dims=tuple(Dimension(name=f"x{k}", min=0.0, max=1.0) for k in range(d)),
        normalize=normalize,
    )


def random_support_points(rng, space, n, min_dist=0.05, y_range=(0.0, 100.0)):
    """Draw n points keeping pairwise metric distance >= min_dist."""
    pts = []
    while len(pts) < n:
        cand = tuple(rng.uniform(dim.min, dim.max) for dim in space.dims)
        if admissible(space, cand, [p.x for p in pts], min_dist):
            pts.append(SupportPoint(x=cand, y=float(rng.uniform(*y_range)), kind="imported"))
    return pts


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
