import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from splinenas import SupportPoint, spline
from splinenas.errors import DimensionTooLarge
from splinenas.halton_search import (
    PRIMES,
    SearchConfig,
    halton,
    halton_block,
    halton_point,
    search,
)

from conftest import random_support_points, unit_space


class TestRadicalInverse:
    def test_base2_prefix(self):
        assert [halton(i, 2) for i in range(1, 5)] == [0.5, 0.25, 0.75, 0.125]

    def test_base3_prefix(self):
        assert [halton(i, 3) for i in range(1, 4)] == pytest.approx([1 / 3, 2 / 3, 1 / 9])

    def test_binary_110_reversed(self):
        assert halton(6, 2) == 0.375

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            halton(0, 2)
        with pytest.raises(ValueError):
            halton(1, 4)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(min_value=1, max_value=10**6), st.sampled_from(PRIMES[:8]))
    def test_values_strictly_inside_unit_interval(self, index, base):
        v = halton(index, base)
        assert 0.0 < v < 1.0


class TestHaltonPoint:
    def test_first_point_2d(self):
        assert halton_point(1, 2) == pytest.approx([0.5, 1 / 3])

    def test_second_point_3d(self):
        assert halton_point(2, 3) == pytest.approx([0.25, 2 / 3, 2 / 5])

    def test_dimension_limit(self):
        assert halton_point(1, 64).shape == (64,)
        with pytest.raises(DimensionTooLarge):
            halton_point(1, 65)

    def test_block_matches_scalar(self):
        block = halton_block(7, 40, 5)
        for offset in range(40):
            assert np.array_equal(block[offset], halton_point(7 + offset, 5))


class TestSearchConfig:
    def test_defaults(self):
        cfg = SearchConfig()
        assert cfg.samples_per_level == 8192
        assert cfg.levels == 6
        assert cfg.shrink_factor == 0.5
        assert cfg.max_total_samples == 8192 * 6

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"samples_per_level": 0},
            {"levels": 0},
            {"shrink_factor": 1.0},
            {"shrink_factor": 0.0},
            {"stall_tolerance": -1.0},
        ],
    )
    def test_invalid_configs_rejected(self, kwargs):
        with pytest.raises(ValueError):
            SearchConfig(**kwargs)


def affine_model(d=2):
    space = unit_space(d)
    rng = np.random.default_rng(5)
    pts = [
        SupportPoint(p.x, float(np.sum(p.x)), "imported")
        for p in random_support_points(rng, space, 2 * d + 4)
    ]
    return space, spline.fit(space, pts)


class TestSearch:
    def test_quadratic_bowl_optimum_located(self, rng):
        # derived oracle: y = -sum((x - c)^2) has its maximum at c
        space = unit_space(2)
        c = np.array([0.3, 0.7])
        grid = np.linspace(0.0, 1.0, 6)
        pts = [
            SupportPoint((a, b), -float((a - c[0]) ** 2 + (b - c[1]) ** 2), "imported")
            for a in grid
            for b in grid
        ]
        model = spline.fit(space, pts)
        report = search(model, space.lows, space.highs, "maximize", SearchConfig())
        assert np.max(np.abs(np.array(report.best_x) - c)) <= 0.01

    def test_affine_model_maximize_reaches_corner(self):
        space, model = affine_model(2)
        report = search(model, space.lows, space.highs, "maximize", SearchConfig())
        corner_value = spline.evaluate(model, (1.0, 1.0))
        assert report.best_value >= corner_value - 1e-3
        assert np.allclose(report.best_x, [1.0, 1.0], atol=0.01)

    def test_affine_model_minimize_reaches_opposite_corner(self):
        space, model = affine_model(2)
        report = search(model, space.lows, space.highs, "minimize", SearchConfig())
        corner_value = spline.evaluate(model, (0.0, 0.0))
        assert report.best_value <= corner_value + 1e-3

    def test_deterministic(self, rng):
        space = unit_space(3)
        model = spline.fit(space, random_support_points(rng, space, 12))
        cfg = SearchConfig(samples_per_level=2048, levels=4, max_total_samples=8192)
        a = search(model, space.lows, space.highs, "maximize", cfg)
        b = search(model, space.lows, space.highs, "maximize", cfg)
        assert a.best_x == b.best_x
        assert a.best_value == b.best_value
        assert a.samples_used == b.samples_used
        assert a.levels_run == b.levels_run

    def test_trace_contained_in_box(self, rng):
        space = unit_space(2)
        model = spline.fit(space, random_support_points(rng, space, 10))
        lo = np.array([0.2, 0.3])
        hi = np.array([0.8, 0.9])
        cfg = SearchConfig(samples_per_level=512, levels=5, max_total_samples=4096)
        report = search(model, lo, hi, "maximize", cfg, keep_trace=True)
        assert np.all(report.trace_points >= lo - 1e-12)
        assert np.all(report.trace_points <= hi + 1e-12)
        assert report.trace_points.shape[0] == report.samples_used
        assert lo <= np.asarray(report.best_x)
        assert np.all(np.asarray(report.best_x) <= hi)

    def test_budget_limits_samples(self, rng):
        space = unit_space(2)
        model = spline.fit(space, random_support_points(rng, space, 10))
        cfg = SearchConfig(samples_per_level=1000, levels=10, max_total_samples=2500)
        report = search(model, space.lows, space.highs, "maximize", cfg)
        assert report.samples_used <= 2500
        assert report.levels_run == 3  # 1000 + 1000 + 500

    def test_incumbent_monotone_in_level_count(self, rng):
        space = unit_space(3)
        model = spline.fit(space, random_support_points(rng, space, 14))
        values = []
        for levels in (1, 2, 4, 6):
            cfg = SearchConfig(samples_per_level=2048, levels=levels, max_total_samples=2048 * levels)
            values.append(search(model, space.lows, space.highs, "maximize", cfg).best_value)
        assert all(b >= a - 1e-15 for a, b in zip(values, values[1:]))

    def test_flat_model_stalls(self, rng):
        space = unit_space(2)
        pts = [SupportPoint(p.x, 5.0, "imported") for p in random_support_points(rng, space, 8)]
        model = spline.fit(space, pts)
        report = search(model, space.lows, space.highs, "maximize", SearchConfig())
        assert report.stalled
        assert report.levels_run == 2
        assert report.best_value == pytest.approx(5.0, abs=1e-9)

    def test_rejects_box_outside_space(self, rng):
        space = unit_space(2)
        model = spline.fit(space, random_support_points(rng, space, 8))
        with pytest.raises(ValueError):
            search(model, [-0.5, 0.0], [1.0, 1.0], "maximize", SearchConfig())
        with pytest.raises(ValueError):
            search(model, [0.0, 0.0], [1.0, 1.0], "sideways", SearchConfig())
