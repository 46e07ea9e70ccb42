import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from risray import (
    AreaSpec,
    CarrierSpec,
    CoverageGrid,
    RisPanel,
    TraceOptions,
    cdf,
    channel_at,
    compute_coverage,
    coverage_rate,
    coverage_stats,
    design_fixed,
    grid_points,
    mean_gain,
    total_rx_power,
)

CAR = CarrierSpec(3.7e9)


def wall_panel(nx=4) -> RisPanel:
    lam = CAR.wavelength
    return RisPanel(center=np.array([4.9, 0.0, 1.0]),
                    normal=np.array([-1.0, 0.0, 0.0]),
                    x_axis=np.array([0.0, 1.0, 0.0]),
                    nx=nx, ny=nx, dx=lam / 2.0, dy=lam / 2.0)


def grid_of(powers, n_cols=None):
    powers = np.asarray(powers, dtype=float)
    n = powers.size
    n_cols = n if n_cols is None else n_cols
    area = AreaSpec(origin=(0.0, 0.0), extent_x=2.0 * n_cols,
                    extent_y=2.0 * (n // n_cols), resolution=2.0)
    return CoverageGrid(area=area, points=grid_points(area),
                        power_dbm=powers, meta={})


class TestAreaSpec:
    def test_shape_ceil(self):
        a = AreaSpec(origin=(15.0, 29.0), extent_x=24.0, extent_y=8.0,
                     resolution=2.0)
        assert a.shape == (12, 4)
        assert AreaSpec(origin=(0, 0), extent_x=5.0, extent_y=3.0,
                        resolution=2.0).shape == (3, 2)

    def test_grid_layout(self):
        a = AreaSpec(origin=(1.0, 2.0), extent_x=4.0, extent_y=4.0,
                     resolution=2.0, ms_height=1.5)
        pts = grid_points(a)
        assert pts.shape == (4, 3)
        assert np.array_equal(pts[:, 2], [1.5] * 4)
        # x index fastest
        assert np.array_equal(pts[:, 0], [1.0, 3.0, 1.0, 3.0])
        assert np.array_equal(pts[:, 1], [2.0, 2.0, 4.0, 4.0])

    @pytest.mark.parametrize("kwargs", [
        dict(origin=(0.0,), extent_x=1.0, extent_y=1.0),
        dict(origin=(0.0, np.nan), extent_x=1.0, extent_y=1.0),
        dict(origin=(0.0, 0.0), extent_x=0.0, extent_y=1.0),
        dict(origin=(0.0, 0.0), extent_x=1.0, extent_y=-2.0),
        dict(origin=(0.0, 0.0), extent_x=1.0, extent_y=1.0, resolution=0.0),
    ])
    def test_rejects(self, kwargs):
        with pytest.raises(ValueError):
            AreaSpec(**kwargs)


class TestChannelAt:
    def test_no_panel_is_conventional_only(self, two_wall):
        s = channel_at(two_wall, [1, 0, 1], [4, 0.5, 1], CAR)
        assert s.ris_paths == ()
        assert len(s.conventional_paths) >= 1

    def test_panel_adds_ris_paths(self, two_wall):
        s = channel_at(two_wall, [1, 0, 1], [4, 0.5, 1], CAR,
                       panel=wall_panel(), ff_mode="off")
        assert len(s.ris_paths) >= 1
        assert all(p.tag == "ris" for p, _ in s.ris_paths)

    def test_given_config_used_as_is(self, two_wall):
        panel = wall_panel()
        cfg, _ = design_fixed(two_wall, np.array([1.0, 0.0, 1.0]), panel,
                              [4.0, 0.5, 1.0], CAR)
        s_fixed = channel_at(two_wall, [1, 0, 1], [4, 0.5, 1], CAR,
                             panel=panel, config=cfg, ff_mode="off")
        s_auto = channel_at(two_wall, [1, 0, 1], [4, 0.5, 1], CAR,
                            panel=panel, ff_mode="off")
        # the anchor IS the evaluated point: both designs coincide
        assert total_rx_power(s_fixed, 30.0) == pytest.approx(
            total_rx_power(s_auto, 30.0), abs=1e-9)

    def test_pretraced_source_leg_equivalent(self, two_wall):
        from risray import trace_paths
        panel = wall_panel()
        paths_a = trace_paths(two_wall, [1.0, 0.0, 1.0], panel.center,
                              max_reflections=2, allow_transmission=True)
        s1 = channel_at(two_wall, [1, 0, 1], [4, 0.5, 1], CAR, panel=panel,
                        paths_a=paths_a, ff_mode="off")
        s2 = channel_at(two_wall, [1, 0, 1], [4, 0.5, 1], CAR, panel=panel,
                        ff_mode="off")
        assert total_rx_power(s1, 30.0) == total_rx_power(s2, 30.0)


class TestComputeCoverage:
    AREA = AreaSpec(origin=(1.0, -1.0), extent_x=4.0, extent_y=4.0,
                    resolution=2.0, ms_height=1.0)

    def test_none_matches_pointwise_channel(self, two_wall):
        grid = compute_coverage(two_wall, [1, 0, 1], None, self.AREA, "none",
                                CAR, pt_dbm=30.0)
        for pt, p in zip(grid.points, grid.power_dbm):
            s = channel_at(two_wall, [1, 0, 1], pt, CAR)
            assert p == pytest.approx(total_rx_power(s, 30.0), abs=1e-12)

    def test_modes_are_ordered_at_anchor(self, two_wall):
        anchor = [3.0, 1.0, 1.0]  # second lattice row
        base = compute_coverage(two_wall, [1, 0, 1], None, self.AREA,
                                "none", CAR)
        fixed = compute_coverage(two_wall, [1, 0, 1], wall_panel(),
                                 self.AREA, "fixed", CAR, anchor=anchor,
                                 ff_mode="off")
        ms = compute_coverage(two_wall, [1, 0, 1], wall_panel(), self.AREA,
                              "ms_specific", CAR, ff_mode="off")
        i = 3  # index of the anchor in the 2x2 lattice
        assert np.allclose(ms.points[i], anchor)
        assert ms.power_dbm[i] == pytest.approx(fixed.power_dbm[i],
                                                abs=1e-9)
        assert base.meta["ris"] is None
        assert fixed.meta["ris"] == "4x4"

    def test_workers_agree(self, two_wall):
        kw = dict(anchor=None, sum_mode="coherent", ff_mode="off")
        g1 = compute_coverage(two_wall, [1, 0, 1], wall_panel(), self.AREA,
                              "ms_specific", CAR, workers=1, **kw)
        g2 = compute_coverage(two_wall, [1, 0, 1], wall_panel(), self.AREA,
                              "ms_specific", CAR, workers=2, **kw)
        assert np.array_equal(g1.power_dbm, g2.power_dbm)

    def test_incoherent_sum_mode(self, two_wall):
        g = compute_coverage(two_wall, [1, 0, 1], None, self.AREA, "none",
                             CAR, sum_mode="incoherent")
        s = channel_at(two_wall, [1, 0, 1], g.points[0], CAR)
        assert g.power_dbm[0] == pytest.approx(
            total_rx_power(s, 30.0, "incoherent"))

    def test_rejects_bad_mode(self, two_wall):
        with pytest.raises(ValueError, match="mode"):
            compute_coverage(two_wall, [1, 0, 1], None, self.AREA, "auto",
                             CAR)

    def test_requires_panel(self, two_wall):
        with pytest.raises(ValueError, match="panel"):
            compute_coverage(two_wall, [1, 0, 1], None, self.AREA,
                             "ms_specific", CAR)

    def test_fixed_requires_anchor(self, two_wall):
        with pytest.raises(ValueError, match="anchor"):
            compute_coverage(two_wall, [1, 0, 1], wall_panel(), self.AREA,
                             "fixed", CAR)


class TestDesignFixed:
    def test_returns_fixed_config_and_source_paths(self, two_wall):
        panel = wall_panel()
        cfg, paths_a = design_fixed(two_wall, np.array([1.0, 0.0, 1.0]),
                                    panel, [4.0, 0.5, 1.0], CAR)
        assert cfg.mode == "fixed"
        assert np.array_equal(cfg.anchor, [4.0, 0.5, 1.0])
        assert cfg.beta.size == panel.k
        assert paths_a
        assert all(np.allclose(p.rx, panel.center) for p in paths_a)


class TestStatistics:
    def test_cdf_steps_with_dead_point(self):
        g = grid_of([float("-inf"), -80.0, -80.0, -70.0])
        assert cdf(g) == [(-80.0, 0.75), (-70.0, 1.0)]

    def test_cdf_monotone_ends_at_one(self):
        g = grid_of([-93.0, -71.0, -85.5, -71.0, -60.2, -99.9])
        steps = cdf(g)
        probs = [p for _, p in steps]
        assert probs == sorted(probs)
        assert probs[-1] == 1.0

    def test_rate_is_strictly_above(self):
        g = grid_of([-80.0, -80.0, -70.0, float("-inf")])
        assert coverage_rate(g, -80.0) == 25.0
        assert coverage_rate(g, -80.0001) == 75.0
        assert coverage_rate(g, -60.0) == 0.0

    def test_mean_gain_ignores_dead_points(self):
        a = grid_of([-50.0, float("-inf"), -70.0, -60.0])
        b = grid_of([-60.0, -80.0, float("-inf"), -62.0])
        mg = mean_gain(a, b)
        assert mg.gain_db == pytest.approx(6.0)
        assert mg.n_used == 2
        assert mg.n_ignored == 2

    def test_mean_gain_rejects_mismatched_lattices(self):
        with pytest.raises(ValueError, match="lattice"):
            mean_gain(grid_of([-50.0, -60.0]), grid_of([-50.0]))

    def test_mean_gain_rejects_disjoint_coverage(self):
        a = grid_of([float("-inf"), -60.0])
        b = grid_of([-50.0, float("-inf")])
        with pytest.raises(ValueError, match="covered"):
            mean_gain(a, b)

    def test_stats_db_and_linear_means(self):
        st_ = coverage_stats(grid_of([-50.0, -60.0]))
        assert st_.mean_power == pytest.approx(-55.0)
        assert st_.mean_power_linear == pytest.approx(
            10.0 * math.log10((1e-5 + 1e-6) / 2.0))
        assert st_.min_power == -60.0

    def test_stats_with_dead_point(self):
        st_ = coverage_stats(grid_of([-50.0, float("-inf")]))
        assert st_.mean_power == pytest.approx(-50.0)
        assert st_.mean_power_linear == pytest.approx(
            10.0 * math.log10(5e-6))
        assert st_.min_power == float("-inf")

    def test_stats_default_thresholds(self):
        st_ = coverage_stats(grid_of([-90.0, -100.0]))
        assert st_.coverage_rate[-105.0] == 100.0
        assert st_.coverage_rate[-80.0] == 0.0

    @settings(max_examples=40)
    @given(vals=st.lists(st.floats(-140.0, -20.0), min_size=1, max_size=30),
           thresh=st.floats(-140.0, -20.0))
    def test_cdf_rate_consistency(self, vals, thresh):
        g = grid_of(vals)
        steps = cdf(g)
        below = max((p for v, p in steps if v <= thresh), default=0.0)
        assert coverage_rate(g, thresh) == pytest.approx(
            100.0 * (1.0 - below), abs=1e-9)
