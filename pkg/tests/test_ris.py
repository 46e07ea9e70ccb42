import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from risray import (
    CarrierSpec,
    FarFieldError,
    FarFieldWarning,
    RisConfig,
    RisPanel,
    Scene,
    design_phases,
    fraunhofer_distance,
    pair_directions,
    ris_cascade,
    strongest_pair,
    trace_paths,
    uc_positions,
    uc_scattering,
    uniform_config,
)

FOUR_PI = 4.0 * math.pi

Z = np.array([0.0, 0.0, 1.0])
X = np.array([1.0, 0.0, 0.0])


def make_panel(nx, ny, lam, center=(0.0, 0.0, 0.0), **kwargs):
    return RisPanel(center=np.asarray(center, float), normal=Z, x_axis=X,
                    nx=nx, ny=ny, dx=lam / 2.0, dy=lam / 2.0, **kwargs)


def free_leg(empty_scene, a, b):
    return trace_paths(empty_scene, a, b, max_reflections=0)


def unit(v):
    v = np.asarray(v, float)
    return v / np.linalg.norm(v)


class TestPanelValidation:
    def test_axes_normalized(self):
        p = RisPanel(center=np.zeros(3), normal=[0, 0, 5], x_axis=[2, 0, 0],
                     nx=2, ny=2, dx=0.1, dy=0.1)
        assert np.allclose(p.normal, Z)
        assert np.allclose(p.y_axis, [0, 1, 0])

    def test_diagonal(self):
        p = RisPanel(center=np.zeros(3), normal=Z, x_axis=X, nx=3, ny=4,
                     dx=0.1, dy=0.1)
        assert p.diagonal == pytest.approx(0.5)
        assert p.k == 12

    @pytest.mark.parametrize("kwargs", [
        dict(x_axis=[0, 0, 1]),               # parallel to normal
        dict(nx=0),
        dict(dx=0.0),
        dict(amplitude=1.5),
        dict(amplitude=-0.1),
        dict(model="nope"),
        dict(alpha=-1.0),
        dict(normal=[0, 0, 0]),
    ])
    def test_rejects(self, kwargs):
        base = dict(center=np.zeros(3), normal=Z, x_axis=X, nx=2, ny=2,
                    dx=0.1, dy=0.1)
        base.update(kwargs)
        with pytest.raises(ValueError):
            RisPanel(**base)


class TestConfigValidation:
    def test_uniform_is_zero(self):
        p = make_panel(4, 4, 0.01)
        cfg = uniform_config(p)
        assert np.array_equal(cfg.beta, np.zeros(16))
        assert cfg.mode == "fixed"

    @pytest.mark.parametrize("beta", [[-0.1], [2.0 * math.pi], [np.nan]])
    def test_rejects_out_of_range(self, beta):
        with pytest.raises(ValueError):
            RisConfig(beta=np.array(beta))

    def test_rejects_bad_mode(self):
        with pytest.raises(ValueError):
            RisConfig(beta=np.zeros(4), mode="adaptive")


class TestUcPositions:
    def test_layout(self):
        p = RisPanel(center=np.array([1.0, 2.0, 3.0]), normal=Z, x_axis=X,
                     nx=2, ny=2, dx=0.1, dy=0.2)
        pos = uc_positions(p)
        expect = np.array([
            [-0.05, -0.1, 0.0], [0.05, -0.1, 0.0],
            [-0.05, 0.1, 0.0], [0.05, 0.1, 0.0],
        ]) + np.array([1.0, 2.0, 3.0])
        assert np.allclose(pos, expect)

    def test_centroid_and_plane(self):
        p = RisPanel(center=np.array([5.0, -2.0, 1.0]), normal=X,
                     x_axis=[0, 1, 0], nx=5, ny=3, dx=0.04, dy=0.06)
        pos = uc_positions(p)
        assert pos.shape == (15, 3)
        assert np.allclose(pos.mean(axis=0), p.center, atol=1e-12)
        assert np.allclose((pos - p.center) @ p.normal, 0.0, atol=1e-12)


class TestUcScattering:
    LAM = 0.0111

    def test_tang2022_normal(self):
        dx = dy = self.LAM / 2.0
        g = uc_scattering("tang2022", 0.0, 0.0, self.LAM, dx, dy)
        assert g == pytest.approx(math.sqrt(FOUR_PI) * dx * dy / self.LAM,
                                  rel=1e-12)

    def test_tang2020_normal_default_gain(self):
        dx, dy = 0.004, 0.005
        g = uc_scattering("tang2020", 0.0, 0.0, self.LAM, dx, dy)
        assert g == pytest.approx(math.sqrt(dx * dy * 4.0), rel=1e-12)

    def test_ellingson_normal_default_gain(self):
        g = uc_scattering("ellingson", 0.0, 0.0, self.LAM, 0.004, 0.004)
        assert g == pytest.approx(4.0 * self.LAM / (2.0 * math.sqrt(math.pi)),
                                  rel=1e-12)

    def test_gain_override(self):
        dx, dy = 0.004, 0.005
        g = uc_scattering("tang2020", 0.3, 0.4, self.LAM, dx, dy, alpha=2.0,
                          gain=7.0)
        expect = math.sqrt(dx * dy * 7.0 * math.cos(0.3) ** 2
                           * math.cos(0.4) ** 2)
        assert g == pytest.approx(expect, rel=1e-12)

    def test_monotone_in_angle(self):
        dx = dy = self.LAM / 2.0
        gs = [uc_scattering("tang2022", 0.0, t, self.LAM, dx, dy)
              for t in np.linspace(0.0, 1.5, 12)]
        assert all(a > b for a, b in zip(gs, gs[1:]))

    @pytest.mark.parametrize("ti,ts", [(-0.1, 0.0), (0.0, math.pi)])
    def test_rejects_out_of_range(self, ti, ts):
        with pytest.raises(ValueError):
            uc_scattering("tang2022", ti, ts, self.LAM, 0.004, 0.004)

    def test_rejects_unknown_model(self):
        with pytest.raises(ValueError):
            uc_scattering("mystery", 0.0, 0.0, self.LAM, 0.004, 0.004)


class TestFraunhofer:
    def test_half_wave_32(self, carrier27, carrier37):
        for car, expect in ((carrier27, 11.3699), (carrier37, 82.9696)):
            lam = car.wavelength
            p = make_panel(32, 32, lam)
            # D = 16 sqrt(2) lam  ->  2 D^2 / lam = 1024 lam
            assert fraunhofer_distance(p, lam) == pytest.approx(1024.0 * lam,
                                                                rel=1e-12)
            assert fraunhofer_distance(p, lam) == pytest.approx(expect,
                                                                abs=1e-3)


class TestDesignPhases:
    def test_in_range(self):
        lam = 0.01
        p = make_panel(8, 8, lam)
        cfg = design_phases(p, unit([0.2, 0.1, 0.9]), unit([-0.3, 0.0, 0.8]),
                            lam)
        assert cfg.beta.shape == (64,)
        assert np.all(cfg.beta >= 0.0)
        assert np.all(cfg.beta < 2.0 * math.pi)

    def test_quarter_wave_pair_offset(self):
        # adjacent UCs lam/4 apart, scatter swung to the panel plane:
        # their design phases must differ by pi/2 (circularly)
        lam = 0.02
        p = RisPanel(center=np.zeros(3), normal=Z, x_axis=X, nx=2, ny=1,
                     dx=lam / 4.0, dy=lam / 2.0)
        phi = math.pi / 2.0 - 1e-5
        cfg = design_phases(p, Z, [math.sin(phi), 0.0, math.cos(phi)], lam)
        diff = abs(cfg.beta[1] - cfg.beta[0])
        circ = min(diff, 2.0 * math.pi - diff)
        assert circ == pytest.approx(math.pi / 2.0, abs=1e-4)

    def test_normal_on_normal_is_uniform(self):
        lam = 0.01
        p = make_panel(4, 4, lam)
        cfg = design_phases(p, Z, Z, lam)
        assert np.allclose(cfg.beta, 0.0, atol=1e-9)

    @pytest.mark.parametrize("ui,us", [
        ([0, 0, -1], [0, 0, 1]),
        ([0, 0, 1], [1, 0, -0.1]),
        ([1, 0, 0], [0, 0, 1]),  # edge-on counts as behind
    ])
    def test_rejects_back_half_space(self, ui, us):
        p = make_panel(4, 4, 0.01)
        with pytest.raises(ValueError, match="behind"):
            design_phases(p, unit(ui) if np.linalg.norm(ui) else ui,
                          unit(us), 0.01)

    def test_mode_anchor_carried(self):
        p = make_panel(2, 2, 0.01)
        cfg = design_phases(p, Z, Z, 0.01, mode="ms_specific",
                            anchor=[1, 2, 3])
        assert cfg.mode == "ms_specific"
        assert np.array_equal(cfg.anchor, [1.0, 2.0, 3.0])


class TestCascade:
    CAR = CarrierSpec(27.0e9)

    def geometry(self, empty_scene, nx=8, da_mult=10.0, db_mult=13.0):
        lam = self.CAR.wavelength
        panel = make_panel(nx, nx, lam)
        ff = fraunhofer_distance(panel, lam)
        ui = unit([0.3, 0.1, 0.9])
        us = unit([-0.4, 0.2, 0.8])
        d_a, d_b = da_mult * ff, db_mult * ff
        la = free_leg(empty_scene, ui * d_a, panel.center)
        lb = free_leg(empty_scene, panel.center, us * d_b)
        return panel, lam, ui, us, d_a, d_b, la, lb

    def test_designed_amplitude_matches_closed_form(self, empty_scene):
        panel, lam, ui, us, d_a, d_b, la, lb = self.geometry(empty_scene)
        cfg = design_phases(panel, ui, us, lam)
        pairs = ris_cascade(la, lb, panel, cfg, self.CAR, ff_mode="strict")
        assert len(pairs) == 1
        g = uc_scattering(panel.model, math.acos(ui[2]), math.acos(us[2]),
                          lam, panel.dx, panel.dy)
        expect = panel.k * g * panel.amplitude * lam / (
            FOUR_PI ** 1.5 * d_a * d_b)
        assert abs(pairs[0][1]) == pytest.approx(expect, rel=1e-12)

    def test_uniform_never_beats_designed(self, empty_scene):
        panel, lam, ui, us, *_, la, lb = self.geometry(empty_scene)
        designed = ris_cascade(la, lb, panel, design_phases(panel, ui, us,
                                                            lam),
                               self.CAR, ff_mode="off")[0][1]
        flat = ris_cascade(la, lb, panel, uniform_config(panel), self.CAR,
                           ff_mode="off")[0][1]
        assert abs(flat) <= abs(designed) * (1.0 + 1e-12)

    def test_combined_path_bookkeeping(self, empty_scene):
        panel, lam, ui, us, d_a, d_b, la, lb = self.geometry(empty_scene)
        path, _ = ris_cascade(la, lb, panel, uniform_config(panel), self.CAR,
                              ff_mode="off")[0]
        assert path.tag == "ris"
        assert path.length == pytest.approx(d_a + d_b, rel=1e-12)
        assert path.delay == pytest.approx(path.length / 299792458.0,
                                           rel=1e-12)
        kinds = [i.kind for i in path.interactions]
        assert kinds == ["ris"]
        assert path.interactions[0].surface_index == -1
        assert np.allclose(path.interactions[0].point, panel.center)
        assert np.allclose(path.tx, la[0].tx)
        assert np.allclose(path.rx, lb[0].rx)

    def test_phase_modes_converge_in_far_field(self, empty_scene):
        deltas = {}
        for mult in (0.3, 10.0):
            panel, lam, ui, us, d_a, d_b, la, lb = self.geometry(
                empty_scene, da_mult=mult, db_mult=1.3 * mult)
            cfg = design_phases(panel, ui, us, lam)
            p_pl = abs(ris_cascade(la, lb, panel, cfg, self.CAR,
                                   phase_mode="planar", ff_mode="off")[0][1])
            p_ex = abs(ris_cascade(la, lb, panel, cfg, self.CAR,
                                   phase_mode="exact", ff_mode="off")[0][1])
            deltas[mult] = abs(20.0 * math.log10(p_pl / p_ex))
        assert deltas[10.0] < 0.01
        assert deltas[10.0] < deltas[0.3]

    def test_behind_panel_pairs_dropped(self, empty_scene):
        panel, lam, *_ , la, _ = self.geometry(empty_scene)
        lb_back = free_leg(empty_scene, panel.center, [0.1, 0.0, -2.0])
        assert ris_cascade(la, lb_back, panel, uniform_config(panel),
                           self.CAR, ff_mode="off") == []

    def test_empty_legs(self, empty_scene):
        panel = make_panel(4, 4, self.CAR.wavelength)
        la = free_leg(empty_scene, [0, 0, 2.0], panel.center)
        assert ris_cascade([], la, panel, uniform_config(panel),
                           self.CAR) == []
        assert ris_cascade(la, [], panel, uniform_config(panel),
                           self.CAR) == []

    def test_endpoint_mismatch_rejected(self, empty_scene):
        panel = make_panel(4, 4, self.CAR.wavelength)
        stray = free_leg(empty_scene, [0, 0, 2.0], [0.5, 0.0, 0.1])
        good = free_leg(empty_scene, panel.center, [0, 0, 3.0])
        with pytest.raises(ValueError, match="panel center"):
            ris_cascade(stray, good, panel, uniform_config(panel), self.CAR,
                        ff_mode="off")

    def test_config_size_mismatch_rejected(self, empty_scene):
        panel = make_panel(4, 4, self.CAR.wavelength)
        la = free_leg(empty_scene, [0, 0, 2.0], panel.center)
        lb = free_leg(empty_scene, panel.center, [0, 0, 3.0])
        with pytest.raises(ValueError, match="4x4|16"):
            ris_cascade(la, lb, panel, RisConfig(beta=np.zeros(9)), self.CAR)

    def test_bad_mode_strings_rejected(self, empty_scene):
        panel = make_panel(4, 4, self.CAR.wavelength)
        la = free_leg(empty_scene, [0, 0, 2.0], panel.center)
        lb = free_leg(empty_scene, panel.center, [0, 0, 3.0])
        with pytest.raises(ValueError, match="phase_mode"):
            ris_cascade(la, lb, panel, uniform_config(panel), self.CAR,
                        phase_mode="curved")
        with pytest.raises(ValueError, match="ff_mode"):
            ris_cascade(la, lb, panel, uniform_config(panel), self.CAR,
                        ff_mode="maybe")

    def test_ff_modes(self, empty_scene):
        lam = self.CAR.wavelength
        panel = make_panel(32, 32, lam)  # FF bound 11.37 m
        la = free_leg(empty_scene, [0, 0, 2.0], panel.center)
        lb = free_leg(empty_scene, panel.center, [0, 0, 3.0])
        cfg = uniform_config(panel)
        with pytest.warns(FarFieldWarning):
            ris_cascade(la, lb, panel, cfg, self.CAR, ff_mode="warn")
        with pytest.raises(FarFieldError):
            ris_cascade(la, lb, panel, cfg, self.CAR, ff_mode="strict")
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            ris_cascade(la, lb, panel, cfg, self.CAR, ff_mode="off")

    def test_scene_required_for_leg_interactions(self, two_wall):
        lam = self.CAR.wavelength
        center = np.array([2.5, 0.0, 1.0])
        panel = RisPanel(center=center, normal=-X, x_axis=[0, 1, 0],
                         nx=4, ny=4, dx=lam / 2.0, dy=lam / 2.0)
        la = trace_paths(two_wall, [1.0, 0.0, 1.0], center,
                         max_reflections=1)
        lb = trace_paths(two_wall, center, [1.5, 2.0, 1.0],
                         max_reflections=0)
        assert any(p.interactions for p in la)
        with pytest.raises(ValueError, match="scene is required"):
            ris_cascade(la, lb, panel, uniform_config(panel), self.CAR,
                        ff_mode="off")
        pairs = ris_cascade(la, lb, panel, uniform_config(panel), self.CAR,
                            scene=two_wall, ff_mode="off")
        # the far-wall bounce arrives from behind the panel and is dropped
        front = [p for p in la
                 if float(-p.arrival_dir @ panel.normal) > 0.0]
        assert len(pairs) == len(front) * len(lb) == 2


class TestStrongestPair:
    CAR = CarrierSpec(27.0e9)

    def test_prefers_short_legs(self, empty_scene):
        panel = make_panel(4, 4, self.CAR.wavelength)
        la = free_leg(empty_scene, [0, 0, 2.0], panel.center)
        lb = (free_leg(empty_scene, panel.center, [0, 0, 3.0])
              + free_leg(empty_scene, panel.center, [0, 0, 1.5]))
        assert strongest_pair(la, lb, panel, self.CAR) == (0, 1)

    def test_symmetric_tie_breaks_to_lowest_index(self, empty_scene):
        panel = make_panel(4, 4, self.CAR.wavelength)
        la = free_leg(empty_scene, [0, 0, 2.0], panel.center)
        lb = (free_leg(empty_scene, panel.center, [1.0, 0, 2.0])
              + free_leg(empty_scene, panel.center, [-1.0, 0, 2.0]))
        assert strongest_pair(la, lb, panel, self.CAR) == (0, 0)

    def test_all_behind_raises(self, empty_scene):
        panel = make_panel(4, 4, self.CAR.wavelength)
        la = free_leg(empty_scene, [0, 0, 2.0], panel.center)
        lb = free_leg(empty_scene, panel.center, [0, 0, -2.0])
        with pytest.raises(ValueError, match="illuminates"):
            strongest_pair(la, lb, panel, self.CAR)

    def test_empty_raises(self, empty_scene):
        panel = make_panel(4, 4, self.CAR.wavelength)
        la = free_leg(empty_scene, [0, 0, 2.0], panel.center)
        with pytest.raises(ValueError, match="non-empty"):
            strongest_pair(la, [], panel, self.CAR)

    def test_pair_directions_point_away(self, empty_scene):
        panel = make_panel(4, 4, self.CAR.wavelength)
        la = free_leg(empty_scene, [1.0, 0.5, 2.0], panel.center)
        lb = free_leg(empty_scene, panel.center, [-0.5, 0.2, 3.0])
        u_i, u_s = pair_directions(la[0], lb[0])
        assert float(u_i @ panel.normal) > 0.0
        assert float(u_s @ panel.normal) > 0.0
        assert np.allclose(u_i, unit([1.0, 0.5, 2.0]))
        assert np.allclose(u_s, unit([-0.5, 0.2, 3.0]))


class TestAlignmentOptimality:
    CAR = CarrierSpec(27.0e9)

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2 ** 31 - 1))
    def test_random_configs_never_beat_designed(self, empty_scene, seed):
        rng = np.random.default_rng(seed)
        lam = self.CAR.wavelength
        panel = make_panel(4, 4, lam)
        ff = fraunhofer_distance(panel, lam)
        theta_i, theta_s = rng.uniform(0.0, 1.3, size=2)
        phi_i, phi_s = rng.uniform(0.0, 2.0 * math.pi, size=2)
        ui = np.array([math.sin(theta_i) * math.cos(phi_i),
                       math.sin(theta_i) * math.sin(phi_i),
                       math.cos(theta_i)])
        us = np.array([math.sin(theta_s) * math.cos(phi_s),
                       math.sin(theta_s) * math.sin(phi_s),
                       math.cos(theta_s)])
        la = free_leg(empty_scene, ui * 2.0 * ff, panel.center)
        lb = free_leg(empty_scene, panel.center, us * 3.0 * ff)
        best = abs(ris_cascade(la, lb, panel,
                               design_phases(panel, ui, us, lam),
                               self.CAR, ff_mode="off")[0][1])
        rnd_cfg = RisConfig(beta=rng.uniform(0.0, 2.0 * math.pi, panel.k)
                            % (2.0 * math.pi))
        rnd = abs(ris_cascade(la, lb, panel, rnd_cfg, self.CAR,
                              ff_mode="off")[0][1])
        assert rnd <= best * (1.0 + 1e-12)
