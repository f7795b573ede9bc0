"""Finite-difference stepper and simulation drivers."""

import numpy as np
import pytest

from lagopt import fd
from lagopt.errors import CFLViolation
from lagopt.landscape import FitnessLandscape, ShiftSpec, quadratic_plus


def flat_growth(value):
    return lambda x, t: np.full_like(np.asarray(x, dtype=float), value)


def make_spike(grid, j, height=1.0):
    n = np.zeros(grid.n_nodes)
    n[j] = height
    return fd.DensityField(n)


class TestGrid:
    def test_spacing(self):
        g = fd.Grid(10.0, 101)
        assert g.dx == pytest.approx(0.1)
        assert g.nodes[0] == 0.0 and g.nodes[-1] == 10.0

    def test_validation(self):
        with pytest.raises(ValueError):
            fd.Grid(10.0, 2)
        with pytest.raises(ValueError):
            fd.Grid(-1.0, 10)


class TestStep:
    def test_zero_field_is_fixed_point(self):
        g = fd.Grid(10.0, 51)
        out = fd.step(fd.DensityField(np.zeros(51)), g, flat_growth(1.0), 0.0, 0.01, 0.1)
        assert np.all(out.values == 0.0)

    def test_spike_conserves_mass_away_from_boundary(self):
        # three-point stencil telescopes: mass exactly conserved interiorly
        g = fd.Grid(10.0, 51)
        field = make_spike(g, 25)
        out = fd.step(field, g, flat_growth(0.0), 0.0, 0.005, 0.5)
        assert g.dx * out.values.sum() == pytest.approx(g.dx * field.values.sum(), rel=1e-15)
        assert out.values[24] > 0 and out.values[26] > 0

    def test_constant_interior_update(self):
        g = fd.Grid(10.0, 101)
        n0, growth, rho, dt = 0.7, 1.3, 0.4, 0.02
        n = np.full(101, n0)
        n[0] = n[-1] = 0.0
        out = fd.step(fd.DensityField(n), g, flat_growth(growth), rho, dt, 0.1)
        expected = n0 * (1.0 + dt * (growth - rho))
        assert out.values[10:-10] == pytest.approx(expected, rel=1e-15)

    def test_growth_evaluated_at_new_time(self):
        g = fd.Grid(10.0, 51)
        n = np.full(51, 0.5)
        n[0] = n[-1] = 0.0
        dt = 0.01
        out = fd.step(fd.DensityField(n, time=0.0), g, lambda x, t: np.full_like(x, t), 0.0, dt, 0.1)
        assert out.values[25] == pytest.approx(0.5 * (1.0 + dt * dt), rel=1e-14)

    def test_cfl_violation_raised(self):
        g = fd.Grid(1.0, 101)
        n = np.full(101, 0.1)
        n[0] = n[-1] = 0.0
        with pytest.raises(CFLViolation):
            fd.step(fd.DensityField(n), g, flat_growth(0.0), 0.0, 1.0, 1.0)
        with pytest.raises(CFLViolation):
            fd.step(fd.DensityField(n), g, flat_growth(100.0), 0.0, 0.01, 0.01)


class TestCflTimestep:
    def test_respects_both_bounds(self):
        g = fd.Grid(10.0, 201)
        dt = fd.cfl_timestep(g, 0.1, 3.0, 3.0)
        assert dt * 0.01 / g.dx ** 2 <= 0.4 + 1e-15
        assert dt * 6.0 <= 0.4 + 1e-15
        # combined positivity margin
        assert 2 * dt * 0.01 / g.dx ** 2 + dt * 6.0 <= 0.9 + 1e-12


class TestPositivityAndOrder:
    def test_seeded_fields(self):
        rng = np.random.default_rng(11)  # fixed seed
        g = fd.Grid(10.0, 64)
        land = FitnessLandscape((quadratic_plus(2.5, 5.0),), 0.0)
        growth = lambda x, t: land.value(x)
        for _ in range(50):
            base = rng.uniform(0.0, 1.0, 64)
            base[0] = base[-1] = 0.0
            upper = base + rng.uniform(0.0, 0.5, 64)
            upper[0] = upper[-1] = 0.0
            rho = g.dx * base.sum()
            dt = fd.cfl_timestep(g, 0.1, 2.5, rho)
            lo = fd.step(fd.DensityField(base), g, growth, rho, dt, 0.1)
            hi = fd.step(fd.DensityField(upper), g, growth, rho, dt, 0.1)
            assert lo.values.min() >= 0.0
            assert np.all(lo.values <= hi.values + 1e-15)


def single_peak(center, offset=0.0):
    return FitnessLandscape((quadratic_plus(2.5, center),), offset)


class TestSimulateCase1:
    def test_zero_initial_data_stays_extinct(self):
        land = single_peak(20.0)
        res = fd.simulate_case1(land, ShiftSpec(0.1, c=1.0), np.zeros(301), fd.Grid(40.0, 301), 5.0)
        assert np.all(res.diagnostics.rho == 0.0)

    def test_diagnostics_invariants(self):
        land = single_peak(20.0)
        grid = fd.Grid(40.0, 401)
        n0 = fd.gaussian_profile(grid, 0.1, 18.0, 3.0)
        res = fd.simulate_case1(
            land, ShiftSpec(0.1, c=1.0), n0, grid, 20.0, snapshot_times=(0.0, 10.0, 20.0)
        )
        d = res.diagnostics
        assert np.all(d.rho >= 0.0)
        assert np.all(d.shares >= 0.0) and np.all(d.shares <= 1.0)
        assert np.all(d.shares.sum(axis=1) <= 1.0 + 1e-12)
        assert np.all(d.widths >= grid.dx)
        assert len(res.snapshots) == 3
        assert res.snapshots[0][0] == 0.0

    def test_supercritical_speed_decays(self):
        # threshold 2.0 - 3.5^2/4 < 0: mass must collapse at a measurable rate
        # once the growth transient has passed (negative far-field growth so
        # stragglers die off exponentially rather than algebraically)
        land = single_peak(25.0, offset=-0.5)
        grid = fd.Grid(60.0, 601)
        n0 = fd.gaussian_profile(grid, 0.1, 24.0, 3.0)
        res = fd.simulate_case1(land, ShiftSpec(0.1, c=3.5), n0, grid, 60.0)
        d = res.diagnostics
        half = len(d.rho) // 2
        gamma = -np.log(d.rho[-1] / d.rho[half]) / (d.times[-1] - d.times[half])
        assert gamma > 0.2
        assert np.all(np.diff(d.rho[half:]) <= 0)

    def test_frame_consistency_small_speed(self):
        # moving-frame run vs static run: rho tails agree within 5 percent
        # (the physical lag penalty c^2/4 must sit inside that budget, so c
        # is kept small against the peak height)
        land = single_peak(20.0)
        grid = fd.Grid(60.0, 961)
        n0 = fd.gaussian_profile(grid, 0.1, 19.0, 3.0)
        static = fd.simulate_case1(land, ShiftSpec(0.1, c=1e-12), n0, grid, 150.0)
        moving = fd.simulate_case1(land, ShiftSpec(0.1, c=0.5), n0, grid, 150.0)
        r1 = static.diagnostics.rho[-1]
        r2 = moving.diagnostics.rho[-1]
        assert abs(r2 - r1) / r1 < 0.05

    def test_rho_matches_mean_growth_at_plateau(self):
        # at the plateau, rho equals the growth averaged against the profile
        land = single_peak(20.0, offset=0.5)
        grid = fd.Grid(60.0, 961)
        n0 = fd.gaussian_profile(grid, 0.1, 19.0, 3.0)
        shift = ShiftSpec(0.1, c=1.0)
        res = fd.simulate_case1(land, shift, n0, grid, 150.0)
        rho = res.diagnostics.rho[-1]
        t = res.final.time
        mean_growth = grid.dx * np.sum(
            land.value(grid.nodes - shift.epsilon * shift.c * t) * res.final.values
        ) / rho
        assert abs(rho - mean_growth) / rho < 0.02

    def test_boundary_mass_warning(self):
        land = single_peak(5.0)
        grid = fd.Grid(20.0, 201)
        n0 = fd.gaussian_profile(grid, 0.1, 2.0, 2.0)  # sits on the left wall
        with pytest.warns(UserWarning, match="boundary"):
            fd.simulate_case1(land, ShiftSpec(0.1, c=0.0), n0, grid, 1.0)


class TestSimulateCase2:
    def test_two_speed_shares_track_both_peaks(self):
        from lagopt.landscape import TwoPeakLandscape

        tp = TwoPeakLandscape(
            FitnessLandscape((quadratic_plus(1.75, 32.0),)),
            FitnessLandscape((quadratic_plus(2.5, 48.0),)),
            -0.5,
        )
        grid = fd.Grid(100.0, 1001)
        n0 = fd.gaussian_profile(grid, 0.1, 37.5, 10.0)
        res = fd.simulate_case2(tp, ShiftSpec(0.1, c1=-1.0, c2=2.5), n0, grid, 10.0)
        d = res.diagnostics
        assert d.shares.shape[1] == 2
        assert d.tracked[0][0] == pytest.approx(32.5, abs=1e-9)
        assert d.tracked[1][0] == pytest.approx(46.75, abs=1e-9)
        assert d.shares[-1].sum() > 0.5  # population concentrated near tracked points

    def test_requires_two_speed_shift(self):
        from lagopt.landscape import TwoPeakLandscape

        tp = TwoPeakLandscape(
            FitnessLandscape((quadratic_plus(1.0, 0.0),)),
            FitnessLandscape((quadratic_plus(1.0, 10.0),)),
            0.5,
        )
        with pytest.raises(ValueError):
            fd.simulate_case2(tp, ShiftSpec(0.1, c=1.0), np.zeros(11), fd.Grid(10.0, 11), 1.0)
