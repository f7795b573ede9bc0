"""Godunov flux, the eps > 0 scheme, its limit scheme, and cross-checks."""

import numpy as np
import pytest

from lagopt import fd, hj
from lagopt.errors import GridMismatch
from lagopt.landscape import FitnessLandscape, ShiftSpec, quadratic_plus, quartic_plus


def fig_landscape():
    return FitnessLandscape((quartic_plus(2.5, 35.0), quadratic_plus(2.5, 40.0)), 0.5)


def constant_landscape(value, span=1000.0):
    # a bump far outside any grid plus an offset: constant growth on the grid
    return FitnessLandscape((quadratic_plus(1.0, span),), value)


class TestGodunovFlux:
    def test_reference_values(self):
        assert hj.godunov_hamiltonian(1.0, -1.0) == 1.0
        assert hj.godunov_hamiltonian(-1.0, 1.0) == 0.0
        assert hj.godunov_hamiltonian(2.0, -3.0) == 9.0

    def test_sign_and_zero_set(self):
        ps = np.linspace(-2.0, 2.0, 41)
        for p in ps:
            for q in ps:
                h = hj.godunov_hamiltonian(p, q)
                assert h >= 0.0
                assert (h == 0.0) == (p <= 0.0 <= q)

    def test_monotone_in_each_slot(self):
        ps = np.linspace(-2.0, 2.0, 21)
        for q in ps:
            vals = [hj.godunov_hamiltonian(p, q) for p in ps]
            assert all(b >= a for a, b in zip(vals, vals[1:]))  # nondecreasing in p
        for p in ps:
            vals = [hj.godunov_hamiltonian(p, q) for q in ps]
            assert all(b <= a for a, b in zip(vals, vals[1:]))  # nonincreasing in q


class TestApStep:
    def test_constant_field_update(self):
        # flat field: slopes and Laplacian vanish, only the potential acts
        grid = fd.Grid(10.0, 101)
        land = constant_landscape(0.8)
        K, eps, dt = 2.0, 0.5, 0.01
        field = hj.LogField(np.full(101, K))
        out, _ = hj.ap_step(field, grid, land, 0.0, eps, dt)
        rho = grid.dx * 101 * np.exp(-K / eps)
        expected = K - dt * (0.8 - rho)
        assert out.values == pytest.approx(expected, rel=1e-14)

    def test_hamiltonian_term_matches_hand_evaluation(self):
        # quadratic well shifted up so the mass term is negligible
        grid = fd.Grid(10.0, 101)
        land = constant_landscape(0.0)
        eps, dt, c = 1e-12, 0.01, 0.0
        u = (grid.nodes - 4.0) ** 2 + 80.0
        out, _ = hj.ap_step(hj.LogField(u.copy()), grid, land, c, eps, dt)
        dx = grid.dx
        for j in (30, 40, 55):
            p = (u[j] - u[j - 1]) / dx
            q = (u[j + 1] - u[j]) / dx
            ham = max(max(p, 0.0) ** 2, min(q, 0.0) ** 2)
            lap = (u[j + 1] - 2 * u[j] + u[j - 1]) / dx ** 2
            expected = u[j] - dt * (ham - eps * lap)
            assert out.values[j] == pytest.approx(expected, abs=1e-12)
            # exact slope of the well is 2(x-4); one-sided slopes are dx-close
            assert abs(p - 2 * (grid.nodes[j] - 4.0)) <= dx + 1e-12

    def test_returns_mass_of_new_field(self):
        grid = fd.Grid(10.0, 51)
        land = constant_landscape(0.0)
        field = hj.LogField(np.full(51, 1.0))
        out, rho_next = hj.ap_step(field, grid, land, 0.0, 0.5, 0.01)
        assert rho_next == pytest.approx(hj.log_mass(out.values, 0.5, grid.dx), rel=1e-15)


class TestLimitStep:
    def test_renormalization_is_exact(self):
        rng = np.random.default_rng(7)  # fixed seed
        grid = fd.Grid(10.0, 201)
        land = fig_landscape()
        v = rng.uniform(0.0, 3.0, 201)
        v -= v.min()
        field = hj.LogField(v)
        # rough fields carry slopes up to 3/dx; keep dt inside the Godunov bound
        for _ in range(25):
            field, pressure = hj.limit_step(field, grid, land, 1.0, 5e-5)
            assert float(np.min(field.values)) == 0.0  # exactly zero
            assert np.isfinite(pressure)

    def test_entry_renormalization_required(self):
        grid = fd.Grid(10.0, 51)
        with pytest.raises(ValueError):
            hj.limit_step(hj.LogField(np.full(51, 1.0)), grid, fig_landscape(), 1.0, 0.01)

    def test_pressure_root_closed_form_vs_bisection(self):
        rng = np.random.default_rng(123)  # fixed seed
        for _ in range(20):
            w = rng.normal(0.0, 5.0, 300)
            dt = 10.0 ** rng.uniform(-4, -1)
            j_closed = hj.limit_pressure_root(w, dt)
            j_bisect = hj.limit_pressure_bisect(w, dt)
            assert abs(j_closed - j_bisect) <= 1e-12 * max(1.0, abs(j_closed))

    def test_pressure_at_toy_stationary_profile(self):
        # v vanishing at the lagged optimum with steep flanks: the pressure
        # reproduces the local growth level up to O(dt)
        land = FitnessLandscape((quadratic_plus(2.5, 40.0),), 0.5)
        grid = fd.Grid(75.0, 1501)
        c = 1.0
        v = 2.0 * np.abs(grid.nodes - 39.5)
        field = hj.LogField(v - v.min())
        dt = 1e-4
        _, pressure = hj.limit_step(field, grid, land, c, dt)
        level = land.value(39.5) - c * c / 4.0
        assert abs(pressure - level) <= 0.05  # grid kink + O(dt) slack

    def test_long_run_pressure_reaches_growth_ceiling(self):
        # stationary limit-scheme pressure approaches max(a) - c^2/4 = 2.75
        land = fig_landscape()
        grid = fd.Grid(75.0, 1001)
        run = hj.run_limit(land, 1.0, np.zeros(1001), grid, 6.0)
        assert abs(run.series[-1] - 2.75) < 0.05
        assert run.min_renorm_error <= 1e-14


class TestConsistencyCheck:
    def test_identical_fields_agree(self):
        grid = fd.Grid(10.0, 101)
        eps = 0.1
        u = 0.5 * (grid.nodes - 5.0) ** 2
        density = np.exp(-u / eps)
        report = hj.consistency_check(density, grid, hj.LogField(u), grid, eps)
        assert report.max_abs_diff < 1e-12
        assert report.n_non_comparable == 0
        assert abs(report.density_argmin - report.logfield_argmin) < 1e-12

    def test_spacing_mismatch_rejected(self):
        g1, g2 = fd.Grid(10.0, 101), fd.Grid(10.0, 51)
        with pytest.raises(GridMismatch):
            hj.consistency_check(np.ones(101), g1, hj.LogField(np.zeros(51)), g2, 0.1)

    def test_zero_density_flagged_non_comparable(self):
        grid = fd.Grid(10.0, 101)
        report = hj.consistency_check(
            np.zeros(101), grid, hj.LogField(np.zeros(101)), grid, 0.1
        )
        assert report.all_non_comparable
        assert np.isnan(report.max_abs_diff)

    def test_offset_translates_frames(self):
        grid = fd.Grid(20.0, 401)
        eps, shiftlen = 0.1, 2.0
        u = 0.5 * (grid.nodes - 8.0) ** 2
        density = np.exp(-0.5 * (grid.nodes - 10.0) ** 2 / eps)
        report = hj.consistency_check(
            density, grid, hj.LogField(u), grid, eps, offset=shiftlen
        )
        assert abs(report.density_argmin - 8.0) < grid.dx + 1e-12


class TestCrossSolver:
    def test_density_and_log_scheme_locate_the_same_minimum(self):
        # same landscape and datum through both routes: density marched to
        # t = tau/eps in the lab frame, log scheme marched to tau co-moving;
        # their minimizers must land within 3 dx of each other
        land = fig_landscape()
        grid = fd.Grid(75.0, 1500)
        eps, c, tau = 0.1, 1.0, 2.0
        z = (grid.nodes - 37.5) / 10.0
        u0 = -eps * (np.log(0.1) - z ** 2)
        run = hj.run_ap(land, c, eps, u0, grid, tau)

        shift = ShiftSpec(epsilon=eps, c=c)
        n0 = fd.gaussian_profile(grid, 0.1, 37.5, 10.0)
        res = fd.simulate_case1(land, shift, n0, grid, tau / eps)
        report = hj.consistency_check(
            res.final.values, grid, run.final, grid, eps, offset=c * tau
        )
        assert report.n_non_comparable == 0
        assert abs(report.density_argmin - report.logfield_argmin) <= 3 * grid.dx


class TestRunAp:
    def test_minimizer_migrates_toward_lagged_optimum(self):
        land = fig_landscape()
        grid = fd.Grid(75.0, 1500)
        eps = 0.1
        z = (grid.nodes - 37.5) / 10.0
        u0 = -eps * (np.log(0.1) - z ** 2)
        run = hj.run_ap(land, 1.0, eps, u0, grid, 2.0, snapshot_times=(0.5, 1.0, 1.5, 2.0))
        target = 35.0 - 2.0 ** -0.5
        dists = [abs(grid.nodes[int(np.argmin(u))] - target) for _, u in run.snapshots]
        assert all(b <= a + 1e-12 for a, b in zip(dists, dists[1:]))
        assert dists[-1] < dists[0]
        assert np.all(run.series > 0.0)
