"""Verdicts, concentration reports, crossover detection, profile comparison."""

import numpy as np
import pytest

from lagopt import analysis, eigen, fd
from lagopt.analysis import EXTINCT, OUTSIDE, PERSIST
from lagopt.errors import GridMismatch, ZeroVector
from lagopt.landscape import (
    FitnessLandscape,
    ShiftSpec,
    TwoPeakLandscape,
    lagged_fitness_case2,
    quadratic_plus,
    quartic_plus,
)


def fig3_twopeak(delta=-0.5):
    return TwoPeakLandscape(
        FitnessLandscape((quadratic_plus(1.75, 32.0),)),
        FitnessLandscape((quadratic_plus(2.5, 48.0),)),
        delta,
    )


class TestClassify:
    def test_static_single_peak_persists(self):
        land = FitnessLandscape((quadratic_plus(2.5, 40.0),), -0.5)
        v = analysis.classify(land, ShiftSpec(0.1, c=0.0))
        assert v.kind == PERSIST
        assert v.dominant_points == (40.0,)
        assert v.within_hypotheses

    def test_supercritical_single_peak_extinct(self):
        land = FitnessLandscape((quadratic_plus(2.5, 40.0),), 0.0)
        v = analysis.classify(land, ShiftSpec(0.1, c=4.0))
        assert v.kind == EXTINCT

    def test_critical_speed_is_outside(self):
        land = FitnessLandscape((quadratic_plus(2.5, 40.0),), 0.0)
        v = analysis.classify(land, ShiftSpec(0.1, c=10.0 ** 0.5))
        assert v.kind == OUTSIDE

    def test_shallowest_peak_sets_dominant_point(self):
        land = FitnessLandscape(
            (quartic_plus(2.5, 35.0), quadratic_plus(2.5, 40.0)), 0.5
        )
        v = analysis.classify(land, ShiftSpec(0.1, c=1.0))
        assert v.kind == PERSIST
        assert len(v.dominant_points) == 1
        assert v.dominant_points[0] == pytest.approx(35.0 - 2.0 ** -0.5, abs=1e-9)
        assert v.notes  # offset not negative: hypotheses flagged

    def test_two_speed_fast_and_slow_right_peak(self):
        v = analysis.classify(fig3_twopeak(), ShiftSpec(0.1, c1=-1.0, c2=2.5))
        assert v.kind == PERSIST
        assert v.dominant_points[0] == pytest.approx(32.5, abs=1e-9)
        assert v.thresholds["lagged_fitness_1"] == pytest.approx(2.0, abs=1e-14)
        assert "background death" in " ".join(v.notes)

        v = analysis.classify(fig3_twopeak(), ShiftSpec(0.1, c1=-1.0, c2=1.0))
        assert v.kind == PERSIST
        assert v.dominant_points[0] == pytest.approx(47.5, abs=1e-9)

    def test_two_speed_extinction(self):
        v = analysis.classify(fig3_twopeak(delta=3.0), ShiftSpec(0.1, c1=-1.0, c2=2.5))
        assert v.kind == EXTINCT

    def test_tie_is_outside_hypotheses(self):
        tp = TwoPeakLandscape(
            FitnessLandscape((quadratic_plus(2.0, -5.0),)),
            FitnessLandscape((quadratic_plus(2.0, 5.0),)),
            0.5,
        )
        v = analysis.classify(tp, ShiftSpec(0.1, c1=-1.0, c2=1.0))
        assert v.kind == OUTSIDE

    def test_dominance_homogeneity_under_scaling(self):
        # scaling growth and death by s and speeds by sqrt(s) scales both
        # lagged fitness values by s, so the dominant peak is unchanged
        base_speeds = (-1.0, 2.5)
        for s in (0.5, 2.0, 4.0):
            tp = TwoPeakLandscape(
                FitnessLandscape((quadratic_plus(1.75 * s, 32.0),)),
                FitnessLandscape((quadratic_plus(2.5 * s, 48.0),)),
                -0.5 * s,
            )
            speeds = tuple(c * s ** 0.5 for c in base_speeds)
            lf = lagged_fitness_case2(tp, speeds)
            assert lf.dominant == 1
            assert lf.f1 == pytest.approx(2.0 * s, rel=1e-12)


def synthetic_report(times, s1, s2):
    n = len(times)
    return analysis.ConcentrationReport(
        times=np.asarray(times, dtype=float),
        argmax_lab=np.zeros(n),
        comoving_argmax=np.zeros((n, 2)),
        shares=np.column_stack([s1, s2]),
        widths=np.ones(n),
        tracked=((0.0, -1.0), (1.0, 1.0)),
    )


class TestCrossoverTime:
    def test_overtake_then_reversal(self):
        t = np.arange(10.0)
        s2 = np.array([0.1, 0.5, 0.6, 0.6, 0.5, 0.4, 0.3, 0.2, 0.2, 0.2])
        s1 = np.array([0.2, 0.2, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.7, 0.7])
        assert analysis.crossover_time(synthetic_report(t, s1, s2)) == 5.0

    def test_no_reversal(self):
        t = np.arange(5.0)
        s2 = np.array([0.2, 0.5, 0.6, 0.7, 0.8])
        s1 = 1.0 - s2
        assert analysis.crossover_time(synthetic_report(t, s1, s2)) is None

    def test_constant_shares(self):
        t = np.arange(5.0)
        s = np.full(5, 0.5)
        assert analysis.crossover_time(synthetic_report(t, s, s)) is None

    def test_subsampling_stability(self):
        t = np.arange(40.0)
        s2 = np.clip(np.sin(t / 8.0) + 0.3, 0.0, 1.0) / 2.0
        s1 = np.clip(t / 40.0, 0.0, 1.0) / 2.0
        full = analysis.crossover_time(synthetic_report(t, s1, s2))
        sub = analysis.crossover_time(synthetic_report(t[::2], s1[::2], s2[::2]))
        assert full is not None and sub is not None
        assert abs(full - sub) <= 2.0  # one coarse stride


class TestProfileComparison:
    def setup_method(self):
        self.land = FitnessLandscape((quadratic_plus(2.5, 40.0),), 0.5)
        self.shift = ShiftSpec(0.1, c=1.0)
        self.pair = eigen.principal_eigenpair(
            self.land.value, 1.0, 0.1, 15.0, 3001, center=40.0
        )

    def test_exact_multiple_of_eigenvector_gives_zero(self):
        grid = fd.Grid(60.0, 6001)  # same spacing; window covers the eigen nodes
        t = 50.0
        offset = self.shift.epsilon * self.shift.c * t
        values = 2.0 * np.interp(
            grid.nodes - offset, self.pair.nodes, self.pair.renormalized("L1")
        )
        gap = analysis.compare_profile_to_eigenvector(values, grid, self.pair, self.shift, t)
        assert gap < 1e-8

    def test_initial_mismatch_is_positive(self):
        grid = fd.Grid(80.0, 1281)
        n0 = fd.gaussian_profile(grid, 0.1, 37.5, 10.0)
        gap = analysis.compare_profile_to_eigenvector(n0, grid, self.pair, self.shift, 0.0)
        assert gap > 0.01

    def test_long_run_profile_locks_onto_eigenvector(self):
        grid = fd.Grid(80.0, 1281)
        n0 = fd.gaussian_profile(grid, 0.1, 37.5, 10.0)
        res = fd.simulate_case1(self.land, self.shift, n0, grid, 150.0)
        gap = analysis.compare_profile_to_eigenvector(
            res.final.values, grid, self.pair, self.shift, res.final.time
        )
        assert gap < 0.1 * float(np.max(self.pair.vector))

    def test_zero_mass_rejected(self):
        grid = fd.Grid(30.0, 301)
        with pytest.raises(ZeroVector):
            analysis.compare_profile_to_eigenvector(
                np.zeros(301), grid, self.pair, self.shift, 1.0
            )

    def test_disjoint_windows_rejected(self):
        grid = fd.Grid(5.0, 101)  # density lives on [0, 5], eigen nodes on [25, 55]
        with pytest.raises(GridMismatch):
            analysis.compare_profile_to_eigenvector(
                np.ones(101), grid, self.pair, self.shift, 0.0
            )


class TestReportsAndPlateau:
    def test_concentration_report_frames(self):
        land = FitnessLandscape((quadratic_plus(2.5, 20.0),), 0.0)
        grid = fd.Grid(40.0, 401)
        n0 = fd.gaussian_profile(grid, 0.1, 19.0, 3.0)
        res = fd.simulate_case1(land, ShiftSpec(0.1, c=1.0), n0, grid, 30.0)
        rep = analysis.build_concentration_report(res.diagnostics, 0.1)
        assert rep.comoving_argmax.shape == (len(rep.times), len(rep.tracked))
        k = len(rep.times) - 1
        v = rep.tracked[0][1]
        expected = rep.argmax_lab[k] - 0.1 * v * rep.times[k]
        assert rep.comoving_argmax[k, 0] == pytest.approx(expected, rel=1e-12)

    def test_rho_plateau_detection(self):
        t = np.linspace(0.0, 100.0, 201)
        settled = 2.0 + 1e-6 * np.sin(t)
        assert analysis.rho_plateaued(t, settled)
        rising = 2.0 + 0.01 * t
        assert not analysis.rho_plateaued(t, rising)
