"""Turns solver output into persistence verdicts and concentration reports."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eigen import EigenPair
from .errors import AssumptionViolated, GridMismatch, NoLaggedOptimum, ZeroVector
from .fd import Grid, RunDiagnostics
from .landscape import (
    FitnessLandscape,
    ShiftSpec,
    TwoPeakLandscape,
    concentration_candidates,
    lagged_fitness_case2,
    persistence_threshold_case1,
    shallowest_peaks,
)

PERSIST = "persist"
EXTINCT = "extinct"
OUTSIDE = "outside-hypotheses"

# Relative plateau tolerance for "rho has settled" detection.
PLATEAU_RTOL = 1e-4


@dataclass(frozen=True)
class Verdict:
    """Predicted long-time outcome and the thresholds supporting it.

    ``kind`` is one of "persist", "extinct", "outside-hypotheses"; the last
    is used only when the thresholds themselves are indeterminate (a tie
    within tolerance, or a failed root-structure assumption).  Hypothesis
    violations that do not block the threshold comparison (for example a
    nonpositive background death rate) are still reported via ``notes``.
    """

    kind: str
    dominant_points: tuple[float, ...]
    thresholds: dict
    notes: tuple[str, ...] = ()

    @property
    def within_hypotheses(self) -> bool:
        return self.kind != OUTSIDE and not self.notes


def _case1_dominant_points(land: FitnessLandscape, c: float) -> list[float]:
    """Lagged optimum attached to each shallowest peak (trailing side of c)."""
    if c == 0.0:
        return shallowest_peaks(land)
    cands = concentration_candidates(land, c)
    points = []
    for peak in shallowest_peaks(land):
        if c > 0:
            behind = [r for r in cands if r < peak]
        else:
            behind = [r for r in cands if r > peak]
        if behind:
            points.append(min(behind, key=lambda r: abs(r - peak)))
    return points


def classify(landscape, shift: ShiftSpec) -> Verdict:
    """Threshold-based persistence/extinction verdict.

    Single-speed: persist when ``max(a) - c^2/4 > 0``, concentrating on the
    lagged optima behind the shallowest peaks.  Two-speed: persist on the
    lagged optimum of the peak with the larger lagged fitness when that is
    positive, extinct when both are nonpositive.
    """
    if shift.case == "single-speed":
        return _classify_case1(landscape, shift)
    return _classify_case2(landscape, shift)


def _classify_case1(land: FitnessLandscape, shift: ShiftSpec) -> Verdict:
    c = shift.c
    threshold = persistence_threshold_case1(land, c)
    thresholds = {"persistence_threshold": threshold, "max_growth": land.max_value}
    notes = []
    if not land.satisfies_negativity:
        notes.append("growth rate is not strictly negative far from the optima")
    if abs(threshold) <= 1e-12 * max(1.0, abs(land.max_value)):
        return Verdict(OUTSIDE, (), thresholds, (*notes, "threshold exactly critical"))
    if threshold < 0:
        return Verdict(EXTINCT, (), thresholds, tuple(notes))
    try:
        points = _case1_dominant_points(land, c)
    except (NoLaggedOptimum, AssumptionViolated) as exc:
        return Verdict(OUTSIDE, (), thresholds, (*notes, f"root structure: {exc}"))
    return Verdict(PERSIST, tuple(points), thresholds, tuple(notes))


def _classify_case2(tp: TwoPeakLandscape, shift: ShiftSpec) -> Verdict:
    lf = lagged_fitness_case2(tp, shift)
    thresholds = {"lagged_fitness_1": lf.f1, "lagged_fitness_2": lf.f2}
    notes = []
    if tp.delta <= 0:
        notes.append("background death rate is not positive")
    if lf.tie:
        return Verdict(OUTSIDE, (), thresholds, (*notes, "lagged fitness tie unresolved"))
    if lf.extinct:
        return Verdict(EXTINCT, (), thresholds, tuple(notes))
    comp, c = ((tp.a1, shift.c1) if lf.dominant == 1 else (tp.a2, shift.c2))
    try:
        cands = concentration_candidates(comp, c)
    except (NoLaggedOptimum, AssumptionViolated) as exc:
        return Verdict(OUTSIDE, (), thresholds, (*notes, f"root structure: {exc}"))
    thresholds["dominant_peak"] = float(lf.dominant)
    return Verdict(PERSIST, tuple(cands[:1]), thresholds, tuple(notes))


@dataclass
class ConcentrationReport:
    """Co-moving argmax trajectories, mass shares and support widths.

    ``comoving_argmax[:, k]`` is the argmax transported to the frame of the
    k-th tracked point (``x - eps * v_k * t``).
    """

    times: np.ndarray
    argmax_lab: np.ndarray
    comoving_argmax: np.ndarray
    shares: np.ndarray
    widths: np.ndarray
    tracked: tuple[tuple[float, float], ...]


def build_concentration_report(diag: RunDiagnostics, eps: float) -> ConcentrationReport:
    velocities = np.asarray([v for _, v in diag.tracked])
    comoving = diag.argmax_x[:, None] - eps * velocities[None, :] * diag.times[:, None]
    return ConcentrationReport(
        times=diag.times,
        argmax_lab=diag.argmax_x,
        comoving_argmax=comoving,
        shares=diag.shares,
        widths=diag.widths,
        tracked=diag.tracked,
    )


def crossover_time(report: ConcentrationReport) -> float | None:
    """First time the first tracked share re-overtakes the second.

    Looks for an initial interval where ``share_2 > share_1`` and returns the
    first later time with ``share_1 > share_2``; ``None`` when the pattern
    never occurs.
    """
    if report.shares.shape[1] < 2:
        raise ValueError("crossover detection needs two tracked points")
    s1 = report.shares[:, 0]
    s2 = report.shares[:, 1]
    ahead = np.nonzero(s2 > s1)[0]
    if len(ahead) == 0:
        return None
    k0 = int(ahead[0])
    back = np.nonzero(s1[k0:] > s2[k0:])[0]
    if len(back) == 0:
        return None
    return float(report.times[k0 + int(back[0])])


def rho_plateaued(times: np.ndarray, rho: np.ndarray, *, window: float = 0.1) -> bool:
    """Relative rho variation below 1e-4 over the trailing ``window`` fraction."""
    t_cut = times[-1] - window * (times[-1] - times[0])
    tail = rho[times >= t_cut]
    if len(tail) < 2 or tail[-1] <= 0:
        return False
    return float(np.max(tail) - np.min(tail)) / float(tail[-1]) < PLATEAU_RTOL


def compare_profile_to_eigenvector(
    values: np.ndarray,
    grid: Grid,
    pair: EigenPair,
    shift: ShiftSpec,
    t: float,
    *,
    velocity: float | None = None,
) -> float:
    """Sup-norm gap between the normalized density and the eigenvector.

    The density is moved to the co-moving frame ``x - eps*velocity*t``
    (velocity defaults to the single-speed ``c``) and interpolated onto the
    eigen grid; the comparison runs over the overlap window.
    """
    if velocity is None:
        if shift.case != "single-speed":
            raise ValueError("pass velocity= for two-speed comparisons")
        velocity = shift.c
    rho = grid.dx * float(np.sum(values))
    if rho <= 0.0:
        raise ZeroVector("density has zero mass; nothing to compare")
    y_density = grid.nodes - shift.epsilon * velocity * t
    y_eigen = pair.nodes
    inside = (y_eigen >= y_density[0]) & (y_eigen <= y_density[-1])
    if np.count_nonzero(inside) < 8:
        raise GridMismatch("density window and eigen grid barely overlap")
    normalized = np.interp(y_eigen[inside], y_density, values / rho)
    p = pair.renormalized("L1")
    return float(np.max(np.abs(normalized - p[inside])))
