"""Fitness landscapes with shifting optima and their analytic thresholds.

A landscape is a sum of compactly supported polynomial bumps plus a constant
offset.  The built-in families are

    quadratic_plus(h, center):  (h - (x - center)^2)^+
    quartic_plus(h, center):    (h - (x - center)^4)^+

For a landscape with maximum value ``a_M`` shifted at speed ``c`` (after the
rare-mutation scaling), the population can only persist when ``a_M - c^2/4``
is positive, and a persisting population concentrates not on the moving
maxima but on *lagged optima*: roots of ``a(x) = a_M - c^2/4`` on the
upwind side of a maximum.  This module computes those roots, the
persistence thresholds for both the single-speed and two-speed problems,
and the curvature-based selection among equal maxima.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import bisect

from .errors import AssumptionViolated, NoLaggedOptimum

# Relative tolerance used to decide that two candidate maxima share the
# global maximum value, and to detect degenerate (tie) situations.
_MAX_RTOL = 1e-12
_ROOT_XTOL = 1e-12


@dataclass(frozen=True)
class BumpTerm:
    """One compactly supported bump ``(h - (x - center)^p)^+`` with p in {2, 4}."""

    family: str  # "quadratic_plus" | "quartic_plus"
    height: float
    center: float

    def __post_init__(self):
        if self.family not in ("quadratic_plus", "quartic_plus"):
            raise ValueError(f"unknown bump family {self.family!r}")
        if self.height <= 0:
            raise ValueError("bump height must be positive")

    @property
    def power(self) -> int:
        return 2 if self.family == "quadratic_plus" else 4

    @property
    def half_width(self) -> float:
        return self.height ** (1.0 / self.power)

    @property
    def support(self) -> tuple[float, float]:
        return (self.center - self.half_width, self.center + self.half_width)

    def value(self, x):
        z = np.asarray(x, dtype=float) - self.center
        v = self.height - z ** self.power
        return np.maximum(v, 0.0)

    def deriv(self, x):
        z = np.asarray(x, dtype=float) - self.center
        inside = (self.height - z ** self.power) > 0.0
        return np.where(inside, -self.power * z ** (self.power - 1), 0.0)

    def deriv2(self, x):
        z = np.asarray(x, dtype=float) - self.center
        inside = (self.height - z ** self.power) > 0.0
        p = self.power
        return np.where(inside, -p * (p - 1) * z ** (p - 2), 0.0)


def quadratic_plus(height: float, center: float) -> BumpTerm:
    return BumpTerm("quadratic_plus", height, center)


def quartic_plus(height: float, center: float) -> BumpTerm:
    return BumpTerm("quartic_plus", height, center)


@dataclass(frozen=True)
class FitnessLandscape:
    """Sum of bumps plus a constant offset, with registered maxima.

    ``maxima`` lists ``(location, second derivative)`` pairs for every point
    attaining the global maximum, ascending in location.  Curvature is only
    evaluated at these registered maxima, where all pieces are smooth.

    The landscape is negative beyond ``negativity_radius`` only when
    ``offset < 0``; in that case ``decay_floor = -offset`` bounds it from
    above there (``a(x) <= -decay_floor``).  Landscapes with ``offset >= 0``
    are accepted (several experiment presets use them) but then fall outside
    the hypotheses of the persistence theory, which classifiers report.
    """

    terms: tuple[BumpTerm, ...]
    offset: float = 0.0

    def __post_init__(self):
        if not self.terms:
            raise ValueError("landscape needs at least one bump term")
        object.__setattr__(self, "terms", tuple(self.terms))

    def value(self, x):
        x = np.asarray(x, dtype=float)
        total = np.full(x.shape, self.offset, dtype=float)
        for t in self.terms:
            total = total + t.value(x)
        return total if total.ndim else float(total)

    def deriv(self, x):
        x = np.asarray(x, dtype=float)
        total = np.zeros(x.shape, dtype=float)
        for t in self.terms:
            total = total + t.deriv(x)
        return total if total.ndim else float(total)

    def deriv2(self, x):
        x = np.asarray(x, dtype=float)
        total = np.zeros(x.shape, dtype=float)
        for t in self.terms:
            total = total + t.deriv2(x)
        return total if total.ndim else float(total)

    @cached_property
    def support(self) -> tuple[float, float]:
        """Smallest interval outside which the landscape equals ``offset``."""
        lo = min(t.support[0] for t in self.terms)
        hi = max(t.support[1] for t in self.terms)
        return (lo, hi)

    @cached_property
    def maxima(self) -> tuple[tuple[float, float], ...]:
        """Registered maxima: ``(location, curvature)`` ascending in location."""
        centers = sorted({t.center for t in self.terms})
        values = [float(self.value(c)) for c in centers]
        top = max(values)
        out = []
        for c, v in zip(centers, values):
            if abs(v - top) <= _MAX_RTOL * max(1.0, abs(top)):
                out.append((c, float(self.deriv2(c))))
        return tuple(out)

    @cached_property
    def max_value(self) -> float:
        return float(self.value(self.maxima[0][0]))

    @property
    def negativity_radius(self) -> float:
        lo, hi = self.support
        return max(abs(lo), abs(hi))

    @property
    def decay_floor(self) -> float | None:
        """Positive floor with ``a <= -decay_floor`` outside the support, if any."""
        return -self.offset if self.offset < 0 else None

    @property
    def satisfies_negativity(self) -> bool:
        return self.offset < 0

    def shifted_value(self, x, displacement: float):
        """Evaluate ``a(x - displacement)`` (the moving landscape)."""
        return self.value(np.asarray(x, dtype=float) - displacement)


@dataclass(frozen=True)
class TwoPeakLandscape:
    """Two single-peak compactly supported landscapes with a shared death rate.

    Each component must be zero outside its support (offset 0) and carry
    exactly one registered maximum.  ``delta`` is the constant background
    death rate; the effective growth is ``a1 + a2 - delta``.
    """

    a1: FitnessLandscape
    a2: FitnessLandscape
    delta: float

    def __post_init__(self):
        for name, comp in (("a1", self.a1), ("a2", self.a2)):
            if comp.offset != 0.0:
                raise AssumptionViolated(f"{name} must be compactly supported (offset 0)")
            if len(comp.maxima) != 1:
                raise AssumptionViolated(f"{name} must have exactly one maximum")
            if comp.max_value <= 0:
                raise AssumptionViolated(f"{name} must have a positive maximum")

    @property
    def support_radius(self) -> float:
        return max(self.a1.negativity_radius, self.a2.negativity_radius)

    def growth(self, x, disp1: float = 0.0, disp2: float = 0.0):
        """``a1(x - disp1) + a2(x - disp2) - delta``."""
        x = np.asarray(x, dtype=float)
        return self.a1.value(x - disp1) + self.a2.value(x - disp2) - self.delta


@dataclass(frozen=True)
class ShiftSpec:
    """Mutation scale and shift velocities.

    Single-speed problems carry one velocity ``c``; two-speed problems carry
    a pair ``(c1, c2)`` with ``c1 < 0 < c2`` (diverging optima).
    """

    epsilon: float
    c: float | None = None
    c1: float | None = None
    c2: float | None = None

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        single = self.c is not None
        double = self.c1 is not None or self.c2 is not None
        if single == double:
            raise ValueError("specify either c (single-speed) or c1,c2 (two-speed)")
        if double:
            if self.c1 is None or self.c2 is None:
                raise ValueError("two-speed shift needs both c1 and c2")
            if not (self.c1 < 0.0 < self.c2):
                raise AssumptionViolated("two-speed velocities must satisfy c1 < 0 < c2")

    @property
    def case(self) -> str:
        return "single-speed" if self.c is not None else "two-speed"

    @property
    def speed_gap(self) -> float:
        if self.case != "two-speed":
            raise ValueError("speed gap only defined for two-speed shifts")
        return self.c2 - self.c1


@dataclass(frozen=True)
class LaggedOptimum:
    """A root of ``a(x) = max(a) - c^2/4`` with the sign of ``a'`` there."""

    location: float
    slope_sign: int  # sign of a'(location): -1, 0, +1


def lagged_optima(
    land: FitnessLandscape,
    c: float,
    *,
    eps: float | None = None,
    scan_points: int | None = None,
) -> list[LaggedOptimum]:
    """All roots of ``a(x) = max(a) - c^2/4`` with slope-sign annotations.

    Roots are bracketed by sign changes on a uniform scan of the (padded)
    support and refined by bisection to ``1e-12``.  For ``c = 0`` the level
    set degenerates to the registered maxima, which are returned directly
    with slope sign 0.

    Args:
        land: the fitness landscape.
        c: shift speed (may be negative; the level uses ``c^2/4``).
        eps: optional mutation scale; sets the scan density to
            ``10 * length / eps`` nodes as a function of the scan interval
            length.  When omitted a fixed fine scan is used.
        scan_points: explicit scan node count, overriding ``eps``.

    Raises:
        NoLaggedOptimum: the level lies at or below the landscape floor, so
            it is never attained inside the support.
        AssumptionViolated: the level coincides with the far-field plateau
            (interval of roots), or an inter-peak interval contains more
            than two roots / the region left of the first peak more than one.
    """
    if c == 0.0:
        return [LaggedOptimum(loc, 0) for loc, _ in land.maxima]

    level = land.max_value - c * c / 4.0
    floor = land.offset
    if abs(level - floor) <= 1e-12 * max(1.0, abs(level)):
        raise AssumptionViolated(
            "lagged level coincides with the far-field plateau; roots are not isolated"
        )
    if level < floor:
        raise NoLaggedOptimum(
            f"level {level} lies below the landscape floor {floor}; no lagged optimum"
        )

    lo, hi = land.support
    pad = 0.5 * (hi - lo) * 0.05 + 0.5
    lo, hi = lo - pad, hi + pad
    length = hi - lo
    if scan_points is None:
        if eps is not None:
            scan_points = max(1001, int(math.ceil(10.0 * length / eps)) + 1)
        else:
            scan_points = 100_001
    xs = np.linspace(lo, hi, scan_points)
    f = land.value(xs) - level

    roots: list[float] = []
    exact = np.nonzero(f == 0.0)[0]
    roots.extend(float(xs[i]) for i in exact)
    sign_change = np.nonzero(f[:-1] * f[1:] < 0.0)[0]
    for i in sign_change:
        r = bisect(lambda x: float(land.value(x)) - level, xs[i], xs[i + 1], xtol=_ROOT_XTOL)
        roots.append(float(r))
    if not roots:
        raise NoLaggedOptimum(f"level {level} never crossed inside the scan window")
    roots = sorted(roots)

    peak_locs = [loc for loc, _ in land.maxima]
    left_count = sum(1 for r in roots if r < peak_locs[0])
    if left_count > 1:
        raise AssumptionViolated(
            f"{left_count} roots left of the first maximum; expected exactly one"
        )
    for a, b in zip(peak_locs[:-1], peak_locs[1:]):
        n_between = sum(1 for r in roots if a < r < b)
        if n_between > 2:
            raise AssumptionViolated(
                f"{n_between} roots in the interval ({a}, {b}); expected exactly two"
            )

    out = []
    for r in roots:
        slope = float(land.deriv(r))
        sign = 0 if abs(slope) < 1e-10 else (1 if slope > 0 else -1)
        out.append(LaggedOptimum(r, sign))
    return out


def concentration_candidates(
    land: FitnessLandscape,
    c: float,
    *,
    eps: float | None = None,
    scan_points: int | None = None,
) -> list[float]:
    """Lagged optima that are admissible concentration points.

    For ``c > 0`` the population trails the rightward-moving optima, so the
    admissible roots have ``a' > 0``; for ``c < 0`` the mirror image holds;
    for ``c = 0`` the maxima themselves are returned.
    """
    roots = lagged_optima(land, c, eps=eps, scan_points=scan_points)
    if c == 0.0:
        return [r.location for r in roots]
    want = 1 if c > 0 else -1
    return [r.location for r in roots if r.slope_sign == want]


def persistence_threshold_case1(land: FitnessLandscape, c: float) -> float:
    """Growth ceiling ``max(a) - c^2/4``; persistence requires it positive."""
    return land.max_value - c * c / 4.0


def shallowest_peaks(land: FitnessLandscape) -> list[float]:
    """Registered maxima minimizing ``|a''|`` (the curvature selection rule)."""
    curv = [abs(k) for _, k in land.maxima]
    best = min(curv)
    tol = 1e-12 * max(1.0, best)
    return [loc for (loc, _), k in zip(land.maxima, curv) if k <= best + tol]


@dataclass(frozen=True)
class LaggedFitness:
    """Lagged fitness values of the two tracked peaks and the induced verdict."""

    f1: float
    f2: float
    dominant: int | None  # 1 or 2; None when tied
    extinct: bool
    tie: bool


def lagged_fitness_case2(
    tp: TwoPeakLandscape, shifts, *, tie_rtol: float = 1e-9
) -> LaggedFitness:
    """Lagged fitness ``F_i = max(a_i) - c_i^2/4 - delta`` for both peaks.

    Dominance goes to the larger value; extinction is flagged when both are
    nonpositive.  A tie within ``tie_rtol`` (relative) is surfaced rather
    than silently broken, since the theory assumes strict inequality.

    ``shifts`` is a two-speed ShiftSpec or a plain ``(c1, c2)`` pair; the
    arithmetic is well defined for any speeds, so the pair form is not held
    to the diverging-optima sign constraint.
    """
    if isinstance(shifts, ShiftSpec):
        if shifts.case != "two-speed":
            raise ValueError("two-speed shift spec required")
        c1, c2 = shifts.c1, shifts.c2
    else:
        c1, c2 = shifts
    f1 = tp.a1.max_value - c1 ** 2 / 4.0 - tp.delta
    f2 = tp.a2.max_value - c2 ** 2 / 4.0 - tp.delta
    scale = max(1.0, abs(f1), abs(f2))
    tie = abs(f1 - f2) <= tie_rtol * scale
    dominant = None if tie else (1 if f1 > f2 else 2)
    return LaggedFitness(f1, f2, dominant, extinct=(f1 <= 0.0 and f2 <= 0.0), tie=tie)
