"""Asymptotic-preserving scheme for the constrained Hamilton-Jacobi form.

Writing the co-moving density as ``N = exp(-u/eps)`` turns the growth model
into a Hamilton-Jacobi equation on the slow time scale ``tau = eps * t``:

    du/dtau + |du/dx - c/2|^2 = eps * d2u/dx2 - (a(x) - c^2/4 - rho(tau)),
    rho(tau) = integral of exp(-u/eps).

The explicit scheme uses the Godunov flux for the quadratic Hamiltonian,

    u_i^{n+1} = u_i^n - dt * [ H(D-u_i - c/2, D+u_i - c/2)
                               - eps * (u_{i+1} - 2u_i + u_{i-1}) / dx^2
                               + (a(x_i) - c^2/4 - rho_n) ],
    rho_n = dx * sum_i exp(-u_i^n / eps),

with ``H(p, q) = max(H+(p), H-(q))``, ``H+(p) = p^2`` for ``p > 0`` (else 0)
and ``H-(q) = q^2`` for ``q < 0`` (else 0).  One-sided differences at the
ends use linear extrapolation ghosts (constant slope), which suits the
coercive log-density far field.

Its vanishing-mutation limit replaces rho by the pressure ``P_{n+1}`` chosen
so the renormalization ``min_i v_i^{n+1} = 0`` holds exactly:  ``P_{n+1}``
is the unique root of

    J -> min_i { v_i^n - dt*H_i - dt*(a(x_i) - c^2/4 - J) },

which is affine in J with slope dt, hence available in closed form; a
bisection cross-check is provided.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import GridMismatch, NonFiniteValue, RootNotBracketed
from .fd import Grid
from .landscape import FitnessLandscape


@dataclass
class LogField:
    """Nodal values of the log-density variable ``u`` (density = exp(-u/eps))."""

    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(self.values)):
            raise NonFiniteValue("log-field values must be finite")


def godunov_hamiltonian(p, q):
    """Godunov numerical flux ``max(H+(p), H-(q))`` for ``H(s) = s^2``.

    Nonnegative, zero exactly when ``p <= 0 <= q``, nondecreasing in ``p``
    and nonincreasing in ``q``.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    plus = np.where(p > 0.0, p, 0.0) ** 2
    minus = np.where(q < 0.0, q, 0.0) ** 2
    out = np.maximum(plus, minus)
    return out if out.ndim else float(out)


def _one_sided_slopes(u: np.ndarray, dx: float) -> tuple[np.ndarray, np.ndarray]:
    """Backward and forward slopes with linear-extrapolation ghosts."""
    backward = np.empty_like(u)
    forward = np.empty_like(u)
    backward[1:] = (u[1:] - u[:-1]) / dx
    forward[:-1] = backward[1:]
    backward[0] = backward[1]  # ghost u_{-1} = 2u_0 - u_1
    forward[-1] = forward[-2]  # ghost u_{N+1} = 2u_N - u_{N-1}
    return backward, forward


def log_mass(u: np.ndarray, eps: float, dx: float) -> float:
    """Quadrature ``dx * sum exp(-u/eps)`` of the density carried by ``u``."""
    with np.errstate(over="raise"):
        try:
            return float(dx * np.sum(np.exp(-u / eps)))
        except FloatingPointError as exc:
            raise NonFiniteValue("density mass overflowed; log-field too negative") from exc


def ap_step(
    field: LogField,
    grid: Grid,
    land: FitnessLandscape,
    c: float,
    eps: float,
    dt: float,
) -> tuple[LogField, float]:
    """One explicit step of the eps > 0 scheme.

    The competition pressure is computed from the *incoming* field, keeping
    the update one-pass.  Returns the new field and the mass of the new
    field (so a driver's series aligns index-for-index with the limit
    scheme's pressure series).
    """
    u = field.values
    dx = grid.dx
    backward, forward = _one_sided_slopes(u, dx)
    ham = godunov_hamiltonian(backward - c / 2.0, forward - c / 2.0)
    lap = np.zeros_like(u)
    lap[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / dx ** 2
    # linear-extrapolation ghosts make the boundary Laplacian vanish
    rho_in = log_mass(u, eps, dx)
    potential = land.value(grid.nodes) - c * c / 4.0 - rho_in
    u_new = u - dt * (ham - eps * lap + potential)
    if not np.all(np.isfinite(u_new)):
        raise NonFiniteValue(f"log-field update non-finite at tau={field.time + dt:.6g}")
    return LogField(u_new, field.time + dt), log_mass(u_new, eps, dx)


def _limit_parts(
    field: LogField, grid: Grid, land: FitnessLandscape, c: float, dt: float
) -> np.ndarray:
    """Pressure-free part ``w_i = v_i - dt*H_i - dt*(a_i - c^2/4)`` of the update."""
    v = field.values
    backward, forward = _one_sided_slopes(v, grid.dx)
    ham = godunov_hamiltonian(backward - c / 2.0, forward - c / 2.0)
    return v - dt * ham - dt * (land.value(grid.nodes) - c * c / 4.0)


def limit_pressure_root(w: np.ndarray, dt: float) -> float:
    """Closed-form root of ``J -> min_i(w_i) + dt*J`` (affine in J)."""
    return -float(np.min(w)) / dt


def limit_pressure_bisect(
    w: np.ndarray, dt: float, *, tol: float = 1e-14, max_expand: int = 80
) -> float:
    """Bisection cross-check for the pressure root, bracket grown by doubling."""

    def f(j: float) -> float:
        return float(np.min(w) + dt * j)

    lo, hi = -1.0, 1.0
    for _ in range(max_expand):
        if f(lo) * f(hi) <= 0.0:
            break
        lo *= 2.0
        hi *= 2.0
    else:
        raise RootNotBracketed("pressure root bracket expansion failed")
    while hi - lo > tol * max(1.0, abs(lo), abs(hi)):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break  # interval at one ulp
        if f(lo) * f(mid) <= 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def limit_step(
    field: LogField,
    grid: Grid,
    land: FitnessLandscape,
    c: float,
    dt: float,
) -> tuple[LogField, float]:
    """One step of the vanishing-mutation limit scheme.

    Requires ``min_i v_i = 0`` on entry; the returned field satisfies it
    exactly (the update subtracts the nodal minimum, so the minimizing entry
    is exactly zero in floating point).
    """
    v = field.values
    if abs(float(np.min(v))) > 1e-12 * max(1.0, float(np.max(np.abs(v)))):
        raise ValueError("limit-scheme field must satisfy min v = 0 on entry")
    w = _limit_parts(field, grid, land, c, dt)
    m = float(np.min(w))
    pressure = -m / dt
    v_new = w - m
    if not np.all(np.isfinite(v_new)):
        raise NonFiniteValue(f"limit update non-finite at tau={field.time + dt:.6g}")
    return LogField(v_new, field.time + dt), pressure


@dataclass
class HJRun:
    """Series output of a Hamilton-Jacobi march (tau time scale)."""

    times: np.ndarray  # per-step times including tau = 0
    series: np.ndarray  # rho_n (eps scheme) or P_n (limit scheme); series[0] is initial
    snapshots: list[tuple[float, np.ndarray]]
    final: LogField
    kind: str  # "rho" | "pressure"
    min_renorm_error: float  # max |min_i v_i| seen after limit steps; 0 for eps scheme


def hj_timestep(
    grid: Grid,
    land: FitnessLandscape,
    c: float,
    eps: float,
    u0: np.ndarray,
    *,
    feedback: bool,
) -> float:
    """Stable explicit step for the HJ marches.

    Combines the Godunov characteristic bound, the ``eps`` diffusion bound
    and (for the eps scheme) the explicit competition-feedback bound
    ``dt <= eps / (2 * rho_bound)``.
    """
    dx = grid.dx
    slopes = np.abs(np.diff(u0)) / dx
    slope_bound = max(
        float(slopes.max(initial=0.0)) + abs(c) / 2.0,
        np.sqrt(max(land.max_value - land.offset, 0.0)) + abs(c),
        1.0,
    )
    dt = 0.4 * dx / (2.0 * slope_bound)
    if feedback and eps > 0:
        dt = min(dt, 0.4 * dx ** 2 / (2.0 * eps))
        rho_bound = max(log_mass(u0, eps, dx), land.max_value, 1.0)
        dt = min(dt, 0.5 * eps / rho_bound)
    return dt


def _run(
    stepper,
    u0: np.ndarray,
    grid: Grid,
    t_final: float,
    dt: float,
    snapshot_times: Sequence[float],
    kind: str,
    initial_series: float,
) -> HJRun:
    nt = max(1, int(np.ceil(t_final / dt)))
    dt = t_final / nt
    snap_steps = {min(nt, max(0, int(round(t / dt)))): t for t in snapshot_times}
    field = LogField(np.asarray(u0, dtype=float).copy(), 0.0)
    times = [0.0]
    series = [initial_series]
    snapshots: list[tuple[float, np.ndarray]] = []
    if 0 in snap_steps:
        snapshots.append((0.0, field.values.copy()))
    renorm = 0.0
    for k in range(1, nt + 1):
        field, value = stepper(field, dt)
        times.append(k * dt)
        series.append(value)
        if kind == "pressure":
            renorm = max(renorm, abs(float(np.min(field.values))))
        if k in snap_steps:
            snapshots.append((snap_steps[k], field.values.copy()))
    return HJRun(np.asarray(times), np.asarray(series), snapshots, field, kind, renorm)


def run_ap(
    land: FitnessLandscape,
    c: float,
    eps: float,
    u0: np.ndarray,
    grid: Grid,
    t_final: float,
    dt: float | None = None,
    *,
    snapshot_times: Sequence[float] = (),
) -> HJRun:
    """March the eps > 0 scheme to ``tau = t_final``; series holds rho_n."""
    if dt is None:
        dt = hj_timestep(grid, land, c, eps, np.asarray(u0, dtype=float), feedback=True)

    def stepper(field: LogField, step_dt: float):
        return ap_step(field, grid, land, c, eps, step_dt)

    rho0 = log_mass(np.asarray(u0, dtype=float), eps, grid.dx)
    return _run(stepper, u0, grid, t_final, dt, snapshot_times, "rho", rho0)


def run_limit(
    land: FitnessLandscape,
    c: float,
    u0: np.ndarray,
    grid: Grid,
    t_final: float,
    dt: float | None = None,
    *,
    snapshot_times: Sequence[float] = (),
) -> HJRun:
    """March the limit scheme; series holds the pressure P_n (P_0 = nan)."""
    u0 = np.asarray(u0, dtype=float) - float(np.min(u0))
    if dt is None:
        dt = hj_timestep(grid, land, c, 0.0, u0, feedback=False)

    def stepper(field: LogField, step_dt: float):
        return limit_step(field, grid, land, c, step_dt)

    return _run(stepper, u0, grid, t_final, dt, snapshot_times, "pressure", float("nan"))


@dataclass
class ConsistencyReport:
    """Sup-norm comparison between -eps*log(density) and a log-field."""

    max_abs_diff: float
    window_size: int
    n_non_comparable: int
    density_argmin: float  # argmin of -eps*log n = argmax of n, in log-grid coords
    logfield_argmin: float
    all_non_comparable: bool


def consistency_check(
    density: np.ndarray,
    density_grid: Grid,
    log_field: LogField,
    log_grid: Grid,
    eps: float,
    *,
    offset: float = 0.0,
    boundary_skip: int = 5,
) -> ConsistencyReport:
    """Compare ``-eps*log(n(x + offset))`` against the log-field, reporting only.

    ``offset`` translates the density's coordinates (use ``eps*c*t`` to move a
    lab-frame density into the co-moving frame of the log-field).  Nodes where
    the density is nonpositive are flagged as non-comparable and excluded, as
    are ``boundary_skip`` nodes at each end.

    Raises GridMismatch when the spacings differ or the translated density
    window does not cover any interior log-grid nodes.
    """
    if abs(density_grid.dx - log_grid.dx) > 1e-12 * max(density_grid.dx, log_grid.dx):
        raise GridMismatch(
            f"grid spacings differ: {density_grid.dx!r} vs {log_grid.dx!r}"
        )
    x_log = log_grid.nodes
    x_den = density_grid.nodes - offset  # density positions in log-field coordinates
    inside = (x_log >= x_den[0]) & (x_log <= x_den[-1])
    inside[:boundary_skip] = False
    if boundary_skip > 0:
        inside[-boundary_skip:] = False
    if not np.any(inside):
        raise GridMismatch("no overlap between the density window and the log grid")

    n_interp = np.interp(x_log[inside], x_den, density)
    comparable = n_interp > 0.0
    n_non = int(np.count_nonzero(~comparable))
    u = log_field.values[inside]
    if not np.any(comparable):
        return ConsistencyReport(
            max_abs_diff=float("nan"),
            window_size=0,
            n_non_comparable=n_non,
            density_argmin=float("nan"),
            logfield_argmin=float(x_log[int(np.argmin(log_field.values))]),
            all_non_comparable=True,
        )
    with np.errstate(divide="ignore"):
        u_fd = -eps * np.log(n_interp[comparable])
    diff = float(np.max(np.abs(u_fd - u[comparable])))
    win_x = x_log[inside][comparable]
    return ConsistencyReport(
        max_abs_diff=diff,
        window_size=int(np.count_nonzero(comparable)),
        n_non_comparable=n_non,
        density_argmin=float(win_x[int(np.argmin(u_fd))]),
        logfield_argmin=float(x_log[int(np.argmin(log_field.values))]),
        all_non_comparable=False,
    )
