"""Discrete principal eigenpairs of the drift-diffusion-growth operator.

The drift form on a symmetric interval around ``center`` with zero Dirichlet
boundaries is

    -eps^2 p'' - eps*c p' - a(x) p = lambda p,    p > 0,

whose smallest eigenvalue decides persistence.  Multiplying by
``exp(c x / (2 eps))`` removes the drift and shifts the growth by ``-c^2/4``
(a Liouville transform), so we discretize the self-adjoint form

    -eps^2 P'' + (c^2/4 - a(x)) P = lambda P

with the standard three-point Laplacian, extract the ground state by inverse
power iteration with banded factorizations, and map back nodewise.  The
similarity is exact at the discrete level: the drift-form operator whose
residual we report has off-diagonals ``-(eps^2/dx^2) exp(+-c dx/(2 eps))``
(exponentially fitted), conjugate to the symmetric tridiagonal.

Weight factors ``exp(c x / (2 eps))`` are handled in log space throughout,
since they overflow double precision already at moderate ``x/eps``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import solveh_banded
from scipy.special import logsumexp

from .errors import AssumptionViolated, IterationDiverged, NotPositive, ZeroVector
from .landscape import FitnessLandscape


@dataclass
class EigenPair:
    """Principal eigenvalue and positive eigenvector on a Dirichlet interval.

    ``vector`` holds drift-form nodal values on the full grid (zeros at both
    boundary nodes), normalized per ``normalization``: "L1" means
    ``dx * sum(vector) = 1``, "Linf" means ``max(vector) = 1``.  ``sym_log``
    keeps the log of the symmetrized eigenvector (up to an additive
    constant; ``-inf`` marks underflowed tails) for overflow-free reweighting.
    """

    eigenvalue: float
    vector: np.ndarray
    nodes: np.ndarray
    radius: float
    center: float
    eps: float
    drift: float
    normalization: str
    sym_log: np.ndarray
    residual: float
    iterations: int

    @property
    def dx(self) -> float:
        return float(self.nodes[1] - self.nodes[0])

    def renormalized(self, normalization: str) -> np.ndarray:
        """The eigenvector under the requested normalization."""
        if normalization == self.normalization:
            return self.vector
        if normalization == "Linf":
            return self.vector / float(self.vector.max())
        if normalization == "L1":
            return self.vector / (self.dx * float(self.vector.sum()))
        raise ValueError(f"unknown normalization {normalization!r}")


def symmetrized_tridiagonal(
    growth: Callable[[np.ndarray], np.ndarray],
    c: float,
    eps: float,
    interior_nodes: np.ndarray,
    dx: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal and off-diagonal of the symmetrized Dirichlet operator."""
    potential = c * c / 4.0 - np.asarray(growth(interior_nodes), dtype=float)
    diag = 2.0 * eps ** 2 / dx ** 2 + potential
    off = np.full(len(interior_nodes) - 1, -(eps ** 2) / dx ** 2)
    return diag, off


def _tridiag_matvec(diag: np.ndarray, off: np.ndarray, v: np.ndarray) -> np.ndarray:
    out = diag * v
    out[:-1] += off * v[1:]
    out[1:] += off * v[:-1]
    return out


def solve_smallest_tridiagonal(
    diag: np.ndarray,
    off: np.ndarray,
    *,
    shift: float | None = None,
    tol: float = 1e-13,
    max_iter: int = 10_000,
) -> tuple[float, np.ndarray, int]:
    """Smallest eigenpair of a symmetric tridiagonal matrix.

    Inverse power iteration on ``A - shift*I``; the default shift is a
    Gershgorin lower bound minus one, which keeps the shifted matrix
    positive definite.  Iterates until the sup-norm residual reaches its
    machine-achievable floor (a small multiple of machine epsilon times the
    matrix scale) and the eigenvalue increment is below ``tol``; a residual
    that stops improving for many iterations is accepted as converged.
    Returns ``(eigenvalue, unit vector, iterations)``.

    Raises IterationDiverged when nothing settles within ``max_iter``.
    """
    diag = np.asarray(diag, dtype=float)
    off = np.asarray(off, dtype=float)
    n = len(diag)
    if shift is None:
        reach = np.zeros(n)
        reach[:-1] += np.abs(off)
        reach[1:] += np.abs(off)
        shift = float(np.min(diag - reach)) - 1.0
    ab = np.zeros((2, n))
    ab[0, 1:] = off
    ab[1, :] = diag - shift
    scale = float(np.max(np.abs(diag)) + 2.0 * (np.max(np.abs(off)) if len(off) else 0.0))
    res_floor = 8.0 * np.finfo(float).eps * scale

    v = np.ones(n) / np.sqrt(n)
    lam_prev = np.inf
    best_res = np.inf
    stagnant = 0
    for it in range(1, max_iter + 1):
        w = solveh_banded(ab, v)
        v = w / np.linalg.norm(w)
        av = _tridiag_matvec(diag, off, v)
        lam = float(v @ av)
        residual = float(np.max(np.abs(av - lam * v)) / np.max(np.abs(v)))
        increment_ok = abs(lam - lam_prev) <= tol * max(1.0, abs(lam))
        if increment_ok and residual <= res_floor:
            break
        if residual < 0.5 * best_res:
            best_res = residual
            stagnant = 0
        else:
            stagnant += 1
        if increment_ok and stagnant >= 80:
            break  # residual at its attainable floor for this matrix
        lam_prev = lam
    else:
        raise IterationDiverged(
            f"inverse power iteration did not converge in {max_iter} iterations"
        )
    if v.sum() < 0:
        v = -v
    return lam, v, it


def dense_smallest_eigenpair(diag: np.ndarray, off: np.ndarray) -> tuple[float, np.ndarray]:
    """Brute-force oracle: full dense spectrum, smallest eigenpair returned."""
    n = len(diag)
    a = np.diag(np.asarray(diag, dtype=float))
    idx = np.arange(n - 1)
    a[idx, idx + 1] = off
    a[idx + 1, idx] = off
    vals, vecs = np.linalg.eigh(a)
    v = vecs[:, 0]
    if v.sum() < 0:
        v = -v
    return float(vals[0]), v


def principal_eigenpair(
    growth: Callable[[np.ndarray], np.ndarray],
    c: float,
    eps: float,
    radius: float,
    n_nodes: int,
    *,
    center: float = 0.0,
    normalization: str = "L1",
    tol: float = 1e-13,
    max_iter: int = 10_000,
) -> EigenPair:
    """Principal Dirichlet eigenpair of ``-eps^2 d2/dx2 - eps*c d/dx - a(x)``.

    Args:
        growth: the growth rate ``a(x)`` (vectorized callable).
        c: drift speed.
        eps: mutation scale, > 0.
        radius: half-width of the interval ``(center - radius, center + radius)``.
        n_nodes: total node count including the two boundary nodes (>= 16).
        center: interval midpoint.
        normalization: "L1" (unit discrete integral, the default) or "Linf".

    Raises:
        IterationDiverged: iteration budget exhausted.
        NotPositive: the converged vector has a negative interior entry,
            which signals a discretization bug (tail entries may underflow
            to exact zero at small eps; zeros are tolerated).
    """
    if n_nodes < 16:
        raise ValueError("need at least 16 nodes")
    if eps <= 0 or radius <= 0:
        raise ValueError("eps and radius must be positive")
    if normalization not in ("L1", "Linf"):
        raise ValueError(f"unknown normalization {normalization!r}")

    nodes = np.linspace(center - radius, center + radius, n_nodes)
    dx = nodes[1] - nodes[0]
    interior = nodes[1:-1]
    potential = c * c / 4.0 - np.asarray(growth(interior), dtype=float)
    diag = 2.0 * eps ** 2 / dx ** 2 + potential
    off = np.full(n_nodes - 3, -(eps ** 2) / dx ** 2)
    # shift = min potential - 1 keeps A - shift*I positive definite
    # (the discrete Laplacian part is nonnegative definite)
    lam, v_sym, iters = solve_smallest_tridiagonal(
        diag, off, shift=float(np.min(potential)) - 1.0, tol=tol, max_iter=max_iter
    )
    if float(v_sym.min()) < 0.0:
        raise NotPositive("principal eigenvector has negative interior entries")

    # Entries below the inverse-iteration rounding floor carry no information
    # about the true (much smaller) tail; the reweighting exp(-c x / 2 eps)
    # grows without bound on the upwind side and would amplify that noise
    # past the physical peak, so trim them to exact zero first.
    trust = float(v_sym.max()) * 1e-13
    v_trim = np.where(v_sym > trust, v_sym, 0.0)
    with np.errstate(divide="ignore"):
        sym_log_int = np.where(v_trim > 0.0, np.log(np.maximum(v_trim, 1e-320)), -np.inf)
    log_p_int = sym_log_int - c * interior / (2.0 * eps)
    if normalization == "L1":
        log_norm = logsumexp(log_p_int) + np.log(dx)
    else:
        log_norm = float(np.max(log_p_int))
    vec = np.zeros(n_nodes)
    vec[1:-1] = np.exp(log_p_int - log_norm)

    sym_log = np.full(n_nodes, -np.inf)
    sym_log[1:-1] = sym_log_int - float(np.max(sym_log_int))

    res_sym = float(
        np.max(np.abs(_tridiag_matvec(diag, off, v_sym) - lam * v_sym))
        / np.max(np.abs(v_sym))
    )
    residual = max(res_sym, _drift_residual(vec, nodes, growth, c, eps, lam))
    return EigenPair(
        eigenvalue=lam,
        vector=vec,
        nodes=nodes,
        radius=radius,
        center=center,
        eps=eps,
        drift=c,
        normalization=normalization,
        sym_log=sym_log,
        residual=residual,
        iterations=iters,
    )


def _drift_residual(
    vec: np.ndarray,
    nodes: np.ndarray,
    growth: Callable[[np.ndarray], np.ndarray],
    c: float,
    eps: float,
    lam: float,
) -> float:
    """Sup-norm residual of the exponentially fitted drift-form operator.

    Measured on the stencil rows whose three entries are all inside the
    trusted support of the vector; rows straddling the trimmed tail see the
    truncation, not the operator, and are excluded.
    """
    dx = nodes[1] - nodes[0]
    interior = nodes[1:-1]
    p = vec[1:-1]
    coef = eps ** 2 / dx ** 2
    up = np.exp(c * dx / (2.0 * eps))
    diag = 2.0 * coef + c * c / 4.0 - np.asarray(growth(interior), dtype=float)
    av = diag * p
    av[:-1] += -coef * up * p[1:]
    av[1:] += -coef / up * p[:-1]
    # boundary neighbours are zero, nothing to add
    pos = p > 0.0
    full_row = pos.copy()
    full_row[1:-1] &= pos[:-2] & pos[2:]
    full_row[0] = full_row[-1] = False
    if not np.any(full_row):
        return float("nan")
    return float(np.max(np.abs(av[full_row] - lam * p[full_row])) / np.max(np.abs(p)))


def rayleigh_quotient(
    vec: np.ndarray,
    growth,
    eps: float,
    nodes: np.ndarray,
) -> float:
    """Discrete Rayleigh quotient with forward differences.

    ``(eps^2 * sum |D+ v|^2 dx - sum growth(x) v^2 dx) / (sum v^2 dx)`` for a
    vector vanishing at both boundary nodes.  ``growth`` may be a callable
    or a nodal array (pass ``a(x) - c^2/4`` to match the symmetrized form).
    """
    vec = np.asarray(vec, dtype=float)
    nodes = np.asarray(nodes, dtype=float)
    norm = float(np.max(np.abs(vec)))
    if norm == 0.0:
        raise ZeroVector("Rayleigh quotient of the zero vector")
    if abs(vec[0]) > 1e-12 * norm or abs(vec[-1]) > 1e-12 * norm:
        raise ValueError("vector must vanish at the boundary nodes")
    dx = float(nodes[1] - nodes[0])
    g = np.asarray(growth(nodes) if callable(growth) else growth, dtype=float)
    grad_sq = float(np.sum((np.diff(vec) / dx) ** 2)) * dx
    num = eps ** 2 * grad_sq - float(np.sum(g * vec ** 2)) * dx
    den = float(np.sum(vec ** 2)) * dx
    return num / den


@dataclass(frozen=True)
class DecayEnvelope:
    """Two-sided exponential envelope rates for the sup-normalized eigenvector.

    Lower rate ``c/2`` anchored at the eigenvector maximum; upper rate
    ``(-c + sqrt(2c^2 + 4*delta_floor)) / 2`` anchored at the negativity
    radius, measured from ``origin``.
    """

    kappa_lower: float
    kappa_upper: float
    anchor: float | None = None
    origin: float = 0.0


def decay_envelope(
    c: float, delta_floor: float, *, anchor: float | None = None, origin: float = 0.0
) -> DecayEnvelope:
    """Build the analytic envelope; requires a positive decay floor."""
    if delta_floor is None or delta_floor <= 0:
        raise AssumptionViolated("decay envelope needs a positive landscape decay floor")
    upper = (-c + np.sqrt(2.0 * c * c + 4.0 * delta_floor)) / 2.0
    if upper <= c / 2.0:
        raise AssumptionViolated(
            "upper envelope rate must exceed c/2 (requires delta_floor > c^2/2)"
        )
    return DecayEnvelope(kappa_lower=c / 2.0, kappa_upper=upper, anchor=anchor, origin=origin)


@dataclass
class EnvelopeReport:
    """Nodewise envelope verification (report only, nothing is asserted)."""

    region_idx: np.ndarray
    lower_violation_idx: np.ndarray
    upper_violation_idx: np.ndarray
    worst_lower_ratio: float  # max over region of lower_bound / p  (>1 means violated)
    worst_upper_ratio: float  # max over region of p / upper_bound
    anchor: float

    @property
    def n_violations(self) -> int:
        return len(self.lower_violation_idx) + len(self.upper_violation_idx)


def check_decay_envelope(
    pair: EigenPair,
    env: DecayEnvelope,
    r0: float,
    *,
    boundary_skip: int = 3,
) -> EnvelopeReport:
    """Verify the two-sided envelope on the region ``|x - origin| > r0``.

    The eigenvector is sup-normalized first; ``boundary_skip`` nodes at each
    end are excluded.  Violation indices refer to the pair's node array.
    """
    p = pair.renormalized("Linf")
    nodes = pair.nodes
    anchor = env.anchor if env.anchor is not None else float(nodes[int(np.argmax(p))])
    xi = np.abs(nodes - env.origin)
    region = xi > r0
    region[:boundary_skip] = False
    if boundary_skip > 0:
        region[-boundary_skip:] = False
    idx = np.nonzero(region)[0]

    lower = np.exp(-env.kappa_lower * np.abs(nodes[idx] - anchor) / pair.eps)
    upper = np.minimum(1.0, np.exp(-env.kappa_upper * (xi[idx] - r0) / pair.eps))
    pv = p[idx]
    slack = 1.0 + 1e-9
    lower_bad = idx[pv * slack < lower]
    upper_bad = idx[pv > upper * slack]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        ratios_lo = np.where(pv > 0, lower / np.maximum(pv, 1e-320), np.inf)
        ratios_hi = np.where(upper > 0, pv / upper, np.inf)
    return EnvelopeReport(
        region_idx=idx,
        lower_violation_idx=lower_bad,
        upper_violation_idx=upper_bad,
        worst_lower_ratio=float(np.max(ratios_lo, initial=0.0)),
        worst_upper_ratio=float(np.max(ratios_hi, initial=0.0)),
        anchor=anchor,
    )


def weighted_rescale(pair: EigenPair, c: float, eps: float) -> np.ndarray:
    """Reweighted eigenvector ``p * exp(c x / (2 eps))`` at unit discrete L1.

    This undoes the Liouville weight, so the result concentrates near the
    true (unlagged) maxima; its argmax is the curvature-selected peak
    prediction.  Evaluated in log space to avoid overflow at small eps.
    """
    if (
        pair.sym_log is not None
        and abs(c - pair.drift) <= 1e-15 * max(1.0, abs(c))
        and abs(eps - pair.eps) <= 1e-15 * eps
    ):
        logw = pair.sym_log
    else:
        with np.errstate(divide="ignore"):
            logw = np.where(
                pair.vector > 0.0, np.log(np.maximum(pair.vector, 1e-320)), -np.inf
            ) + c * pair.nodes / (2.0 * eps)
    log_norm = logsumexp(logw) + np.log(pair.dx)
    return np.exp(logw - log_norm)


@dataclass
class ConvergenceTable:
    """Eigenvalues over a (radius, eps) grid with aligned spacings."""

    radii: np.ndarray  # actual half-widths used (aligned to the common dx)
    eps_values: np.ndarray
    eigenvalues: np.ndarray  # shape (len(radii), len(eps_values))
    dx: float
    monotone_in_radius: bool


def eigenvalue_convergence_table(
    land: FitnessLandscape,
    c: float,
    eps_list: Sequence[float],
    radii: Sequence[float],
    *,
    center: float = 0.0,
    dx: float | None = None,
    require_monotone: bool = True,
    monotone_tol: float = 1e-10,
) -> ConvergenceTable:
    """Eigenvalue matrix over radii and mutation scales.

    A single spacing ``dx`` is used for every radius so the node sets nest
    and discrete domain monotonicity (eigenvalues nonincreasing in the
    radius) holds exactly; requested radii are snapped to the grid.
    """
    if not eps_list or not len(radii):
        raise ValueError("eps_list and radii must be nonempty")
    radii = sorted(float(r) for r in radii)
    if dx is None:
        dx = 2.0 * radii[0] / 1024.0
    actual_r = []
    table = np.empty((len(radii), len(eps_list)))
    for i, r in enumerate(radii):
        n = int(round(2.0 * r / dx)) + 1
        r_act = dx * (n - 1) / 2.0
        actual_r.append(r_act)
        for j, eps in enumerate(eps_list):
            pair = principal_eigenpair(
                land.value, c, eps, r_act, n, center=center, normalization="L1"
            )
            table[i, j] = pair.eigenvalue
    monotone = bool(np.all(np.diff(table, axis=0) <= monotone_tol))
    if require_monotone and not monotone:
        raise RuntimeError("eigenvalue table violates domain monotonicity in the radius")
    return ConvergenceTable(
        radii=np.asarray(actual_r),
        eps_values=np.asarray([float(e) for e in eps_list]),
        eigenvalues=table,
        dx=dx,
        monotone_in_radius=monotone,
    )
