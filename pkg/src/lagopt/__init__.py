"""Solvers and analysis for phenotype dynamics under shifting fitness optima.

The suite models a population density over a one-dimensional trait whose
growth landscape drifts linearly in time, with nonlocal competition through
the total mass.  It provides

* analytic landscapes, lagged optima and persistence thresholds (landscape),
* an explicit finite-difference solver for the density model (fd),
* an asymptotic-preserving Hamilton-Jacobi scheme and its vanishing-mutation
  limit scheme (hj),
* discrete principal eigenpairs via Liouville symmetrization (eigen),
* verdicts, concentration reports and profile comparisons (analysis),
* a config-driven experiment runner and CLI (config, runner, cli),
* the acceptance-check suites (verification).
"""

__version__ = "0.1.0"

from .landscape import (  # noqa: F401
    BumpTerm,
    FitnessLandscape,
    LaggedFitness,
    LaggedOptimum,
    ShiftSpec,
    TwoPeakLandscape,
    concentration_candidates,
    lagged_fitness_case2,
    lagged_optima,
    persistence_threshold_case1,
    quadratic_plus,
    quartic_plus,
    shallowest_peaks,
)
from .fd import (  # noqa: F401
    DensityField,
    Grid,
    RunDiagnostics,
    SimulationResult,
    cfl_timestep,
    gaussian_profile,
    simulate_case1,
    simulate_case2,
    step,
)
from .hj import (  # noqa: F401
    HJRun,
    LogField,
    ap_step,
    consistency_check,
    godunov_hamiltonian,
    limit_step,
    run_ap,
    run_limit,
)
from .eigen import (  # noqa: F401
    DecayEnvelope,
    EigenPair,
    check_decay_envelope,
    decay_envelope,
    eigenvalue_convergence_table,
    principal_eigenpair,
    rayleigh_quotient,
    weighted_rescale,
)
from .analysis import (  # noqa: F401
    ConcentrationReport,
    Verdict,
    build_concentration_report,
    classify,
    compare_profile_to_eigenvector,
    crossover_time,
)
