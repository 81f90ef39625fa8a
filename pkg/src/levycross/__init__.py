"""First passage of Levy processes across power-law boundaries r * t^b.

Analytic tail functionals, relative-stability classification, norming-function
solvers, exact event-driven path simulation, and a reproducible Monte-Carlo
harness for the passage-time limit statements.
"""

from .errors import (
    ConfigError,
    ContractError,
    DomainError,
    LevycrossError,
    NumericalError,
    RangeError,
    SizeError,
    SolverError,
)
from .estimators import (
    ExperimentResult,
    RRow,
    convergence_probe,
    default_r_grid,
    equality_prob,
    overshoot_stats,
    passage_sweep,
    skorohod_sup_probe,
    truncated_moment,
)
from .jumps import (
    ExponentialTails,
    LogSquared,
    NoJumps,
    ParetoTails,
    TableTails,
    UnitRatePoissonNegative,
)
from .model import (
    LevyModel,
    brownian_drift,
    bv_drift,
    char_exponent,
    compound_poisson_with_drift,
    drift_minus_poisson,
    drift_only,
    load_model_spec,
    log_squared_model,
    parse_model_spec,
    tail,
    truncated_mean_nu,
    winsorized_mean_A,
    winsorized_variance_U,
)
from .oracles import (
    RandomWalkSkeleton,
    brute_force_small_instance,
    drift_passage_exact,
    log_example_C,
    poisson_drift_truncated_moment,
)
from .pathsim import (
    PassageRecord,
    PathEvents,
    dump_path_csv,
    first_passage,
    passage_pair,
    path_rng,
    running_max_at,
    sample_path,
    value_at,
)
from .stability import (
    NormingPair,
    StabilityReport,
    c_alpha,
    classify,
    g_func,
    invert_C,
    rv_index_estimate,
    solve_norming_B,
)

__version__ = "0.1.0"
