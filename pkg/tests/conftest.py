import numpy as np
import pytest

from levycross import (
    ExponentialTails,
    LevyModel,
    LogSquared,
    ParetoTails,
    TableTails,
    UnitRatePoissonNegative,
    brownian_drift,
    compound_poisson_with_drift,
    drift_minus_poisson,
    drift_only,
    log_squared_model,
)


def builtin_model_zoo():
    """One representative instance per built-in family configuration."""
    table = LevyModel(
        gamma=0.2,
        jumps=TableTails(
            xs_plus=tuple(np.geomspace(1e-4, 2.0, 12)),
            ts_plus=tuple(2.0 * np.geomspace(1e-4, 2.0, 12) ** -0.5),
            assume_finite_mean=True,
        ),
    )
    return {
        "drift_only": drift_only(3.0),
        "brownian": brownian_drift(1.0, 2.0),
        "poisson_drift": drift_minus_poisson(1.0),
        "poisson_drift_2": drift_minus_poisson(2.0),
        "exp_two_sided": LevyModel(gamma=0.3, jumps=ExponentialTails(1.0, 1.0, 0.5, 2.0)),
        "exp_neg_drift": compound_poisson_with_drift(1.0, lam_minus=1.0, alpha_minus=1.0),
        "pareto_bv": LevyModel(gamma=0.1, jumps=ParetoTails(1.0, 0.5, 0.5, 0.7, 1.0)),
        "pareto_ubv": LevyModel(gamma=0.0, jumps=ParetoTails(1.0, 1.5, 0.0, 0.5, 1.0)),
        "log_squared": log_squared_model(1.0),
        "table": table,
    }


@pytest.fixture(scope="session")
def model_zoo():
    return builtin_model_zoo()


@pytest.fixture(scope="session")
def poisson_drift():
    return drift_minus_poisson(1.0)
