"""Component-count probabilities for one-dimensional ad hoc networks.

Closed-form evaluation of the probability that n uniform nodes on a
segment (optionally with a fixed access point at 0) form exactly m
connected components, plus a seeded Monte Carlo simulator, a brute-force
quadrature oracle for small n, and a sweep CLI that reproduces the
probability-versus-L/r figure data.
"""

from .exact import (
    ExactValue,
    ModelKind,
    Ratio,
    binomial,
    distribution,
    q_1,
    q_m,
    truncation_index,
)
from .model import (
    ComponentDistribution,
    InvalidConfigError,
    NetworkConfig,
    Realization,
    count_components,
    validate_config,
)
from .montecarlo import (
    ComparisonReport,
    McEstimate,
    compare,
    estimate_distribution,
    sample_realization,
    wilson_interval,
)
from .oracle import QuadratureResult, quadrature_distribution, quadrature_q_m
from .sweep import SweepRow, SweepSpec, figure_files, run_validation, sweep_rows

__version__ = "0.1.0"

__all__ = [
    "ComponentDistribution",
    "ComparisonReport",
    "ExactValue",
    "InvalidConfigError",
    "McEstimate",
    "ModelKind",
    "NetworkConfig",
    "QuadratureResult",
    "Ratio",
    "Realization",
    "SweepRow",
    "SweepSpec",
    "binomial",
    "compare",
    "count_components",
    "distribution",
    "estimate_distribution",
    "figure_files",
    "q_1",
    "q_m",
    "quadrature_distribution",
    "quadrature_q_m",
    "run_validation",
    "sample_realization",
    "sweep_rows",
    "truncation_index",
    "validate_config",
    "wilson_interval",
]
