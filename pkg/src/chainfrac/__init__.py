"""Minimum energies and critical stretches of random nearest-neighbour chains.

A chain of n bonds, each carrying a convex-concave pair potential drawn from
a finite alphabet, is stretched to a prescribed mean strain. This package
computes the minimum mean energy with and without the elastic restriction
(no strain beyond its bond's inflection point), locates the critical stretch
where the two minima separate, and runs seeded convergence studies of the
two limit statements: the critical stretch approaches the mean ground state,
and for alphabets with all ground states at 1 the excess stretch scaled by
sqrt(n) approaches sqrt(beta / alpha), with alpha the harmonic mean of the
half-curvatures at the ground state and beta the smallest well depth carried
with positive probability.
"""

from .environment import (
    EnvironmentSpec,
    EnsembleStats,
    IIDLaw,
    MarkovLaw,
    PeriodicLaw,
    Realization,
    derive_seed,
    empirical_stats,
    ensemble_stats,
    marginal_distribution,
    realize,
    write_indices,
)
from .errors import (
    ChainfracError,
    ConfigError,
    DeltaNotNormalized,
    ElasticInfeasible,
    GridTooLarge,
    InnerInfeasible,
    InvalidSpec,
    LengthMismatch,
    NoCrossing,
    NoInflection,
    NoMinimum,
    NonpositiveLength,
    NonpositiveStrain,
    OutOfBracket,
)
from .oracle import (
    GridSpec,
    OracleResult,
    critical_stretch_scan,
    enumerate_minimize,
    grid_minimize,
)
from .potentials import (
    PotentialProps,
    PotentialSpec,
    ValidationReport,
    evaluate,
    evaluate_many,
    ground_state,
    inflection_point,
    lennard_jones,
    morse,
    nondegeneracy_constant,
    potential_props,
    scaled_shifted,
    validate_assumptions,
    well_depth,
)
from .solver import (
    MinimizeResult,
    elastic_minimize,
    energy_of_strains,
    global_minimize,
    kkt_residual,
    lambda_root,
)
from .threshold import (
    CriticalStretchResult,
    StudyRow,
    convergence_study,
    critical_stretch,
    elastic_gap,
    homogenized_checks,
    rescaled_threshold,
    write_rows_csv,
)

__version__ = "0.1.0"

__all__ = [
    "ChainfracError",
    "ConfigError",
    "CriticalStretchResult",
    "DeltaNotNormalized",
    "ElasticInfeasible",
    "EnsembleStats",
    "EnvironmentSpec",
    "GridSpec",
    "GridTooLarge",
    "IIDLaw",
    "InnerInfeasible",
    "InvalidSpec",
    "LengthMismatch",
    "MarkovLaw",
    "MinimizeResult",
    "NoCrossing",
    "NoInflection",
    "NoMinimum",
    "NonpositiveLength",
    "NonpositiveStrain",
    "OracleResult",
    "OutOfBracket",
    "PeriodicLaw",
    "PotentialProps",
    "PotentialSpec",
    "Realization",
    "StudyRow",
    "ValidationReport",
    "convergence_study",
    "critical_stretch",
    "critical_stretch_scan",
    "derive_seed",
    "elastic_gap",
    "elastic_minimize",
    "empirical_stats",
    "energy_of_strains",
    "ensemble_stats",
    "enumerate_minimize",
    "evaluate",
    "evaluate_many",
    "global_minimize",
    "grid_minimize",
    "ground_state",
    "homogenized_checks",
    "inflection_point",
    "kkt_residual",
    "lambda_root",
    "lennard_jones",
    "marginal_distribution",
    "morse",
    "nondegeneracy_constant",
    "potential_props",
    "realize",
    "rescaled_threshold",
    "scaled_shifted",
    "validate_assumptions",
    "well_depth",
    "write_indices",
]
