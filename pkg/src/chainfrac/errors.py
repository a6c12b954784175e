"""Exception hierarchy for chainfrac.

Every error raised on a contract violation derives from ChainfracError so CLI
and tests can distinguish model errors from genuine bugs.
"""


class ChainfracError(Exception):
    """Base class for all chainfrac contract errors."""


class InvalidSpec(ChainfracError):
    """A potential or environment specification failed construction checks."""


class NonpositiveStrain(ChainfracError):
    """A potential was evaluated at z <= 0 (model assigns infinite energy)."""


class NoMinimum(ChainfracError):
    """No interior ground state could be located for a potential."""


class NoInflection(ChainfracError):
    """No convex-to-concave transition point could be located."""


class DeltaNotNormalized(ChainfracError):
    """A rescaled-threshold quantity was requested but some ground state != 1."""


class LengthMismatch(ChainfracError):
    """A strain profile's length does not match the chain size."""


class OutOfBracket(ChainfracError):
    """A root-find target lies outside the admissible bracket."""


class NonpositiveLength(ChainfracError):
    """A prescribed mean strain is at or below the representable floor."""


class ElasticInfeasible(ChainfracError):
    """The mean strain exceeds the mean inflection point: no elastic profile."""


class InnerInfeasible(ChainfracError):
    """No branch (elastic or broken) admits a feasible strain split."""


class NoCrossing(ChainfracError):
    """The elastic gap never exceeded its tolerance on the scanned interval."""


class GridTooLarge(ChainfracError):
    """An oracle grid request exceeds the configured enumeration budget."""


class ConfigError(ChainfracError):
    """A CLI configuration file is malformed or inconsistent."""
