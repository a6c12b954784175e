"""Convex-concave pair potentials for chains of particles.

Each potential J maps a bond strain z > 0 to an energy. Supported families
share one qualitative shape: a hard repulsive wall at small z, a single well
of depth -J(delta) at the ground state delta, a single inflection point
z_infl > delta where the response turns concave, and a tail that climbs
monotonically back to zero from below. The derivative J' therefore has a
single hump: increasing on (0, z_infl), decreasing on (z_infl, inf).

Families
--------
lennard_jones(m, n, depth)
    J(z) = depth * (n z^-m - m z^-n) / (m - n), normalized so the ground
    state sits at z = 1 with J(1) = -depth and J''(1) = depth * m * n.
morse(depth, width)
    J(z) = depth * (u^2 - 2u), u = exp(-width (z - 1)); ground state 1,
    J''(1) = 2 * depth * width^2, inflection at 1 + ln(2)/width.
scaled_shifted(base, scale, depth_scale)
    J(z) = depth_scale * J_base(z / scale): stretches the ground state and
    inflection by `scale`, the energy axis by `depth_scale`.

Strains are modeled as infinite-energy at z <= 0 (NonpositiveStrain) and the
tail is truncated to exactly zero beyond strain_cap = 1e6 * delta, which is
far below double precision resolution of the closed forms there.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import InvalidSpec, NonpositiveStrain

FLOOR_FACTOR = 1e-6
CAP_FACTOR = 1e6

_MIN_CURVATURE = 1e-10

LENNARD_JONES = "lennard_jones"
MORSE = "morse"
SCALED_SHIFTED = "scaled_shifted"


@dataclass(frozen=True)
class PotentialSpec:
    """Immutable description of one potential family member.

    `params` holds the family parameters in a fixed order:
    lennard_jones -> (m, n, depth); morse -> (depth, width);
    scaled_shifted -> (scale, depth_scale) with `base` set.
    """

    family: str
    params: tuple[float, ...]
    base: "PotentialSpec | None" = None

    def __post_init__(self) -> None:
        if self.family == LENNARD_JONES:
            if len(self.params) != 3:
                raise InvalidSpec("lennard_jones takes (m, n, depth)")
            m, n, depth = self.params
            if not (m > n > 0.0):
                raise InvalidSpec(f"need exponents m > n > 0, got m={m}, n={n}")
            if depth <= 0.0:
                raise InvalidSpec(f"well depth must be positive, got {depth}")
        elif self.family == MORSE:
            if len(self.params) != 2:
                raise InvalidSpec("morse takes (depth, width)")
            depth, width = self.params
            if depth <= 0.0 or width <= 0.0:
                raise InvalidSpec(f"depth and width must be positive, got {self.params}")
        elif self.family == SCALED_SHIFTED:
            if self.base is None:
                raise InvalidSpec("scaled_shifted needs a base spec")
            if len(self.params) != 2:
                raise InvalidSpec("scaled_shifted takes (scale, depth_scale)")
            scale, depth_scale = self.params
            if scale <= 0.0 or depth_scale <= 0.0:
                raise InvalidSpec(f"scale factors must be positive, got {self.params}")
        else:
            raise InvalidSpec(f"unknown potential family {self.family!r}")
        if curvature_at_ground_state(self) < _MIN_CURVATURE:
            raise InvalidSpec("degenerate well: curvature at the ground state is ~0")


def lennard_jones(m: float = 12.0, n: float = 6.0, depth: float = 1.0) -> PotentialSpec:
    """Generalized Lennard-Jones potential with ground state at 1."""
    return PotentialSpec(LENNARD_JONES, (float(m), float(n), float(depth)))


def morse(depth: float = 1.0, width: float = 6.0) -> PotentialSpec:
    """Morse potential with ground state at 1."""
    return PotentialSpec(MORSE, (float(depth), float(width)))


def scaled_shifted(
    base: PotentialSpec, scale: float = 1.0, depth_scale: float = 1.0
) -> PotentialSpec:
    """Rescale a base potential: J(z) = depth_scale * J_base(z / scale)."""
    return PotentialSpec(SCALED_SHIFTED, (float(scale), float(depth_scale)), base=base)


def ground_state(spec: PotentialSpec) -> float:
    """Strain of the unique interior minimum (closed form per family)."""
    if spec.family in (LENNARD_JONES, MORSE):
        return 1.0
    scale, _ = spec.params
    return scale * ground_state(spec.base)


def curvature_at_ground_state(spec: PotentialSpec) -> float:
    if spec.family == LENNARD_JONES:
        m, n, depth = spec.params
        return depth * m * n
    if spec.family == MORSE:
        depth, width = spec.params
        return 2.0 * depth * width * width
    scale, depth_scale = spec.params
    return depth_scale / (scale * scale) * curvature_at_ground_state(spec.base)


def well_depth(spec: PotentialSpec) -> float:
    """-J(delta), the depth of the energy well."""
    if spec.family == LENNARD_JONES:
        return spec.params[2]
    if spec.family == MORSE:
        return spec.params[0]
    _, depth_scale = spec.params
    return depth_scale * well_depth(spec.base)


def inflection_point(spec: PotentialSpec) -> float:
    """Strain where J'' changes sign (closed form per family)."""
    if spec.family == LENNARD_JONES:
        m, n, _ = spec.params
        return ((m + 1.0) / (n + 1.0)) ** (1.0 / (m - n))
    if spec.family == MORSE:
        _, width = spec.params
        return 1.0 + math.log(2.0) / width
    scale, _ = spec.params
    return scale * inflection_point(spec.base)


def strain_floor(spec: PotentialSpec) -> float:
    """Lower guard for root searches near the repulsive wall."""
    return FLOOR_FACTOR * ground_state(spec)


def strain_cap(spec: PotentialSpec) -> float:
    """Strain beyond which the tail is truncated to exactly zero."""
    return CAP_FACTOR * ground_state(spec)


@lru_cache(maxsize=None)
def scalar_functions(
    spec: PotentialSpec,
) -> tuple[Callable[[float], float], ...]:
    """Closed-form scalar evaluators (J, J', J'', J''') for hot loops.

    Each closure raises NonpositiveStrain at z <= 0 and returns exactly 0.0
    beyond the strain cap.
    """
    cap = strain_cap(spec)

    if spec.family == LENNARD_JONES:
        m, n, depth = spec.params
        c0 = depth / (m - n)
        c1 = depth * m * n / (m - n)

        def f0(z: float) -> float:
            if z <= 0.0:
                raise NonpositiveStrain(f"strain {z} <= 0")
            if z > cap:
                return 0.0
            return c0 * (n * z ** -m - m * z ** -n)

        def f1(z: float) -> float:
            if z <= 0.0:
                raise NonpositiveStrain(f"strain {z} <= 0")
            if z > cap:
                return 0.0
            return c1 * (z ** (-n - 1.0) - z ** (-m - 1.0))

        def f2(z: float) -> float:
            if z <= 0.0:
                raise NonpositiveStrain(f"strain {z} <= 0")
            if z > cap:
                return 0.0
            return c1 * ((m + 1.0) * z ** (-m - 2.0) - (n + 1.0) * z ** (-n - 2.0))

        def f3(z: float) -> float:
            if z <= 0.0:
                raise NonpositiveStrain(f"strain {z} <= 0")
            if z > cap:
                return 0.0
            return c1 * (
                (n + 1.0) * (n + 2.0) * z ** (-n - 3.0)
                - (m + 1.0) * (m + 2.0) * z ** (-m - 3.0)
            )

        return (f0, f1, f2, f3)

    if spec.family == MORSE:
        depth, a = spec.params

        def f0(z: float) -> float:
            if z <= 0.0:
                raise NonpositiveStrain(f"strain {z} <= 0")
            if z > cap:
                return 0.0
            u = math.exp(-a * (z - 1.0))
            return depth * (u * u - 2.0 * u)

        def f1(z: float) -> float:
            if z <= 0.0:
                raise NonpositiveStrain(f"strain {z} <= 0")
            if z > cap:
                return 0.0
            u = math.exp(-a * (z - 1.0))
            return 2.0 * a * depth * (u - u * u)

        def f2(z: float) -> float:
            if z <= 0.0:
                raise NonpositiveStrain(f"strain {z} <= 0")
            if z > cap:
                return 0.0
            u = math.exp(-a * (z - 1.0))
            return 2.0 * a * a * depth * (2.0 * u * u - u)

        def f3(z: float) -> float:
            if z <= 0.0:
                raise NonpositiveStrain(f"strain {z} <= 0")
            if z > cap:
                return 0.0
            u = math.exp(-a * (z - 1.0))
            return 2.0 * a ** 3 * depth * (u - 4.0 * u * u)

        return (f0, f1, f2, f3)

    # scaled_shifted
    scale, depth_scale = spec.params
    base_funcs = scalar_functions(spec.base)
    out = []
    for order in range(4):
        bf = base_funcs[order]
        factor = depth_scale / scale ** order

        def fk(z: float, bf=bf, factor=factor) -> float:
            if z <= 0.0:
                raise NonpositiveStrain(f"strain {z} <= 0")
            if z > cap:
                return 0.0
            return factor * bf(z / scale)

        out.append(fk)
    return tuple(out)


def evaluate(spec: PotentialSpec, z: float, order: int = 0) -> float:
    """Evaluate J or one of its first three derivatives at a scalar strain."""
    if not 0 <= order <= 3:
        raise ValueError(f"order must be in 0..3, got {order}")
    return scalar_functions(spec)[order](float(z))


def evaluate_many(spec: PotentialSpec, z: np.ndarray, order: int = 0) -> np.ndarray:
    """Vectorized evaluate over an array of strains."""
    if not 0 <= order <= 3:
        raise ValueError(f"order must be in 0..3, got {order}")
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0.0):
        raise NonpositiveStrain("some strain <= 0")
    cap = strain_cap(spec)

    if spec.family == LENNARD_JONES:
        m, n, depth = spec.params
        c1 = depth * m * n / (m - n)
        if order == 0:
            res = depth / (m - n) * (n * z ** -m - m * z ** -n)
        elif order == 1:
            res = c1 * (z ** (-n - 1.0) - z ** (-m - 1.0))
        elif order == 2:
            res = c1 * ((m + 1.0) * z ** (-m - 2.0) - (n + 1.0) * z ** (-n - 2.0))
        else:
            res = c1 * (
                (n + 1.0) * (n + 2.0) * z ** (-n - 3.0)
                - (m + 1.0) * (m + 2.0) * z ** (-m - 3.0)
            )
    elif spec.family == MORSE:
        depth, a = spec.params
        u = np.exp(-a * (z - 1.0))
        if order == 0:
            res = depth * (u * u - 2.0 * u)
        elif order == 1:
            res = 2.0 * a * depth * (u - u * u)
        elif order == 2:
            res = 2.0 * a * a * depth * (2.0 * u * u - u)
        else:
            res = 2.0 * a ** 3 * depth * (u - 4.0 * u * u)
    else:
        scale, depth_scale = spec.params
        res = depth_scale / scale ** order * evaluate_many(spec.base, z / scale, order)

    return np.where(z > cap, 0.0, res)


@dataclass(frozen=True)
class PotentialProps:
    """Derived constants of one potential.

    Attributes
    ----------
    ground_state : strain of the well minimum.
    well_depth : -J(ground_state) > 0.
    inflection : convex-to-concave transition strain.
    curvature_at_min : J''(ground_state).
    c_lower, c_upper : realized non-degeneracy constants near the well:
        on (ground_state - c_lower, ground_state + c_lower) the curvature
        stays within [c_lower, c_upper] and |J'''| <= c_upper = 1/c_lower.
    """

    ground_state: float
    well_depth: float
    inflection: float
    curvature_at_min: float
    c_lower: float
    c_upper: float


def nondegeneracy_constant(spec: PotentialSpec, samples: int = 801, iters: int = 60) -> float:
    """Largest c with c <= J'' <= 1/c and |J'''| <= 1/c on (delta-c, delta+c).

    The window also has to satisfy c < delta < 1/c. Feasibility is checked on
    a uniform sample of the open window; the largest feasible c is located by
    bisection.
    """
    delta = ground_state(spec)

    def feasible(c: float) -> bool:
        if c <= 0.0 or not (c < delta < 1.0 / c):
            return False
        zs = np.linspace(delta - c, delta + c, samples)[1:-1]
        d2 = evaluate_many(spec, zs, 2)
        if d2.min() < c or d2.max() > 1.0 / c:
            return False
        d3 = np.abs(evaluate_many(spec, zs, 3))
        return bool(d3.max() <= 1.0 / c)

    lo = 0.0
    hi = delta
    if not feasible(1e-12):
        raise InvalidSpec("no admissible non-degeneracy window near the ground state")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return lo


def potential_props(spec: PotentialSpec) -> PotentialProps:
    """Bundle the derived constants of one potential."""
    c = nondegeneracy_constant(spec)
    return PotentialProps(
        ground_state=ground_state(spec),
        well_depth=well_depth(spec),
        inflection=inflection_point(spec),
        curvature_at_min=curvature_at_ground_state(spec),
        c_lower=c,
        c_upper=1.0 / c,
    )


@dataclass(frozen=True)
class CheckResult:
    label: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of the qualitative shape checks for one potential."""

    spec: PotentialSpec
    checks: tuple[CheckResult, ...]
    nondegeneracy: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def validate_assumptions(spec: PotentialSpec, grid_size: int = 400) -> ValidationReport:
    """Grid-check the shape assumptions the solvers rely on.

    Checks, on a log-spaced grid between the strain floor and cap:
    smooth finite values through the third derivative; strict convexity left
    of the inflection; nondecreasing response right of it; a non-degenerate
    well (largest admissible window constant, reported); nonpositive energy
    beyond the ground state; and a tail that climbs to zero monotonically.
    """
    if grid_size < 100:
        raise ValueError("grid_size must be at least 100")
    delta = ground_state(spec)
    z_infl = inflection_point(spec)
    lo, hi = strain_floor(spec), strain_cap(spec)
    grid = np.exp(np.linspace(math.log(lo), math.log(hi), grid_size))
    checks: list[CheckResult] = []

    finite = all(
        bool(np.isfinite(evaluate_many(spec, grid, k)).all()) for k in range(4)
    )
    checks.append(
        CheckResult(
            "smooth_finite_through_third_derivative",
            finite,
            f"grid of {grid_size} points on [{lo:.3g}, {hi:.3g}]",
        )
    )

    left = grid[(grid > lo) & (grid < z_infl * (1.0 - 1e-12))]
    d2_left = evaluate_many(spec, left, 2)
    convex = bool((d2_left > 0.0).all())
    checks.append(
        CheckResult(
            "convex_left_of_inflection",
            convex,
            f"min J'' = {d2_left.min():.6g} over {left.size} points",
        )
    )

    right = grid[grid >= z_infl]
    right = np.concatenate(([z_infl], right))
    d1_right = evaluate_many(spec, right, 1)
    slope_scale = max(1.0, float(d1_right[0]))
    nondecreasing = bool((d1_right >= -1e-12 * slope_scale).all())
    checks.append(
        CheckResult(
            "nondecreasing_right_of_inflection",
            nondecreasing,
            f"min J' = {d1_right.min():.6g} over {right.size} points",
        )
    )

    c = nondegeneracy_constant(spec)
    checks.append(
        CheckResult(
            "nondegenerate_well",
            c > 0.0,
            f"largest admissible window constant c = {c:.6g}",
        )
    )

    beyond = grid[grid >= delta]
    vals_beyond = evaluate_many(spec, beyond, 0)
    nonpositive = bool((vals_beyond <= 1e-15).all())
    checks.append(
        CheckResult(
            "nonpositive_beyond_ground_state",
            nonpositive,
            f"max J = {vals_beyond.max():.6g} on [{delta:.3g}, {hi:.3g}]",
        )
    )

    tail = grid[grid >= hi / 10.0]
    tail_vals = evaluate_many(spec, tail, 0)
    edge = abs(float(evaluate(spec, hi)))
    tail_ok = (
        bool((np.diff(tail_vals) >= -1e-18).all())
        and bool((np.diff(np.abs(tail_vals)) <= 1e-18).all())
        and edge <= 1e-9
    )
    checks.append(
        CheckResult(
            "tail_vanishes_monotonically",
            tail_ok,
            f"|J| at cap = {edge:.3g}",
        )
    )

    return ValidationReport(spec=spec, checks=tuple(checks), nondegeneracy=c)
