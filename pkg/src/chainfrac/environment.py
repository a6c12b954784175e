"""Random environments: which potential sits on which bond.

An EnvironmentSpec pairs an alphabet of potentials with a stationary law over
alphabet indices: iid draws, a deterministic periodic pattern, or a stationary
irreducible Markov chain started from its stationary distribution. A
Realization materializes the first n letters for one seed.

Reproducibility contract: realize(spec, n, seed) is a pure function of its
arguments. Sampling draws one uniform per bond from a PCG64 stream and maps
it through the inverse cdf, so realizations with the same seed are prefix
stable: growing n extends the letter sequence without changing earlier bonds.
Task seeds for sweeps come from derive_seed, a fixed splitmix64 mixing chain
that is part of the on-disk format and must never change.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from . import potentials as pot
from .errors import InvalidSpec
from .potentials import PotentialSpec

_MASK64 = (1 << 64) - 1

_WEIGHT_TOL = 1e-12
_STATIONARY_TOL = 1e-10
_DELTA_ONE_TOL = 1e-10


@dataclass(frozen=True)
class IIDLaw:
    """Independent draws with fixed letter probabilities."""

    weights: tuple[float, ...]


@dataclass(frozen=True)
class PeriodicLaw:
    """Deterministic repetition of a fixed letter pattern."""

    pattern: tuple[int, ...]


@dataclass(frozen=True)
class MarkovLaw:
    """Stationary Markov chain over letters.

    `transition` is the row-stochastic kernel, `initial` its stationary
    distribution (checked at construction of the environment).
    """

    transition: tuple[tuple[float, ...], ...]
    initial: tuple[float, ...]


Law = Union[IIDLaw, PeriodicLaw, MarkovLaw]


@dataclass(frozen=True)
class EnvironmentSpec:
    """Alphabet of potentials plus a stationary law over alphabet indices."""

    law: Law
    alphabet: tuple[PotentialSpec, ...]

    def __post_init__(self) -> None:
        if not self.alphabet:
            raise InvalidSpec("alphabet must contain at least one potential")
        k = len(self.alphabet)
        law = self.law
        if isinstance(law, IIDLaw):
            if len(law.weights) != k:
                raise InvalidSpec("need one weight per alphabet letter")
            w = np.asarray(law.weights, dtype=float)
            if np.any(w < 0.0):
                raise InvalidSpec("weights must be nonnegative")
            if abs(float(w.sum()) - 1.0) > _WEIGHT_TOL:
                raise InvalidSpec(f"weights sum to {w.sum()!r}, not 1")
        elif isinstance(law, PeriodicLaw):
            if not law.pattern:
                raise InvalidSpec("pattern must be nonempty")
            if any(not (0 <= i < k) for i in law.pattern):
                raise InvalidSpec("pattern indices must address the alphabet")
        elif isinstance(law, MarkovLaw):
            P = np.asarray(law.transition, dtype=float)
            pi = np.asarray(law.initial, dtype=float)
            if P.shape != (k, k) or pi.shape != (k,):
                raise InvalidSpec("transition must be k x k and initial length k")
            if np.any(P < 0.0) or np.any(pi < 0.0):
                raise InvalidSpec("probabilities must be nonnegative")
            if np.any(np.abs(P.sum(axis=1) - 1.0) > _WEIGHT_TOL):
                raise InvalidSpec("transition rows must sum to 1")
            if abs(float(pi.sum()) - 1.0) > _WEIGHT_TOL:
                raise InvalidSpec("initial distribution must sum to 1")
            if np.max(np.abs(pi @ P - pi)) > _STATIONARY_TOL:
                raise InvalidSpec("initial distribution is not stationary for the kernel")
            _check_irreducible(P, pi)
        else:
            raise InvalidSpec(f"unknown law {law!r}")


def _check_irreducible(P: np.ndarray, pi: np.ndarray) -> None:
    """Require the kernel restricted to the support of pi to be one closed,
    strongly connected communicating class."""
    support = np.flatnonzero(pi > 0.0)
    if support.size == 0:
        raise InvalidSpec("initial distribution has empty support")
    leak = P[np.ix_(support, np.setdiff1d(np.arange(P.shape[0]), support))]
    if leak.size and leak.max() > _WEIGHT_TOL:
        raise InvalidSpec("kernel leaks out of the support of the initial law")
    sub = P[np.ix_(support, support)] > 0.0
    for adjacency in (sub, sub.T):
        seen = {0}
        frontier = [0]
        while frontier:
            i = frontier.pop()
            for j in np.flatnonzero(adjacency[i]):
                if int(j) not in seen:
                    seen.add(int(j))
                    frontier.append(int(j))
        if len(seen) != support.size:
            raise InvalidSpec("kernel is not irreducible on the support")


@dataclass(frozen=True)
class Realization:
    """First n letters of one environment sample."""

    spec: EnvironmentSpec
    n: int
    seed: int
    indices: np.ndarray

    def __len__(self) -> int:
        return self.n


def mix64(x: int) -> int:
    """splitmix64 finalizer; the building block of derive_seed."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (x ^ (x >> 31)) & _MASK64


def derive_seed(master_seed: int, n: int, replicate: int) -> int:
    """Stable per-task seed for sweep cell (n, replicate).

    Fixed mixing chain: h = mix64(mix64(mix64(master) ^ n) ^ replicate).
    """
    h = mix64(master_seed & _MASK64)
    h = mix64(h ^ (n & _MASK64))
    h = mix64(h ^ (replicate & _MASK64))
    return h


def realize(spec: EnvironmentSpec, n: int, seed: int) -> Realization:
    """Sample the first n letters. Deterministic in (spec, n, seed)."""
    if n < 1:
        raise ValueError(f"chain needs at least one bond, got n={n}")
    law = spec.law
    if isinstance(law, PeriodicLaw):
        pattern = np.asarray(law.pattern, dtype=np.int64)
        reps = -(-n // pattern.size)
        indices = np.tile(pattern, reps)[:n]
        return Realization(spec=spec, n=n, seed=seed, indices=indices)

    rng = np.random.Generator(np.random.PCG64(seed & _MASK64))
    u = rng.random(n)
    if isinstance(law, IIDLaw):
        cum = np.cumsum(np.asarray(law.weights, dtype=float))
        indices = np.searchsorted(cum, u, side="right")
        np.clip(indices, 0, len(law.weights) - 1, out=indices)
        return Realization(spec=spec, n=n, seed=seed, indices=indices.astype(np.int64))

    # Markov: one uniform per step through the inverse cdf of the current row
    P = np.asarray(law.transition, dtype=float)
    cum_rows = np.cumsum(P, axis=1)
    cum_pi = np.cumsum(np.asarray(law.initial, dtype=float))
    k = P.shape[0]
    indices = np.empty(n, dtype=np.int64)
    state = min(int(np.searchsorted(cum_pi, u[0], side="right")), k - 1)
    indices[0] = state
    for t in range(1, n):
        state = min(int(np.searchsorted(cum_rows[state], u[t], side="right")), k - 1)
        indices[t] = state
    return Realization(spec=spec, n=n, seed=seed, indices=indices)


def write_indices(r: Realization, path: str) -> None:
    """Export the letter sequence as a newline-delimited index file."""
    with open(path, "w", encoding="ascii") as fh:
        for i in r.indices:
            fh.write(f"{int(i)}\n")


def marginal_distribution(spec: EnvironmentSpec) -> np.ndarray:
    """Per-letter marginal probability under the law."""
    k = len(spec.alphabet)
    law = spec.law
    if isinstance(law, IIDLaw):
        return np.asarray(law.weights, dtype=float)
    if isinstance(law, PeriodicLaw):
        counts = np.bincount(np.asarray(law.pattern, dtype=np.int64), minlength=k)
        return counts / counts.sum()
    return np.asarray(law.initial, dtype=float)


@dataclass(frozen=True)
class LetterStats:
    """Per-letter constants weighted into the ensemble statistics."""

    index: int
    probability: float
    ground_state: float
    well_depth: float
    inflection: float
    curvature_at_min: float
    energy_at_one: float


@dataclass(frozen=True)
class EnsembleStats:
    """Exact law-level statistics the finite-chain quantities converge to.

    alpha_underbar is the harmonic mean of half the curvature at the ground
    state; beta is the smallest well depth at strain 1 over the support. Both
    describe the rescaled regime and are None unless every supported letter
    has ground state 1 (within 1e-10).
    """

    mean_delta: float
    alpha_underbar: float | None
    beta: float | None
    max_inflection: float
    delta_is_one: bool
    per_letter: tuple[LetterStats, ...]

    @property
    def gamma_star(self) -> float | None:
        if self.alpha_underbar is None or self.beta is None:
            return None
        return float(np.sqrt(self.beta / self.alpha_underbar))


def ensemble_stats(spec: EnvironmentSpec) -> EnsembleStats:
    """Compute the law-level targets from closed-form letter constants."""
    probs = marginal_distribution(spec)
    letters = []
    for i, p in enumerate(spec.alphabet):
        letters.append(
            LetterStats(
                index=i,
                probability=float(probs[i]),
                ground_state=pot.ground_state(p),
                well_depth=pot.well_depth(p),
                inflection=pot.inflection_point(p),
                curvature_at_min=pot.curvature_at_ground_state(p),
                energy_at_one=pot.evaluate(p, 1.0),
            )
        )
    support = [ls for ls in letters if ls.probability > 0.0]
    mean_delta = sum(ls.probability * ls.ground_state for ls in support)
    max_inflection = max(ls.inflection for ls in support)
    delta_is_one = all(abs(ls.ground_state - 1.0) <= _DELTA_ONE_TOL for ls in support)
    alpha = beta = None
    if delta_is_one:
        inv_sum = sum(ls.probability / (0.5 * ls.curvature_at_min) for ls in support)
        alpha = 1.0 / inv_sum
        beta = min(-ls.energy_at_one for ls in support)
    return EnsembleStats(
        mean_delta=float(mean_delta),
        alpha_underbar=alpha,
        beta=beta,
        max_inflection=float(max_inflection),
        delta_is_one=delta_is_one,
        per_letter=tuple(letters),
    )


@dataclass(frozen=True)
class EmpiricalStats:
    """Statistics of one realization: mean ground state, and the smallest
    depth -J_i(1) over the bonds actually present."""

    mean_delta: float
    beta: float
    letter_counts: tuple[int, ...]


def empirical_stats(r: Realization) -> EmpiricalStats:
    counts = np.bincount(r.indices, minlength=len(r.spec.alphabet))
    deltas = np.array([pot.ground_state(p) for p in r.spec.alphabet])
    depths_at_one = np.array([-pot.evaluate(p, 1.0) for p in r.spec.alphabet])
    present = counts > 0
    mean_delta = float(deltas @ counts / r.n)
    beta = float(depths_at_one[present].min())
    return EmpiricalStats(
        mean_delta=mean_delta,
        beta=beta,
        letter_counts=tuple(int(c) for c in counts),
    )
