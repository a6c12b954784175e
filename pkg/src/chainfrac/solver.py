"""Chain energy minimization via the common-tension reduction.

In the elastic regime every bond sits on the convex branch of its potential,
so at the optimum all bonds carry one common tension and bonds with identical
potentials carry identical strains. That collapses the minimization to a
one-dimensional root-find on the tension, with one unknown strain per
distinct alphabet letter; the cost is independent of the chain length.

The unrestricted minimum is the better of the elastic solution and a family
of branch candidates in which a small set of bonds (one representative per
letter, since same-letter bonds are exchangeable) is pushed beyond its
inflection point while the remaining bonds are solved elastically at the
leftover mean strain. Branch searches run golden-section with a log-spaced
multistart, because the outer objective can have two local minima (a barely
stretched bond versus a far-tail one). Ties go to the elastic mode.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Iterator

import numpy as np

from . import potentials as pot
from .environment import Realization
from .errors import (
    ElasticInfeasible,
    InnerInfeasible,
    LengthMismatch,
    NonpositiveLength,
    OutOfBracket,
)
from .rootfind import expand_bracket_down, golden_minimize, newton_bisect

MODE_ELASTIC = "elastic"
MODE_GLOBAL = "global"
BRANCH_CONVEX = "convex"
BRANCH_CONCAVE = "concave"

MEAN_TOL = 1e-12
CLAMP_TOL = 1e-9
TIE_TOL = 1e-12
MULTISTART_POINTS = 32
SWEEP_TOL = 1e-10
MAX_SWEEPS = 40
_MULTIPLIER_FLOOR = -1e300


@dataclass(frozen=True)
class _Letter:
    """Everything the solver needs about one alphabet letter."""

    index: int
    count: int
    spec: pot.PotentialSpec
    delta: float
    inflection: float
    peak_slope: float  # largest tension the convex branch can carry
    floor: float
    cap: float


def _letters_of(r: Realization) -> list[_Letter]:
    values, counts = np.unique(np.asarray(r.indices), return_counts=True)
    out = []
    for idx, count in zip(values.tolist(), counts.tolist()):
        spec = r.spec.alphabet[idx]
        zf = pot.inflection_point(spec)
        out.append(
            _Letter(
                index=idx,
                count=count,
                spec=spec,
                delta=pot.ground_state(spec),
                inflection=zf,
                peak_slope=pot.evaluate(spec, zf, 1),
                floor=pot.strain_floor(spec),
                cap=pot.strain_cap(spec),
            )
        )
    return out


def energy_of_strains(r: Realization, z: np.ndarray) -> float:
    """Mean bond energy of a strain profile; +inf if any strain is <= 0."""
    z = np.asarray(z, dtype=float)
    if z.shape != (r.n,):
        raise LengthMismatch(f"profile has shape {z.shape}, chain has {r.n} bonds")
    if np.any(z <= 0.0):
        return math.inf
    indices = np.asarray(r.indices)
    total = 0.0
    for idx in np.unique(indices).tolist():
        total += float(pot.evaluate_many(r.spec.alphabet[idx], z[indices == idx], 0).sum())
    return total / r.n


def lambda_root(spec: pot.PotentialSpec, lam: float, branch: str) -> float:
    """Invert the tension: the unique z with J'(z) = lam on the given branch.

    The convex branch runs from the strain floor up to the inflection point
    (J' increasing); the concave branch from the inflection point outward
    (J' decreasing to zero). Residual |J'(z) - lam| <= 1e-12 * max(1, |lam|).
    """
    j0, j1, j2, j3 = pot.scalar_functions(spec)
    zf = pot.inflection_point(spec)
    peak = j1(zf)
    ftol = 1e-12 * max(1.0, abs(lam))
    if branch == BRANCH_CONVEX:
        if lam > peak:
            raise OutOfBracket(f"tension {lam} exceeds the convex-branch peak {peak}")
        if lam >= peak - ftol:
            return zf
        lo = pot.ground_state(spec)
        for _ in range(400):
            if j1(lo) - lam <= 0.0:
                break
            lo *= 0.5
        else:
            raise OutOfBracket(f"no convex-branch strain carries tension {lam}")
        guess = pot.ground_state(spec) + lam / j2(pot.ground_state(spec))
        x0 = guess if lo < guess < zf else None
        return newton_bisect(
            lambda z: j1(z) - lam, j2, lo, zf, x0=x0, ftol=ftol
        )
    if branch == BRANCH_CONCAVE:
        if not 0.0 < lam <= peak:
            raise OutOfBracket(
                f"tension {lam} outside the concave-branch range (0, {peak}]"
            )
        if lam >= peak - ftol:
            return zf
        hi = zf
        cap = pot.strain_cap(spec)
        for _ in range(400):
            hi *= 2.0
            if j1(hi) - lam <= 0.0 or hi > cap:
                break
        return newton_bisect(lambda z: j1(z) - lam, j2, zf, hi, ftol=ftol)
    raise ValueError(f"unknown branch {branch!r}")


@dataclass(frozen=True)
class MinimizeResult:
    """Outcome of a constrained-mean energy minimization."""

    profile: np.ndarray
    energy: float
    lam: float
    weak_set: tuple[int, ...]
    mode: str
    diagnostics: dict

    def to_json_dict(self) -> dict:
        return {
            "n": int(self.profile.size),
            "ell": float(self.profile.mean()),
            "energy": self.energy,
            "lambda": self.lam,
            "weak_set": list(self.weak_set),
            "mode": self.mode,
            "residuals": {
                k: v
                for k, v in self.diagnostics.items()
                if k.endswith("residual")
            },
        }


@dataclass
class _ElasticSolution:
    strains: dict[int, float]  # letter index -> common strain
    lam: float
    mean_energy: float
    evaluations: int
    mean_residual: float


def _elastic_core(
    letters: list[_Letter], ell: float, lam_guess: float | None = None
) -> _ElasticSolution:
    """Solve the capped convex problem for a letter multiset at mean ell."""
    total = sum(let.count for let in letters)
    weights = [let.count / total for let in letters]
    mean_inflection = sum(w * let.inflection for w, let in zip(weights, letters))
    z_min = max(let.floor for let in letters)
    if ell <= z_min:
        raise NonpositiveLength(f"mean strain {ell} is at or below the floor {z_min}")
    if ell > mean_inflection:
        raise ElasticInfeasible(
            f"mean strain {ell} exceeds the mean inflection point {mean_inflection}"
        )

    funcs = [pot.scalar_functions(let.spec) for let in letters]
    evals = 0

    def strain_at(lam: float, let: _Letter, j1, j2) -> float:
        if lam >= let.peak_slope:
            return let.inflection
        lo = let.delta
        for _ in range(200):
            if j1(lo) - lam <= 0.0:
                break
            lo *= 0.5
        else:
            # tension below anything this branch carries; strain collapses
            return lo
        guess = let.delta + lam / j2(let.delta)
        x0 = guess if lo < guess < let.inflection else None
        return newton_bisect(lambda z: j1(z) - lam, j2, lo, let.inflection, x0=x0,
                             ftol=1e-13 * max(1.0, abs(lam)))

    def mean_at(lam: float) -> float:
        nonlocal evals
        evals += 1
        return sum(
            w * strain_at(lam, let, f[1], f[2])
            for w, let, f in zip(weights, letters, funcs)
        )

    def slope_at(lam: float) -> float:
        out = 0.0
        for w, let, f in zip(weights, letters, funcs):
            if lam < let.peak_slope:
                out += w / f[2](strain_at(lam, let, f[1], f[2]))
        return out

    hi = max(let.peak_slope for let in letters)
    start = lam_guess if lam_guess is not None and lam_guess < hi else hi
    lo = expand_bracket_down(lambda lam: mean_at(lam) - ell, start, _MULTIPLIER_FLOOR)
    assert mean_at(lo) <= mean_at(hi) + 1e-12, "multiplier map must be nondecreasing"
    lam = newton_bisect(
        lambda lam: mean_at(lam) - ell,
        slope_at,
        lo,
        hi,
        x0=lam_guess if lam_guess is not None and lo < lam_guess < hi else None,
        ftol=MEAN_TOL * max(1.0, abs(ell)) * 0.1,
    )
    strains = {
        let.index: strain_at(lam, let, f[1], f[2]) for let, f in zip(letters, funcs)
    }
    mean = sum(w * strains[let.index] for w, let in zip(weights, letters))
    energy = sum(
        w * f[0](strains[let.index]) for w, let, f in zip(weights, letters, funcs)
    )
    return _ElasticSolution(
        strains=strains,
        lam=lam,
        mean_energy=energy,
        evaluations=evals,
        mean_residual=abs(mean - ell),
    )


def _profile_from_letters(r: Realization, strains: dict[int, float]) -> np.ndarray:
    indices = np.asarray(r.indices)
    z = np.empty(r.n, dtype=float)
    for idx, value in strains.items():
        z[indices == idx] = value
    return z


def _weak_set(r: Realization, z: np.ndarray) -> tuple[int, ...]:
    indices = np.asarray(r.indices)
    inflections = np.array(
        [pot.inflection_point(p) for p in r.spec.alphabet], dtype=float
    )
    return tuple(int(i) for i in np.flatnonzero(z > inflections[indices]))


def elastic_minimize(r: Realization, ell: float) -> MinimizeResult:
    """Minimum mean energy with every strain capped at its inflection point.

    At the optimum unclamped bonds share the tension Lambda while clamped
    bonds sit at their inflection point with J' <= Lambda.
    """
    sol = _elastic_core(_letters_of(r), ell)
    profile = _profile_from_letters(r, sol.strains)
    energy = energy_of_strains(r, profile)
    return MinimizeResult(
        profile=profile,
        energy=energy,
        lam=sol.lam,
        weak_set=(),
        mode=MODE_ELASTIC,
        diagnostics={
            "multiplier_evaluations": sol.evaluations,
            "mean_residual": sol.mean_residual,
        },
    )


@dataclass
class _BranchOutcome:
    energy: float
    broken: tuple[int, ...]
    broken_strains: tuple[float, ...]
    rest_strains: dict[int, float]
    lam: float
    evaluations: int
    stationarity_residual: float


def _candidate_broken_sets(
    letters: list[_Letter], bonds_by_letter: dict[int, np.ndarray], k: int
) -> Iterator[tuple[int, ...]]:
    """One representative bond set per letter multiset of size k."""
    for combo in combinations_with_replacement(letters, k):
        counts: dict[int, int] = {}
        for let in combo:
            counts[let.index] = counts.get(let.index, 0) + 1
        if any(counts[idx] > next(l.count for l in letters if l.index == idx)
               for idx in counts):
            continue
        bonds: list[int] = []
        for idx in sorted(counts):
            bonds.extend(int(b) for b in bonds_by_letter[idx][: counts[idx]])
        yield tuple(sorted(bonds))


def _local_minimum_brackets(
    points: np.ndarray, values: np.ndarray
) -> list[tuple[float, float]]:
    out = []
    last = len(values) - 1
    for j in range(len(values)):
        if not np.isfinite(values[j]):
            continue
        left_ok = j == 0 or not values[j - 1] < values[j]
        right_ok = j == last or not values[j + 1] < values[j]
        if left_ok and right_ok:
            out.append((points[max(0, j - 1)], points[min(last, j + 1)]))
    return out


def _minimize_branch(
    r: Realization,
    ell: float,
    letters: list[_Letter],
    broken: tuple[int, ...],
) -> _BranchOutcome | None:
    """Best energy with the given bonds beyond their inflection points."""
    n = r.n
    k = len(broken)
    indices = np.asarray(r.indices)
    broken_letters = [
        next(l for l in letters if l.index == int(indices[b])) for b in broken
    ]
    rest_counts: dict[int, int] = {l.index: l.count for l in letters}
    for let in broken_letters:
        rest_counts[let.index] -= 1
    rest = [
        _Letter(l.index, rest_counts[l.index], l.spec, l.delta, l.inflection,
                l.peak_slope, l.floor, l.cap)
        for l in letters
        if rest_counts[l.index] > 0
    ]
    n_rest = n - k

    evals = 0
    lam_cell: list[float | None] = [None]
    rest_mean_inflection = (
        sum(l.count * l.inflection for l in rest) / n_rest if rest else 0.0
    )
    rest_floor = max((l.floor for l in rest), default=0.0)

    def rest_energy(mean: float) -> tuple[float, _ElasticSolution | None]:
        nonlocal evals
        if n_rest == 0:
            return 0.0, None
        try:
            sol = _elastic_core(rest, mean, lam_guess=lam_cell[0])
        except (ElasticInfeasible, NonpositiveLength):
            return math.inf, None
        evals += sol.evaluations
        lam_cell[0] = sol.lam
        return sol.mean_energy * n_rest, sol

    funcs = [pot.scalar_functions(let.spec) for let in broken_letters]

    def total_energy(ys: np.ndarray) -> float:
        broken_sum = 0.0
        for y, let, f in zip(ys, broken_letters, funcs):
            if not let.inflection <= y <= let.cap:
                return math.inf
            broken_sum += f[0](y)
        rest_mean_strain = (n * ell - float(ys.sum())) / n_rest if n_rest else 0.0
        if n_rest and not rest_floor * 2.0 < rest_mean_strain <= rest_mean_inflection:
            return math.inf
        rest_sum, _ = rest_energy(rest_mean_strain) if n_rest else (0.0, None)
        return (broken_sum + rest_sum) / n

    def with_coordinate(ys: np.ndarray, i: int, y: float) -> np.ndarray:
        """Trial point with coordinate i set; without elastic bonds the last
        broken coordinate is dependent and absorbs the mean constraint."""
        trial = ys.copy()
        trial[i] = y
        if n_rest == 0 and i != k - 1:
            trial[k - 1] = n * ell - float(trial[: k - 1].sum())
        return trial

    def coordinate_window(ys: np.ndarray, i: int) -> tuple[float, float] | None:
        let = broken_letters[i]
        lo = let.inflection
        hi = let.cap
        if n_rest:
            others = float(ys.sum() - ys[i])
            lo = max(lo, n * ell - others - n_rest * rest_mean_inflection)
            hi = min(hi, n * ell - others - n_rest * rest_floor * 2.0)
        elif i == k - 1:
            # the final broken coordinate is pinned by the mean constraint
            pinned = n * ell - float(ys[: k - 1].sum())
            return (pinned, pinned) if lo <= pinned <= hi else None
        else:
            dep = broken_letters[k - 1]
            others = float(ys[: k - 1].sum() - ys[i])
            lo = max(lo, n * ell - others - dep.cap)
            hi = min(hi, n * ell - others - dep.inflection)
        return (lo, hi) if lo <= hi else None

    def sweep_coordinate(ys: np.ndarray, i: int) -> float:
        window = coordinate_window(ys, i)
        if window is None:
            return math.inf
        lo, hi = window

        def f(y: float) -> float:
            return total_energy(with_coordinate(ys, i, y))

        if hi - lo <= 1e-14 * max(1.0, hi):
            ys[:] = with_coordinate(ys, i, lo)
            return total_energy(ys)

        pts = np.geomspace(lo, hi, MULTISTART_POINTS)
        pts[0], pts[-1] = lo, hi
        vals = np.array([f(p) for p in pts])
        if not np.any(np.isfinite(vals)):
            return math.inf
        best_y, best_v = None, math.inf
        brackets = _local_minimum_brackets(pts, vals)
        brackets.sort(key=lambda ab: f((ab[0] + ab[1]) / 2.0))
        for a, b in brackets[:3]:
            y, v = golden_minimize(f, a, b, rtol=1e-10)
            if v < best_v:
                best_y, best_v = y, v
        if best_y is None:
            return math.inf
        ys[:] = with_coordinate(ys, i, best_y)
        return best_v

    # initial point: spread the surplus over the broken bonds
    rest_ground = sum(l.count * l.delta for l in rest) / n_rest if rest else 0.0
    ys = np.empty(k)
    for i, let in enumerate(broken_letters):
        target = (n * ell - n_rest * rest_ground) / k
        ys[i] = min(max(target, let.inflection), let.cap)

    free = k if n_rest else k - 1
    if free == 0:
        pinned = coordinate_window(ys, 0)
        if pinned is None:
            return None
        ys[0] = pinned[0]
        value = total_energy(ys)
        if not math.isfinite(value):
            return None
    else:
        value = math.inf
        for _ in range(MAX_SWEEPS):
            previous = value
            for i in range(free):
                value = sweep_coordinate(ys, i)
                if not math.isfinite(value):
                    return None
            if free == 1 or abs(previous - value) <= SWEEP_TOL * max(1.0, abs(value)):
                break

    rest_mean_strain = (n * ell - float(ys.sum())) / n_rest if n_rest else 0.0
    rest_sum, rest_sol = rest_energy(rest_mean_strain) if n_rest else (0.0, None)
    if n_rest and rest_sol is None:
        return None
    lam = rest_sol.lam if rest_sol is not None else funcs[0][1](float(ys[0]))
    stationarity = max(abs(f[1](float(y)) - lam) for y, f in zip(ys, funcs))
    return _BranchOutcome(
        energy=value,
        broken=broken,
        broken_strains=tuple(float(y) for y in ys),
        rest_strains=rest_sol.strains if rest_sol is not None else {},
        lam=lam,
        evaluations=evals,
        stationarity_residual=stationarity,
    )


def global_minimize(r: Realization, ell: float, k_max: int = 1) -> MinimizeResult:
    """Unrestricted minimum mean energy at prescribed mean strain.

    Takes the best of the elastic solution and every broken-bond branch with
    up to k_max bonds beyond their inflection points. Ties favor the elastic
    mode, so the reported mode only switches when breaking strictly wins.
    """
    letters = _letters_of(r)
    z_min = max(let.floor for let in letters)
    if ell <= z_min:
        raise NonpositiveLength(f"mean strain {ell} is at or below the floor {z_min}")

    elastic: MinimizeResult | None = None
    try:
        elastic = elastic_minimize(r, ell)
    except ElasticInfeasible:
        pass

    indices = np.asarray(r.indices)
    bonds_by_letter = {
        let.index: np.flatnonzero(indices == let.index) for let in letters
    }
    best_branch: _BranchOutcome | None = None
    branches_tried = 0
    for k in range(1, min(k_max, r.n) + 1):
        for broken in _candidate_broken_sets(letters, bonds_by_letter, k):
            branches_tried += 1
            outcome = _minimize_branch(r, ell, letters, broken)
            if outcome is None:
                continue
            if best_branch is None or outcome.energy < best_branch.energy:
                best_branch = outcome

    if elastic is None and best_branch is None:
        raise InnerInfeasible(
            f"no elastic solution or broken-bond split is feasible at mean {ell}"
        )

    take_branch = best_branch is not None and (
        elastic is None
        or best_branch.energy
        < elastic.energy - TIE_TOL * max(1.0, abs(elastic.energy))
    )
    if not take_branch:
        assert elastic is not None
        elastic.diagnostics["branches_tried"] = branches_tried
        if best_branch is not None:
            elastic.diagnostics["best_branch_energy"] = best_branch.energy
        return elastic

    assert best_branch is not None
    profile = (
        _profile_from_letters(r, best_branch.rest_strains)
        if best_branch.rest_strains
        else np.empty(r.n, dtype=float)
    )
    for bond, y in zip(best_branch.broken, best_branch.broken_strains):
        profile[bond] = y
    energy = energy_of_strains(r, profile)
    mean_residual = abs(float(profile.mean()) - ell)
    assert mean_residual <= 1e-10 * max(1.0, abs(ell)), "mean constraint violated"
    return MinimizeResult(
        profile=profile,
        energy=energy,
        lam=best_branch.lam,
        weak_set=_weak_set(r, profile),
        mode=MODE_GLOBAL,
        diagnostics={
            "branches_tried": branches_tried,
            "inner_evaluations": best_branch.evaluations,
            "broken_bonds": list(best_branch.broken),
            "elastic_energy": None if elastic is None else elastic.energy,
            "mean_residual": mean_residual,
            "stationarity_residual": best_branch.stationarity_residual,
        },
    )


def kkt_residual(r: Realization, res: MinimizeResult) -> float:
    """Largest |J'(z_i) - Lambda| over bonds not clamped at their inflection.

    Stationarity holds across branches: a strictly broken bond must carry the
    same tension as the unclamped elastic bonds.
    """
    indices = np.asarray(r.indices)
    worst = 0.0
    for idx in np.unique(indices).tolist():
        spec = r.spec.alphabet[idx]
        zf = pot.inflection_point(spec)
        z = res.profile[indices == idx]
        unclamped = np.abs(z - zf) > CLAMP_TOL * max(1.0, zf)
        if np.any(unclamped):
            slopes = pot.evaluate_many(spec, z[unclamped], 1)
            worst = max(worst, float(np.abs(slopes - res.lam).max()))
    return worst
