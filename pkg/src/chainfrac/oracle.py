"""Brute-force reference minimizer for small chains.

Everything here is deliberately dumb: minimum energies are found by exhausting
a regular strain grid, with no knowledge of convexity, multipliers, or branch
structure. The only code shared with the fast solver is potential evaluation.

grid_minimize exhausts the discretized feasible set {z_i on the grid,
sum z_i = grid point nearest n*ell} exactly, via a min-plus dynamic program
over (bond, partial sum) states; the final profile then has one coordinate
shifted off-grid so the mean constraint holds exactly. enumerate_minimize is
the same search as literal nested enumeration (kept for n <= 3, where it is
affordable) and cross-checks the dynamic program in the tests. Both return a
feasible profile, so their energies are upper bounds of the true minimum,
within error_bound of it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import potentials as pot
from .environment import Realization
from .errors import GridTooLarge, NoCrossing

MAX_POINTS_PER_DIM = 10_000
MAX_TOTAL_WORK = 100_000_000


@dataclass(frozen=True)
class GridSpec:
    """Regular strain grid: points lo, lo+step, ..., up to hi."""

    lo: float
    hi: float
    step: float

    def __post_init__(self) -> None:
        if not (self.lo > 0.0 and self.hi > self.lo and self.step > 0.0):
            raise ValueError(f"degenerate grid {self}")
        if (self.hi - self.lo) / self.step > MAX_POINTS_PER_DIM:
            raise GridTooLarge(
                f"{(self.hi - self.lo) / self.step:.3g} points per dimension "
                f"exceeds {MAX_POINTS_PER_DIM}"
            )

    def points(self) -> np.ndarray:
        count = int(math.floor((self.hi - self.lo) / self.step)) + 1
        return self.lo + self.step * np.arange(count)


@dataclass(frozen=True)
class OracleResult:
    energy: float
    profile: np.ndarray | None
    grid: GridSpec


def default_grid(r: Realization, ell: float) -> GridSpec:
    """Grid covering both the elastic range and the broken-bond tail.

    Base range (0.5 min delta, 8 max delta); the upper end is extended to
    n*ell - (n-1)*lo + step when a single stretched bond has to hold more
    slack than 8 max delta can represent. Step 1e-3 for n <= 3 and 2.5e-3
    for n in {4, 5, 6}.
    """
    deltas = [pot.ground_state(p) for p in r.spec.alphabet]
    lo = 0.5 * min(deltas)
    step = 1e-3 if r.n <= 3 else 2.5e-3
    hi = max(8.0 * max(deltas), r.n * ell - (r.n - 1) * lo) + step
    return GridSpec(lo=lo, hi=hi, step=step)


def _bond_costs(r: Realization, zgrid: np.ndarray, elastic_only: bool) -> list[np.ndarray]:
    per_letter = []
    for spec in r.spec.alphabet:
        costs = pot.evaluate_many(spec, zgrid, 0)
        if elastic_only:
            costs = np.where(zgrid > pot.inflection_point(spec), np.inf, costs)
        per_letter.append(costs)
    return [per_letter[i] for i in r.indices]


def _pin_mean(r: Realization, z: np.ndarray, ell: float, elastic_only: bool) -> np.ndarray:
    """Shift one coordinate off-grid so the profile mean equals ell exactly."""
    shift = r.n * ell - float(z.sum())
    if shift == 0.0:
        return z
    caps = np.array(
        [
            pot.inflection_point(r.spec.alphabet[i]) if elastic_only
            else pot.strain_cap(r.spec.alphabet[i])
            for i in r.indices
        ]
    )
    headroom = caps - z if shift > 0.0 else z - 1e-12
    j = int(np.argmax(headroom))
    if headroom[j] >= abs(shift):
        z = z.copy()
        z[j] += shift
    return z


def _profile_energy(r: Realization, z: np.ndarray) -> float:
    total = 0.0
    for i in range(r.n):
        total += pot.evaluate(r.spec.alphabet[r.indices[i]], float(z[i]), 0)
    return total / r.n


def grid_minimize(
    r: Realization,
    ell: float,
    grid: GridSpec | None = None,
    elastic_only: bool = False,
) -> OracleResult:
    """Exhaust the gridded feasible set for the minimum mean energy.

    Returns an infinite-energy result when no gridded profile can meet the
    mean constraint (for elastic_only that means the constraint exceeds what
    sub-inflection strains can carry).
    """
    if r.n > 6:
        raise ValueError("the reference minimizer is scoped to n <= 6 bonds")
    if grid is None:
        grid = default_grid(r, ell)
    zgrid = grid.points()
    z_count = zgrid.size
    target = int(round((r.n * ell - r.n * grid.lo) / grid.step))
    if target < 0 or target > r.n * (z_count - 1):
        return OracleResult(energy=np.inf, profile=None, grid=grid)
    if z_count * (target + 1) > MAX_TOTAL_WORK:
        raise GridTooLarge(
            f"dynamic program needs {z_count * (target + 1):.3g} cell updates"
        )

    costs = _bond_costs(r, zgrid, elastic_only)
    kmax = min(z_count, target + 1)

    layers = [np.full(target + 1, np.inf)]
    layers[0][:kmax] = costs[0][:kmax]
    for i in range(1, r.n):
        prev = layers[i - 1]
        cur = np.full(target + 1, np.inf)
        ci = costs[i]
        for k in range(kmax):
            np.minimum(cur[k:], prev[: target + 1 - k] + ci[k], out=cur[k:])
        layers.append(cur)

    if not np.isfinite(layers[-1][target]):
        return OracleResult(energy=np.inf, profile=None, grid=grid)

    # backtrack: recompute the argmin of each layer transition at one state
    z_idx = np.empty(r.n, dtype=np.int64)
    s = target
    for i in range(r.n - 1, 0, -1):
        klo = max(0, s - (target))  # prev layer is indexed 0..target
        khi = min(z_count - 1, s)
        ks = np.arange(klo, khi + 1)
        vals = costs[i][ks] + layers[i - 1][s - ks]
        k = int(ks[np.argmin(vals)])
        z_idx[i] = k
        s -= k
    z_idx[0] = s

    z = grid.lo + grid.step * z_idx.astype(float)
    z = _pin_mean(r, z, ell, elastic_only)
    return OracleResult(energy=_profile_energy(r, z), profile=z, grid=grid)


def enumerate_minimize(
    r: Realization,
    ell: float,
    grid: GridSpec | None = None,
    elastic_only: bool = False,
) -> OracleResult:
    """Literal nested enumeration: free coordinates walk the grid, the last
    bond takes n*ell minus their sum. Affordable for n <= 3 only."""
    if r.n > 3:
        raise GridTooLarge("literal enumeration is affordable for n <= 3 only")
    if grid is None:
        grid = default_grid(r, ell)
    zgrid = grid.points()
    specs = [r.spec.alphabet[i] for i in r.indices]
    infl = [pot.inflection_point(s) for s in specs]

    def last_bond_energy(zlast: np.ndarray) -> np.ndarray:
        out = np.full(zlast.shape, np.inf)
        ok = zlast > 0.0
        if elastic_only:
            ok &= zlast <= infl[-1]
        if np.any(ok):
            out[ok] = pot.evaluate_many(specs[-1], zlast[ok], 0)
        return out

    best = (np.inf, None)
    if r.n == 1:
        z1 = np.array([r.n * ell])
        e = last_bond_energy(z1)[0]
        if e < best[0]:
            best = (float(e), z1)
    elif r.n == 2:
        z1 = zgrid if not elastic_only else zgrid[zgrid <= infl[0]]
        e1 = pot.evaluate_many(specs[0], z1, 0)
        z2 = r.n * ell - z1
        e2 = last_bond_energy(z2)
        tot = (e1 + e2) / 2.0
        j = int(np.argmin(tot))
        if tot[j] < best[0]:
            best = (float(tot[j]), np.array([z1[j], z2[j]]))
    else:
        z1s = zgrid if not elastic_only else zgrid[zgrid <= infl[0]]
        z2s = zgrid if not elastic_only else zgrid[zgrid <= infl[1]]
        e2s = pot.evaluate_many(specs[1], z2s, 0)
        for z1 in z1s:
            e1 = pot.evaluate(specs[0], float(z1), 0)
            z3 = r.n * ell - z1 - z2s
            e3 = last_bond_energy(z3)
            tot = (e1 + e2s + e3) / 3.0
            j = int(np.argmin(tot))
            if tot[j] < best[0]:
                best = (float(tot[j]), np.array([z1, z2s[j], z3[j]]))

    energy, profile = best
    return OracleResult(energy=energy, profile=profile, grid=grid)


def error_bound(r: Realization, grid: GridSpec) -> float:
    """Energy slack the grid can cost versus the true minimum.

    Snapping an optimal profile to the grid moves each strain by at most one
    step at slopes never exceeding the largest tension at an inflection point
    (the largest multiplier any constrained optimum can carry in the stretched
    regime).
    """
    max_slope = max(
        pot.evaluate(p, pot.inflection_point(p), 1) for p in r.spec.alphabet
    )
    return 2.0 * grid.step * max_slope


def weak_count(r: Realization, profile: np.ndarray) -> int:
    """Number of strains strictly beyond their bond's inflection point."""
    count = 0
    for i in range(r.n):
        if profile[i] > pot.inflection_point(r.spec.alphabet[r.indices[i]]):
            count += 1
    return count


def critical_stretch_scan(
    r: Realization,
    ell_grid: np.ndarray | None = None,
    grid: GridSpec | None = None,
) -> float:
    """First mean strain where the sub-inflection minimum detaches from the
    unrestricted one by more than the grid error bound."""
    if ell_grid is None:
        deltas = [pot.ground_state(p) for p in r.spec.alphabet]
        mean_infl = float(
            np.mean([pot.inflection_point(r.spec.alphabet[i]) for i in r.indices])
        )
        ell_grid = np.arange(0.9 * min(deltas), mean_infl + 3e-3, 1e-3)
    for ell in np.sort(np.asarray(ell_grid, dtype=float)):
        g = grid if grid is not None else default_grid(r, float(ell))
        unrestricted = grid_minimize(r, float(ell), g)
        restricted = grid_minimize(r, float(ell), g, elastic_only=True)
        if restricted.energy - unrestricted.energy > error_bound(r, g):
            return float(ell)
    raise NoCrossing("restricted and unrestricted minima never detached")
