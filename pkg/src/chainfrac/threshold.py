"""Critical stretch location and convergence studies.

The critical stretch of a chain is the largest mean strain up to which the
elastic (all strains capped at their inflection points) minimum agrees with
the unrestricted minimum. It is located by a coarse scan of the energy gap
followed by bisection. Two rescalings are studied: the raw critical stretch
converging to the mean ground state, and, for alphabets whose ground states
all sit at 1, the excess stretch scaled by sqrt(n) converging to
sqrt(beta / alpha) where alpha is the harmonic mean of the half-curvatures
at the ground state and beta is the smallest well depth carried with
positive probability.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import potentials as pot
from .environment import (
    EnvironmentSpec,
    Realization,
    derive_seed,
    empirical_stats,
    ensemble_stats,
    realize,
)
from .errors import DeltaNotNormalized, ElasticInfeasible, NoCrossing
from .solver import elastic_minimize, global_minimize

DEFAULT_EPS_ENERGY = 1e-9
SCAN_POINTS = 64
MODE_MEAN_DELTA = "mean_delta"
MODE_RESCALED = "rescaled"

CSV_COLUMNS = (
    "mode",
    "n",
    "replicate",
    "seed",
    "ell_star",
    "gamma_star",
    "mean_delta_n",
    "beta_n",
    "bisection_iters",
    "wall_time_ms",
)


def default_ell_tol(n: int) -> float:
    """Stretch tolerance that keeps the rescaled threshold accurate to ~1e-4."""
    return 1e-4 / math.sqrt(n)


def elastic_gap(r: Realization, ell: float, k_max: int = 1) -> float:
    """Elastic minimum minus unrestricted minimum at mean strain ell.

    Nonnegative up to solver tolerance since the elastic problem is a
    restriction; +inf once the elastic problem is infeasible.
    """
    try:
        restricted = elastic_minimize(r, ell)
    except ElasticInfeasible:
        return math.inf
    gap = restricted.energy - global_minimize(r, ell, k_max=k_max).energy
    assert gap >= -1e-10, f"elastic energy fell below the unrestricted one by {-gap}"
    return gap


@dataclass(frozen=True)
class CriticalStretchResult:
    n: int
    ell_star: float
    gamma_star: float | None
    bracket: tuple[float, float]
    gap_tolerance: float
    ell_tol: float
    bisection_iterations: int
    seed: int
    diagnostics: dict


def _scan_interval(r: Realization) -> tuple[float, float]:
    emp = empirical_stats(r)
    indices = np.asarray(r.indices)
    inflections = np.array(
        [pot.inflection_point(p) for p in r.spec.alphabet], dtype=float
    )
    mean_inflection = float(inflections[indices].mean())
    support = ensemble_stats(r.spec).per_letter
    sup_inflection = max(stat.inflection for stat in support)
    min_delta = min(stat.ground_state for stat in support)
    lo = max(emp.mean_delta - 0.1, 0.5 * min_delta)
    hi = min(mean_inflection, emp.mean_delta + 3.0 * sup_inflection / math.sqrt(r.n) + 0.1)
    return lo, hi


def critical_stretch(
    r: Realization,
    ell_tol: float | None = None,
    eps_energy: float = DEFAULT_EPS_ENERGY,
    k_max: int = 1,
) -> CriticalStretchResult:
    """Locate the largest mean strain with elastic/unrestricted agreement.

    A 64-point scan finds the first crossing of elastic_gap above eps_energy;
    bisection then shrinks the bracket below ell_tol (default 1e-4/sqrt(n)).
    The scan records every crossing it sees: more than one, or a failed
    two-sided post-check, raises the `anomaly` diagnostic flag. If the gap
    never crosses on the scan interval the interval is widened once (double
    width, extending past the mean inflection cap) before giving up.
    """
    if ell_tol is None:
        ell_tol = default_ell_tol(r.n)
    if not (ell_tol > 0.0 and eps_energy > 0.0):
        raise ValueError("tolerances must be positive")

    def gap_at(ell: float) -> float:
        return elastic_gap(r, float(ell), k_max=k_max)

    lo, hi = _scan_interval(r)
    widened = False
    crossing: tuple[float, float] | None = None
    crossings = 0
    for _ in range(2):
        points = np.linspace(lo, hi, SCAN_POINTS)
        gaps = np.array([gap_at(p) for p in points])
        above = gaps > eps_energy
        if above[0]:
            raise NoCrossing(
                f"gap already exceeds {eps_energy} at the scan start {lo}"
            )
        flips = np.flatnonzero(above[1:] != above[:-1])
        crossings = int(flips.size)
        if crossings:
            j = int(flips[0]) + 1
            crossing = (float(points[j - 1]), float(points[j]))
            break
        widened = True
        hi = hi + (hi - lo)
    if crossing is None:
        raise NoCrossing(
            f"elastic gap stayed within {eps_energy} on [{lo}, {hi}]"
        )

    blo, bhi = crossing
    iterations = 0
    while bhi - blo > ell_tol:
        mid = 0.5 * (blo + bhi)
        if gap_at(mid) > eps_energy:
            bhi = mid
        else:
            blo = mid
        iterations += 1

    ell_star = 0.5 * (blo + bhi)
    gap_below = gap_at(ell_star - ell_tol)
    gap_above = gap_at(ell_star + ell_tol)
    post_ok = gap_below <= eps_energy and gap_above > eps_energy
    stats = ensemble_stats(r.spec)
    gamma = (ell_star - 1.0) * math.sqrt(r.n) if stats.delta_is_one else None
    return CriticalStretchResult(
        n=r.n,
        ell_star=ell_star,
        gamma_star=gamma,
        bracket=(blo, bhi),
        gap_tolerance=eps_energy,
        ell_tol=ell_tol,
        bisection_iterations=iterations,
        seed=r.seed,
        diagnostics={
            "scan_crossings": crossings,
            "scan_widened": widened,
            "gap_below_at_tol": gap_below,
            "gap_above_at_tol": gap_above,
            "post_check_ok": post_ok,
            "anomaly": crossings > 1 or not post_ok,
        },
    )


def rescaled_threshold(res: CriticalStretchResult) -> float:
    """Excess critical stretch scaled by sqrt(n); needs ground states at 1."""
    if res.gamma_star is None:
        raise DeltaNotNormalized(
            "rescaled threshold requires every ground state at 1"
        )
    return res.gamma_star


@dataclass(frozen=True)
class StudyRow:
    mode: str
    n: int
    replicate: int
    seed: int
    ell_star: float
    gamma_star: float | None
    mean_delta_n: float
    beta_n: float
    bisection_iters: int
    wall_time_ms: float


def _study_task(payload: tuple) -> StudyRow:
    spec, n, replicate, master_seed, mode, ell_tol, eps_energy, k_max = payload
    seed = derive_seed(master_seed, n, replicate)
    started = time.perf_counter()
    r = realize(spec, n, seed)
    res = critical_stretch(r, ell_tol=ell_tol, eps_energy=eps_energy, k_max=k_max)
    emp = empirical_stats(r)
    elapsed_ms = (time.perf_counter() - started) * 1e3
    return StudyRow(
        mode=mode,
        n=n,
        replicate=replicate,
        seed=seed,
        ell_star=res.ell_star,
        gamma_star=res.gamma_star,
        mean_delta_n=emp.mean_delta,
        beta_n=emp.beta,
        bisection_iters=res.bisection_iterations,
        wall_time_ms=elapsed_ms,
    )


def convergence_study(
    spec: EnvironmentSpec,
    n_list: list[int],
    replicates: int,
    master_seed: int,
    mode: str = MODE_MEAN_DELTA,
    ell_tol: float | None = None,
    eps_energy: float = DEFAULT_EPS_ENERGY,
    parallel: int = 1,
    k_max: int = 1,
) -> tuple[list[StudyRow], dict]:
    """Critical stretches over an (n, replicate) grid with derived seeds.

    Each task draws an independent realization from a seed derived from
    (master_seed, n, replicate), so results do not depend on scheduling;
    rows come back sorted by (n, replicate) whatever the parallelism.
    """
    if mode not in (MODE_MEAN_DELTA, MODE_RESCALED):
        raise ValueError(f"unknown study mode {mode!r}")
    stats = ensemble_stats(spec)
    if mode == MODE_RESCALED and not stats.delta_is_one:
        raise DeltaNotNormalized(
            "rescaled studies require every ground state at 1"
        )
    payloads = [
        (spec, n, rep, master_seed, mode, ell_tol, eps_energy, k_max)
        for n in n_list
        for rep in range(replicates)
    ]
    started = time.perf_counter()
    if parallel > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            rows = list(pool.map(_study_task, payloads))
    else:
        rows = [_study_task(p) for p in payloads]
    total_ms = (time.perf_counter() - started) * 1e3
    rows.sort(key=lambda row: (row.n, row.replicate))

    metric_name = "ell_star" if mode == MODE_MEAN_DELTA else "gamma_star"
    target = stats.mean_delta if mode == MODE_MEAN_DELTA else stats.gamma_star
    per_n: dict[int, dict] = {}
    for n in n_list:
        values = np.array(
            [getattr(row, metric_name) for row in rows if row.n == n], dtype=float
        )
        per_n[int(n)] = {
            "count": int(values.size),
            "mean": float(values.mean()),
            "std": float(values.std()),
            "min": float(values.min()),
            "max": float(values.max()),
            "abs_error_of_mean": (
                None if target is None else abs(float(values.mean()) - target)
            ),
        }
    summary = {
        "mode": mode,
        "metric": metric_name,
        "master_seed": master_seed,
        "replicates": replicates,
        "n_list": [int(n) for n in n_list],
        "ell_tol": ell_tol,
        "eps_energy": eps_energy,
        "targets": {
            "mean_delta": stats.mean_delta,
            "alpha_underbar": stats.alpha_underbar,
            "beta": stats.beta,
            "gamma_star": stats.gamma_star,
        },
        "per_n": per_n,
        "timing": {
            "total_wall_time_ms": total_ms,
            "mean_row_wall_time_ms": float(
                np.mean([row.wall_time_ms for row in rows])
            ),
            "parallel": parallel,
        },
    }
    return rows, summary


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_rows_csv(rows: list[StudyRow], path: str) -> None:
    """Write study rows with a stable schema and byte-reproducible content.

    Wall times vary between runs, so that column is left empty on disk; the
    in-memory rows and the summary JSON carry the real timings.
    """
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        lines.append(
            ",".join(
                (
                    row.mode,
                    str(row.n),
                    str(row.replicate),
                    str(row.seed),
                    _csv_cell(row.ell_star),
                    _csv_cell(row.gamma_star),
                    _csv_cell(row.mean_delta_n),
                    _csv_cell(row.beta_n),
                    str(row.bisection_iters),
                    "",
                )
            )
        )
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write("\n".join(lines) + "\n")


def homogenized_checks(
    spec: EnvironmentSpec,
    n: int,
    seed: int,
    ell_grid: np.ndarray | None = None,
    gamma_grid: tuple[float, ...] | None = None,
    tol_plateau: float | None = None,
    tol_h: float = 0.1,
    margin: float = 0.05,
) -> dict:
    """Check the two limiting energy shapes on one realization.

    Zeroth order: the minimum mean energy decreases strictly below the mean
    ground state and is flat (within tol_plateau, default 1% of the smallest
    well depth) above it. First order: for ground states at 1, the excess
    energy n * (M_n(1 + gamma/sqrt(n)) - mean bond energy at strain 1)
    approaches min(alpha * gamma^2, beta).
    """
    stats = ensemble_stats(spec)
    r = realize(spec, n, seed)
    min_depth = min(stat.well_depth for stat in stats.per_letter)
    if tol_plateau is None:
        tol_plateau = 1e-2 * min_depth
    if ell_grid is None:
        ell_grid = np.linspace(0.85, 2.5, 18) * stats.mean_delta
    if gamma_grid is None:
        gamma_grid = (0.0, 0.05, 0.1, 0.15, 0.3, 0.5) if stats.delta_is_one else ()

    energies = [global_minimize(r, float(ell)).energy for ell in ell_grid]
    reference = global_minimize(r, stats.mean_delta).energy
    below = [i for i, ell in enumerate(ell_grid) if ell < stats.mean_delta]
    above = [i for i, ell in enumerate(ell_grid) if ell >= stats.mean_delta + margin]
    decreasing_ok = all(
        energies[j] < energies[i] for i, j in zip(below, below[1:])
    )
    plateau_dev = max(
        (abs(energies[i] - reference) for i in above), default=0.0
    )
    zeroth = {
        "ell": [float(v) for v in ell_grid],
        "energy": energies,
        "reference_energy": reference,
        "decreasing_ok": decreasing_ok,
        "plateau_deviation_max": plateau_dev,
        "tol_plateau": tol_plateau,
        "plateau_ok": plateau_dev <= tol_plateau,
    }

    first = None
    if gamma_grid:
        if not stats.delta_is_one:
            raise DeltaNotNormalized(
                "the rescaled check requires every ground state at 1"
            )
        indices = np.asarray(r.indices)
        ground = float(
            np.mean(
                [
                    pot.evaluate(r.spec.alphabet[i], 1.0, 0)
                    for i in indices.tolist()
                ]
            )
        )
        rows = []
        all_ok = True
        for gamma in gamma_grid:
            ell = 1.0 + gamma / math.sqrt(n)
            excess = n * (global_minimize(r, ell).energy - ground)
            target = min(stats.alpha_underbar * gamma**2, stats.beta)
            err = abs(excess - target)
            ok = err <= max(tol_h * abs(target), 1e-6)
            all_ok = all_ok and ok
            rows.append(
                {
                    "gamma": gamma,
                    "rescaled_excess": excess,
                    "target": target,
                    "abs_error": err,
                    "ok": ok,
                }
            )
        first = {"rows": rows, "tol_h": tol_h, "within_tolerance": all_ok}

    return {"n": n, "seed": seed, "zeroth": zeroth, "first": first}
