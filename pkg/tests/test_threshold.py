"""Critical stretch location, rescaled thresholds, and convergence studies."""
import math

import numpy as np
import pytest

from chainfrac import potentials as pot
from chainfrac.environment import empirical_stats, derive_seed, realize
from chainfrac.errors import DeltaNotNormalized
from chainfrac.threshold import (
    CSV_COLUMNS,
    MODE_MEAN_DELTA,
    MODE_RESCALED,
    StudyRow,
    convergence_study,
    critical_stretch,
    default_ell_tol,
    elastic_gap,
    homogenized_checks,
    rescaled_threshold,
    write_rows_csv,
)

LJ_INFLECTION = (13.0 / 7.0) ** (1.0 / 6.0)


# --------------------------------------------------------------- elastic gap

def test_gap_vanishes_at_the_ground_state(homog_env):
    r = realize(homog_env, 10, seed=0)
    assert abs(elastic_gap(r, 1.0)) <= 1e-10


def test_gap_positive_once_breaking_wins(homog_env):
    r = realize(homog_env, 100, seed=0)
    assert elastic_gap(r, 1.05) > 1e-4


def test_gap_infinite_past_the_elastic_range(homog_env):
    r = realize(homog_env, 100, seed=0)
    assert elastic_gap(r, 2.0) == math.inf


def test_gap_negligible_below_the_finite_size_threshold(homog_env):
    r = realize(homog_env, 100, seed=0)
    gap = elastic_gap(r, 1.001)
    assert -1e-10 <= gap <= 1e-9


# ---------------------------------------------------------- critical stretch

def test_small_chain_threshold_brackets(homog_env):
    r = realize(homog_env, 4, seed=0)
    res = critical_stretch(r)
    assert 1.0 < res.ell_star <= LJ_INFLECTION + res.ell_tol
    blo, bhi = res.bracket
    assert blo <= res.ell_star <= bhi
    assert bhi - blo <= res.ell_tol
    assert res.diagnostics["post_check_ok"]
    assert not res.diagnostics["anomaly"]
    assert res.seed == 0
    assert res.gamma_star == pytest.approx((res.ell_star - 1.0) * 2.0, rel=1e-12)


def test_hundred_bond_threshold_regression(homog_env):
    r = realize(homog_env, 100, seed=1)
    res = critical_stretch(r)
    # Deterministic pipeline: scan, bisection, and solver are all exact
    # functions of the realization.
    assert res.ell_star == pytest.approx(1.017672319807915, abs=5e-10)
    assert res.gamma_star == pytest.approx(0.17672319807915, abs=5e-9)
    assert res.bisection_iterations > 0


def test_single_bond_threshold_sits_at_the_inflection(homog_env):
    r = realize(homog_env, 1, seed=0)
    res = critical_stretch(r)
    assert res.ell_star == pytest.approx(LJ_INFLECTION, abs=res.ell_tol + 1e-9)
    # The scan interval is capped at the inflection, where the gap is still
    # zero, so the widening retry has to kick in.
    assert res.diagnostics["scan_widened"]


def test_two_sided_gap_conditions_hold(homog_env):
    r = realize(homog_env, 50, seed=0)
    res = critical_stretch(r)
    eps = res.gap_tolerance
    assert elastic_gap(r, res.ell_star - res.ell_tol) <= eps
    assert elastic_gap(r, res.ell_star + res.ell_tol) > eps
    assert res.diagnostics["gap_below_at_tol"] <= eps
    assert res.diagnostics["gap_above_at_tol"] > eps


def test_mixture_threshold_tracks_the_mean_ground_state(periodic_env):
    r = realize(periodic_env, 10_000, seed=0)
    res = critical_stretch(r)
    assert abs(res.ell_star - 1.1) <= 0.02
    assert res.gamma_star is None


def test_threshold_bounds_hold_across_environments(mix_env, half_env):
    for env, n, seed in ((mix_env, 30, 3), (half_env, 20, 8), (mix_env, 7, 11)):
        r = realize(env, n, seed)
        res = critical_stretch(r)
        deltas = np.array([pot.ground_state(env.alphabet[i]) for i in r.indices])
        inflections = np.array(
            [pot.inflection_point(env.alphabet[i]) for i in r.indices]
        )
        assert res.ell_star >= deltas.mean() - res.ell_tol
        assert res.ell_star <= inflections.mean() + res.ell_tol


def test_tolerances_must_be_positive(homog_env):
    r = realize(homog_env, 4, seed=0)
    with pytest.raises(ValueError):
        critical_stretch(r, ell_tol=-1e-4)
    with pytest.raises(ValueError):
        critical_stretch(r, eps_energy=0.0)


def test_default_ell_tol_scaling():
    assert default_ell_tol(100) == pytest.approx(1e-5)
    assert default_ell_tol(10_000) == pytest.approx(1e-6)


# ------------------------------------------------------------------ rescaled

def test_rescaled_threshold_arithmetic(homog_env):
    r = realize(homog_env, 25, seed=0)
    res = critical_stretch(r)
    assert rescaled_threshold(res) == pytest.approx((res.ell_star - 1.0) * 5.0, rel=1e-12)


def test_rescaled_threshold_requires_normalized_wells(mix_env):
    r = realize(mix_env, 10, seed=0)
    res = critical_stretch(r)
    with pytest.raises(DeltaNotNormalized):
        rescaled_threshold(res)


# ----------------------------------------------------------------- studies

def test_study_rows_are_ordered_and_seeded(half_env):
    rows, summary = convergence_study(
        half_env, n_list=[10, 20], replicates=2, master_seed=77, mode=MODE_RESCALED
    )
    assert [(row.n, row.replicate) for row in rows] == [
        (10, 0), (10, 1), (20, 0), (20, 1)
    ]
    for row in rows:
        assert row.seed == derive_seed(77, row.n, row.replicate)
        assert row.mode == MODE_RESCALED
        assert row.gamma_star == pytest.approx(
            (row.ell_star - 1.0) * math.sqrt(row.n), rel=1e-12
        )
    assert summary["metric"] == "gamma_star"
    assert summary["targets"]["gamma_star"] == pytest.approx(1.0 / 6.0 / math.sqrt(2)
                                                             * math.sqrt(2), rel=1e-12)
    assert set(summary["per_n"]) == {10, 20}
    per_n = summary["per_n"][10]
    assert per_n["count"] == 2
    assert per_n["min"] <= per_n["mean"] <= per_n["max"]


def test_study_rejects_bad_modes(half_env, mix_env):
    with pytest.raises(ValueError):
        convergence_study(half_env, [4], 1, 0, mode="sideways")
    with pytest.raises(DeltaNotNormalized):
        convergence_study(mix_env, [4], 1, 0, mode=MODE_RESCALED)


def test_mean_delta_study_targets_the_mixture_mean(mix_env):
    rows, summary = convergence_study(
        mix_env, n_list=[12], replicates=3, master_seed=5, mode=MODE_MEAN_DELTA
    )
    assert summary["metric"] == "ell_star"
    assert summary["targets"]["mean_delta"] == pytest.approx(1.1)
    assert summary["targets"]["gamma_star"] is None
    stats = summary["per_n"][12]
    values = [row.ell_star for row in rows]
    assert stats["mean"] == pytest.approx(float(np.mean(values)), rel=1e-12)
    assert stats["abs_error_of_mean"] == pytest.approx(abs(np.mean(values) - 1.1), rel=1e-10)
    for row in rows:
        assert row.gamma_star is None
        assert row.mean_delta_n > 0.0


def test_study_is_deterministic_on_disk(tmp_path, half_env):
    paths = []
    for tag, parallel in (("a", 1), ("b", 1), ("c", 2)):
        rows, _ = convergence_study(
            half_env, n_list=[8, 16], replicates=2, master_seed=31,
            mode=MODE_RESCALED, parallel=parallel,
        )
        path = tmp_path / f"rows_{tag}.csv"
        write_rows_csv(rows, str(path))
        paths.append(path.read_bytes())
    assert paths[0] == paths[1]
    assert paths[0] == paths[2]


def test_csv_format_is_frozen(tmp_path):
    row = StudyRow(
        mode="rescaled", n=50, replicate=0, seed=1233989305666700904,
        ell_star=1.0255296490217978, gamma_star=0.18052187944625717,
        mean_delta_n=1.0, beta_n=1.0, bisection_iters=8, wall_time_ms=12.5,
    )
    path = tmp_path / "rows.csv"
    write_rows_csv([row], str(path))
    text = path.read_text()
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert lines[1] == (
        "rescaled,50,0,1233989305666700904,1.0255296490217978,"
        "0.18052187944625717,1.0,1.0,8,"
    )
    # Wall time never reaches disk: that keeps re-runs byte-identical.
    assert text.endswith("\n")


def test_csv_none_cells_are_empty(tmp_path):
    row = StudyRow(
        mode="mean_delta", n=3, replicate=1, seed=9, ell_star=1.5,
        gamma_star=None, mean_delta_n=1.1, beta_n=0.5, bisection_iters=4,
        wall_time_ms=1.0,
    )
    path = tmp_path / "rows.csv"
    write_rows_csv([row], str(path))
    assert path.read_text().splitlines()[1] == "mean_delta,3,1,9,1.5,,1.1,0.5,4,"


# ------------------------------------------------------------- limit shapes

def test_homogenized_checks_on_uniform_chain(homog_env):
    report = homogenized_checks(homog_env, n=400, seed=0)
    zeroth = report["zeroth"]
    assert zeroth["decreasing_ok"]
    assert zeroth["plateau_ok"]
    assert zeroth["plateau_deviation_max"] <= zeroth["tol_plateau"]
    first = report["first"]
    assert first["within_tolerance"]
    by_gamma = {row["gamma"]: row for row in first["rows"]}
    assert by_gamma[0.0]["rescaled_excess"] == pytest.approx(0.0, abs=1e-6)
    # Quadratic branch below the crossover, flat branch above it.
    assert by_gamma[0.1]["target"] == pytest.approx(0.36)
    assert by_gamma[0.5]["target"] == pytest.approx(1.0)
    for gamma in (0.05, 0.1, 0.15, 0.3, 0.5):
        assert by_gamma[gamma]["ok"]


def test_homogenized_checks_without_rescaling(mix_env):
    report = homogenized_checks(mix_env, n=400, seed=2)
    assert report["first"] is None
    assert report["zeroth"]["decreasing_ok"]
    assert report["zeroth"]["plateau_ok"]


def test_homogenized_checks_reject_gammas_for_shifted_wells(mix_env):
    with pytest.raises(DeltaNotNormalized):
        homogenized_checks(mix_env, n=50, seed=0, gamma_grid=(0.1,))


def test_empirical_stats_columns_flow_into_rows(half_env):
    rows, _ = convergence_study(
        half_env, n_list=[16], replicates=1, master_seed=3, mode=MODE_RESCALED
    )
    r = realize(half_env, 16, derive_seed(3, 16, 0))
    emp = empirical_stats(r)
    assert rows[0].mean_delta_n == pytest.approx(emp.mean_delta, rel=1e-14)
    assert rows[0].beta_n == pytest.approx(emp.beta, rel=1e-14)
