"""The brute-force grid reference and its self-consistency."""
import numpy as np
import pytest
from hypothesis import given, strategies as st

from chainfrac import oracle, potentials as pot
from chainfrac.environment import EnvironmentSpec, IIDLaw, realize
from chainfrac.errors import GridTooLarge, NoCrossing
from chainfrac.oracle import (
    GridSpec,
    critical_stretch_scan,
    default_grid,
    enumerate_minimize,
    error_bound,
    grid_minimize,
    weak_count,
)

LJ_INFLECTION = (13.0 / 7.0) ** (1.0 / 6.0)

# Coarse grid for the property tests; keeps the exhaustive searches quick.
# hi covers the worst single stretched bond the property draws (n*ell bounded
# by 3 * 2.2, minus two bonds at lo), because the literal enumeration's last
# coordinate is off-grid and unbounded while the dynamic program is not.
COARSE = GridSpec(lo=0.6, hi=6.6, step=5e-3)


# ------------------------------------------------------------------ GridSpec

def test_grid_spec_rejects_degenerate_ranges():
    with pytest.raises(ValueError):
        GridSpec(lo=0.0, hi=1.0, step=0.1)
    with pytest.raises(ValueError):
        GridSpec(lo=1.0, hi=1.0, step=0.1)
    with pytest.raises(ValueError):
        GridSpec(lo=0.5, hi=2.0, step=0.0)


def test_grid_spec_caps_points_per_dimension():
    with pytest.raises(GridTooLarge):
        GridSpec(lo=0.5, hi=8.0, step=1e-5)


def test_grid_points_include_both_ends():
    g = GridSpec(lo=0.5, hi=1.0, step=0.25)
    np.testing.assert_allclose(g.points(), [0.5, 0.75, 1.0])


def test_default_grid_resolution_switches_with_size(homog_env):
    small = default_grid(realize(homog_env, 3, seed=0), 1.0)
    large = default_grid(realize(homog_env, 5, seed=0), 1.0)
    assert small.step == pytest.approx(1e-3)
    assert large.step == pytest.approx(2.5e-3)


def test_default_grid_covers_the_broken_bond(homog_env):
    # At n=6, ell=2.5 one stretched bond must hold ~12.5; the base range
    # up to 8 would clip it.
    r = realize(homog_env, 6, seed=0)
    g = default_grid(r, 2.5)
    assert g.hi >= 6 * 2.5 - 5 * g.lo


def test_work_cap_trips_on_huge_programs(homog_env):
    r = realize(homog_env, 6, seed=0)
    g = GridSpec(lo=0.5, hi=10.5, step=1e-3)
    with pytest.raises(GridTooLarge):
        grid_minimize(r, 5.0, g)


def test_scope_is_small_chains(homog_env):
    with pytest.raises(ValueError):
        grid_minimize(realize(homog_env, 7, seed=0), 1.0)
    with pytest.raises(GridTooLarge):
        enumerate_minimize(realize(homog_env, 4, seed=0), 1.0)


# ------------------------------------------------------------- minimization

def test_single_bond_is_forced(homog_env):
    r = realize(homog_env, 1, seed=0)
    res = grid_minimize(r, 1.3)
    np.testing.assert_allclose(res.profile, [1.3])
    assert res.energy == pytest.approx(pot.evaluate(r.spec.alphabet[0], 1.3), rel=1e-12)


def test_ground_state_pair(homog_env):
    r = realize(homog_env, 2, seed=0)
    res = grid_minimize(r, 1.0)
    assert res.energy == pytest.approx(-1.0, abs=error_bound(r, res.grid))
    np.testing.assert_allclose(res.profile, [1.0, 1.0], atol=2e-3)


def test_stretched_pair_fractures(homog_env):
    # One bond relaxes to the well, the other takes all the slack; the
    # optimizer's value for this instance is -0.500063998033911.
    r = realize(homog_env, 2, seed=0)
    res = grid_minimize(r, 3.0)
    assert res.energy == pytest.approx(-0.500063998033911, abs=1e-8)
    assert weak_count(r, res.profile) == 1
    assert res.profile.mean() == pytest.approx(3.0, abs=1e-12)


def test_profile_mean_is_pinned_exactly(mix_env):
    r = realize(mix_env, 5, seed=21)
    for ell in (0.97, 1.13, 1.61):
        res = grid_minimize(r, ell)
        assert res.profile.mean() == pytest.approx(ell, abs=1e-12)


def test_restricted_never_beats_unrestricted(mix_env):
    r = realize(mix_env, 4, seed=3)
    for ell in (1.0, 1.1, 1.25):
        free = grid_minimize(r, ell)
        elastic = grid_minimize(r, ell, elastic_only=True)
        assert elastic.energy >= free.energy - 1e-12


def test_restricted_infeasible_beyond_mean_inflection(homog_env):
    r = realize(homog_env, 3, seed=0)
    res = grid_minimize(r, 1.5, elastic_only=True)
    assert res.energy == np.inf
    assert res.profile is None


def test_infeasible_mean_returns_infinity(homog_env):
    r = realize(homog_env, 2, seed=0)
    g = GridSpec(lo=0.5, hi=2.0, step=1e-2)
    assert grid_minimize(r, 0.1, g).energy == np.inf
    assert grid_minimize(r, 50.0, g).energy == np.inf


@given(
    ell=st.floats(min_value=0.8, max_value=2.2),
    n=st.integers(min_value=1, max_value=3),
    seed=st.integers(min_value=0, max_value=10_000),
)
def test_dynamic_program_matches_literal_enumeration(half_env, ell, n, seed):
    r = realize(half_env, n, seed)
    dp = grid_minimize(r, ell, COARSE)
    lit = enumerate_minimize(r, ell, COARSE)
    if not np.isfinite(dp.energy):
        assert not np.isfinite(lit.energy) or lit.energy > dp.energy - np.inf
        return
    # The enumeration's last bond sits off-grid, so allow one grid step of
    # energy between the two searches.
    assert dp.energy == pytest.approx(lit.energy, abs=error_bound(r, COARSE))


def test_dynamic_program_matches_enumeration_elastic(half_env):
    r = realize(half_env, 3, seed=5)
    dp = grid_minimize(r, 1.02, COARSE, elastic_only=True)
    lit = enumerate_minimize(r, 1.02, COARSE, elastic_only=True)
    assert dp.energy == pytest.approx(lit.energy, abs=error_bound(r, COARSE))


def test_halving_the_step_moves_energy_less_than_the_coarse_bound(mix_env):
    r = realize(mix_env, 3, seed=13)
    coarse = GridSpec(lo=0.6, hi=8.0, step=2e-3)
    fine = GridSpec(lo=0.6, hi=8.0, step=1e-3)
    for ell in (1.05, 1.7):
        e_coarse = grid_minimize(r, ell, coarse).energy
        e_fine = grid_minimize(r, ell, fine).energy
        assert abs(e_coarse - e_fine) <= error_bound(r, coarse)


def test_error_bound_arithmetic(homog_env):
    r = realize(homog_env, 2, seed=0)
    g = GridSpec(lo=0.5, hi=8.0, step=1e-3)
    peak = pot.evaluate(r.spec.alphabet[0], LJ_INFLECTION, 1)
    assert error_bound(r, g) == pytest.approx(2e-3 * peak, rel=1e-12)


def test_weak_count(homog_env):
    r = realize(homog_env, 3, seed=0)
    assert weak_count(r, np.array([1.0, 1.0, 1.0])) == 0
    assert weak_count(r, np.array([1.0, 1.2, 5.0])) == 2


# ------------------------------------------------------------------- scanning

def test_scan_pair_detaches_near_the_inflection(homog_env):
    r = realize(homog_env, 2, seed=0)
    ell = critical_stretch_scan(r)
    assert abs(ell - LJ_INFLECTION) <= 2e-3


def test_scan_single_bond_finds_the_inflection(homog_env):
    r = realize(homog_env, 1, seed=0)
    ell = critical_stretch_scan(r)
    assert abs(ell - LJ_INFLECTION) <= 1e-3 + 1e-9


def test_scan_two_letter_pair_respects_mean_ground_state(periodic_env):
    r = realize(periodic_env, 2, seed=0)
    ell = critical_stretch_scan(r)
    assert ell >= 1.1 - 1e-3


def test_scan_raises_when_grid_stops_short(homog_env):
    r = realize(homog_env, 2, seed=0)
    with pytest.raises(NoCrossing):
        critical_stretch_scan(r, ell_grid=np.array([0.95, 1.0, 1.05]))
