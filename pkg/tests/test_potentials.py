"""Closed-form potential families and their shape validation."""
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from chainfrac import potentials as pot
from chainfrac.errors import InvalidSpec, NonpositiveStrain

LJ_INFLECTION = (13.0 / 7.0) ** (1.0 / 6.0)


# ---------------------------------------------------------------- evaluation

def test_lj_well_values(lj):
    assert pot.evaluate(lj, 1.0, 0) == pytest.approx(-1.0, abs=1e-15)
    assert pot.evaluate(lj, 1.0, 1) == pytest.approx(0.0, abs=1e-12)
    assert pot.evaluate(lj, 1.0, 2) == pytest.approx(72.0, rel=1e-13)


def test_lj_value_at_two_matches_direct_arithmetic(lj):
    # z^-12 - 2 z^-6 at z = 2 is exactly -127/4096.
    assert pot.evaluate(lj, 2.0, 0) == pytest.approx(-127.0 / 4096.0, rel=1e-15)


def test_lj_third_derivative_at_ground_state(lj):
    # 12*(56 z^-15... reduces to -1512 at z = 1 for the (12,6) exponents.
    assert pot.evaluate(lj, 1.0, 3) == pytest.approx(-1512.0, rel=1e-13)


def test_nonpositive_strain_raises(lj):
    with pytest.raises(NonpositiveStrain):
        pot.evaluate(lj, 0.0)
    with pytest.raises(NonpositiveStrain):
        pot.evaluate(lj, -1.0, 2)
    with pytest.raises(NonpositiveStrain):
        pot.evaluate_many(lj, np.array([1.0, -0.5]), 0)


def test_order_out_of_range(lj):
    with pytest.raises(ValueError):
        pot.evaluate(lj, 1.0, 4)
    with pytest.raises(ValueError):
        pot.evaluate_many(lj, np.array([1.0]), -1)


def test_tail_truncates_to_exact_zero(lj):
    cap = pot.strain_cap(lj)
    assert pot.evaluate(lj, cap * 1.5, 0) == 0.0
    assert pot.evaluate_many(lj, np.array([cap * 2.0]), 1)[0] == 0.0


def test_vectorized_matches_scalar(lj, half_lj, long_lj):
    zs = np.array([0.7, 0.95, 1.0, 1.2, 2.0, 5.0])
    for spec in (lj, half_lj, long_lj, pot.morse()):
        for order in range(4):
            vec = pot.evaluate_many(spec, zs, order)
            scal = [pot.evaluate(spec, z, order) for z in zs]
            np.testing.assert_allclose(vec, scal, rtol=1e-14)


# ------------------------------------------------------- derived quantities

def test_lj_ground_state_and_inflection(lj):
    assert pot.ground_state(lj) == 1.0
    assert pot.inflection_point(lj) == pytest.approx(LJ_INFLECTION, rel=1e-14)
    # J'' changes sign there.
    assert pot.evaluate(lj, pot.inflection_point(lj), 2) == pytest.approx(0.0, abs=1e-9)


def test_scaled_shifted_moves_ground_state(lj, long_lj, half_lj):
    assert pot.ground_state(long_lj) == pytest.approx(1.2, rel=1e-15)
    assert pot.inflection_point(long_lj) == pytest.approx(1.2 * LJ_INFLECTION, rel=1e-13)
    # Depth-only scaling leaves both locations alone.
    assert pot.ground_state(half_lj) == 1.0
    assert pot.inflection_point(half_lj) == pytest.approx(LJ_INFLECTION, rel=1e-13)
    assert pot.well_depth(half_lj) == pytest.approx(0.5, rel=1e-15)


def test_scaled_shifted_is_a_rescaled_base(lj):
    spec = pot.scaled_shifted(lj, scale=1.7, depth_scale=0.3)
    for z in (0.9, 1.7, 2.5, 4.0):
        assert pot.evaluate(spec, z, 0) == pytest.approx(
            0.3 * pot.evaluate(lj, z / 1.7, 0), rel=1e-14
        )
        # Chain rule: each derivative order picks up another 1/scale.
        assert pot.evaluate(spec, z, 2) == pytest.approx(
            0.3 / 1.7**2 * pot.evaluate(lj, z / 1.7, 2), rel=1e-14
        )


def test_morse_well_constants():
    spec = pot.morse(depth=2.0, width=4.0)
    assert pot.ground_state(spec) == 1.0
    assert pot.evaluate(spec, 1.0, 0) == pytest.approx(-2.0, rel=1e-15)
    assert pot.evaluate(spec, 1.0, 2) == pytest.approx(2.0 * 2.0 * 16.0, rel=1e-13)
    assert pot.inflection_point(spec) == pytest.approx(1.0 + math.log(2.0) / 4.0, rel=1e-14)


def test_curvature_of_scaled_well(lj):
    spec = pot.scaled_shifted(lj, scale=2.0, depth_scale=3.0)
    assert pot.curvature_at_ground_state(spec) == pytest.approx(3.0 / 4.0 * 72.0, rel=1e-14)


@given(
    scale=st.floats(min_value=0.5, max_value=3.0),
    z=st.floats(min_value=0.6, max_value=5.0),
)
def test_depth_scaling_multiplies_energy_only(lj, scale, z):
    spec = pot.scaled_shifted(lj, scale=1.0, depth_scale=scale)
    assert pot.evaluate(spec, z, 0) == pytest.approx(scale * pot.evaluate(lj, z, 0), rel=1e-13)
    assert pot.evaluate(spec, z, 1) == pytest.approx(scale * pot.evaluate(lj, z, 1), rel=1e-13)


# --------------------------------------------------------- finite differences

@pytest.mark.parametrize("family", ["lj", "morse", "scaled"])
@pytest.mark.parametrize("order", [0, 1, 2])
def test_central_differences_match_next_derivative(family, order, lj):
    spec = {
        "lj": lj,
        "morse": pot.morse(depth=1.3, width=5.0),
        "scaled": pot.scaled_shifted(lj, scale=1.2, depth_scale=0.7),
    }[family]
    delta = pot.ground_state(spec)
    rng = np.random.default_rng(order + 17)
    zs = rng.uniform(0.5 * delta, 3.0 * delta, size=20)
    h = 1e-6 * delta
    for z in zs:
        fd = (pot.evaluate(spec, z + h, order) - pot.evaluate(spec, z - h, order)) / (2 * h)
        exact = pot.evaluate(spec, z, order + 1)
        assert abs(fd - exact) <= 1e-6 * max(1.0, abs(exact))


# ----------------------------------------------------------------- validation

def test_spec_rejects_bad_parameters(lj):
    with pytest.raises(InvalidSpec):
        pot.lennard_jones(depth=0.0)
    with pytest.raises(InvalidSpec):
        pot.lennard_jones(m=6.0, n=12.0)
    with pytest.raises(InvalidSpec):
        pot.morse(depth=-1.0)
    with pytest.raises(InvalidSpec):
        pot.scaled_shifted(lj, scale=-2.0)
    with pytest.raises(InvalidSpec):
        pot.PotentialSpec("unknown_family", (1.0,))
    with pytest.raises(InvalidSpec):
        pot.PotentialSpec(pot.SCALED_SHIFTED, (1.0, 1.0), base=None)


def test_validation_passes_for_builtin_families(lj, half_lj, long_lj):
    for spec in (lj, half_lj, long_lj, pot.morse(), pot.scaled_shifted(lj, 1.0, 2.0)):
        report = pot.validate_assumptions(spec)
        assert report.passed, [c for c in report.checks if not c.passed]


def test_validation_requires_a_reasonable_grid(lj):
    with pytest.raises(ValueError):
        pot.validate_assumptions(lj, grid_size=10)


def test_nondegeneracy_constant_for_lj(lj):
    c = pot.nondegeneracy_constant(lj)
    # The window bound on |J'''| binds first: |J'''(1)| = 1512 forces
    # c <= 1/1512, and the third derivative grows toward the wall, so the
    # optimum sits just below that.
    assert 0.0 < c <= 1.0 / 1512.0
    assert c >= 0.95 / 1512.0
    # Frozen regression value of the bisection itself.
    assert c == pytest.approx(0.000653800041193771, rel=1e-9)


def test_nondegeneracy_window_is_feasible(lj):
    c = pot.nondegeneracy_constant(lj)
    zs = np.linspace(1.0 - c, 1.0 + c, 501)[1:-1]
    d2 = pot.evaluate_many(lj, zs, 2)
    d3 = np.abs(pot.evaluate_many(lj, zs, 3))
    assert d2.min() >= c
    assert d2.max() <= 1.0 / c
    assert d3.max() <= 1.0 / c


def test_potential_props_bundle(lj):
    props = pot.potential_props(lj)
    assert props.ground_state == 1.0
    assert props.well_depth == 1.0
    assert props.inflection == pytest.approx(LJ_INFLECTION, rel=1e-13)
    assert props.curvature_at_min == pytest.approx(72.0)
    assert props.c_upper == pytest.approx(1.0 / props.c_lower)


def test_shape_grid_checks(lj):
    report = pot.validate_assumptions(lj)
    names = [c.label for c in report.checks]
    assert "convex_left_of_inflection" in names
    assert "tail_vanishes_monotonically" in names
    # Curvature is positive strictly left of the inflection...
    zs = np.linspace(0.55, LJ_INFLECTION * (1 - 1e-6), 400)
    assert (pot.evaluate_many(lj, zs, 2) > 0.0).all()
    # ...and the response never dips below zero to the right of it.
    zs = np.linspace(LJ_INFLECTION, 50.0, 400)
    assert (pot.evaluate_many(lj, zs, 1) >= -1e-10).all()
