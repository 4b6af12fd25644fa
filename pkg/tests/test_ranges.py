from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pencil_curvature.classify import classify
from pencil_curvature.errors import InputError
from pencil_curvature.ranges import (
    Truth,
    exponent_range,
    kakeya_exponent,
    predicted_true_region,
    reciprocal,
    well_curved_kakeya_exponent,
)
from pencil_curvature.suite import canonical_examples

EXAMPLES = {e.name: e.pencil for e in canonical_examples()}
RANGES = {name: exponent_range(classify(p)) for name, p in EXAMPLES.items()}


def verdict(name):
    return classify(EXAMPLES[name])


def test_well_curved_interior_point():
    v = verdict("well_curved_hyperbolic")
    assert predicted_true_region(v, 2, 2, 4) == Truth.TRUE


def test_well_curved_endpoint_is_open_when_critical():
    v = verdict("well_curved_hyperbolic")  # d = 2, critical
    # endpoint (4/(d+4), 2/(d+4)) = (2/3, 1/3): p = 3/2, q = 3
    assert predicted_true_region(v, 2, Fraction(3, 2), 3) == Truth.UNKNOWN


def test_non_critical_recovers_segment():
    v = verdict("well_curved_d3")
    rng = exponent_range(v)
    assert not rng.critical
    # on the critical line 2 + 3y = 5x, away from the endpoint (4/7, 2/7)
    x = Fraction(3, 4)
    y = (5 * x - 2) / 3
    assert rng.truth(x, y) == Truth.TRUE
    assert rng.truth(Fraction(4, 7), Fraction(2, 7)) == Truth.UNKNOWN


def test_flat_and_common_kernel_false_points():
    v = verdict("flat_identity")  # m* = 2, d = 2
    assert predicted_true_region(v, 2, Fraction(3, 2), 3) == Truth.FALSE
    v = verdict("common_kernel_d2")
    assert predicted_true_region(v, 2, 2, 4) == Truth.FALSE
    v = verdict("kernel_split_d3")
    assert predicted_true_region(v, 3, Fraction(4, 3), 2) == Truth.FALSE


def test_trivial_region_true_for_every_verdict():
    for name, p in EXAMPLES.items():
        v = classify(p)
        assert predicted_true_region(v, p.d, "inf", 7) == Truth.TRUE
        assert predicted_true_region(v, p.d, 1, 1) == Truth.TRUE
        assert predicted_true_region(v, p.d, 3, 2) == Truth.TRUE


def test_kakeya_examples():
    assert well_curved_kakeya_exponent(2) == Fraction(-2, 3)
    assert well_curved_kakeya_exponent(4) == Fraction(-1)
    # unit weights at q = (d+4)/2 reproduce the endpoint exponent -2d/(d+4)
    for d in range(1, 8):
        assert kakeya_exponent(d, Fraction(d + 4, 2), unit_weights=True) == well_curved_kakeya_exponent(d)
    assert kakeya_exponent(2, 3) == Fraction(2, 3)


def test_reciprocal():
    assert reciprocal("inf") == 0
    assert reciprocal(float("inf")) == 0
    assert reciprocal(4) == Fraction(1, 4)
    assert reciprocal("3/2") == Fraction(2, 3)
    with pytest.raises(InputError):
        reciprocal(Fraction(1, 2))


def test_dimension_mismatch():
    with pytest.raises(InputError):
        predicted_true_region(verdict("well_curved_hyperbolic"), 3, 2, 4)


def grid_points(n):
    for i in range(n + 1):
        for j in range(n + 1):
            yield Fraction(i, n), Fraction(j, n)


@pytest.mark.parametrize("name", sorted(EXAMPLES))
def test_regions_disjoint_on_grid(name):
    rng = RANGES[name]
    n = 200
    for x, y in grid_points(n):
        assert not (rng.is_true(x, y) and rng.is_false(x, y)), (x, y)


fractions01 = st.fractions(min_value=0, max_value=1, max_denominator=60)


@pytest.mark.parametrize("name", sorted(EXAMPLES))
@given(x=fractions01, y=fractions01, shrink=fractions01)
def test_hoelder_monotonicity(name, x, y, shrink):
    """Boundedness into L^q implies boundedness into every smaller L^q (y grows)."""
    rng = RANGES[name]
    y2 = y + (1 - y) * shrink
    if rng.is_true(x, y):
        assert not rng.is_false(x, y2)
    if rng.is_false(x, y2):
        assert not rng.is_true(x, y)


@pytest.mark.parametrize("name", sorted(EXAMPLES))
@given(x=fractions01, y=fractions01, z=fractions01)
def test_mixed_regions_disjoint(name, x, y, z):
    rng = RANGES[name]
    assert not (rng.is_true(x, y, z) and rng.is_false(x, y, z))
