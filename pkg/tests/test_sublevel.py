import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pencil_curvature.errors import DegenerateLadder, InputError
from pencil_curvature.pencil import BinaryForm
from pencil_curvature.sublevel import (
    Grid,
    MonteCarlo,
    SublevelQuery,
    fit_exponent,
    form_values,
    predicted_exponent,
    sublevel_measure,
    sublevel_profile,
    two_factor_oracle,
)

DISK = BinaryForm([1, 0, 1])  # s^2 + t^2
ST = BinaryForm([0, 1, 0])


def test_disk_area():
    est = sublevel_measure(SublevelQuery(DISK, 0.25, Grid(2048)))
    assert est.value == pytest.approx(math.pi / 4, abs=2e-3)
    mc = sublevel_measure(SublevelQuery(DISK, 0.25, MonteCarlo(10**5, seed=1)))
    assert abs(mc.value - math.pi / 4) < 4 * mc.stderr


def test_st_at_inverse_e():
    delta = math.exp(-1)
    expected = 4 * delta * (1 + math.log(1 / delta))
    assert expected == pytest.approx(2.943, abs=1e-3)
    assert two_factor_oracle(1, 1, delta) == pytest.approx(expected)
    est = sublevel_measure(SublevelQuery(ST, delta, Grid(2048)))
    assert est.value == pytest.approx(expected, abs=5e-3)


def test_threshold_above_max_gives_whole_square():
    est = sublevel_measure(SublevelQuery(DISK, 2.5, Grid(256)))
    assert est.value == 4.0
    assert two_factor_oracle(2, 3, 1.0) == 4.0


def test_two_factor_oracle_against_fine_grid():
    mu, nu, delta = 2, 1, 1e-4
    # integrate the t-extent numerically in s with many cells
    n = 2_000_000
    s = (np.arange(n) + 0.5) / n
    extent = np.minimum(1.0, (delta / s**mu) ** (1 / nu))
    numeric = 4 * extent.mean()
    assert two_factor_oracle(mu, nu, delta) == pytest.approx(numeric, rel=1e-3)


@given(st.integers(1, 4), st.integers(1, 4), st.floats(1e-6, 0.9))
def test_oracle_symmetry_and_bounds(mu, nu, delta):
    a = two_factor_oracle(mu, nu, delta)
    assert a == pytest.approx(two_factor_oracle(nu, mu, delta), rel=1e-9)
    assert 0 < a <= 4


@given(st.integers(1, 3), st.integers(1, 3), st.floats(1e-5, 0.5), st.floats(1.01, 4))
def test_oracle_monotone(mu, nu, delta, factor):
    assert two_factor_oracle(mu, nu, delta) <= two_factor_oracle(mu, nu, min(delta * factor, 1.0))


def test_profile_is_monotone():
    form = BinaryForm([1, -1, 0, 2])
    deltas = [2.0 ** -k for k in range(1, 12)]
    for method in (Grid(256), MonteCarlo(50_000, seed=3)):
        vals = [e.value for e in sublevel_profile(form, deltas, method)]
        assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_mc_and_grid_agree_with_oracle():
    form = BinaryForm([0, 0, 1, 0])  # s^2 t
    for delta in (1e-1, 1e-2):
        exact = two_factor_oracle(2, 1, delta)
        mc = sublevel_measure(SublevelQuery(form, delta, MonteCarlo(2 * 10**5, seed=7)))
        assert abs(mc.value - exact) < 4 * mc.stderr
        gr = sublevel_measure(SublevelQuery(form, delta, Grid(1024)))
        assert gr.value == pytest.approx(exact, rel=0.02)


def test_form_values_matches_direct_evaluation():
    rng = np.random.default_rng(0)
    s, t = rng.uniform(-1, 1, (2, 50))
    vals = form_values([1.0, -2.0, 0.5, 3.0], s, t)
    direct = t**3 - 2 * s * t**2 + 0.5 * s**2 * t + 3 * s**3
    assert np.allclose(vals, direct)


def test_degenerate_ladders():
    with pytest.raises(DegenerateLadder):
        fit_exponent(ST, [0.1, 0.05, 0.01])
    with pytest.raises(DegenerateLadder):
        fit_exponent(ST, [0.1, 0.2, 0.05, 0.01, 0.001])
    with pytest.raises(DegenerateLadder):
        fit_exponent(BinaryForm([0, 0, 0, 0, 1]), [10.0**-k for k in range(300, 306)], MonteCarlo(10**4))


def test_method_validation():
    with pytest.raises(InputError):
        Grid(10)
    with pytest.raises(InputError):
        MonteCarlo(100)
    with pytest.raises(InputError):
        SublevelQuery(ST, 0.0)


def test_fit_is_reproducible():
    ladder = [2.0 ** -k for k in range(2, 8)]
    a = fit_exponent(ST, ladder, MonteCarlo(10**4, seed=5))
    b = fit_exponent(ST, ladder, MonteCarlo(10**4, seed=5))
    assert a.measures == b.measures and a.seeds == b.seeds


@pytest.mark.parametrize(
    "mults, real, expected",
    [
        ((1, 1), None, (1.0, True)),
        ((3,), None, (1 / 3, False)),
        ((2,), None, (0.5, False)),
        ((1, 1), [False, False], (1.0, False)),
        ((3, 1), None, (1 / 3, False)),
        ((1, 1, 1), None, (2 / 3, False)),
        ((2, 1, 1), None, (0.5, True)),
    ],
)
def test_predicted_exponent(mults, real, expected):
    assert predicted_exponent(mults, real) == pytest.approx(expected)


def test_exponent_sharpness_floor():
    # the fitted exponent of s^3 t stays near the predicted 1/3 on a grid
    fit = fit_exponent(BinaryForm([0, 0, 0, 1, 0]), [2.0 ** -k for k in range(3, 9)], Grid(2048))
    rate, _ = predicted_exponent((3, 1))
    assert fit.exponent == pytest.approx(rate, abs=0.05)
    # the measure dominates c * delta^rate with c = 1e-2
    assert all(m >= 1e-2 * d**rate for m, d in zip(fit.measures, fit.ladder))
