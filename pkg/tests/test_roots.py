from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from conftest import sl2_rational
from pencil_curvature.errors import ClusterAmbiguous, ZeroForm
from pencil_curvature.pencil import BinaryForm, substitute
from pencil_curvature.roots import (
    chordal_distance,
    max_multiplicity,
    reconstruct,
    roots_with_multiplicities,
    squarefree_decomposition,
)


def multiset(f):
    return sorted(roots_with_multiplicities(f).multiplicities)


def sympy_multiplicities(coeffs):
    """Oracle: factor the dehomogenized polynomial; missing degree = roots at infinity."""
    z = sympy.symbols("z")
    d = len(coeffs) - 1
    poly = sympy.Poly(sum(sympy.Rational(str(c)) * z**k for k, c in enumerate(coeffs)), z)
    mults = []
    for factor, m in sympy.sqf_list(poly)[1]:
        mults.extend([m] * factor.degree())
    infinity = d - poly.degree()
    if infinity:
        mults.append(infinity)
    return sorted(mults)


def test_s2t2():
    r = roots_with_multiplicities(BinaryForm((0, 0, 1, 0, 0)))
    assert sorted((r_.a.real, r_.b.real, r_.multiplicity) for r_ in r.roots) == [(0, 1, 2), (1, 0, 2)]


def test_cube():
    r = roots_with_multiplicities(BinaryForm((1, 3, 3, 1)))
    assert r.multiplicities == (3,)
    root = r.roots[0]
    assert root.is_real and abs(root.a + root.b) < 1e-12


def test_conjugate_pair():
    r = roots_with_multiplicities(BinaryForm((-1, 0, -1)))
    assert r.multiplicities == (1, 1)
    assert not r.roots[0].is_real
    a, b = r.roots[0].a, r.roots[0].b
    c, e = r.roots[1].a, r.roots[1].b
    assert chordal_distance((a.conjugate(), b.conjugate()), (c, e)) < 1e-12


def test_max_multiplicity_examples():
    assert max_multiplicity(roots_with_multiplicities(BinaryForm((0, 0, 1, 0, 0))))[0] == 2
    assert max_multiplicity(roots_with_multiplicities(BinaryForm((1, 3, 3, 1))))[0] == 3
    assert max_multiplicity(roots_with_multiplicities(BinaryForm((-1, 0, -1))))[0] == 1


def test_max_multiplicity_tie_break_is_lexicographic():
    m, root = max_multiplicity(roots_with_multiplicities(BinaryForm((0, 0, 1, 0, 0))))
    assert (root.a, root.b) == (0, 1)


def test_zero_form_raises():
    with pytest.raises(ZeroForm):
        roots_with_multiplicities(BinaryForm((0, 0, 0)))


def product_form(factors):
    """prod (b_j s - a_j t)^{m_j} for integer (a_j, b_j)."""
    f = BinaryForm((1,))
    for (a, b), m in factors:
        for _ in range(m):
            f = f * BinaryForm((-a, b))
    return f


root_points = st.tuples(st.integers(-5, 5), st.integers(-5, 5)).filter(lambda x: x != (0, 0))


@st.composite
def factored_forms(draw):
    pts = draw(st.lists(root_points, min_size=1, max_size=4))
    # keep projectively distinct points only
    distinct = []
    for a, b in pts:
        if all(a * e - b * c != 0 for c, e in distinct):
            distinct.append((a, b))
    mults = [draw(st.integers(1, 3)) for _ in distinct]
    return product_form(list(zip(distinct, mults))), sorted(mults)


@given(factored_forms())
def test_exact_multiplicities_recover_construction(fm):
    f, mults = fm
    assert multiset(f) == mults


@given(factored_forms())
def test_float_multiplicities_match_exact(fm):
    f, mults = fm
    try:
        got = sorted(roots_with_multiplicities(f.as_float()).multiplicities)
    except ClusterAmbiguous:
        return
    assert got == mults


@given(st.lists(st.integers(-6, 6), min_size=3, max_size=8).filter(lambda c: any(c)))
def test_exact_multiplicities_match_sympy(coeffs):
    assert multiset(BinaryForm(tuple(coeffs))) == sympy_multiplicities(coeffs)


@given(factored_forms(), sl2_rational())
def test_multiplicities_are_substitution_invariant(fm, N):
    f, mults = fm
    assert multiset(substitute(f, N)) == mults


@given(factored_forms())
def test_reconstruction_matches_coefficients(fm):
    f, _ = fm
    r = roots_with_multiplicities(f)
    rec = reconstruct(r)
    c = np.array([float(x) for x in f.coeffs])
    k = int(np.argmax(np.abs(c)))
    scale = c[k] / rec[k]
    assert np.max(np.abs(rec * scale - c)) <= 1e-6 * np.max(np.abs(c))


def test_squarefree_decomposition_exact():
    # (z - 1)^2 (z + 2) in ascending order
    poly = [Fraction(2), Fraction(-3), Fraction(0), Fraction(1)]
    parts = squarefree_decomposition(poly)
    assert sorted((len(f) - 1, m) for f, m in parts) == [(1, 1), (1, 2)]


def test_ring_shaped_cluster_is_grouped():
    # fourfold root split by 1e-14 noise: neighbours sit ~1e-3.5 apart
    f = BinaryForm((1e-14, 0, 0, 0, 1), exact=False)
    assert roots_with_multiplicities(f).multiplicities == (4,)


def test_near_collision_is_ambiguous():
    # roots at 1 and 1.001 are 5e-4 apart chordally: beyond the two-fold
    # threshold sqrt(1e-7) but inside sqrt(1e-6)
    a, b = 1.0, 1.001
    f = BinaryForm((a * b, -(a + b), 1.0), exact=False)
    with pytest.raises(ClusterAmbiguous):
        roots_with_multiplicities(f)
