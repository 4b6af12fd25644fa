import random
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from conftest import OFFDIAG, diag, random_sl, sl2_rational
from pencil_curvature import linalg
from pencil_curvature.classify import (
    COMMON_KERNEL,
    FLAT_NONVANISHING,
    KERNEL_SPLIT,
    WELL_CURVED,
    DegenerateCommonKernel,
    DegenerateKernelSplit,
    FlatNonvanishing,
    WellCurved,
    classify,
    classify_surface_pointwise,
    flat_eigenstructure,
    kernel_split,
    rogers_rank_check,
    signature,
)
from pencil_curvature.errors import NumericallyAmbiguous, PreconditionError
from pencil_curvature.pencil import SymmetricPencil
from pencil_curvature.suite import KS3, block_sum, canonical_examples
from pencil_curvature.witness import antidiag_identity, antidiag_jordan

CANONICAL = canonical_examples()


def test_hyperbolic_pair_is_critical_well_curved():
    v = classify(SymmetricPencil(diag(1, -1), OFFDIAG))
    assert isinstance(v, WellCurved) and v.critical and v.m_star == 1


def test_identity_pair_is_flat():
    v = classify(SymmetricPencil(diag(1, 1), diag(1, 1)))
    assert isinstance(v, FlatNonvanishing)
    e = v.eigenstructure
    assert (e.lambda_star, e.n0, e.block_sizes, e.m_star) == (1, 2, (), 2)


def test_kernel_split_example():
    v = classify(SymmetricPencil(*KS3))
    assert isinstance(v, DegenerateKernelSplit)
    ks = v.split
    assert (ks.k, ks.ell_H, ks.epsilon) == (2, 1, Fraction(1, 2))
    V = np.column_stack(ks.V)
    H = np.column_stack(ks.H)
    assert linalg.rank(np.hstack([V, linalg.fmatrix([[1, 0], [0, 1], [0, 0]])])) == 2
    assert linalg.rank(np.hstack([H, linalg.fmatrix([[0], [0], [1]])])) == 1


def test_common_kernel_example():
    v = classify(SymmetricPencil(diag(1, 0), diag(0, 0)))
    assert isinstance(v, DegenerateCommonKernel)
    assert len(v.kernel) == 1
    k = v.kernel[0]
    assert k[0] == 0 and k[1] != 0


def test_flat_eigenstructure_rejects_well_curved():
    with pytest.raises(PreconditionError):
        flat_eigenstructure(SymmetricPencil(OFFDIAG, diag(1, 1)))


def test_double_jordan_block():
    p = SymmetricPencil(
        block_sum(antidiag_jordan(2, 0), antidiag_jordan(2, 0)),
        block_sum(antidiag_identity(2), antidiag_identity(2)),
    )
    e = flat_eigenstructure(p)
    assert (e.lambda_star, e.block_sizes, e.n0, e.m_star) == (0, (2, 2), 0, 4)


def test_kernel_split_rejects_nonvanishing_form():
    with pytest.raises(PreconditionError):
        kernel_split(SymmetricPencil(diag(1, 0), OFFDIAG))


def test_block_doubled_kernel_split():
    # the direct sum of two copies of the d=3 example
    A, B = (linalg.fmatrix(M) for M in KS3)
    v = classify(SymmetricPencil(block_sum(A, A), block_sum(B, B)))
    assert signature(v) == (KERNEL_SPLIT, 4, 2, Fraction(1, 2))


def test_kernel_and_image_dimensions_cannot_be_four_and_two_in_dimension_four():
    # with V orthogonal to H, dim V + dim H <= d, so k = d = 4 leaves no room for H
    for M in range(20):
        rng = random.Random(M)
        A = linalg.zeros((4, 4))
        B = linalg.zeros((4, 4))
        for i in range(4):
            for j in range(i, 4):
                A[i, j] = A[j, i] = Fraction(rng.randint(-1, 1))
                B[i, j] = B[j, i] = Fraction(rng.randint(-1, 1))
        p = SymmetricPencil(A, B)
        v = classify(p)
        if isinstance(v, DegenerateKernelSplit):
            assert v.split.k + v.split.ell_H <= 4


@pytest.mark.parametrize("entry", CANONICAL, ids=lambda e: e.name)
def test_canonical_signatures(entry):
    assert signature(classify(entry.pencil)) == entry.expected


@pytest.mark.parametrize("entry", CANONICAL, ids=lambda e: e.name)
def test_rho_and_sigma_invariance(entry):
    rng = random.Random(hash(entry.name) % 1000)
    for _ in range(3):
        M = random_sl(entry.d, rng)
        a, b = Fraction(rng.randint(-3, 3), rng.randint(1, 3)), Fraction(rng.randint(-2, 2), 1)
        N = linalg.fmatrix([[1, a], [0, 1]]) @ linalg.fmatrix([[1, 0], [b, 1]])
        q = entry.pencil.sigma(N).rho(M)
        assert signature(classify(q)) == entry.expected


def sympy_jordan_blocks(S, lam):
    """Oracle: Jordan block sizes of S at eigenvalue lam via sympy."""
    Sm = sympy.Matrix(S.shape[0], S.shape[1], lambda i, j: sympy.Rational(str(S[i, j])))
    _, J = Sm.jordan_form()
    sizes = []
    i = 0
    n = J.shape[0]
    while i < n:
        j = i
        while j + 1 < n and J[j, j + 1] == 1:
            j += 1
        if J[i, i] == sympy.Rational(str(lam)):
            sizes.append(j - i + 1)
        i = j + 1
    return sorted(sizes, reverse=True)


@pytest.mark.parametrize(
    "entry", [e for e in CANONICAL if e.expected[0] == FLAT_NONVANISHING], ids=lambda e: e.name
)
def test_jordan_blocks_match_sympy(entry):
    e = flat_eigenstructure(entry.pencil)
    p2 = entry.pencil.sigma(e.relabel)
    S = p2.A @ linalg.inverse(p2.B)
    expected = sympy_jordan_blocks(S, e.lambda_star)
    got = sorted(list(e.block_sizes) + [1] * e.n0, reverse=True)
    assert got == expected


@given(st.integers(0, 10**6))
def test_random_flat_construction(seed):
    """Jordan blocks of random size at a common eigenvalue, disguised by conjugation."""
    rng = random.Random(seed)
    sizes = [rng.randint(1, 3) for _ in range(rng.randint(1, 3))]
    lam = Fraction(rng.randint(-2, 2))
    blocks_a = [antidiag_jordan(r, lam) for r in sizes]
    blocks_b = [antidiag_identity(r) for r in sizes]
    m = sum(sizes)
    extra = rng.randint(0, min(max(0, m - 1), 12 - m))
    for _ in range(extra):
        blocks_a.append(diag(lam + rng.randint(1, 3)))
        blocks_b.append(diag(1))
    if m + extra < 2:
        return
    p = SymmetricPencil(block_sum(*blocks_a), block_sum(*blocks_b))
    p = p.rho(random_sl(p.d, rng))
    v = classify(p)
    if 2 * m <= p.d:
        assert isinstance(v, WellCurved)
        return
    assert isinstance(v, FlatNonvanishing)
    e = v.eigenstructure
    assert e.n0 == sizes.count(1)
    assert sorted(e.block_sizes) == sorted(r for r in sizes if r > 1)


def test_float_mode_hides_jordan_data_unless_asked():
    p = SymmetricPencil(diag(1, 1), diag(1, 1))
    assert classify(p, "float").eigenstructure is None
    e = classify(p, "float", unsafe_numerics=True).eigenstructure
    assert e.n0 == 2 and e.block_sizes == ()


def test_float_degenerate_noise_is_ambiguous():
    A = np.array([[0.0, 0, 1], [0, 0, 0], [1, 0, 0]])
    B = np.array([[0.0, 0, 0], [0, 0, 1], [0, 1, 0]])
    A[1, 1] = 1e-13
    with pytest.raises(NumericallyAmbiguous):
        classify(SymmetricPencil(A, B, "float"))


def test_pointwise_constant_field():
    p = SymmetricPencil(diag(1, -1), OFFDIAG)
    res = classify_surface_pointwise(lambda xi: (p.A, p.B), [(0, 0), (1, 2), (Fraction(1, 3), 0)])
    assert res.constant
    assert all(signature(v) == signature(classify(p)) for _, v in res.entries)


def test_pointwise_quadratic_surface():
    field = lambda xi: (diag(2, 2), linalg.fmatrix(OFFDIAG))
    res = classify_surface_pointwise(field, [(0, 0), (1, 1)])
    assert all(isinstance(v, WellCurved) for _, v in res.entries)


def test_pointwise_quartic_changes_type():
    field = lambda xi: (diag(12 * Fraction(xi[0]) ** 2, 0), diag(0, 2))
    res = classify_surface_pointwise(field, [(0, 0), (1, 0), (Fraction(1, 2), 0)])
    kinds = [v.kind for _, v in res.entries]
    assert kinds[0] in (COMMON_KERNEL, KERNEL_SPLIT)
    assert kinds[1:] == [WELL_CURVED, WELL_CURVED]
    assert all(v.critical for _, v in res.entries[1:])
    assert not res.constant


def test_rogers_rank_examples():
    p = SymmetricPencil(diag(1, -1), OFFDIAG)
    assert rogers_rank_check(p, linalg.identity(2))
    assert rogers_rank_check(p, [[1], [0]])
    with pytest.raises(PreconditionError):
        rogers_rank_check(SymmetricPencil(*KS3), linalg.identity(3))
