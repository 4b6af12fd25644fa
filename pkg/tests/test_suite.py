from pencil_curvature.classify import classify, signature
from pencil_curvature.suite import canonical_examples, curated_suite, random_unimodular
from pencil_curvature import linalg
import random


def test_suite_size_and_dimensions():
    suite = curated_suite()
    assert len(suite) >= 200
    assert {e.d for e in suite} >= {2, 3, 4, 5, 6}
    assert len({e.name for e in suite}) == len(suite)


def test_suite_is_reproducible():
    a = curated_suite(seed=7, random_per_dim=3, block_sums=5)
    b = curated_suite(seed=7, random_per_dim=3, block_sums=5)
    for x, y in zip(a, b):
        assert x.name == y.name
        assert (x.pencil.A == y.pencil.A).all() and (x.pencil.B == y.pencil.B).all()


def test_canonical_signatures():
    for e in canonical_examples():
        assert signature(classify(e.pencil)) == e.expected, e.name


def test_unimodular_matrices_have_unit_determinant():
    rng = random.Random(3)
    for n in range(2, 7):
        assert linalg.det_bareiss(random_unimodular(n, rng)) == 1
