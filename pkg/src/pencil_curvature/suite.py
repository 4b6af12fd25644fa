"""A curated, reproducible collection of pencils with known verdicts.

Hand-checked examples carry the verdict signature they must produce; their
rho/sigma conjugates by integer unimodular matrices inherit it.  Random
rational pencils (d = 2..6) and random block sums widen the coverage and are
checked for exact/float agreement only.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np

from . import linalg
from .classify import COMMON_KERNEL, FLAT_NONVANISHING, KERNEL_SPLIT, WELL_CURVED
from .pencil import SymmetricPencil
from .witness import antidiag_identity, antidiag_jordan


@dataclass(frozen=True, eq=False)
class SuiteEntry:
    name: str
    pencil: SymmetricPencil
    expected: Optional[tuple]  # verdict signature, when hand-derived

    @property
    def d(self) -> int:
        return self.pencil.d


def _m(rows) -> np.ndarray:
    return linalg.fmatrix(rows)


def _diag(*vals) -> np.ndarray:
    n = len(vals)
    out = linalg.zeros((n, n))
    for i, v in enumerate(vals):
        out[i, i] = Fraction(v)
    return out


def block_sum(*blocks) -> np.ndarray:
    n = sum(b.shape[0] for b in blocks)
    out = linalg.zeros((n, n))
    i = 0
    for b in blocks:
        k = b.shape[0]
        out[i : i + k, i : i + k] = b
        i += k
    return out


OFFDIAG = [[0, 1], [1, 0]]
KS3 = ([[0, 0, 1], [0, 0, 0], [1, 0, 0]], [[0, 0, 0], [0, 0, 1], [0, 1, 0]])


def canonical_examples() -> List[SuiteEntry]:
    half = Fraction(1, 2)
    ks3 = SymmetricPencil(*KS3)
    E = [
        SuiteEntry("well_curved_hyperbolic", SymmetricPencil(_diag(1, -1), _m(OFFDIAG)), (WELL_CURVED, 1, True)),
        SuiteEntry("well_curved_swap", SymmetricPencil(_m(OFFDIAG), _diag(1, 1)), (WELL_CURVED, 1, True)),
        SuiteEntry("well_curved_st", SymmetricPencil(_diag(1, 0), _diag(0, 1)), (WELL_CURVED, 1, True)),
        SuiteEntry("well_curved_pointwise", SymmetricPencil(_diag(2, 2), _m(OFFDIAG)), (WELL_CURVED, 1, True)),
        SuiteEntry("well_curved_d3", SymmetricPencil(_diag(1, 2, 3), _diag(1, 1, 1)), (WELL_CURVED, 1, False)),
        SuiteEntry("well_curved_d4_critical", SymmetricPencil(_diag(1, 1, 2, 3), _diag(1, 1, 1, 1)), (WELL_CURVED, 2, True)),
        SuiteEntry("flat_identity", SymmetricPencil(_diag(1, 1), _diag(1, 1)), (FLAT_NONVANISHING, 2, (2, ()))),
        SuiteEntry("flat_s_squared", SymmetricPencil(_diag(1, 1), _diag(0, 0)), (FLAT_NONVANISHING, 2, (2, ()))),
        SuiteEntry("flat_t_squared", SymmetricPencil(_diag(1, 0), _m(OFFDIAG)), (FLAT_NONVANISHING, 2, (0, (2,)))),
        SuiteEntry(
            "flat_single_block_d3",
            SymmetricPencil(_m([[0, 0, 1], [0, 1, 0], [1, 0, 0]]), _m([[0, 1, 0], [1, 0, 0], [0, 0, 0]])),
            (FLAT_NONVANISHING, 3, (0, (3,))),
        ),
        SuiteEntry(
            "flat_with_complement",
            SymmetricPencil(_diag(1, 1, 2), _diag(1, 1, 1)),
            (FLAT_NONVANISHING, 2, (2, ())),
        ),
        SuiteEntry(
            "flat_double_block_d4",
            SymmetricPencil(
                block_sum(antidiag_jordan(2, 0), antidiag_jordan(2, 0)),
                block_sum(antidiag_identity(2), antidiag_identity(2)),
            ),
            (FLAT_NONVANISHING, 4, (0, (2, 2))),
        ),
        SuiteEntry("kernel_split_d3", ks3, (KERNEL_SPLIT, 2, 1, half)),
        SuiteEntry(
            "kernel_split_d6",
            SymmetricPencil(block_sum(ks3.A, ks3.A), block_sum(ks3.B, ks3.B)),
            (KERNEL_SPLIT, 4, 2, half),
        ),
        SuiteEntry("common_kernel_d2", SymmetricPencil(_diag(1, 0), _diag(0, 0)), (COMMON_KERNEL, 1)),
        SuiteEntry("common_kernel_d3", SymmetricPencil(_diag(1, 1, 0), _diag(0, 1, 0)), (COMMON_KERNEL, 1)),
    ]
    return E


# ------------------------------------------------------------------ random data


def random_unimodular(n: int, rng: random.Random, steps: int = 3) -> np.ndarray:
    """A product of a few elementary integer matrices (determinant exactly 1)."""
    M = linalg.identity(n)
    for _ in range(steps):
        i, j = rng.sample(range(n), 2)
        c = rng.choice([-2, -1, 1, 2])
        E = linalg.identity(n)
        E[i, j] = Fraction(c)
        M = E @ M
    return M


def random_sl2(rng: random.Random) -> np.ndarray:
    return random_unimodular(2, rng, steps=2)


def conjugate(p: SymmetricPencil, rng: random.Random) -> SymmetricPencil:
    return p.sigma(random_sl2(rng)).rho(random_unimodular(p.d, rng))


def random_symmetric(n: int, rng: random.Random, bound: int = 3) -> np.ndarray:
    out = linalg.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            v = Fraction(rng.randint(-bound, bound), rng.choice([1, 1, 1, 2, 3]))
            out[i, j] = out[j, i] = v
    return out


def random_pencil(n: int, rng: random.Random) -> SymmetricPencil:
    return SymmetricPencil(random_symmetric(n, rng), random_symmetric(n, rng))


def _random_piece(rng: random.Random):
    """A small block with a structured verdict, to be summed with others."""
    kind = rng.choice(["scalar", "scalar", "tsq", "ks", "zero", "jordan"])
    if kind == "scalar":
        a = Fraction(rng.choice([-2, -1, 1, 2, 3]))
        b = Fraction(rng.choice([1, 2]))
        return _diag(a), _diag(b)
    if kind == "tsq":
        return _diag(1, 0), _m(OFFDIAG)
    if kind == "ks":
        return _m(KS3[0]), _m(KS3[1])
    if kind == "jordan":
        return antidiag_jordan(2, rng.choice([0, 1])), antidiag_identity(2)
    return _diag(0), _diag(0)


def random_block_sum(rng: random.Random, max_d: int = 6) -> SymmetricPencil:
    As, Bs = [], []
    size = 0
    while size < 2 or (size < max_d and rng.random() < 0.6):
        a, b = _random_piece(rng)
        if size + a.shape[0] > max_d:
            break
        As.append(a)
        Bs.append(b)
        size += a.shape[0]
    if size < 2:
        As.append(_diag(1))
        Bs.append(_diag(1))
    return SymmetricPencil(block_sum(*As), block_sum(*Bs))


def curated_suite(
    seed: int = 2024,
    conjugates: int = 4,
    random_per_dim: int = 20,
    block_sums: int = 40,
    dims: Sequence[int] = (2, 3, 4, 5, 6),
) -> List[SuiteEntry]:
    rng = random.Random(seed)
    out: List[SuiteEntry] = []
    for e in canonical_examples():
        out.append(e)
        for k in range(conjugates):
            out.append(SuiteEntry(f"{e.name}/conj{k}", conjugate(e.pencil, rng), e.expected))
    for d in dims:
        for k in range(random_per_dim):
            out.append(SuiteEntry(f"random_d{d}/{k}", random_pencil(d, rng), None))
    for k in range(block_sums):
        p = random_block_sum(rng)
        out.append(SuiteEntry(f"block_sum/{k}", p, None))
        out.append(SuiteEntry(f"block_sum/{k}/conj", conjugate(p, rng), None))
    return out
