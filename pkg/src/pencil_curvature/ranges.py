"""Predicted L^p -> L^q (and mixed L^q(L^r)) ranges as exact predicates.

Points are given by reciprocals x = 1/p, y = 1/q, z = 1/r in [0,1], held as
Fractions so every boundary decision is exact.  Each verdict yields three
disjoint regions: proven true, proven false, and the open gap between them.

Trivial estimates (p = infinity; p = q = 1; shrinking q by Hoelder) and
their interpolates fill the triangle y >= x, which is True for every pencil.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple, Union

from .classify import (
    COMMON_KERNEL,
    FLAT_NONVANISHING,
    KERNEL_SPLIT,
    WELL_CURVED,
    DegenerateCommonKernel,
    DegenerateKernelSplit,
    FlatNonvanishing,
    WellCurved,
)
from .errors import InputError

Number = Union[int, float, Fraction, str]


class Truth(enum.Enum):
    TRUE = "true"
    FALSE = "false"
    UNKNOWN = "unknown"


def reciprocal(p: Number) -> Fraction:
    """1/p as an exact Fraction; 'inf' and math.inf map to 0."""
    if isinstance(p, str):
        if p.strip().lower() in ("inf", "infinity", "oo"):
            return Fraction(0)
        p = Fraction(p.strip())
    if isinstance(p, float) and math.isinf(p):
        if p < 0:
            raise InputError("exponent must lie in [1, inf]")
        return Fraction(0)
    val = Fraction(p)
    if val < 1:
        raise InputError(f"exponent must lie in [1, inf], got {p}")
    return 1 / val


@dataclass(frozen=True)
class ExponentRange:
    """Verdict parameters that determine the predicted regions."""

    kind: str
    d: int
    m_star: Optional[int] = None
    critical: bool = False
    n0: Optional[int] = None
    block_sizes: Optional[Tuple[int, ...]] = None
    epsilon: Optional[Fraction] = None

    # -- necessary conditions valid for every pencil (ball and slab examples)
    def _intro_false(self, x: Fraction, y: Fraction, z: Fraction) -> bool:
        return 2 + self.d * z < (self.d + 2) * x or z + y < x

    def _trivially_true(self, x, y, z) -> bool:
        if x == 0:
            return True
        if z == y:
            return y >= x
        return x == 1 and z == 1

    def is_true(self, x: Fraction, y: Fraction, z: Optional[Fraction] = None) -> bool:
        mixed = z is not None and z != y
        z = y if z is None else z
        if self._trivially_true(x, y, z):
            return True
        d = self.d
        if self.kind == WELL_CURVED:
            if mixed:
                return 2 + d * z > (d + 2) * x and z + y >= x and 2 * z >= x
            if 2 * y >= x and 2 + d * y > (d + 2) * x:
                return True
            # the open critical segment, recovered when no root has multiplicity d/2
            endpoint = (Fraction(4, d + 4), Fraction(2, d + 4))
            on_line = 2 + d * y == (d + 2) * x and 2 * y >= x
            return (not self.critical) and on_line and (x, y) != endpoint
        if self.kind == FLAT_NONVANISHING and not mixed:
            m = self.m_star
            corner = (Fraction(2, m + 2), Fraction(1, m + 2))
            return 1 + m * y >= (m + 1) * x and 2 * y >= x and (x, y) != corner
        return False

    def is_false(self, x: Fraction, y: Fraction, z: Optional[Fraction] = None) -> bool:
        mixed = z is not None and z != y
        z = y if z is None else z
        if self._intro_false(x, y, z):
            return True
        if mixed:
            return False
        if self.kind == FLAT_NONVANISHING:
            if self.n0 is not None and self.block_sizes is not None:
                big = sum(n * n for n in self.block_sizes)
                tri = sum(Fraction(n * (n + 1), 2) for n in self.block_sizes)
                return 1 + (self.n0 + big) * y < (1 + self.n0 + tri) * x
            m = self.m_star
            return 2 * y == x and 1 + m * y < (m + 1) * x
        if self.kind == KERNEL_SPLIT:
            return (2 - self.epsilon) * y < x
        if self.kind == COMMON_KERNEL:
            return y < x
        return False

    def truth(self, x: Fraction, y: Fraction, z: Optional[Fraction] = None) -> Truth:
        t = self.is_true(x, y, z)
        f = self.is_false(x, y, z)
        if t and f:
            raise AssertionError(f"region overlap at {(x, y, z)} for {self}")
        if t:
            return Truth.TRUE
        if f:
            return Truth.FALSE
        return Truth.UNKNOWN


def exponent_range(verdict, d: Optional[int] = None) -> ExponentRange:
    if isinstance(verdict, WellCurved):
        return ExponentRange(WELL_CURVED, verdict.form.degree, m_star=verdict.m_star, critical=verdict.critical)
    if isinstance(verdict, FlatNonvanishing):
        e = verdict.eigenstructure
        return ExponentRange(
            FLAT_NONVANISHING,
            verdict.form.degree,
            m_star=verdict.m_star,
            n0=None if e is None else e.n0,
            block_sizes=None if e is None else tuple(e.block_sizes),
        )
    if isinstance(verdict, DegenerateKernelSplit):
        return ExponentRange(KERNEL_SPLIT, verdict.split.d, epsilon=verdict.split.epsilon)
    if isinstance(verdict, DegenerateCommonKernel):
        if d is None:
            d = len(verdict.kernel[0])
        return ExponentRange(COMMON_KERNEL, d)
    raise InputError(f"not a verdict: {verdict!r}")


def predicted_true_region(verdict, d: Optional[int], p: Number, q: Number, r: Optional[Number] = None) -> Truth:
    rng = exponent_range(verdict, d)
    if d is not None and d != rng.d:
        raise InputError(f"dimension {d} does not match the verdict's {rng.d}")
    x, y = reciprocal(p), reciprocal(q)
    z = None if r is None else reciprocal(r)
    return rng.truth(x, y, z)


# ------------------------------------------------------------------ Kakeya numerology


def kakeya_exponent(d: int, q: Number, unit_weights: bool = False) -> Fraction:
    """Power of delta bounding the slab-sum norm given an L^p -> L^q estimate.

    The raw factor is delta^(-d + 2d/q').  With unit weights on a maximal
    delta-separated family (about delta^-d slabs) the weight norm contributes
    delta^(-d/q') more, leaving -d/q.
    """
    yq = reciprocal(q)
    q_dual = 1 - yq  # 1/q'
    raw = -d + 2 * d * q_dual
    if unit_weights:
        return raw - d * q_dual
    return raw


def well_curved_kakeya_exponent(d: int) -> Fraction:
    """-2d/(d+4): unit weights at the endpoint q = (d+4)/2."""
    return Fraction(-2 * d, d + 4)
