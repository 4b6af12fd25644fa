"""Pairing factorizations of binary forms and their infeasibility certificates.

A binary form with distinct roots of multiplicities m_1..m_l can be written
as a product of pairs (theta_j theta_k)^{mu_jk} with mu_jk >= 0 exactly when
the linear system

    sum_{k != j} mu_jk = m_j      (one equation per root)

has a nonnegative solution.  That happens iff no m_j exceeds d/2; otherwise
the vector y = (-1 at the heaviest root, +1 elsewhere) is a Farkas
certificate: y_j + y_k >= 0 on every pair while sum m_j y_j < 0.

The solver is a small dense simplex over Fractions.  Among feasible points
it returns the lexicographic minimum under the variable order
(1,2), (1,3), ..., which is always a vertex; Bland's rule with a
lexicographic cost keeps it finite.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .errors import InvalidMultiplicities, PreconditionError

Pair = Tuple[int, int]


@dataclass(frozen=True)
class PairFactorization:
    """Nonnegative pair weights; keys are 0-based (j, k) with j < k."""

    mu: Dict[Pair, Fraction]
    multiplicities: Tuple[int, ...]

    @property
    def degree(self) -> int:
        return sum(self.multiplicities)

    def weight(self, j: int, k: int) -> Fraction:
        if j > k:
            j, k = k, j
        return self.mu.get((j, k), Fraction(0))

    def check(self) -> bool:
        ell = len(self.multiplicities)
        if any(v < 0 for v in self.mu.values()):
            return False
        for j in range(ell):
            if sum(self.weight(j, k) for k in range(ell) if k != j) != self.multiplicities[j]:
                return False
        return 2 * sum(self.mu.values()) == self.degree


@dataclass(frozen=True)
class FarkasCertificate:
    y: Tuple[Fraction, ...]
    multiplicities: Tuple[int, ...]

    def pair_condition(self) -> bool:
        return all(a + b >= 0 for a, b in itertools.combinations(self.y, 2))

    def weighted_sum(self) -> Fraction:
        return sum((m * y for m, y in zip(self.multiplicities, self.y)), Fraction(0))

    def check(self) -> bool:
        return self.pair_condition() and self.weighted_sum() < 0


# --------------------------------------------------------------------- simplex


class _Infeasible(Exception):
    pass


def lexmin_feasible(rows: Sequence[Sequence], rhs: Sequence) -> List[Fraction]:
    """Lexicographically smallest x >= 0 with rows @ x = rhs, exactly.

    Raises _Infeasible when the system has no nonnegative solution.
    """
    m = len(rows)
    n = len(rows[0]) if m else 0
    T: List[List[Fraction]] = []
    for row, b in zip(rows, rhs):
        row = [Fraction(x) for x in row]
        b = Fraction(b)
        if b < 0:
            row, b = [-x for x in row], -b
        T.append(row + [Fraction(int(i == len(T))) for i in range(m)] + [b])
    basis = [n + i for i in range(m)]
    width = n + m

    def pivot(r: int, c: int) -> None:
        inv = 1 / T[r][c]
        T[r] = [x * inv for x in T[r]]
        for i in range(len(T)):
            if i != r and T[i][c] != 0:
                f = T[i][c]
                T[i] = [x - f * y for x, y in zip(T[i], T[r])]
        basis[r] = c

    def leaving(c: int) -> Optional[int]:
        best = None
        for i in range(len(T)):
            if T[i][c] > 0:
                ratio = T[i][-1] / T[i][c]
                key = (ratio, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        return None if best is None else best[1]

    # phase 1: minimise the sum of artificials, Bland's rule
    while True:
        entering = None
        for c in range(width):
            if c in basis or c >= n:
                continue
            reduced = -sum(T[i][c] for i in range(len(T)) if basis[i] >= n)
            if reduced < 0:
                entering = c
                break
        if entering is None:
            break
        r = leaving(entering)
        if r is None:  # cannot happen: the phase-1 objective is bounded below
            raise ArithmeticError("unbounded phase-1 problem")
        pivot(r, entering)
    if any(T[i][-1] != 0 for i in range(len(T)) if basis[i] >= n):
        raise _Infeasible

    # drive zero-level artificials out; rows with no other support are redundant
    i = 0
    while i < len(T):
        if basis[i] >= n:
            c = next((c for c in range(n) if T[i][c] != 0), None)
            if c is None:
                del T[i]
                del basis[i]
                continue
            pivot(i, c)
        i += 1
    T = [row[:n] + [row[-1]] for row in T]

    # phase 2: lexicographic cost e_0 > e_1 > ...; reduced cost of column c is
    # +1 at c and -T[r][c] at basis[r], so it is lex-negative iff the
    # smallest-index basic variable touched by c precedes c with T[r][c] > 0.
    while True:
        entering = None
        for c in range(n):
            if c in basis:
                continue
            touched = [(basis[r], r) for r in range(len(T)) if T[r][c] != 0]
            if touched:
                first, r = min(touched)
                if first < c and T[r][c] > 0:
                    entering = c
                    break
        if entering is None:
            break
        r = leaving(entering)
        if r is None:  # x >= 0 keeps every coordinate bounded below
            raise ArithmeticError("unbounded lexicographic problem")
        pivot(r, entering)

    x = [Fraction(0)] * n
    for r, b in enumerate(basis):
        x[b] = T[r][-1]
    return x


# ------------------------------------------------------------------ public API


def _validate(multiplicities: Sequence[int], d: int) -> Tuple[int, ...]:
    ms = tuple(int(m) for m in multiplicities)
    if any(m < 1 for m in ms) or any(int(m) != m for m in multiplicities):
        raise InvalidMultiplicities(f"multiplicities must be positive integers: {multiplicities}")
    if sum(ms) != d:
        raise InvalidMultiplicities(f"multiplicities sum to {sum(ms)}, expected d = {d}")
    return ms


def canonical_certificate(multiplicities: Sequence[int]) -> FarkasCertificate:
    """y = -1 at the first maximal multiplicity, +1 elsewhere."""
    ms = tuple(multiplicities)
    j = ms.index(max(ms))
    y = tuple(Fraction(-1) if i == j else Fraction(1) for i in range(len(ms)))
    return FarkasCertificate(y, ms)


def pair_factorization(
    multiplicities: Sequence[int], d: int
) -> Union[PairFactorization, FarkasCertificate]:
    ms = _validate(multiplicities, d)
    ell = len(ms)
    pairs = list(itertools.combinations(range(ell), 2))
    rows = [[int(j in pair) for pair in pairs] for j in range(ell)]
    feasible_expected = 2 * max(ms) <= d
    try:
        x = lexmin_feasible(rows, ms) if pairs else None
        if x is None:
            raise _Infeasible
    except _Infeasible:
        if feasible_expected:
            raise ArithmeticError(f"simplex reported infeasible for {ms}")
        cert = canonical_certificate(ms)
        if not cert.check():
            raise ArithmeticError(f"certificate failed its own check for {ms}")
        return cert
    if not feasible_expected:
        raise ArithmeticError(f"simplex found a solution for {ms} with max > d/2")
    result = PairFactorization({p: v for p, v in zip(pairs, x) if v != 0}, ms)
    if not result.check():
        raise ArithmeticError(f"simplex solution fails the pairing equations for {ms}")
    return result


Member = Tuple[int, int]  # (parent index, member index), 0-based


@dataclass(frozen=True)
class GroupedFactorization:
    mu: Dict[Tuple[Member, Member], Fraction]
    groups: Tuple[Tuple[int, ...], ...]

    def check(self) -> bool:
        if any(v < 0 for v in self.mu.values()):
            return False
        if any(a[0] == b[0] for a, b in self.mu):
            return False
        for j, group in enumerate(self.groups):
            for i, m in enumerate(group):
                tot = sum((v for (a, b), v in self.mu.items() if (j, i) in (a, b)), Fraction(0))
                if tot != m:
                    return False
        return True


@dataclass(frozen=True)
class GroupedCertificate:
    y: Dict[Member, Fraction]
    groups: Tuple[Tuple[int, ...], ...]

    def check(self) -> bool:
        members = list(self.y)
        for a, b in itertools.combinations(members, 2):
            if a[0] != b[0] and self.y[a] + self.y[b] < 0:
                return False
        total = sum(self.groups[j][i] * v for (j, i), v in self.y.items())
        return total < 0


def grouped_pair_factorization(
    groups: Sequence[Sequence[int]], d: int
) -> Union[GroupedFactorization, GroupedCertificate]:
    """Pair weights between members of different parents only."""
    groups = tuple(tuple(int(m) for m in g) for g in groups)
    flat = [m for g in groups for m in g]
    _validate(flat, d)
    members = [(j, i) for j, g in enumerate(groups) for i in range(len(g))]
    pairs = [(a, b) for a, b in itertools.combinations(members, 2) if a[0] != b[0]]
    rows = [[int(mem in pair) for pair in pairs] for mem in members]
    totals = [sum(g) for g in groups]
    feasible_expected = 2 * max(totals) <= d
    try:
        if not pairs:
            raise _Infeasible
        x = lexmin_feasible(rows, flat)
    except _Infeasible:
        if feasible_expected:
            raise ArithmeticError(f"simplex reported infeasible for {groups}")
        heavy = totals.index(max(totals))
        y = {mem: Fraction(-1 if mem[0] == heavy else 1) for mem in members}
        cert = GroupedCertificate(y, groups)
        if not cert.check():
            raise ArithmeticError(f"certificate failed its own check for {groups}")
        return cert
    if not feasible_expected:
        raise ArithmeticError(f"simplex found a solution for {groups} with a parent above d/2")
    result = GroupedFactorization({p: v for p, v in zip(pairs, x) if v != 0}, groups)
    if not result.check():
        raise ArithmeticError(f"grouped solution fails its equations for {groups}")
    return result


def flat_factorization(m_star: int, others: Sequence[int]) -> Tuple[Fraction, ...]:
    """Exponents mu_j > m_j summing to m_star, spreading the excess evenly."""
    others = tuple(int(m) for m in others)
    excess = m_star - sum(others)
    if excess <= 0:
        raise PreconditionError(f"m* = {m_star} must exceed the other multiplicities' sum {sum(others)}")
    if not others:
        raise PreconditionError("need at least one other root")
    share = Fraction(excess, len(others))
    return tuple(m + share for m in others)


def partitions(n: int, largest: Optional[int] = None):
    """Integer partitions of n in nonincreasing order."""
    if largest is None:
        largest = n
    if n == 0:
        yield ()
        return
    for first in range(min(n, largest), 0, -1):
        for rest in partitions(n - first, first):
            yield (first,) + rest
