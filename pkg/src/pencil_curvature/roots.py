"""Projective roots of binary forms with multiplicities.

Exact forms: multiplicities come from Yun's square-free decomposition over Q,
positions from the eigenvalues of each square-free factor's companion matrix.
Float forms: all d roots are computed at once and grouped by single-linkage
clustering in the chordal metric of the projective line.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence, Tuple

import numpy as np

from .errors import ClusterAmbiguous, ZeroForm
from .pencil import BinaryForm

DEFAULT_CLUSTER_TOL = 1e-7


@dataclass(frozen=True)
class ProjectiveRoot:
    """A point [a:b] of the projective line; the form vanishes at (s,t)=(a,b)."""

    a: complex
    b: complex
    multiplicity: int
    is_real: bool

    def key(self) -> Tuple[float, float, float, float]:
        return (self.a.real, self.a.imag, self.b.real, self.b.imag)

    def linear_form(self) -> Tuple[complex, complex]:
        """Coefficients (of s, of t) of the divisor b s - a t."""
        return (self.b, -self.a)

    def __str__(self):
        def fmt(z):
            if abs(z.imag) < 1e-15:
                return f"{z.real:.6g}"
            return f"{z.real:.6g}{z.imag:+.6g}i"

        return f"[{fmt(self.a)}:{fmt(self.b)}] x{self.multiplicity}"


@dataclass(frozen=True)
class RootMultiset:
    degree: int
    roots: Tuple[ProjectiveRoot, ...]

    @property
    def ell(self) -> int:
        return len(self.roots)

    @property
    def multiplicities(self) -> Tuple[int, ...]:
        return tuple(r.multiplicity for r in self.roots)


def normalize(a: complex, b: complex) -> Tuple[complex, complex]:
    """Scale so that max(|a|,|b|) = 1 and the first nonzero entry is real positive."""
    a, b = complex(a), complex(b)
    m = max(abs(a), abs(b))
    if m == 0:
        raise ZeroForm("the zero vector is not a projective point")
    a, b = a / m, b / m
    lead = a if a != 0 else b
    phase = lead.conjugate() / abs(lead)
    a, b = a * phase, b * phase
    # clean the imaginary part of the leading entry
    if a != 0:
        a = complex(abs(a), 0.0)
    else:
        b = complex(abs(b), 0.0)
    return a, b


def chordal_distance(p: Tuple[complex, complex], q: Tuple[complex, complex]) -> float:
    a, b = p
    c, e = q
    num = abs(a * e - b * c)
    den = np.hypot(abs(a), abs(b)) * np.hypot(abs(c), abs(e))
    return float(num / den)


# ------------------------------------------------------------ exact polynomials
# Ascending coefficient lists of Fractions, no trailing zeros (zero poly = []).


def _trim(p: List[Fraction]) -> List[Fraction]:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def _deriv(p):
    return _trim([k * c for k, c in enumerate(p)][1:])


def _divmod(num, den):
    num = list(num)
    q = [Fraction(0)] * max(len(num) - len(den) + 1, 0)
    lead = den[-1]
    while len(num) >= len(den) and num:
        shift = len(num) - len(den)
        f = num[-1] / lead
        q[shift] = f
        for i, c in enumerate(den):
            num[i + shift] -= f * c
        num = _trim(num)
    return _trim(q), num


def _monic(p):
    return [c / p[-1] for c in p]


def _gcd(a, b):
    a, b = _trim(a), _trim(b)
    while b:
        _, r = _divmod(a, b)
        a, b = b, r
    return _monic(a) if a else a


def squarefree_decomposition(p: Sequence[Fraction]) -> List[Tuple[List[Fraction], int]]:
    """Yun's algorithm: p = c * prod f_i^i with f_i square-free and coprime.

    Returns [(f_i, i)] for the nonconstant factors only.
    """
    p = _trim([Fraction(c) for c in p])
    if len(p) <= 1:
        return []
    dp = _deriv(p)
    a0 = _gcd(p, dp)
    b, _ = _divmod(p, a0)
    c, _ = _divmod(dp, a0)
    dd = _trim([x - y for x, y in itertools.zip_longest(c, _deriv(b), fillvalue=Fraction(0))])
    out = []
    i = 1
    while len(b) > 1:
        a = _gcd(b, dd)
        b, _ = _divmod(b, a)
        c, _ = _divmod(dd, a)
        dd = _trim([x - y for x, y in itertools.zip_longest(c, _deriv(b), fillvalue=Fraction(0))])
        if len(a) > 1:
            out.append((_monic(a), i))
        i += 1
    return out


def _poly_roots(ascending: Sequence) -> np.ndarray:
    coeffs = np.array([float(c) for c in reversed(list(ascending))])
    return np.roots(coeffs)


def _point_from_affine(r: complex) -> Tuple[complex, complex]:
    return normalize(r, 1.0)


def _is_real_root(z: complex) -> bool:
    return z.imag == 0.0


# ------------------------------------------------------------ main entry points


def roots_with_multiplicities(f: BinaryForm, cluster_tol: float = DEFAULT_CLUSTER_TOL) -> RootMultiset:
    if f.is_zero():
        raise ZeroForm("the form vanishes identically")
    if f.exact:
        return _exact_roots(f)
    return _float_roots(f, cluster_tol)


def _exact_roots(f: BinaryForm) -> RootMultiset:
    d = f.degree
    poly = _trim(list(f.coeffs))
    at_infinity = d - (len(poly) - 1)
    roots: List[ProjectiveRoot] = []
    if at_infinity:
        roots.append(ProjectiveRoot(1 + 0j, 0j, at_infinity, True))
    for factor, mult in squarefree_decomposition(poly):
        for z in _poly_roots(factor):
            a, b = _point_from_affine(complex(z))
            roots.append(ProjectiveRoot(a, b, mult, _is_real_root(complex(z))))
    return RootMultiset(d, tuple(sorted(roots, key=ProjectiveRoot.key)))


COEFF_CHOP = 1e-13


def _cluster_threshold(tol: float, m: int) -> float:
    """Admissible chordal diameter for an m-fold cluster.

    A perturbation of size eps splits an m-fold root into a ring of radius
    about eps^(1/m), so the threshold scales the same way.
    """
    return tol ** (1.0 / m)


def _diameter(pts, members) -> float:
    best = 0.0
    for i, j in itertools.combinations(members, 2):
        best = max(best, chordal_distance(pts[i], pts[j]))
    return best


def _center(pts, members) -> Tuple[complex, complex]:
    a0, b0 = pts[members[0]]
    if abs(a0) <= abs(b0):
        vals = [pts[i][0] / pts[i][1] for i in members]
        return normalize(complex(np.mean(vals)), 1.0)
    vals = [pts[i][1] / pts[i][0] for i in members]
    return normalize(1.0, complex(np.mean(vals)))


def _float_roots(f: BinaryForm, tol: float) -> RootMultiset:
    d = f.degree
    c = np.array(f.coeffs, dtype=float)
    # interpolation noise in a vanishing coefficient would fling a root to
    # |z| ~ 1e16 and wreck the deflation of the others; such a root is within
    # chordal distance COEFF_CHOP**(1/m) of 0 or infinity, inside any cluster
    c[np.abs(c) < COEFF_CHOP * np.max(np.abs(c))] = 0.0
    nz = np.nonzero(c)[0]
    top = int(nz[-1])
    pts: List[Tuple[complex, complex]] = [(1 + 0j, 0j)] * (d - top)
    if top > 0:
        for z in np.roots(c[: top + 1][::-1]):
            pts.append(_point_from_affine(complex(z)))
    n = len(pts)
    # largest clusters first: an m-fold root splits into a ring whose
    # neighbours can sit further apart than the 2-fold threshold allows, so
    # pairwise merging would miss it
    free = set(range(n))
    clusters: List[List[int]] = []
    for k in range(n, 1, -1):
        found = True
        while found and len(free) >= k:
            found = False
            for i in sorted(free):
                near = sorted(free, key=lambda j: (chordal_distance(pts[i], pts[j]), j))[:k]
                if _diameter(pts, near) <= _cluster_threshold(tol, k):
                    clusters.append(sorted(near))
                    free -= set(near)
                    found = True
                    break
    clusters.extend([i] for i in sorted(free))
    for g1, g2 in itertools.combinations(clusters, 2):
        merged = g1 + g2
        m = len(merged)
        diam = _diameter(pts, merged)
        if _cluster_threshold(tol, m) < diam <= _cluster_threshold(10 * tol, m):
            raise ClusterAmbiguous(
                f"root clusters of sizes {len(g1)} and {len(g2)} are {diam:.3g} apart; "
                "use exact mode"
            )

    centers = [_center(pts, g) for g in clusters]
    conj = [normalize(a.conjugate(), b.conjugate()) for a, b in centers]
    roots: List[ProjectiveRoot] = []
    used = set()
    for i, g in enumerate(clusters):
        if i in used:
            continue
        dists = [chordal_distance(conj[i], centers[j]) for j in range(len(clusters))]
        j = int(np.argmin(dists))
        limit = _cluster_threshold(10 * tol, len(g))
        if j == i or dists[j] > limit or len(clusters[j]) != len(g):
            if dists[i] <= limit:
                a, b = centers[i]
                roots.append(ProjectiveRoot(complex(a.real, 0), complex(b.real, 0), len(g), True))
            else:
                roots.append(ProjectiveRoot(*centers[i], len(g), False))
            used.add(i)
            continue
        # average the pair so the two roots are exact conjugates
        a1, b1 = centers[i]
        a2, b2 = conj[j]
        if abs(a1) <= abs(b1):
            z = (a1 / b1 + a2 / b2) / 2
            a, b = normalize(z, 1.0)
        else:
            w = (b1 / a1 + b2 / a2) / 2
            a, b = normalize(1.0, w)
        roots.append(ProjectiveRoot(a, b, len(g), False))
        roots.append(ProjectiveRoot(*normalize(a.conjugate(), b.conjugate()), len(g), False))
        used.update({i, j})
    return RootMultiset(d, tuple(sorted(roots, key=ProjectiveRoot.key)))


def max_multiplicity(r: RootMultiset) -> Tuple[int, ProjectiveRoot]:
    if not r.roots:
        raise ZeroForm("empty root multiset")
    m = max(x.multiplicity for x in r.roots)
    best = min((x for x in r.roots if x.multiplicity == m), key=ProjectiveRoot.key)
    return m, best


def reconstruct(r: RootMultiset) -> np.ndarray:
    """Coefficients (ascending in s) of prod (b s - a t)^m, up to a constant."""
    coeffs = np.array([1.0 + 0j])
    for root in r.roots:
        lin = np.array([-root.a, root.b], dtype=complex)
        for _ in range(root.multiplicity):
            coeffs = np.convolve(coeffs, lin)
    return coeffs
