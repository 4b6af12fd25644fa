"""Symmetric pencils, binary forms, and the pencil determinant.

A pencil is a pair (A, B) of real symmetric d x d matrices.  Its determinant
form is det(sA + tB) = sum_k c_k s^k t^(d-k), stored densely as c_0..c_d.
Exact pencils hold Fractions; float pencils hold float64 arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Optional, Sequence, Tuple

import numpy as np

from . import linalg
from .errors import AsymmetricMatrix, DimensionMismatch, ModeError

EXACT = "exact"
FLOAT = "float"
MIN_DIM = 2
MAX_DIM = 12


def _as_float_matrix(M) -> np.ndarray:
    arr = np.asarray(M)
    if arr.dtype == object:
        arr = np.vectorize(float, otypes=[float])(arr)
    arr = np.array(arr, dtype=float)
    return arr


def _check_shape(name: str, M: np.ndarray) -> int:
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {M.shape}")
    return M.shape[0]


def _check_symmetric(name: str, M: np.ndarray) -> None:
    d = M.shape[0]
    for i in range(d):
        for j in range(i + 1, d):
            if M[i, j] != M[j, i]:
                raise AsymmetricMatrix(
                    f"{name} is not symmetric: {name}[{i}][{j}] = {M[i, j]} "
                    f"but {name}[{j}][{i}] = {M[j, i]}"
                )


@dataclass(frozen=True, eq=False)
class SymmetricPencil:
    """A pair of symmetric matrices in exact (Fraction) or float mode."""

    A: np.ndarray
    B: np.ndarray
    mode: str = EXACT
    label: Optional[str] = None

    def __post_init__(self):
        if self.mode == EXACT:
            A = linalg.fmatrix(self.A)
            B = linalg.fmatrix(self.B)
        elif self.mode == FLOAT:
            A = _as_float_matrix(self.A)
            B = _as_float_matrix(self.B)
        else:
            raise ModeError(f"unknown mode {self.mode!r}")
        d = _check_shape("A", A)
        if _check_shape("B", B) != d:
            raise DimensionMismatch(f"A is {d}x{d} but B is {B.shape[0]}x{B.shape[1]}")
        if not MIN_DIM <= d <= MAX_DIM:
            raise DimensionMismatch(f"dimension {d} outside {MIN_DIM}..{MAX_DIM}")
        _check_symmetric("A", A)
        _check_symmetric("B", B)
        A.setflags(write=False)
        B.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def d(self) -> int:
        return self.A.shape[0]

    @property
    def exact(self) -> bool:
        return self.mode == EXACT

    def at(self, s, t) -> np.ndarray:
        """The pencil member sA + tB."""
        return s * self.A + t * self.B

    def as_float(self) -> "SymmetricPencil":
        if self.mode == FLOAT:
            return self
        return SymmetricPencil(self.A, self.B, FLOAT, self.label)

    def scale_norm(self) -> float:
        return float(max(np.abs(_as_float_matrix(self.A)).max(), np.abs(_as_float_matrix(self.B)).max()))

    def rho(self, M) -> "SymmetricPencil":
        """(M A M^T, M B M^T)."""
        M = linalg.fmatrix(M) if self.exact else _as_float_matrix(M)
        return SymmetricPencil(M @ self.A @ M.T, M @ self.B @ M.T, self.mode, self.label)

    def sigma(self, N) -> "SymmetricPencil":
        """(N11 A + N12 B, N21 A + N22 B)."""
        N = linalg.fmatrix(N) if self.exact else _as_float_matrix(N)
        return SymmetricPencil(
            N[0, 0] * self.A + N[0, 1] * self.B,
            N[1, 0] * self.A + N[1, 1] * self.B,
            self.mode,
            self.label,
        )

    def __eq__(self, other):
        if not isinstance(other, SymmetricPencil):
            return NotImplemented
        return (
            self.mode == other.mode
            and self.A.shape == other.A.shape
            and bool(np.all(self.A == other.A))
            and bool(np.all(self.B == other.B))
        )

    def __hash__(self):
        return hash((self.mode, tuple(self.A.ravel()), tuple(self.B.ravel())))

    def __repr__(self):
        return f"SymmetricPencil(d={self.d}, mode={self.mode!r}, label={self.label!r})"


@dataclass(frozen=True)
class BinaryForm:
    """sum_k coeffs[k] s^k t^(degree-k)."""

    coeffs: Tuple
    exact: bool = True

    def __post_init__(self):
        if self.exact:
            c = tuple(linalg.to_fraction(x) for x in self.coeffs)
        else:
            c = tuple(float(x) for x in self.coeffs)
        if not c:
            raise DimensionMismatch("a binary form needs at least one coefficient")
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def __call__(self, s, t):
        return eval_form(self, s, t)

    def substitute(self, N) -> "BinaryForm":
        """The form f(N11 s + N21 t, N12 s + N22 t), i.e. f(N^T (s, t))."""
        return substitute(self, N)

    def __mul__(self, other: "BinaryForm") -> "BinaryForm":
        out = [0] * (self.degree + other.degree + 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return BinaryForm(tuple(out), self.exact and other.exact)

    def as_float(self) -> "BinaryForm":
        return BinaryForm(tuple(float(c) for c in self.coeffs), exact=False)


def _det(M: np.ndarray, exact: bool):
    if exact:
        return linalg.det_bareiss(M)
    return float(np.linalg.det(M))


def default_samples(d: int) -> list:
    """[1:0], [0:1] and (k, 1) for k = 1..d-1."""
    return [(1, 0), (0, 1)] + [(k, 1) for k in range(1, d)]


def float_samples(d: int) -> list:
    """d+1 points spread over the upper unit half-circle.

    The integer nodes lose about 1e-9 relative accuracy by d = 8 (the
    Vandermonde system in k^j is ill-conditioned); these angles keep the
    homogeneous system close to a discrete Fourier one.
    """
    return [
        (math.cos(math.pi * (k + 0.5) / (d + 1)), math.sin(math.pi * (k + 0.5) / (d + 1)))
        for k in range(d + 1)
    ]


def det_pencil(p: SymmetricPencil, samples: Optional[Sequence[Tuple]] = None) -> BinaryForm:
    """Coefficients of det(sA + tB) by interpolation through d+1 samples."""
    d = p.d
    if samples is not None:
        pts = list(samples)
    else:
        pts = default_samples(d) if p.exact else float_samples(d)
    if len(pts) != d + 1:
        raise DimensionMismatch(f"need {d + 1} sample points, got {len(pts)}")
    if p.exact:
        pts = [(linalg.to_fraction(s), linalg.to_fraction(t)) for s, t in pts]
        V = linalg.zeros((d + 1, d + 1))
        vals = linalg.zeros(d + 1)
        for i, (s, t) in enumerate(pts):
            for k in range(d + 1):
                V[i, k] = s**k * t ** (d - k)
            vals[i] = linalg.det_bareiss(p.at(s, t))
        coeffs = linalg.solve(V, vals)
        return BinaryForm(tuple(coeffs), exact=True)
    V = np.array([[float(s) ** k * float(t) ** (d - k) for k in range(d + 1)] for s, t in pts])
    vals = np.array([np.linalg.det(p.at(float(s), float(t))) for s, t in pts])
    return BinaryForm(tuple(np.linalg.solve(V, vals)), exact=False)


def _is_exact_scalar(x) -> bool:
    return not isinstance(x, (float, complex, np.floating, np.complexfloating))


def eval_form(f: BinaryForm, s, t):
    """Evaluate f at (s, t).

    Exact forms at exact arguments are summed directly.  Otherwise the larger
    of |s|, |t| is factored out and Horner runs in the ratio.
    """
    c = f.coeffs
    d = f.degree
    if f.exact and _is_exact_scalar(s) and _is_exact_scalar(t):
        s = linalg.to_fraction(s)
        t = linalg.to_fraction(t)
        return sum(ck * s**k * t ** (d - k) for k, ck in enumerate(c))
    if s == 0 and t == 0:
        return float(c[0]) if d == 0 else 0.0
    if abs(s) >= abs(t):
        r = t / s
        acc = 0.0
        for ck in c:
            acc = acc * r + float(ck)
        return acc * s**d
    r = s / t
    acc = 0.0
    for ck in reversed(c):
        acc = acc * r + float(ck)
    return acc * t**d


def shifted_jacobian(p: SymmetricPencil, s0, t0, s, t):
    """(-1)^d det((s - s0) A + (t - t0) B)."""
    M = p.at(s - s0, t - t0)
    sign = -1 if p.d % 2 else 1
    return sign * _det(M, p.exact)


def substitute(f: BinaryForm, N) -> BinaryForm:
    """f(a s + c t, b s + e t) for N = [[a, b], [c, e]]."""
    N = np.asarray(N, dtype=object)
    a, b, c, e = N[0, 0], N[0, 1], N[1, 0], N[1, 1]
    if f.exact:
        a, b, c, e = (linalg.to_fraction(x) for x in (a, b, c, e))
        zero = Fraction(0)
    else:
        a, b, c, e = (float(x) for x in (a, b, c, e))
        zero = 0.0
    d = f.degree
    out = [zero] * (d + 1)
    # (a s + c t)^k (b s + e t)^(d-k); coefficient of s^i t^(d-i)
    for k, ck in enumerate(f.coeffs):
        if ck == 0:
            continue
        first = [comb(k, i) * a**i * c ** (k - i) for i in range(k + 1)]
        second = [comb(d - k, j) * b**j * e ** (d - k - j) for j in range(d - k + 1)]
        for i, x in enumerate(first):
            if x == 0:
                continue
            for j, y in enumerate(second):
                out[i + j] += ck * x * y
    return BinaryForm(tuple(out), f.exact)
