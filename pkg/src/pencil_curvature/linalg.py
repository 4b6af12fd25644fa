"""Small dense linear algebra helpers.

Exact matrices are numpy object arrays holding ``Fraction`` entries; numpy
only supplies the container and ``@``.  Elimination, determinants, kernels
and Jordan chains are done here by hand so that every decision is exact.
Float helpers use the SVD with a relative singular-value threshold.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Integral, Rational
from typing import List, Sequence, Tuple

import numpy as np

from .errors import ModeError

RANK_RTOL = 1e-8


def to_fraction(x) -> Fraction:
    """Convert an exact scalar (int, Fraction, rational string) to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        return Fraction(int(x))
    if isinstance(x, (Integral, np.integer)):
        return Fraction(int(x))
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ModeError(f"not a rational literal: {x!r}") from exc
    raise ModeError(f"exact mode needs rational input, got {type(x).__name__} {x!r}")


def fmatrix(rows) -> np.ndarray:
    """Build an exact (object, Fraction) matrix from nested sequences."""
    arr = np.asarray(rows, dtype=object)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    out = np.empty(arr.shape, dtype=object)
    for idx in np.ndindex(arr.shape):
        out[idx] = to_fraction(arr[idx])
    return out


def fvector(values) -> np.ndarray:
    out = np.empty(len(values), dtype=object)
    for i, v in enumerate(values):
        out[i] = to_fraction(v)
    return out


def identity(n: int) -> np.ndarray:
    out = np.empty((n, n), dtype=object)
    out[...] = Fraction(0)
    for i in range(n):
        out[i, i] = Fraction(1)
    return out


def zeros(shape) -> np.ndarray:
    out = np.empty(shape, dtype=object)
    out[...] = Fraction(0)
    return out


def is_zero_matrix(M: np.ndarray) -> bool:
    return all(x == 0 for x in np.asarray(M).ravel())


def to_float(M: np.ndarray) -> np.ndarray:
    return np.asarray(M, dtype=float) if M.dtype != object else np.vectorize(float, otypes=[float])(M)


# ---------------------------------------------------------------- determinants


def _bareiss_int(a: List[List[int]]) -> int:
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        akk = a[k][k]
        rowk = a[k]
        for i in range(k + 1, n):
            rowi = a[i]
            aik = rowi[k]
            for j in range(k + 1, n):
                rowi[j] = (rowi[j] * akk - aik * rowk[j]) // prev
            rowi[k] = 0
        prev = akk
    return sign * a[n - 1][n - 1]


def det_bareiss(M) -> Fraction:
    """Exact determinant by fraction-free elimination.

    Each row is scaled by the lcm of its denominators so that the
    elimination runs over the integers; the scaling is divided out at the end.
    """
    rows = [[to_fraction(x) for x in row] for row in np.asarray(M, dtype=object)]
    n = len(rows)
    scale = 1
    ints = []
    for row in rows:
        den = 1
        for x in row:
            den = den * x.denominator // math.gcd(den, x.denominator)
        scale *= den
        ints.append([int(x * den) for x in row])
    return Fraction(_bareiss_int(ints), scale)


# ---------------------------------------------------------------- elimination


def rref(M) -> Tuple[List[List[Fraction]], List[int]]:
    """Reduced row echelon form over Q; returns (rows, pivot columns)."""
    A = [[to_fraction(x) for x in row] for row in np.asarray(M, dtype=object)]
    m = len(A)
    n = len(A[0]) if m else 0
    pivots: List[int] = []
    r = 0
    for c in range(n):
        if r == m:
            break
        piv = next((i for i in range(r, m) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = 1 / A[r][c]
        A[r] = [x * inv for x in A[r]]
        for i in range(m):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
    return A, pivots


def rank(M) -> int:
    M = np.asarray(M, dtype=object)
    if M.size == 0:
        return 0
    return len(rref(M)[1])


def nullspace(M) -> List[np.ndarray]:
    """Basis of {x : M x = 0} as exact vectors (RREF free-variable basis)."""
    M = np.asarray(M, dtype=object)
    n = M.shape[1]
    if M.shape[0] == 0:
        return [identity(n)[:, j].copy() for j in range(n)]
    R, piv = rref(M)
    free = [j for j in range(n) if j not in piv]
    basis = []
    for f in free:
        v = zeros(n)
        v[f] = Fraction(1)
        for row, pc in zip(R, piv):
            v[pc] = -row[f]
        basis.append(v)
    return basis


def independent_columns(vectors: Sequence[np.ndarray]) -> List[int]:
    """Indices of a maximal independent subset, greedy in the given order."""
    if not vectors:
        return []
    M = np.column_stack(vectors)
    return rref(M)[1]


def span_basis(vectors: Sequence[np.ndarray]) -> List[np.ndarray]:
    return [vectors[i] for i in independent_columns(vectors)]


def canonical_basis(vectors: Sequence[np.ndarray]) -> List[np.ndarray]:
    """RREF basis of the span of the given vectors (a canonical choice)."""
    if not vectors:
        return []
    R, piv = rref(np.vstack(vectors))
    return [fvector(R[i]) for i in range(len(piv))]


def solve(M, b) -> np.ndarray:
    """Solve the square nonsingular system M x = b exactly."""
    M = np.asarray(M, dtype=object)
    n = M.shape[0]
    aug = np.column_stack([M, np.asarray(b, dtype=object).reshape(n, -1)])
    R, piv = rref(aug)
    if piv[:n] != list(range(n)):
        raise ZeroDivisionError("singular system")
    out = np.array([row[n:] for row in R[:n]], dtype=object)
    return out[:, 0] if np.ndim(b) == 1 else out


def inverse(M) -> np.ndarray:
    return solve(M, identity(np.asarray(M).shape[0]))


def matrix_power(M: np.ndarray, k: int) -> np.ndarray:
    out = identity(M.shape[0]) if M.dtype == object else np.eye(M.shape[0])
    for _ in range(k):
        out = out @ M
    return out


# ---------------------------------------------------------------- float helpers


def numerical_rank(M: np.ndarray, rtol: float = RANK_RTOL) -> int:
    M = np.asarray(M)
    if M.size == 0:
        return 0
    sv = np.linalg.svd(M, compute_uv=False)
    if sv[0] == 0:
        return 0
    return int(np.sum(sv > rtol * sv[0]))


def numerical_nullspace(M: np.ndarray, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal kernel basis as columns."""
    M = np.asarray(M)
    n = M.shape[1]
    if M.size == 0:
        return np.eye(n)
    _, sv, vh = np.linalg.svd(M)
    r = int(np.sum(sv > rtol * sv[0])) if sv.size and sv[0] > 0 else 0
    return vh[r:].conj().T


def orth(M: np.ndarray, rtol: float = RANK_RTOL, atol: float = 0.0) -> np.ndarray:
    """Orthonormal basis of the column space."""
    M = np.asarray(M)
    if M.size == 0:
        return M.reshape(M.shape[0], 0)
    u, sv, _ = np.linalg.svd(M, full_matrices=False)
    if sv.size == 0 or sv[0] == 0:
        return u[:, :0]
    r = int(np.sum(sv > max(rtol * sv[0], atol)))
    return u[:, :r]


# ---------------------------------------------------------------- Jordan data


def rank_sequence(N: np.ndarray, exact: bool, rtol: float = RANK_RTOL) -> List[int]:
    """Ranks of N^0, N^1, ... until two consecutive ranks coincide."""
    d = N.shape[0]
    rk = rank if exact else (lambda X: numerical_rank(X, rtol))
    P = identity(d) if exact else np.eye(d)
    ranks = [d]
    while True:
        P = P @ N
        r = rk(P)
        ranks.append(r)
        if r == ranks[-2]:
            return ranks


def block_sizes_from_ranks(ranks: Sequence[int]) -> List[int]:
    """Jordan block sizes (descending) at one eigenvalue from rank(N^k)."""
    sizes: List[int] = []
    for k in range(1, len(ranks)):
        at_least_k = ranks[k - 1] - ranks[k]
        at_least_k1 = (ranks[k] - ranks[k + 1]) if k + 1 < len(ranks) else 0
        sizes.extend([k] * (at_least_k - at_least_k1))
    return sorted(sizes, reverse=True)


def jordan_chains(S: np.ndarray, lam: Fraction) -> List[List[np.ndarray]]:
    """Exact Jordan chains of S at eigenvalue lam.

    Each chain is [q_1, ..., q_r] with (S - lam) q_1 = 0 and
    (S - lam) q_{i+1} = q_i.  Chains are returned longest first.
    """
    d = S.shape[0]
    N = S - lam * identity(d)
    ranks = rank_sequence(N, exact=True)
    p = len(ranks) - 2  # index where ranks stabilise
    powers = [identity(d)]
    for _ in range(p):
        powers.append(powers[-1] @ N)
    kernels = [nullspace(P) for P in powers]
    tops: List[Tuple[np.ndarray, int]] = []
    for j in range(p, 0, -1):
        span = list(kernels[j - 1])
        for v, length in tops:
            span.append(powers[length - j] @ v)
        base = rank(np.column_stack(span)) if span else 0
        for w in kernels[j]:
            trial = span + [w]
            r = rank(np.column_stack(trial))
            if r > base:
                tops.append((w, j))
                span = trial
                base = r
    chains = []
    for v, length in tops:
        chains.append([powers[length - 1 - i] @ v for i in range(length)])
    return chains
