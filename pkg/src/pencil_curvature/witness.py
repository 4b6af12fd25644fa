"""Destabilizing one-parameter curves for unstable pencils.

The group SL(d) x SL(2) acts on pencils by
    rho_M(A, B) = (M A M^T, M B M^T),
    sigma_N(A, B) = (N11 A + N12 B, N21 A + N22 B).
For each non-well-curved verdict a fixed element g0 followed by diagonal
one-parameter subgroups drives the pencil to zero as lambda -> 0.

Every construction here is rational: g0 is built from exact kernels and
Jordan chains, and all exponents are integers, so the orbit can be
evaluated exactly at dyadic lambda.  This matters because the curves use
large negative powers of lambda on entries that must vanish; any float
round-off in g0 would be amplified beyond recovery.  The complex square-root
transfer to the antidiagonal normal form is available as an option.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg

from . import linalg
from .classify import (
    COMMON_KERNEL,
    FLAT_NONVANISHING,
    KERNEL_SPLIT,
    CurvatureVerdict,
    DegenerateCommonKernel,
    DegenerateKernelSplit,
    FlatNonvanishing,
    WellCurved,
    classify,
    flat_eigenstructure,
    signature,
)
from .errors import (
    InputError,
    NonDecaying,
    NumericallyAmbiguous,
    PencilError,
    PreconditionError,
)
from .pencil import EXACT, SymmetricPencil

DET_RTOL = 1e-12
SYM_RTOL = 1e-10
DEFAULT_LADDER = tuple(Fraction(1, 2**k) for k in range(2, 13))


def _is_exact(M: np.ndarray) -> bool:
    return np.asarray(M).dtype == object


def _det(M: np.ndarray):
    if _is_exact(M):
        return linalg.det_bareiss(M)
    return np.linalg.det(M)


@dataclass(frozen=True, eq=False)
class GroupElement:
    """(M, N) in SL(d) x SL(2), exact (Fraction) or complex float."""

    M: np.ndarray
    N: np.ndarray

    def __post_init__(self):
        for name, X in (("M", self.M), ("N", self.N)):
            X = np.asarray(X)
            if X.ndim != 2 or X.shape[0] != X.shape[1]:
                raise InputError(f"{name} must be square")
            det = _det(X)
            if _is_exact(X):
                if det != 1:
                    raise InputError(f"det {name} = {det}, expected 1")
            elif abs(det - 1) > DET_RTOL * max(1.0, float(np.abs(X).max()) ** X.shape[0]):
                raise InputError(f"det {name} = {det}, expected 1")
        if np.asarray(self.N).shape != (2, 2):
            raise InputError("N must be 2x2")

    @classmethod
    def identity(cls, d: int) -> "GroupElement":
        return cls(linalg.identity(d), linalg.identity(2))


Pair = Tuple[np.ndarray, np.ndarray]


def _pair(p: Union[SymmetricPencil, Pair]) -> Pair:
    if isinstance(p, SymmetricPencil):
        return p.A, p.B
    A, B = p
    return np.asarray(A), np.asarray(B)


def _check_symmetric(X: np.ndarray) -> None:
    if _is_exact(X):
        if not np.all(X == X.T):
            raise PencilError("action produced an asymmetric matrix")
        return
    scale = max(float(np.abs(X).max()), 1e-300)
    if float(np.abs(X - X.T).max()) > SYM_RTOL * scale:
        raise PencilError("action produced an asymmetric matrix")


def act(g: GroupElement, p: Union[SymmetricPencil, Pair]) -> Pair:
    """rho_M(sigma_N(A, B))."""
    A, B = _pair(p)
    M, N = g.M, g.N
    if _is_exact(M) != _is_exact(A) or _is_exact(N) != _is_exact(A):
        M = np.asarray(M, dtype=complex) if not _is_exact(M) else linalg.to_float(M)
        N = np.asarray(N, dtype=complex) if not _is_exact(N) else linalg.to_float(N)
        A = np.asarray(linalg.to_float(A) if _is_exact(A) else A, dtype=complex)
        B = np.asarray(linalg.to_float(B) if _is_exact(B) else B, dtype=complex)
    A1 = N[0, 0] * A + N[0, 1] * B
    B1 = N[1, 0] * A + N[1, 1] * B
    out = (M @ A1 @ M.T, M @ B1 @ M.T)
    for X in out:
        _check_symmetric(X)
    return out


def pair_norm(pair: Pair) -> float:
    total = 0.0
    for X in pair:
        if _is_exact(X):
            total += float(sum(x * x for x in X.ravel()))
        else:
            total += float(np.sum(np.abs(X) ** 2))
    return float(np.sqrt(total))


# ---------------------------------------------------------------- normal forms


def antidiag_identity(r: int) -> np.ndarray:
    """The r x r exchange matrix (ones where i + j = r + 1, 1-based)."""
    out = linalg.zeros((r, r))
    for i in range(r):
        out[i, r - 1 - i] = Fraction(1)
    return out


def antidiag_jordan(r: int, lam=0) -> np.ndarray:
    """lam on the antidiagonal i + j = r + 1 and ones on i + j = r (1-based)."""
    lam = linalg.to_fraction(lam)
    out = linalg.zeros((r, r))
    for i in range(r):
        out[i, r - 1 - i] = lam
        if r - 2 - i >= 0:
            out[i, r - 2 - i] = Fraction(1)
    return out


def block_zeroing_exponents(r: int) -> List[Fraction]:
    """a_j = (r+1)/2 - j for j = 1..r; they sum to zero."""
    return [Fraction(r + 1, 2) - j for j in range(1, r + 1)]


def block_zeroing_matrix(r: int, mu) -> np.ndarray:
    """diag(lambda^{a_j}) at lambda = mu^2, so every power of mu is an integer."""
    mu = linalg.to_fraction(mu)
    out = linalg.zeros((r, r))
    for j, a in enumerate(block_zeroing_exponents(r)):
        out[j, j] = mu ** int(2 * a)
    return out


# ---------------------------------------------------------------- curves


@dataclass(frozen=True, eq=False)
class DestabilizingCurve:
    """lambda -> (diag(lambda^E) M0, diag(lambda^-e, lambda^e) N0).

    E = stage_rate * stage_exponents + m_exponents combines the block-zeroing
    stage (run at lambda^stage_rate) with the final diagonal stage.
    """

    kind: str
    M0: np.ndarray
    N0: np.ndarray
    stage_exponents: Tuple[Fraction, ...]
    stage_rate: int
    m_exponents: Tuple[int, ...]
    n_exponent: int
    predicted_slope: Optional[int] = None

    @property
    def d(self) -> int:
        return self.M0.shape[0]

    @property
    def total_exponents(self) -> Tuple[int, ...]:
        out = []
        for a, m in zip(self.stage_exponents, self.m_exponents):
            e = self.stage_rate * a + m
            if Fraction(e).denominator != 1:
                raise PencilError("non-integer exponent in curve")
            out.append(int(e))
        return tuple(out)

    @property
    def exact(self) -> bool:
        return _is_exact(self.M0)

    def element(self, lam) -> GroupElement:
        exps = self.total_exponents
        if self.exact and not isinstance(lam, float):
            lam = linalg.to_fraction(lam)
            D = linalg.zeros((self.d, self.d))
            for i, e in enumerate(exps):
                D[i, i] = lam**e
            Nl = linalg.zeros((2, 2))
            Nl[0, 0] = lam ** (-self.n_exponent)
            Nl[1, 1] = lam**self.n_exponent
            return GroupElement(D @ self.M0, Nl @ self.N0)
        lam = float(lam)
        M0 = linalg.to_float(self.M0) if self.exact else self.M0
        N0 = linalg.to_float(self.N0) if _is_exact(self.N0) else self.N0
        D = np.diag([lam**e for e in exps])
        Nl = np.diag([lam ** (-self.n_exponent), lam**self.n_exponent])
        return GroupElement(D @ M0, Nl @ N0)

    __call__ = element

    def pre_conjugated(self, p: SymmetricPencil) -> Pair:
        return act(GroupElement(self.M0, self.N0), p)


def _normalize_det(M0: np.ndarray) -> np.ndarray:
    """Scale the last row so that det = 1 (keeps every zero pattern)."""
    det = _det(M0)
    if det == 0:
        raise PencilError("basis change is singular")
    M0 = M0.copy()
    M0[-1, :] = M0[-1, :] / det
    return M0


def _entry_slope(curve: DestabilizingCurve, pair: Pair) -> int:
    """Smallest lambda-exponent over the nonzero entries of the pre-conjugated pair."""
    E = curve.total_exponents
    e = curve.n_exponent
    best = None
    for X, sign in ((pair[0], -1), (pair[1], 1)):
        for i in range(X.shape[0]):
            for j in range(X.shape[1]):
                if X[i, j] != 0:
                    v = E[i] + E[j] + sign * e
                    best = v if best is None else min(best, v)
    return best


def _exponent_weights(curve: DestabilizingCurve, pair: Pair) -> Dict[int, float]:
    """Squared Frobenius weight of the orbit grouped by lambda-exponent."""
    E = curve.total_exponents
    e = curve.n_exponent
    out: Dict[int, float] = {}
    for X, sign in ((pair[0], -1), (pair[1], 1)):
        for i in range(X.shape[0]):
            for j in range(X.shape[1]):
                if X[i, j] != 0:
                    a = E[i] + E[j] + sign * e
                    out[a] = out.get(a, 0.0) + abs(complex(X[i, j])) ** 2
    return out


def balance_parameter(curve: DestabilizingCurve, pair: Pair) -> DestabilizingCurve:
    """Reparametrize lambda -> 2^-j lambda so the slowest rate dominates from lambda = 1.

    The orbit norm squared is sum_a W_a lambda^(2a).  A faster term with a
    large constant can mask the leading rate over a practical ladder; with
    kappa = 2^-j each W_a gains kappa^(2a), and j is the least integer making
    every W_a kappa^(2a) <= W_a0 kappa^(2 a0).  The curve is the same
    one-parameter family (diag(kappa^E) has determinant 1) and stays exact.
    """
    W = _exponent_weights(curve, pair)
    if len(W) < 2:
        return curve
    a0 = min(W)
    need = 0.0
    for a, w in W.items():
        if a > a0 and w > W[a0]:
            need = max(need, math.log2(w / W[a0]) / (2 * (a - a0)))
    j = math.ceil(need - 1e-12)
    if j <= 0:
        return curve
    E = curve.total_exponents
    e = curve.n_exponent
    if curve.exact:
        kappa = Fraction(1, 2**j)
        D = linalg.zeros((curve.d, curve.d))
        for i, x in enumerate(E):
            D[i, i] = kappa**x
        Dn = linalg.zeros((2, 2))
        Dn[0, 0], Dn[1, 1] = kappa ** (-e), kappa**e
        N0 = curve.N0 if _is_exact(curve.N0) else linalg.fmatrix(curve.N0)
    else:
        kappa = 2.0**-j
        D = np.diag([kappa**x for x in E])
        Dn = np.diag([kappa ** (-e), kappa**e])
        N0 = linalg.to_float(curve.N0) if _is_exact(curve.N0) else curve.N0
    return DestabilizingCurve(
        curve.kind, D @ curve.M0, Dn @ N0, curve.stage_exponents, curve.stage_rate,
        curve.m_exponents, curve.n_exponent, curve.predicted_slope,
    )


def _complete_basis(rows: List[np.ndarray], candidates: Sequence[np.ndarray], count: int) -> List[np.ndarray]:
    out = list(rows)
    added = []
    base = linalg.rank(np.vstack(out)) if out else 0
    for c in candidates:
        if len(added) == count:
            break
        trial = out + [c]
        r = linalg.rank(np.vstack(trial))
        if r > base:
            out, base = trial, r
            added.append(c)
    if len(added) != count:
        raise PencilError("basis completion failed")
    return added


def _flat_curve(p: SymmetricPencil, verdict: FlatNonvanishing, sqrt_transfer: bool) -> DestabilizingCurve:
    d = p.d
    eig = verdict.eigenstructure or flat_eigenstructure(p)
    m = eig.m_star
    lam = eig.lambda_star
    N0 = eig.relabel
    p2 = p.sigma(N0)
    Binv = linalg.inverse(p2.B)
    S = p2.A @ Binv
    chains = linalg.jordan_chains(S, lam)
    K_cols, stage = [], []
    for ch in chains:
        K_cols.extend(reversed(ch))
        stage.extend(block_zeroing_exponents(len(ch)))
    if len(K_cols) != m:
        raise PencilError("Jordan chains do not span the dominant eigenspace")
    Npow = linalg.matrix_power(S - lam * linalg.identity(d), d)
    R_cols = linalg.canonical_basis([Npow[:, j] for j in range(d)])
    if len(R_cols) != d - m:
        raise PencilError("complementary invariant subspace has the wrong dimension")
    Q = np.column_stack(K_cols + R_cols)
    M0 = _normalize_det(Q.T @ Binv)
    shift = linalg.fmatrix([[1, -lam], [0, 1]])
    Ntot = shift @ N0
    stage = tuple(stage) + (Fraction(0),) * (d - m)
    m_exps = (-(d - m),) * m + (m,) * (d - m)
    e = 2 * (d - m) + 1
    rate = 4 * (d - m) + 2
    curve = DestabilizingCurve(FLAT_NONVANISHING, M0, Ntot, stage, rate, m_exps, e)
    pair = curve.pre_conjugated(p)
    slope = _entry_slope(curve, pair)
    if slope is None or slope < 1:
        raise PencilError(f"flat curve has an entry decaying at rate {slope}")
    if sqrt_transfer:
        M0c = _sqrt_transfer(pair, [len(ch) for ch in chains]) @ linalg.to_float(M0).astype(complex)
        # a scalar (principal d-th root) keeps the normal form up to a constant
        M0c /= np.linalg.det(M0c) ** (1.0 / d)
        curve = DestabilizingCurve(
            FLAT_NONVANISHING, M0c, Ntot, stage, rate, m_exps, e
        )
    return DestabilizingCurve(curve.kind, curve.M0, curve.N0, stage, rate, m_exps, e, predicted_slope=slope)


def _sqrt_transfer(pair: Pair, chain_lengths: Sequence[int]) -> np.ndarray:
    """W with W D_K W^T equal to the blockwise exchange matrix.

    D_K is the second matrix restricted to the dominant coordinates.  With
    X = D_K Ix (Ix the blockwise exchange matrix), X^{1/2} Ix (X^{1/2})^T = X Ix
    whenever X Ix is symmetric, so W = X^{-1/2}.  The square root is the
    principal one from a Schur decomposition.
    """
    d = pair[0].shape[0]
    m = sum(chain_lengths)
    DK = linalg.to_float(pair[1])[:m, :m].astype(complex)
    Ix = np.zeros((m, m))
    i = 0
    for r in chain_lengths:
        for k in range(r):
            Ix[i + k, i + r - 1 - k] = 1.0
        i += r
    root = scipy.linalg.sqrtm(DK @ Ix)
    W = np.eye(d, dtype=complex)
    W[:m, :m] = np.linalg.inv(root)
    return W


def _common_kernel_curve(p: SymmetricPencil, verdict: DegenerateCommonKernel) -> DestabilizingCurve:
    d = p.d
    v = verdict.kernel[0]
    rest = _complete_basis([v], [linalg.identity(d)[i] for i in range(d)], d - 1)
    M0 = _normalize_det(np.vstack([v] + rest))
    m_exps = (-(d - 1),) + (1,) * (d - 1)
    curve = DestabilizingCurve(
        COMMON_KERNEL, M0, linalg.identity(2), (Fraction(0),) * d, 0, m_exps, 0
    )
    slope = _entry_slope(curve, curve.pre_conjugated(p))
    return DestabilizingCurve(
        COMMON_KERNEL, M0, linalg.identity(2), (Fraction(0),) * d, 0, m_exps, 0,
        predicted_slope=slope,
    )


def kernel_split_exponents(d: int, k: int, ell: int) -> Tuple[int, int, int]:
    """(a1, a2, a3) = (-((d-1) ell + d - k), k, d k)."""
    return (-((d - 1) * ell + d - k), k, d * k)


def _kernel_split_curve(p: SymmetricPencil, verdict: DegenerateKernelSplit) -> DestabilizingCurve:
    d = p.d
    ks = verdict.split
    V, H = list(ks.V), list(ks.H)
    k, ell = len(V), len(H)
    Hperp = linalg.nullspace(np.vstack(H)) if H else [linalg.identity(d)[i] for i in range(d)]
    middle = _complete_basis(V, Hperp, d - k - ell)
    M0 = _normalize_det(np.vstack(V + middle + H))
    a1, a2, a3 = kernel_split_exponents(d, k, ell)
    m_exps = (a1,) * k + (a2,) * (d - k - ell) + (a3,) * ell
    if sum(m_exps) != 0:
        raise PencilError("kernel-split exponents do not sum to zero")
    stage = (Fraction(0),) * d
    curve = DestabilizingCurve(KERNEL_SPLIT, M0, linalg.identity(2), stage, 0, m_exps, 0)
    slope = _entry_slope(curve, curve.pre_conjugated(p))
    if slope is not None and slope < 1:
        raise PencilError(f"kernel-split curve has an entry decaying at rate {slope}")
    return DestabilizingCurve(
        KERNEL_SPLIT, M0, linalg.identity(2), stage, 0, m_exps, 0, predicted_slope=slope
    )


def _exact_copy(p: SymmetricPencil) -> SymmetricPencil:
    """Float entries are dyadic rationals; reinterpret them exactly."""
    conv = np.vectorize(lambda x: Fraction(float(x)), otypes=[object])
    return SymmetricPencil(conv(p.A), conv(p.B), EXACT, p.label)


def destabilizing_curve(
    p: SymmetricPencil,
    verdict: Optional[CurvatureVerdict] = None,
    *,
    sqrt_transfer: bool = False,
) -> DestabilizingCurve:
    """Build the destabilizing curve for a non-well-curved pencil.

    Float pencils are reinterpreted exactly (each float is a dyadic
    rational); the exact verdict must agree with the supplied one.
    """
    if verdict is None:
        verdict = classify(p)
    if isinstance(verdict, WellCurved):
        raise PreconditionError("well-curved pencils are semistable; no destabilizing curve")
    if not p.exact:
        q = _exact_copy(p)
        exact_verdict = classify(q)
        if exact_verdict.kind != verdict.kind:
            raise NumericallyAmbiguous(
                f"float verdict {verdict.kind} differs from the exact one {exact_verdict.kind}"
            )
        p, verdict = q, exact_verdict
    if isinstance(verdict, FlatNonvanishing):
        curve = _flat_curve(p, verdict, sqrt_transfer)
    elif isinstance(verdict, DegenerateCommonKernel):
        curve = _common_kernel_curve(p, verdict)
    elif isinstance(verdict, DegenerateKernelSplit):
        curve = _kernel_split_curve(p, verdict)
    else:
        raise InputError(f"unknown verdict {verdict!r}")
    return balance_parameter(curve, curve.pre_conjugated(p))


# ---------------------------------------------------------------- decay check


@dataclass(frozen=True)
class DecayReport:
    lambdas: Tuple[float, ...]
    norms: Tuple[float, ...]
    slope: float
    residual: float
    predicted_slope: Optional[int]

    def summary(self) -> dict:
        return {
            "slope": self.slope,
            "residual": self.residual,
            "predicted_slope": self.predicted_slope,
            "lambdas": list(self.lambdas),
            "norms": list(self.norms),
        }


def orbit_norm(curve: DestabilizingCurve, p: SymmetricPencil, lam) -> float:
    if curve.exact and not p.exact:
        p = _exact_copy(p)
    return pair_norm(act(curve.element(lam), p))


def verify_decay(
    curve: DestabilizingCurve,
    p: SymmetricPencil,
    ladder: Sequence = DEFAULT_LADDER,
    *,
    min_slope: float = 0.5,
) -> DecayReport:
    """Fit log ||orbit(lambda)|| against log lambda."""
    lams = list(ladder)
    if len(lams) < 2:
        raise InputError("decay ladder needs at least two points")
    norms = [orbit_norm(curve, p, lam) for lam in lams]
    x = np.log([float(l) for l in lams])
    if all(n == 0 for n in norms):
        return DecayReport(tuple(map(float, lams)), tuple(norms), float("inf"), 0.0, curve.predicted_slope)
    if any(n == 0 for n in norms):
        raise NonDecaying("orbit norm vanishes at some but not all ladder points")
    y = np.log(norms)
    slope, icpt = np.polyfit(x, y, 1)
    resid = float(np.max(np.abs(y - (slope * x + icpt))))
    report = DecayReport(tuple(map(float, lams)), tuple(norms), float(slope), resid, curve.predicted_slope)
    if slope < min_slope:
        raise NonDecaying(f"fitted slope {slope:.3f} is below {min_slope}")
    return report


# ---------------------------------------------------------------- orbit probe


def _random_special(rng: np.random.Generator, n: int, radius: float) -> np.ndarray:
    while True:
        X = rng.uniform(-radius, radius, size=(n, n))
        det = np.linalg.det(X)
        if abs(det) > 1e-8:
            break
    if det < 0:
        X[0] = -X[0]
        det = -det
    return X / det ** (1.0 / n)


def sampled_orbit_infimum(
    p: SymmetricPencil,
    trials: int = 1000,
    radius: float = 10.0,
    seed: int = 0,
    extra: Sequence[GroupElement] = (),
) -> float:
    """Smallest orbit norm over random group elements (a probe, not a bound)."""
    rng = np.random.default_rng(seed)
    A = linalg.to_float(p.A)
    B = linalg.to_float(p.B)
    best = pair_norm((A, B))
    for _ in range(trials):
        M = _random_special(rng, p.d, radius)
        N = _random_special(rng, 2, radius)
        best = min(best, pair_norm(act(GroupElement(M, N), (A, B))))
    for g in extra:
        best = min(best, pair_norm(act(g, p)))
    return float(best)
