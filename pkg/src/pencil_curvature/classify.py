"""Curvature classification of symmetric pencils.

The determinant form decides the main split: if it is not identically zero,
the largest root multiplicity m* against d/2 separates well-curved pencils
from flat ones.  Flat pencils with a nonzero determinant carry the Jordan
data of AB^{-1} at the dominant eigenvalue; pencils with a vanishing
determinant are described by their kernel geometry.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import linalg
from .errors import (
    InconsistentImages,
    InputError,
    NumericallyAmbiguous,
    PencilError,
    PreconditionError,
)
from .parallel import pmap
from .pencil import EXACT, FLOAT, BinaryForm, SymmetricPencil, det_pencil
from .roots import (
    DEFAULT_CLUSTER_TOL,
    ProjectiveRoot,
    RootMultiset,
    max_multiplicity,
    normalize,
    roots_with_multiplicities,
    squarefree_decomposition,
)

ZERO_FORM_RTOL = 1e-10
AMBIGUOUS_BAND = (1e-12, 1e-6)

WELL_CURVED = "well_curved"
FLAT_NONVANISHING = "flat_nonvanishing"
KERNEL_SPLIT = "degenerate_kernel_split"
COMMON_KERNEL = "degenerate_common_kernel"


@dataclass(frozen=True, eq=False)
class FlatEigenstructure:
    """Jordan data of A'B'^{-1} at its dominant eigenvalue.

    (A', B') is the pencil after the relabelling ``relabel`` (an SL(2)
    element) that makes the second matrix invertible.  ``root`` is the
    corresponding root of the original determinant form.
    """

    lambda_star: Union[Fraction, float]
    n0: int
    block_sizes: Tuple[int, ...]
    m_star: int
    relabel: np.ndarray
    rank_sequence: Tuple[int, ...]
    root: Tuple[complex, complex]

    def summary(self) -> dict:
        return {
            "lambda_star": str(self.lambda_star),
            "n0": self.n0,
            "block_sizes": list(self.block_sizes),
            "m_star": self.m_star,
            "relabel": [[str(x) for x in row] for row in self.relabel],
            "rank_sequence": list(self.rank_sequence),
        }


@dataclass(frozen=True, eq=False)
class KernelSplit:
    generic_samples: Tuple[Tuple, ...]
    V: Tuple[np.ndarray, ...]
    H: Tuple[np.ndarray, ...]
    minor: Tuple[Tuple[int, ...], Tuple[int, ...]]
    d: int

    @property
    def k(self) -> int:
        return len(self.V)

    @property
    def ell_H(self) -> int:
        return len(self.H)

    @property
    def epsilon(self) -> Fraction:
        return Fraction(self.k - self.ell_H, self.d - self.ell_H)

    def summary(self) -> dict:
        return {
            "k": self.k,
            "ell_H": self.ell_H,
            "epsilon": str(self.epsilon),
            "V": [[str(x) for x in v] for v in self.V],
            "H": [[str(x) for x in h] for h in self.H],
            "samples": [[str(s), str(t)] for s, t in self.generic_samples],
        }


@dataclass(frozen=True, eq=False)
class WellCurved:
    critical: bool
    m_star: int
    form: BinaryForm
    roots: RootMultiset
    kind: str = WELL_CURVED

    def summary(self) -> dict:
        return {"kind": self.kind, "critical": self.critical, "m_star": self.m_star}


@dataclass(frozen=True, eq=False)
class FlatNonvanishing:
    m_star: int
    eigenstructure: Optional[FlatEigenstructure]
    form: BinaryForm
    roots: RootMultiset
    kind: str = FLAT_NONVANISHING

    def summary(self) -> dict:
        out = {"kind": self.kind, "m_star": self.m_star}
        if self.eigenstructure is not None:
            out["eigenstructure"] = self.eigenstructure.summary()
        return out


@dataclass(frozen=True, eq=False)
class DegenerateKernelSplit:
    split: KernelSplit
    kind: str = KERNEL_SPLIT

    def summary(self) -> dict:
        return {"kind": self.kind, **self.split.summary()}


@dataclass(frozen=True, eq=False)
class DegenerateCommonKernel:
    kernel: Tuple[np.ndarray, ...]
    W: Tuple[np.ndarray, ...]
    kind: str = COMMON_KERNEL

    def summary(self) -> dict:
        return {
            "kind": self.kind,
            "kernel": [[str(x) for x in v] for v in self.kernel],
            "W_dim": len(self.W),
        }


CurvatureVerdict = Union[WellCurved, FlatNonvanishing, DegenerateKernelSplit, DegenerateCommonKernel]


def signature(v: CurvatureVerdict) -> tuple:
    """The relabelling-invariant content of a verdict."""
    if isinstance(v, WellCurved):
        return (v.kind, v.m_star, v.critical)
    if isinstance(v, FlatNonvanishing):
        e = v.eigenstructure
        blocks = None if e is None else (e.n0, e.block_sizes)
        return (v.kind, v.m_star, blocks)
    if isinstance(v, DegenerateKernelSplit):
        s = v.split
        return (v.kind, s.k, s.ell_H, s.epsilon)
    return (v.kind, len(v.kernel))


# ------------------------------------------------------------------ helpers


def _random_rational(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(-97, 97), rng.randint(1, 13))


def _random_point(rng: random.Random, exact: bool):
    if exact:
        while True:
            s, t = _random_rational(rng), _random_rational(rng)
            if s != 0 or t != 0:
                return s, t
    theta = rng.uniform(0, np.pi)
    return float(np.cos(theta)), float(np.sin(theta))


def _frobenius_scale(p: SymmetricPencil) -> float:
    A = linalg.to_float(p.A)
    B = linalg.to_float(p.B)
    return float(max(np.linalg.norm(A), np.linalg.norm(B)))


def form_vanishes(p: SymmetricPencil, form: BinaryForm) -> bool:
    """Decide whether the determinant form is identically zero."""
    if form.is_zero():
        return True
    if p.exact:
        return False
    scale = _frobenius_scale(p) ** p.d
    if max(abs(c) for c in form.coeffs) < ZERO_FORM_RTOL * max(scale, 1e-300):
        raise NumericallyAmbiguous(
            "determinant coefficients are below the zero threshold but not exactly zero; "
            "use exact mode"
        )
    return False


def _float_rank_checked(M: np.ndarray, rtol: float = linalg.RANK_RTOL) -> int:
    sv = np.linalg.svd(M, compute_uv=False)
    if sv.size == 0 or sv[0] == 0:
        return 0
    rel = sv / sv[0]
    lo, hi = AMBIGUOUS_BAND
    if np.any((rel > lo) & (rel < hi)):
        raise NumericallyAmbiguous("singular value inside the rank ambiguity band")
    return int(np.sum(rel > rtol))


# ------------------------------------------------------------------ relabelling


def invertible_relabel(p: SymmetricPencil) -> Tuple[np.ndarray, SymmetricPencil]:
    """Find N0 in SL(2) so that the second matrix of sigma_{N0}(p) is invertible.

    Candidates (s0, t0) are (0, 1) first, then (1, k) for k = 0, 1, -1, 2, ...;
    N0 = [[0, -1/s0], [s0, t0]] sends (A, B) to (-B/s0, s0 A + t0 B).
    """
    cands = [(0, 1)] + [(1, k) for k in _alternating(p.d + 2)]
    for s0, t0 in cands:
        M = p.at(s0, t0)
        if p.exact:
            ok = linalg.det_bareiss(M) != 0
        else:
            ok = _float_rank_checked(M) == p.d
        if not ok:
            continue
        if s0 == 0:
            N0 = linalg.identity(2) if p.exact else np.eye(2)
        else:
            N0 = [[0, Fraction(-1, s0)], [s0, t0]]
            N0 = linalg.fmatrix(N0) if p.exact else np.array(N0, dtype=float)
        return N0, p.sigma(N0)
    raise PreconditionError("determinant form vanishes identically; no invertible member")


def _alternating(n: int) -> List[int]:
    out = [0]
    k = 1
    while len(out) < n:
        out.extend([k, -k])
        k += 1
    return out[:n]


# ------------------------------------------------------------------ flat data


def _dominant_lambda_exact(p2: SymmetricPencil) -> Tuple[Fraction, int]:
    """Dominant eigenvalue of A'B'^{-1} (rational when m* > d/2)."""
    form = det_pencil(p2)
    d = p2.d
    poly = list(form.coeffs)
    while poly and poly[-1] == 0:
        poly.pop()
    at_infinity = d - (len(poly) - 1)
    best_m, best_lam = at_infinity, Fraction(0)
    for factor, mult in squarefree_decomposition(poly):
        # only a root of multiplicity above d/2 can be dominant, and it is unique
        if mult > best_m and 2 * mult > d:
            if len(factor) != 2:
                raise PreconditionError("dominant root is not rational; pencil is not flat")
            c0, c1 = factor
            best_m, best_lam = mult, c1 / c0
    return best_lam, best_m


def flat_eigenstructure(p: SymmetricPencil, *, unsafe_numerics: bool = False) -> FlatEigenstructure:
    d = p.d
    if not p.exact and not unsafe_numerics:
        raise PreconditionError("Jordan structure in float mode requires unsafe_numerics=True")
    form = det_pencil(p)
    if form_vanishes(p, form):
        raise PreconditionError("determinant form vanishes identically")
    N0, p2 = invertible_relabel(p)
    if p.exact:
        lam, m_star = _dominant_lambda_exact(p2)
        if 2 * m_star <= d:
            raise PreconditionError(f"not flat: largest multiplicity {m_star} <= d/2")
        S = p2.A @ linalg.inverse(p2.B)
        ranks = linalg.rank_sequence(S - lam * linalg.identity(d), exact=True)
    else:
        roots2 = roots_with_multiplicities(det_pencil(p2))
        m_star, root = max_multiplicity(roots2)
        if 2 * m_star <= d:
            raise PreconditionError(f"not flat: largest multiplicity {m_star} <= d/2")
        lam = float((-root.b / root.a).real)
        S = p2.A @ np.linalg.inv(p2.B)
        N = S - lam * np.eye(d)
        ranks = [d]
        P = np.eye(d)
        while True:
            P = P @ N
            ranks.append(_float_rank_checked(P, rtol=1e-6))
            if ranks[-1] == ranks[-2]:
                break
    sizes = linalg.block_sizes_from_ranks(ranks)
    n0 = sum(1 for s in sizes if s == 1)
    big = tuple(s for s in sizes if s > 1)
    if n0 + sum(big) != m_star:
        raise PencilError(
            f"Jordan data (n0={n0}, blocks={big}) disagrees with root multiplicity {m_star}"
        )
    Nf = linalg.to_float(N0) if N0.dtype == object else N0
    a, b = Nf.T @ np.array([1.0, -float(lam)])
    return FlatEigenstructure(lam, n0, big, m_star, N0, tuple(ranks), normalize(a, b))


# ------------------------------------------------------------------ degenerate data


def common_kernel(p: SymmetricPencil) -> Tuple[List[np.ndarray], List[np.ndarray]]:
    """(basis of ker A ∩ ker B, basis of the span of the images of A and B)."""
    stacked = np.vstack([p.A, p.B])
    if p.exact:
        ker = linalg.nullspace(stacked)
        cols = [p.A[:, j] for j in range(p.d)] + [p.B[:, j] for j in range(p.d)]
        W = linalg.canonical_basis(cols)
        return ker, W
    ker = linalg.numerical_nullspace(stacked)
    W = linalg.orth(np.hstack([p.A, p.B]))
    return [ker[:, j] for j in range(ker.shape[1])], [W[:, j] for j in range(W.shape[1])]


def _generic_rank_exact(p: SymmetricPencil, rng: random.Random):
    best = None
    for _ in range(3):
        s, t = _random_point(rng, True)
        M = p.at(s, t)
        r = linalg.rank(M)
        if best is None or r > best[0]:
            best = (r, M)
    r, M = best
    cols = linalg.rref(M)[1]
    rows = linalg.rref(M.T)[1]
    return r, tuple(rows), tuple(cols)


def kernel_split(p: SymmetricPencil, *, seed: int = 0) -> KernelSplit:
    d = p.d
    form = det_pencil(p)
    if not form_vanishes(p, form):
        raise PreconditionError("kernel_split needs an identically vanishing determinant")
    ker, _ = common_kernel(p)
    if ker:
        raise PreconditionError("pencil has a common kernel; use the common-kernel branch")
    rng = random.Random(seed)
    if p.exact:
        return _kernel_split_exact(p, rng)
    return _kernel_split_float(p, rng)


def _kernel_split_exact(p: SymmetricPencil, rng: random.Random) -> KernelSplit:
    d = p.d
    r, I, J = _generic_rank_exact(p, rng)
    rows, cols = list(I), list(J)

    def generic(s, t) -> bool:
        M = p.at(s, t)
        return linalg.det_bareiss(M[np.ix_(rows, cols)]) != 0

    samples = []
    vectors: List[np.ndarray] = []
    dim = 0
    quiet = 0
    target = 2 * d + 1
    while len(samples) < target or quiet < d:
        s, t = _random_point(rng, True)
        if not generic(s, t):
            continue
        samples.append((s, t))
        vectors.extend(linalg.nullspace(p.at(s, t)))
        new_dim = linalg.rank(np.column_stack(vectors))
        quiet = quiet + 1 if new_dim == dim else 0
        dim = new_dim
        if len(samples) > 20 * d:
            raise InconsistentImages("kernel span failed to stabilise")
    V = linalg.canonical_basis(vectors)
    Vm = np.column_stack(V)
    s0, t0 = samples[0]
    H = linalg.canonical_basis([(p.at(s0, t0) @ Vm)[:, j] for j in range(Vm.shape[1])])
    Hm = np.column_stack(H) if H else linalg.zeros((d, 0))
    for s, t in samples:
        img = p.at(s, t) @ Vm
        if linalg.rank(np.hstack([Hm, img])) != len(H):
            raise InconsistentImages(f"image at (s,t)=({s},{t}) leaves the common image")
    if H and not linalg.is_zero_matrix(Vm.T @ Hm):
        raise InconsistentImages("V is not orthogonal to H")
    if len(V) <= len(H):
        raise InconsistentImages(f"dim V = {len(V)} does not exceed dim H = {len(H)}")
    return KernelSplit(tuple(samples), tuple(V), tuple(H), (tuple(rows), tuple(cols)), d)


def _kernel_split_float(p: SymmetricPencil, rng: random.Random) -> KernelSplit:
    d = p.d
    scale = _frobenius_scale(p)
    tol = 1e-8 * max(scale, 1e-300)
    samples = [_random_point(rng, False) for _ in range(2 * d + 1)]
    ranks = [_float_rank_checked(p.at(s, t)) for s, t in samples]
    r = max(ranks)
    samples = [st for st, rk in zip(samples, ranks) if rk == r]
    kernels = [linalg.numerical_nullspace(p.at(s, t)) for s, t in samples]
    V = linalg.orth(np.hstack(kernels))
    s0, t0 = samples[0]
    H = linalg.orth(p.at(s0, t0) @ V, atol=tol)
    for s, t in samples:
        img = p.at(s, t) @ V
        resid = img - H @ (H.T @ img)
        if np.linalg.norm(resid) > 1e-7 * max(scale, 1e-300):
            raise InconsistentImages(f"image at (s,t)=({s:.3g},{t:.3g}) leaves the common image")
    if H.shape[1] and np.linalg.norm(V.T @ H) > 1e-7:
        raise InconsistentImages("V is not orthogonal to H")
    if V.shape[1] <= H.shape[1]:
        raise InconsistentImages("dim V does not exceed dim H")
    return KernelSplit(
        tuple(samples),
        tuple(V[:, j] for j in range(V.shape[1])),
        tuple(H[:, j] for j in range(H.shape[1])),
        ((), ()),
        d,
    )


# ------------------------------------------------------------------ classify


def classify(
    p: SymmetricPencil,
    mode: Optional[str] = None,
    *,
    cluster_tol: float = DEFAULT_CLUSTER_TOL,
    unsafe_numerics: bool = False,
    seed: int = 0,
) -> CurvatureVerdict:
    """Classify a pencil.  ``mode='float'`` converts an exact pencil first."""
    if mode == FLOAT:
        p = p.as_float()
    elif mode == EXACT and not p.exact:
        raise InputError("an exact classification needs an exact pencil")
    form = det_pencil(p)
    if not form_vanishes(p, form):
        roots = roots_with_multiplicities(form, cluster_tol)
        m_star, _ = max_multiplicity(roots)
        if 2 * m_star <= p.d:
            return WellCurved(2 * m_star == p.d, m_star, form, roots)
        eig = None
        if p.exact or unsafe_numerics:
            eig = flat_eigenstructure(p, unsafe_numerics=unsafe_numerics)
        return FlatNonvanishing(m_star, eig, form, roots)
    ker, W = common_kernel(p)
    if ker:
        return DegenerateCommonKernel(tuple(ker), tuple(W))
    return DegenerateKernelSplit(kernel_split(p, seed=seed))


# ------------------------------------------------------------------ pointwise


@dataclass
class PointwiseClassification:
    entries: List[Tuple[tuple, object]] = field(default_factory=list)

    @property
    def constant(self) -> bool:
        sigs = set()
        for _, v in self.entries:
            if isinstance(v, Exception):
                sigs.add(("error", type(v).__name__))
            else:
                sigs.add(signature(v))
        return len(sigs) <= 1


def classify_surface_pointwise(
    hessian_field: Callable,
    sample_points: Sequence,
    mode: str = EXACT,
    **kwargs,
) -> PointwiseClassification:
    """Classify the Hessian pencil at each sample point; errors are recorded, not raised."""

    def one(xi):
        try:
            H1, H2 = hessian_field(xi)
            return classify(SymmetricPencil(H1, H2, mode), **kwargs)
        except PencilError as exc:
            return exc

    results = pmap(one, list(sample_points))
    return PointwiseClassification([(tuple(xi), r) for xi, r in zip(sample_points, results)])


# ------------------------------------------------------------------ Rogers rank


def rogers_rank_check(p: SymmetricPencil, U, trials: int = 3, seed: int = 0) -> bool:
    """rank [AU; BU] >= number of columns of U, confirmed at sampled members."""
    form = det_pencil(p)
    if form_vanishes(p, form):
        raise PreconditionError("rank condition check needs a nonvanishing determinant")
    rng = random.Random(seed)
    if p.exact:
        U = linalg.fmatrix(U)
        if U.ndim == 1 or U.shape[0] != p.d:
            U = U.reshape(p.d, -1)
        ell = U.shape[1]
        if linalg.rank(U) != ell:
            raise InputError("U must have full column rank")
        stacked_ok = linalg.rank(np.vstack([p.A @ U, p.B @ U])) >= ell
        member_ok = True
        for _ in range(trials):
            while True:
                s, t = _random_point(rng, True)
                if linalg.det_bareiss(p.at(s, t)) != 0:
                    break
            member_ok &= linalg.rank(p.at(s, t) @ U) == ell
        return bool(stacked_ok and member_ok)
    U = np.asarray(U, dtype=float).reshape(p.d, -1)
    ell = U.shape[1]
    if linalg.numerical_rank(U) != ell:
        raise InputError("U must have full column rank")
    stacked_ok = linalg.numerical_rank(np.vstack([p.A @ U, p.B @ U])) >= ell
    member_ok = all(
        linalg.numerical_rank(p.at(*_random_point(rng, False)) @ U) == ell for _ in range(trials)
    )
    return bool(stacked_ok and member_ok)
