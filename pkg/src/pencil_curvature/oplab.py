"""Numerical laboratory for the restricted 2-plane transform.

    T f(x, xi)      = int_{[-1,1]^2} f(x - (sA + tB) xi, s, t) ds dt
    T* g(y, s, t)   = int_{[-1,1]^d} g(y + (sA + tB) xi, xi) dxi

Functions are mostly indicators of sets given as vectorised membership
predicates.  Pairings <T 1_E, 1_F> are estimated by Monte Carlo in two
independent ways (sampling F, or sampling E), which doubles as a check of
the adjoint identity.  The families of sets used by the necessary
conditions live here too, together with the log-log scaling experiments
that turn them into numerical evidence, and the Kakeya slab counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import gamma

from . import linalg
from .classify import (
    DegenerateCommonKernel,
    DegenerateKernelSplit,
    FlatEigenstructure,
    FlatNonvanishing,
    classify,
    common_kernel,
)
from .errors import FamilyMismatch, InputError, PencilError, ZeroPairing
from .parallel import pmap
from .pencil import FLOAT, SymmetricPencil
from .sublevel import Estimate, check_ladder, loglog_fit
from .witness import destabilizing_curve

MC_BATCH = 1 << 16
DEFAULT_BUDGET = 10**6
DEFAULT_NODES = 64
DEFAULT_EPS_PRIME = 0.25

Sampler = Callable[[np.random.Generator, int], np.ndarray]


def ball_volume(n: int, r: float = 1.0) -> float:
    return math.pi ** (n / 2) / gamma(n / 2 + 1) * r**n


def _float_pair(p: SymmetricPencil) -> Tuple[np.ndarray, np.ndarray]:
    q = p.as_float() if p.exact else p
    return np.asarray(q.A, dtype=float), np.asarray(q.B, dtype=float)


# ------------------------------------------------------------------ sets


@dataclass(frozen=True, eq=False)
class SetPredicate:
    """A bounded set given by a vectorised membership test.

    ``proposal`` draws uniform points from a region of volume
    ``proposal_volume`` that contains the set; by default that region is the
    bounding box.
    """

    dim: int
    contains: Callable[[np.ndarray], np.ndarray]
    lo: np.ndarray
    hi: np.ndarray
    analytic_measure: Optional[float] = None
    proposal: Optional[Sampler] = None
    proposal_volume: Optional[float] = None
    label: str = ""

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        if lo.shape != (self.dim,) or hi.shape != (self.dim,) or np.any(hi < lo):
            raise InputError(f"bad bounding box for a {self.dim}-dimensional set")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def box_volume(self) -> float:
        return float(np.prod(self.hi - self.lo))

    def draw(self, rng: np.random.Generator, n: int) -> Tuple[np.ndarray, float]:
        if self.proposal is None:
            return rng.uniform(self.lo, self.hi, size=(n, self.dim)), self.box_volume
        return self.proposal(rng, n), float(self.proposal_volume)

    def measure(self, samples: int = 10**5, seed: int = 0) -> Estimate:
        """Analytic measure when known, else a Monte Carlo estimate."""
        if self.analytic_measure is not None:
            return Estimate(float(self.analytic_measure), 0.0)
        return self.estimate_measure(samples, seed)

    def estimate_measure(self, samples: int = 10**5, seed: int = 0) -> Estimate:
        rng = np.random.default_rng(seed)
        pts, vol = self.draw(rng, samples)
        hits = self.contains(pts)
        frac = float(np.mean(hits))
        return Estimate(vol * frac, vol * math.sqrt(frac * (1 - frac) / samples))

    def __mul__(self, other: "SetPredicate") -> "SetPredicate":
        """Cartesian product."""
        k = self.dim

        def contains(pts):
            return self.contains(pts[:, :k]) & other.contains(pts[:, k:])

        def proposal(rng, n):
            a, _ = self.draw(rng, n)
            b, _ = other.draw(rng, n)
            return np.hstack([a, b])

        am = None
        if self.analytic_measure is not None and other.analytic_measure is not None:
            am = self.analytic_measure * other.analytic_measure
        va = self.box_volume if self.proposal is None else self.proposal_volume
        vb = other.box_volume if other.proposal is None else other.proposal_volume
        return SetPredicate(
            k + other.dim,
            contains,
            np.concatenate([self.lo, other.lo]),
            np.concatenate([self.hi, other.hi]),
            am,
            proposal,
            va * vb,
            f"{self.label}x{other.label}",
        )


def box(half_widths: Sequence[float], center: Optional[Sequence[float]] = None, label: str = "box") -> SetPredicate:
    """Open axis-parallel box."""
    h = np.asarray(half_widths, dtype=float)
    c = np.zeros_like(h) if center is None else np.asarray(center, dtype=float)

    def contains(pts):
        return np.all(np.abs(pts - c) < h, axis=1)

    return SetPredicate(len(h), contains, c - h, c + h, float(np.prod(2 * h)), label=label)


def interval_box(lo: Sequence[float], hi: Sequence[float], label: str = "box") -> SetPredicate:
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    return box((hi - lo) / 2, (hi + lo) / 2, label)


def ball(n: int, radius: float, center: Optional[Sequence[float]] = None, label: str = "ball") -> SetPredicate:
    c = np.zeros(n) if center is None else np.asarray(center, dtype=float)

    def contains(pts):
        return np.sum((pts - c) ** 2, axis=1) < radius**2

    def proposal(rng, m):
        g = rng.standard_normal((m, n))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        r = radius * rng.uniform(size=(m, 1)) ** (1.0 / n)
        return c + g * r

    vol = ball_volume(n, radius)
    return SetPredicate(n, contains, c - radius, c + radius, vol, proposal, vol, label)


def tube(basis: np.ndarray, radius: float, half_width: float, label: str = "tube") -> SetPredicate:
    """N_radius(U) intersected with the cube [-half_width, half_width]^d.

    ``basis`` holds an orthonormal basis of U as columns.  Points are drawn
    as U a + U_perp b with a uniform in a box covering the projected cube and
    b uniform in a ball; that map is an isometry, so the draw is uniform on
    a region containing the set.
    """
    basis = np.asarray(basis, dtype=float)
    d, u = basis.shape
    if u:
        full = np.linalg.svd(basis, full_matrices=True)[0]
        perp = full[:, u:]
    else:
        perp = np.eye(d)
    span = half_width * math.sqrt(d)

    def contains(pts):
        inside = np.all(np.abs(pts) < half_width, axis=1)
        resid = pts @ perp
        return inside & (np.sum(resid**2, axis=1) < radius**2)

    def proposal(rng, m):
        a = rng.uniform(-span, span, size=(m, u))
        g = rng.standard_normal((m, d - u))
        if d - u:
            g /= np.linalg.norm(g, axis=1, keepdims=True)
            g *= radius * rng.uniform(size=(m, 1)) ** (1.0 / (d - u))
        return a @ basis.T + g @ perp.T

    vol = (2 * span) ** u * ball_volume(d - u, radius)
    lo = -np.full(d, half_width)
    return SetPredicate(d, contains, lo, -lo, None, proposal, vol, label)


# ------------------------------------------------------------------ the transform


def _midpoints(n: int) -> np.ndarray:
    return -1.0 + (2 * np.arange(n) + 1) / n


def _as_callable(f):
    return f.contains if isinstance(f, SetPredicate) else f


def apply_T(f, p: SymmetricPencil, x, xi, nodes: int = DEFAULT_NODES) -> float:
    """Midpoint-rule value of T f at (x, xi); f takes (N, d+2) arrays."""
    A, B = _float_pair(p)
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    f = _as_callable(f)
    m = _midpoints(nodes)
    s, t = (a.ravel() for a in np.meshgrid(m, m, indexing="ij"))
    Axi, Bxi = A @ xi, B @ xi
    y = x[None, :] - s[:, None] * Axi[None, :] - t[:, None] * Bxi[None, :]
    vals = np.asarray(f(np.column_stack([y, s, t])), dtype=float)
    return float(np.sum(vals) * (2.0 / nodes) ** 2)


def apply_T_star(
    g, p: SymmetricPencil, y, s: float, t: float, nodes: int = 32, samples: int = 10**5, seed: int = 0
) -> Estimate:
    """T* g at (y, s, t); g takes (N, 2d) arrays of (x, xi).

    Tensor midpoint rule over xi for d <= 3, Monte Carlo beyond.
    """
    A, B = _float_pair(p)
    d = A.shape[0]
    y = np.asarray(y, dtype=float)
    g = _as_callable(g)
    M = s * A + t * B
    if d <= 3:
        m = _midpoints(nodes)
        xi = np.stack([a.ravel() for a in np.meshgrid(*([m] * d), indexing="ij")], axis=1)
        vals = np.asarray(g(np.hstack([y + xi @ M.T, xi])), dtype=float)
        return Estimate(float(np.sum(vals) * (2.0 / nodes) ** d), 0.0)
    rng = np.random.default_rng(seed)
    xi = rng.uniform(-1, 1, size=(samples, d))
    vals = np.asarray(g(np.hstack([y + xi @ M.T, xi])), dtype=float)
    vol = 2.0**d
    return Estimate(vol * float(np.mean(vals)), vol * float(np.std(vals)) / math.sqrt(samples))


def mixed_norm(F: np.ndarray, q: float, r: float, dx: float = 1.0, dxi: float = 1.0) -> float:
    """L^q(L^r) norm of grid values F[x_index, xi_index]: inner in x, outer in xi."""
    F = np.abs(np.asarray(F, dtype=float))
    if F.ndim != 2:
        raise InputError("mixed_norm expects a 2-d array indexed by (x cell, xi cell)")
    if math.isinf(r):
        inner = F.max(axis=0)
    else:
        inner = (np.sum(F**r, axis=0) * dx) ** (1.0 / r)
    if math.isinf(q):
        return float(inner.max())
    return float((np.sum(inner**q) * dxi) ** (1.0 / q))


# ------------------------------------------------------------------ pairings


def _batches(budget: int, seed: int):
    sizes = [MC_BATCH] * (budget // MC_BATCH)
    if budget % MC_BATCH:
        sizes.append(budget % MC_BATCH)
    return list(zip(sizes, np.random.SeedSequence(seed).spawn(len(sizes))))


def _combine(parts: List[Tuple[float, float, int]], scale: float) -> Estimate:
    """Merge per-batch (sum, sum of squares, count) into a scaled mean."""
    s = sum(a for a, _, _ in parts)
    s2 = sum(b for _, b, _ in parts)
    n = sum(c for _, _, c in parts)
    mean = s / n
    var = max(s2 / n - mean * mean, 0.0)
    return Estimate(scale * mean, scale * math.sqrt(var / n))


def pairing_forward(
    test: SetPredicate, dual: SetPredicate, p: SymmetricPencil, budget: int = DEFAULT_BUDGET, seed: int = 0
) -> Estimate:
    """<T 1_test, 1_dual> by sampling (x, xi) from the dual set and (s, t) uniformly."""
    A, B = _float_pair(p)
    d = A.shape[0]
    st_lo, st_hi = test.lo[d:], test.hi[d:]
    area = float(np.prod(st_hi - st_lo))

    def run(job):
        n, ss = job
        rng = np.random.default_rng(ss)
        pts, vol = dual.draw(rng, n)
        x, xi = pts[:, :d], pts[:, d:]
        st = rng.uniform(st_lo, st_hi, size=(n, 2))
        y = x - st[:, :1] * (xi @ A.T) - st[:, 1:] * (xi @ B.T)
        hit = dual.contains(pts) & test.contains(np.hstack([y, st]))
        h = hit.astype(float)
        return float(h.sum()), float(h.sum()), n, vol

    parts = pmap(run, _batches(budget, seed))
    return _combine([(a, b, c) for a, b, c, _ in parts], parts[0][3] * area)


def pairing_adjoint(
    test: SetPredicate, dual: SetPredicate, p: SymmetricPencil, budget: int = DEFAULT_BUDGET, seed: int = 0
) -> Estimate:
    """<1_test, T* 1_dual> by sampling (y, s, t) from the test set and xi uniformly."""
    A, B = _float_pair(p)
    d = A.shape[0]
    xi_lo, xi_hi = dual.lo[d:], dual.hi[d:]
    vol_xi = float(np.prod(xi_hi - xi_lo))

    def run(job):
        n, ss = job
        rng = np.random.default_rng(ss)
        pts, vol = test.draw(rng, n)
        y, s, t = pts[:, :d], pts[:, d : d + 1], pts[:, d + 1 :]
        xi = rng.uniform(xi_lo, xi_hi, size=(n, d))
        x = y + s * (xi @ A.T) + t * (xi @ B.T)
        hit = test.contains(pts) & dual.contains(np.hstack([x, xi]))
        h = hit.astype(float)
        return float(h.sum()), float(h.sum()), n, vol

    parts = pmap(run, _batches(budget, seed))
    return _combine([(a, b, c) for a, b, c, _ in parts], parts[0][3] * vol_xi)


@dataclass(frozen=True)
class RwtResult:
    alpha: float
    beta: float
    lhs: float
    rhs: float
    ratio: float
    ratio_stderr: float
    forward: Estimate
    adjoint: Estimate
    q: float
    budget: int
    seed: int

    @property
    def adjoint_gap_in_se(self) -> float:
        se = math.hypot(self.forward.stderr, self.adjoint.stderr)
        gap = abs(self.forward.value - self.adjoint.value)
        return gap / se if se > 0 else (0.0 if gap == 0 else math.inf)


def rwt_functional(
    E: SetPredicate,
    F: SetPredicate,
    p: SymmetricPencil,
    q: float,
    budget: int = DEFAULT_BUDGET,
    seed: int = 0,
) -> RwtResult:
    """alpha^(q-1) beta / |E| with alpha = <T1_E,1_F>/|F| and beta = <1_E,T*1_F>/|E|."""
    fwd = pairing_forward(E, F, p, budget, seed)
    adj = pairing_adjoint(E, F, p, budget, seed + 1)
    if fwd.value == 0 or adj.value == 0:
        raise ZeroPairing("the pairing estimated to 0; enlarge the budget or the sets")
    mE = E.measure(budget, seed + 2).value
    mF = F.measure(budget, seed + 3).value
    alpha = fwd.value / mF
    beta = adj.value / mE
    lhs = alpha ** (q - 1) * beta
    ratio = lhs / mE
    rel = math.hypot((q - 1) * fwd.stderr / fwd.value, adj.stderr / adj.value)
    return RwtResult(alpha, beta, lhs, mE, ratio, ratio * rel, fwd, adj, q, budget, seed)


# ------------------------------------------------------------------ families


@dataclass(frozen=True, eq=False)
class Family:
    """Sets witnessing a necessary condition at scale delta.

    ``test`` lives in R^d x [-1,1]^2 (the input function's support),
    ``dual`` in R^d x [-1,1]^d; the operator is that of ``pencil``.  E, F, S
    are the xi-set, x-set and (s,t)-set the family is assembled from.
    """

    name: str
    delta: float
    pencil: SymmetricPencil
    test: SetPredicate
    dual: SetPredicate
    E: Optional[SetPredicate]
    F: Optional[SetPredicate]
    S: Optional[SetPredicate]
    exponents: Dict[str, float] = field(default_factory=dict)
    constants: Dict[str, float] = field(default_factory=dict)


def _opnorm(M: np.ndarray) -> float:
    return float(np.linalg.norm(M, 2))


def family_ball(p: SymmetricPencil, delta: float, c: float = 0.5) -> Family:
    """test = B_{d+2}(delta), dual = B_d(c delta) x [-1,1]^d."""
    d = p.d
    test = ball(d + 2, delta, label="ball")
    F = ball(d, c * delta, label="F")
    E = box([1.0] * d, label="E")
    return Family(
        "ball", delta, p, test, F * E, E, F, None,
        exponents={"test": d + 2, "dual": d},
        constants={"c": c},
    )


def family_intro_slab(p: SymmetricPencil, delta: float) -> Family:
    """test = {|y| < (1+K) delta, 1/2 < |s|,|t| < 1}, dual = B_d(delta) x B_d(delta)."""
    d = p.d
    A, B = _float_pair(p)
    K = _opnorm(A) + _opnorm(B)
    y_ball = ball(d, (1 + K) * delta, label="y")
    st = SetPredicate(
        2,
        lambda pts: np.all((np.abs(pts) > 0.5) & (np.abs(pts) < 1.0), axis=1),
        np.array([-1.0, -1.0]),
        np.array([1.0, 1.0]),
        1.0,
        label="annulus",
    )
    F = ball(d, delta, label="F")
    E = ball(d, delta, label="E")
    return Family(
        "intro_slab", delta, p, y_ball * st, F * E, E, F, st,
        exponents={"test": d, "dual": 2 * d},
        constants={"K": K},
    )


def _require_flat(p: SymmetricPencil, verdict=None) -> FlatNonvanishing:
    verdict = verdict or classify(p)
    if not isinstance(verdict, FlatNonvanishing):
        raise FamilyMismatch(f"flat-box family needs a flat pencil with nonzero determinant, got {verdict.kind}")
    return verdict


def canonical_flat_pair(p: SymmetricPencil, verdict: Optional[FlatNonvanishing] = None):
    """The pencil in eigenvector coordinates with the dominant eigenvalue at 0.

    Returns (pencil, chain lengths of the dominant block, size of the rest).
    """
    verdict = _require_flat(p, verdict)
    curve = destabilizing_curve(p, verdict)
    exact_p = p if p.exact else SymmetricPencil(
        linalg.fmatrix([[Fraction(x) for x in row] for row in np.asarray(p.A, dtype=float)]),
        linalg.fmatrix([[Fraction(x) for x in row] for row in np.asarray(p.B, dtype=float)]),
    )
    A2, B2 = curve.pre_conjugated(exact_p)
    canon = SymmetricPencil(linalg.to_float(A2), linalg.to_float(B2), mode=FLOAT, label="canonical")
    eig: FlatEigenstructure = verdict.eigenstructure
    if eig is None:
        eig = classify(exact_p).eigenstructure
    lengths = sorted(eig.block_sizes, reverse=True) + [1] * eig.n0
    return canon, lengths, p.d - eig.m_star


def _flat_box_exponents(lengths: Sequence[int], rest: int) -> Tuple[List[int], List[int]]:
    """Per-coordinate powers of delta for the xi-box (E) and x-box (F)."""
    e_pow, f_pow = [], []
    for n in lengths:
        for k in range(1, n + 1):
            e_pow.append(n - k)
            f_pow.append(k)
    e_pow += [0] * rest
    f_pow += [0] * rest
    return e_pow, f_pow


def family_flat_boxes(
    p: SymmetricPencil,
    eig: Optional[FlatEigenstructure] = None,
    delta: float = 0.1,
    eps_prime: float = DEFAULT_EPS_PRIME,
    verdict: Optional[FlatNonvanishing] = None,
    canonical=None,
) -> Family:
    """Parabolic boxes adapted to the dominant generalised eigenspaces.

    Works in the coordinates where the pencil is block diagonal with the
    dominant eigenvalue shifted to 0; E is the xi-box with widths
    eps' delta^(n-k), F the x-box with widths kappa eps' delta^k, S the
    strip |t| < delta.  Then (sA + tB) E lies in F for (s,t) in S, so
    T 1_{2F x S} >= |S| on F x E.
    """
    if canonical is None:
        canonical = canonical_flat_pair(p, verdict)
    canon, lengths, rest = canonical
    if eig is not None and sorted(eig.block_sizes, reverse=True) + [1] * eig.n0 != list(lengths):
        raise FamilyMismatch("eigenstructure does not match the pencil")
    A, B = _float_pair(canon)
    d = A.shape[0]
    e_pow, f_pow = _flat_box_exponents(lengths, rest)
    # zero pattern that makes the inclusion uniform in delta
    for i in range(d):
        for k in range(d):
            if A[i, k] != 0 and e_pow[k] < f_pow[i]:
                raise PencilError(f"first matrix entry ({i},{k}) breaks the box inclusion")
            if B[i, k] != 0 and e_pow[k] + 1 < f_pow[i]:
                raise PencilError(f"second matrix entry ({i},{k}) breaks the box inclusion")
    kappa = 2.0 * (1.0 + float(np.max(np.sum(np.abs(A) + np.abs(B), axis=1))))
    e_half = [eps_prime * delta**e for e in e_pow]
    f_half = [kappa * eps_prime * delta**f for f in f_pow]
    E = box(e_half, label="E")
    F = box(f_half, label="F")
    S = box([1.0, delta], label="S")
    F2 = box([2 * h for h in f_half], label="2F")
    n0 = sum(1 for n in lengths if n == 1)
    big = [n for n in lengths if n > 1]
    return Family(
        "flat_boxes", delta, canon, F2 * S, F * E, E, F, S,
        exponents={
            "E": sum(n * (n - 1) / 2 for n in big),
            "F": n0 + sum(n * (n + 1) / 2 for n in big),
            "S": 1.0,
        },
        constants={"eps_prime": eps_prime, "kappa": kappa},
    )


def _orthonormal(vectors: Sequence[np.ndarray], d: int) -> np.ndarray:
    if not vectors:
        return np.zeros((d, 0))
    M = np.column_stack([np.asarray(linalg.to_float(np.asarray(v, dtype=object)) if np.asarray(v).dtype == object else v, dtype=float) for v in vectors])
    return linalg.orth(M)


def family_degenerate(p: SymmetricPencil, ks=None, delta: float = 0.1) -> Family:
    """Neighbourhoods of the kernel span V (xi side) and the common image H (x side)."""
    if ks is None:
        v = classify(p)
        if not isinstance(v, DegenerateKernelSplit):
            raise FamilyMismatch(f"degenerate family needs a kernel-split pencil, got {v.kind}")
        ks = v.split
    elif isinstance(ks, DegenerateKernelSplit):
        ks = ks.split
    d = p.d
    A, B = _float_pair(p)
    K = _opnorm(A) + _opnorm(B)
    V = _orthonormal(list(ks.V), d)
    H = _orthonormal(list(ks.H), d)
    E = tube(V, delta, 1.0, label="E")
    F = tube(H, K * delta, K, label="F")
    F2 = tube(H, 2 * K * delta, K * (1 + math.sqrt(d)), label="2F")
    S = box([1.0, 1.0], label="S")
    return Family(
        "degenerate", delta, p, F2 * S, F * E, E, F, S,
        exponents={"E": d - V.shape[1], "F": d - H.shape[1]},
        constants={"K": K},
    )


def family_common_kernel(p: SymmetricPencil, delta: float = 0.1) -> Family:
    """F = N_delta(W) with W the joint image; xi and (s,t) range over full cubes."""
    v = classify(p)
    if not isinstance(v, DegenerateCommonKernel):
        raise FamilyMismatch(f"common-kernel family needs a common kernel, got {v.kind}")
    d = p.d
    A, B = _float_pair(p)
    K = max(_opnorm(A) + _opnorm(B), 1.0)
    W = _orthonormal(list(v.W), d)
    F = tube(W, delta, K, label="F")
    F2 = tube(W, 2 * delta, K * (1 + math.sqrt(d)), label="2F")
    E = box([1.0] * d, label="E")
    S = box([1.0, 1.0], label="S")
    return Family(
        "common_kernel", delta, p, F2 * S, F * E, E, F, S,
        exponents={"F": d - W.shape[1]},
        constants={"K": K},
    )


FAMILIES = {
    "ball": lambda p, delta, **kw: family_ball(p, delta, **kw),
    "intro_slab": lambda p, delta, **kw: family_intro_slab(p, delta),
    "flat_boxes": lambda p, delta, **kw: family_flat_boxes(p, delta=delta, **kw),
    "degenerate": lambda p, delta, **kw: family_degenerate(p, delta=delta),
    "common_kernel": lambda p, delta, **kw: family_common_kernel(p, delta),
}


# ------------------------------------------------------------------ scaling


@dataclass(frozen=True)
class ScalingResult:
    family: str
    p: float
    q: float
    ladder: Tuple[float, ...]
    pairings: Tuple[Estimate, ...]
    test_measures: Tuple[float, ...]
    dual_measures: Tuple[float, ...]
    ratios: Tuple[float, ...]
    slope: float
    residual: float
    budget: int
    seeds: Tuple[int, ...]

    def measure_slopes(self) -> Dict[str, float]:
        return {
            "pairing": loglog_fit(self.ladder, [e.value for e in self.pairings])[0],
            "test": loglog_fit(self.ladder, self.test_measures)[0],
            "dual": loglog_fit(self.ladder, self.dual_measures)[0],
        }


def _exponent(p) -> float:
    return math.inf if isinstance(p, str) and p.strip().lower() in ("inf", "infinity") else float(p)


def family_sweep(
    make_family: Callable[[float], Family],
    ladder: Sequence[float],
    budget: int = DEFAULT_BUDGET,
    seed: int = 0,
    measure_samples: int = 10**5,
):
    """Pairings and set measures along a delta ladder (the p,q-free part)."""
    ladder = tuple(float(x) for x in ladder)
    pairings, tests, duals, seeds = [], [], [], []
    for i, delta in enumerate(ladder):
        fam = make_family(delta)
        s = seed + 1000 * i
        seeds.append(s)
        pr = pairing_forward(fam.test, fam.dual, fam.pencil, budget, s)
        if pr.value == 0:
            raise ZeroPairing(f"pairing vanished at delta = {delta}")
        pairings.append(pr)
        tests.append(fam.test.measure(measure_samples, s + 1).value)
        duals.append(fam.dual.measure(measure_samples, s + 2).value)
    return ladder, pairings, tests, duals, tuple(seeds)


def scaling_experiment(
    make_family: Callable[[float], Family],
    p_exp,
    q_exp,
    ladder: Sequence[float],
    budget: int = DEFAULT_BUDGET,
    seed: int = 0,
    sweep=None,
) -> ScalingResult:
    """Log-slope of <T 1_test, 1_dual> / (|test|^(1/p) |dual|^(1/q')) in delta.

    A bounded L^p -> L^q operator keeps the ratio bounded (Hoelder), so a
    clearly negative slope certifies failure along the family.
    """
    p_val, q_val = _exponent(p_exp), _exponent(q_exp)
    ladder, pairings, tests, duals, seeds = sweep or family_sweep(make_family, ladder, budget, seed)
    inv_p = 0.0 if math.isinf(p_val) else 1.0 / p_val
    inv_q_dual = 1.0 - (0.0 if math.isinf(q_val) else 1.0 / q_val)
    ratios = tuple(
        pr.value / (ts**inv_p * du**inv_q_dual) for pr, ts, du in zip(pairings, tests, duals)
    )
    slope, resid = loglog_fit(ladder, ratios)
    name = make_family(ladder[0]).name if callable(make_family) else ""
    return ScalingResult(
        name, p_val, q_val, ladder, tuple(pairings), tuple(tests), tuple(duals), ratios,
        slope, resid, budget, seeds,
    )


def failure_boundary(
    make_family: Callable[[float], Family],
    q_exp,
    ladder: Sequence[float],
    budget: int = DEFAULT_BUDGET,
    seed: int = 0,
) -> float:
    """The 1/p at which the fitted slope crosses zero for fixed q.

    The log-ratio is affine in 1/p, so one sweep determines the crossing:
    slope(1/p) = s_pair - (1/p) s_test - (1/q') s_dual.
    """
    ladder, pairings, tests, duals, _ = family_sweep(make_family, ladder, budget, seed)
    s_pair = loglog_fit(ladder, [e.value for e in pairings])[0]
    s_test = loglog_fit(ladder, tests)[0]
    s_dual = loglog_fit(ladder, duals)[0]
    q_val = _exponent(q_exp)
    inv_q_dual = 1.0 - (0.0 if math.isinf(q_val) else 1.0 / q_val)
    return (s_pair - inv_q_dual * s_dual) / s_test


# ------------------------------------------------------------------ Kakeya slabs


@dataclass(frozen=True)
class KakeyaResult:
    norm: float
    stderr: float
    integral: float
    integral_stderr: float
    union_measure: float
    union_stderr: float
    n_slabs: int
    r: float
    delta: float
    seed: int


def lattice(d: int, delta: float) -> np.ndarray:
    """A maximal delta-separated lattice in [-1,1]^d."""
    axis = np.arange(-1.0, 1.0 + 1e-12, delta)
    grids = np.meshgrid(*([axis] * d), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def single_slab_measure(d: int, delta: float) -> float:
    """Each (s,t) slice of a slab is a d-ball of radius delta."""
    return 4.0 * ball_volume(d, delta)


def kakeya_slab_norm(
    p: SymmetricPencil,
    delta: float,
    r: float,
    placement="random",
    st_samples: int = 256,
    y_samples: int = 4096,
    seed: int = 0,
    directions: Optional[np.ndarray] = None,
) -> KakeyaResult:
    """L^r norm of sum_j 1_{S_delta(x_j, xi_j)} by two-stage Monte Carlo.

    Outer stage: (s,t) uniform in [-1,1]^2.  Inner stage: y uniform in a box
    holding every slice; slab counts come from a k-d tree over the slice
    centres x_j - (sA + tB) xi_j.
    """
    A, B = _float_pair(p)
    d = A.shape[0]
    rng = np.random.default_rng(seed)
    xi = lattice(d, delta) if directions is None else np.asarray(directions, dtype=float)
    if placement == "random":
        x = rng.uniform(-1.0, 1.0, size=xi.shape)
    elif callable(placement):
        x = np.asarray(placement(xi, rng), dtype=float)
    else:
        raise InputError(f"unknown placement {placement!r}")
    Axi, Bxi = xi @ A.T, xi @ B.T
    reach = np.max(np.abs(Axi) + np.abs(Bxi), axis=0) if len(xi) else np.zeros(d)
    lo = x.min(axis=0) - reach - delta
    hi = x.max(axis=0) + reach + delta
    y_vol = float(np.prod(hi - lo))
    st = rng.uniform(-1.0, 1.0, size=(st_samples, 2))
    seeds = np.random.SeedSequence(seed).spawn(st_samples)

    def run(i):
        s, t = st[i]
        centres = x - s * Axi - t * Bxi
        tree = cKDTree(centres)
        g = np.random.default_rng(seeds[i])
        y = g.uniform(lo, hi, size=(y_samples, d))
        counts = tree.query_ball_point(y, delta, return_length=True).astype(float)
        return float(np.mean(counts**r)), float(np.mean(counts > 0))

    res = pmap(run, range(st_samples))
    scale = 4.0 * y_vol
    powers = np.array([a for a, _ in res])
    unions = np.array([b for _, b in res])
    integral = scale * float(powers.mean())
    integral_se = scale * float(powers.std(ddof=1)) / math.sqrt(st_samples)
    union = scale * float(unions.mean())
    union_se = scale * float(unions.std(ddof=1)) / math.sqrt(st_samples)
    norm = integral ** (1.0 / r)
    norm_se = norm * integral_se / (r * integral) if integral > 0 else 0.0
    return KakeyaResult(norm, norm_se, integral, integral_se, union, union_se, len(xi), r, delta, seed)
