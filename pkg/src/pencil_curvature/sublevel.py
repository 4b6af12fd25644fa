"""Measures of sublevel sets {(s,t) in [-1,1]^2 : |P(s,t)| < delta}.

Two estimators (cell-centre grid, seeded Monte Carlo), a closed form for
monomials |s|^mu |t|^nu, and log-log exponent fits over a delta ladder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import DegenerateLadder, InputError
from .parallel import pmap
from .pencil import BinaryForm

SQUARE_AREA = 4.0
MC_BATCH = 1 << 17
DEFAULT_LADDER = tuple(2.0 ** -k for k in range(4, 17))
DEFAULT_SAMPLES = 10**6


@dataclass(frozen=True)
class Grid:
    n: int = 1024

    def __post_init__(self):
        if self.n < 64:
            raise InputError(f"grid needs n >= 64, got {self.n}")


@dataclass(frozen=True)
class MonteCarlo:
    samples: int = DEFAULT_SAMPLES
    seed: int = 0

    def __post_init__(self):
        if self.samples < 10**4:
            raise InputError(f"Monte Carlo needs at least 1e4 samples, got {self.samples}")


Method = Union[Grid, MonteCarlo]


@dataclass(frozen=True)
class SublevelQuery:
    form: BinaryForm
    delta: float
    method: Method = field(default_factory=MonteCarlo)

    def __post_init__(self):
        if not self.delta > 0:
            raise InputError(f"delta must be positive, got {self.delta}")


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float  # 0 for the deterministic grid


def form_values(coeffs: Sequence[float], s: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Vectorised sum_k c_k s^k t^(d-k)."""
    d = len(coeffs) - 1
    out = np.zeros_like(s, dtype=float)
    for k, c in enumerate(coeffs):
        if c:
            out += c * s**k * t ** (d - k)
    return out


def _mc_batches(samples: int, seed: int) -> List[Tuple[int, np.random.SeedSequence]]:
    counts = [MC_BATCH] * (samples // MC_BATCH)
    if samples % MC_BATCH:
        counts.append(samples % MC_BATCH)
    children = np.random.SeedSequence(seed).spawn(len(counts))
    return list(zip(counts, children))


def _abs_values_mc(coeffs, samples: int, seed: int) -> List[np.ndarray]:
    def run(job):
        count, ss = job
        rng = np.random.default_rng(ss)
        pts = rng.uniform(-1.0, 1.0, size=(2, count))
        return np.abs(form_values(coeffs, pts[0], pts[1]))

    return pmap(run, _mc_batches(samples, seed))


def _abs_values_grid(coeffs, n: int) -> np.ndarray:
    centres = -1.0 + (2 * np.arange(n) + 1) / n
    s, t = np.meshgrid(centres, centres, indexing="ij")
    return np.abs(form_values(coeffs, s.ravel(), t.ravel()))


def _estimate(values: Union[np.ndarray, List[np.ndarray]], delta: float, grid: bool) -> Estimate:
    if grid:
        frac = float(np.mean(values < delta))
        return Estimate(SQUARE_AREA * frac, 0.0)
    hits = sum(int(np.count_nonzero(v < delta)) for v in values)
    n = sum(v.size for v in values)
    frac = hits / n
    se = SQUARE_AREA * math.sqrt(frac * (1 - frac) / n)
    return Estimate(SQUARE_AREA * frac, se)


def sublevel_measure(q: SublevelQuery) -> Estimate:
    coeffs = [float(c) for c in q.form.coeffs]
    if isinstance(q.method, Grid):
        return _estimate(_abs_values_grid(coeffs, q.method.n), q.delta, grid=True)
    return _estimate(_abs_values_mc(coeffs, q.method.samples, q.method.seed), q.delta, grid=False)


def sublevel_profile(form: BinaryForm, deltas: Sequence[float], method: Method) -> List[Estimate]:
    """Measures at several thresholds from one shared sample (monotone in delta)."""
    coeffs = [float(c) for c in form.coeffs]
    if isinstance(method, Grid):
        vals = _abs_values_grid(coeffs, method.n)
        return [_estimate(vals, d, grid=True) for d in deltas]
    vals = _abs_values_mc(coeffs, method.samples, method.seed)
    return [_estimate(vals, d, grid=False) for d in deltas]


# ------------------------------------------------------------------ closed form


def log_plus(x: float) -> float:
    return max(1.0, math.log(x)) if x > 0 else 1.0


def two_factor_oracle(mu: float, nu: float, delta: float) -> float:
    """Exact area of {|s|,|t| <= 1 : |s|^mu |t|^nu < delta}.

    In the quarter square the t-extent is min(1, (delta / s^mu)^(1/nu)); it is
    capped for s below s0 = delta^(1/mu), and the remainder integrates in
    closed form (a logarithm when mu = nu).
    """
    if mu <= 0 or nu <= 0:
        raise InputError("exponents must be positive")
    if delta >= 1:
        return SQUARE_AREA
    s0 = delta ** (1.0 / mu)
    kappa = mu / nu
    scale = delta ** (1.0 / nu)
    if math.isclose(kappa, 1.0, rel_tol=0, abs_tol=1e-12):
        tail = scale * math.log(1.0 / s0)
    else:
        tail = scale * (1.0 - s0 ** (1.0 - kappa)) / (1.0 - kappa)
    return SQUARE_AREA * (s0 + tail)


# ------------------------------------------------------------------ exponent fits


@dataclass(frozen=True)
class ExponentFit:
    ladder: Tuple[float, ...]
    measures: Tuple[float, ...]
    stderrs: Tuple[float, ...]
    exponent: float
    log_corrected_exponent: Optional[float]
    residual: float
    seeds: Tuple[int, ...] = ()

    @property
    def fitted(self) -> float:
        """The exponent under the requested hypothesis."""
        return self.exponent if self.log_corrected_exponent is None else self.log_corrected_exponent


def loglog_fit(xs: Sequence[float], ys: Sequence[float]) -> Tuple[float, float]:
    """Least-squares slope of log y against log x and the max abs residual."""
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = float(np.max(np.abs(ly - (slope * lx + intercept))))
    return float(slope), resid


def check_ladder(ladder: Sequence[float]) -> Tuple[float, ...]:
    ladder = tuple(float(x) for x in ladder)
    if len(ladder) < 5:
        raise DegenerateLadder("a ladder needs at least 5 points")
    if any(b >= a for a, b in zip(ladder, ladder[1:])):
        raise DegenerateLadder("ladder must be strictly decreasing")
    if ladder[-1] <= 0:
        raise DegenerateLadder("ladder entries must be positive")
    return ladder


def fit_exponent(
    form: BinaryForm,
    ladder: Sequence[float] = DEFAULT_LADDER,
    method: Method = MonteCarlo(),
    hypothesize_log: bool = False,
) -> ExponentFit:
    """Slope of log |sublevel set| against log delta.

    Monte Carlo points use seed + index so each rung is independent but the
    whole fit is reproducible.
    """
    ladder = check_ladder(ladder)
    estimates = []
    seeds = []
    for i, delta in enumerate(ladder):
        if isinstance(method, MonteCarlo):
            m = MonteCarlo(method.samples, method.seed + i)
            seeds.append(m.seed)
        else:
            m = method
        estimates.append(sublevel_measure(SublevelQuery(form, delta, m)))
    values = [e.value for e in estimates]
    if any(v == 0 for v in values):
        raise DegenerateLadder("a measured value is 0; increase samples or grid size")
    exponent, resid = loglog_fit(ladder, values)
    corrected = None
    if hypothesize_log:
        adjusted = [v / log_plus(1.0 / d) for v, d in zip(values, ladder)]
        corrected, resid = loglog_fit(ladder, adjusted)
    return ExponentFit(
        ladder, tuple(values), tuple(e.stderr for e in estimates), exponent, corrected, resid, tuple(seeds)
    )


def predicted_exponent(
    multiplicities: Sequence[int], real: Optional[Sequence[bool]] = None
) -> Tuple[float, bool]:
    """Decay rate of the sublevel measure and whether a log factor appears.

    Rate 1/m* when some root has multiplicity above d/2, else 2/d.  The log
    loss needs a real root of multiplicity exactly d/2 (two crossing lines,
    as for st); a conjugate pair of such roots makes the form a power of a
    definite quadratic, whose sublevel sets are ellipses.
    """
    d = sum(multiplicities)
    m = max(multiplicities)
    if 2 * m > d:
        return 1.0 / m, False
    if real is None:
        real = [True] * len(multiplicities)
    log = any(2 * mj == d and rj for mj, rj in zip(multiplicities, real))
    return 2.0 / d, log
