"""Stability classification and norming-function solvers.

Small-time relative stability of the process holds exactly when the Gaussian
part vanishes and the probe ratio A(x)/(x * pibar(x)) diverges as x -> 0; the
large-time analogue probes x -> infinity and drops the Gaussian gate (the
Brownian part is lower order at large times).  A finite probe needs a cutoff
rule: we accept a divergence verdict when the tail of the probe grid is
sign-consistent, nondecreasing in magnitude and either already huge (>= 1e3)
or clearly growing (>= 10 with >= 25% growth across the tail).  The bare
"huge" cutoff alone would misclassify logarithmically divergent probes, whose
magnitude at x = 1e-10 is only |log x| ~ 23.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, RangeError, SolverError
from .jumps import TableTails
from .model import LevyModel, winsorized_mean_A

PROBE_HUGE = 1e3
PROBE_MODEST = 10.0
PROBE_GROWTH = 1.25
_TAIL_START = 5  # probe indices 5..9 (k = 6..10) form the decision tail

SMALL_TIME = "small_time"
LARGE_TIME = "large_time"


@dataclass(frozen=True)
class StabilityReport:
    """Outcome of the stability classification.

    ``class_in_probability`` is one of ``PRS``, ``NRS``, ``none`` or
    ``unknown``.  A separate two-sided-only class cannot occur: two-sided
    relative stability coincides with PRS-or-NRS, so the two-sided marker
    value is represented by this report never producing it.
    """

    regime: str
    class_in_probability: str
    class_almost_sure: str
    certificate: str
    diagnostics: tuple = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "regime": self.regime,
            "class": self.class_in_probability,
            "almost_sure": self.class_almost_sure,
            "certificate": self.certificate,
            "probe_grid": [[float(x), float(v)] for x, v in self.diagnostics],
        }


def _probe_ratio(model: LevyModel, x: float) -> float:
    a = winsorized_mean_A(model, x)
    t = model.jumps.pibar(x)
    if t == 0.0:
        if a == 0.0:
            return 0.0
        return math.copysign(math.inf, a)
    return a / (x * t)


def _probe_grid(model: LevyModel, regime: str):
    ks = range(1, 11)
    xs = [10.0 ** (-k if regime == SMALL_TIME else k) for k in ks]
    return [(x, _probe_ratio(model, x)) for x in xs]


def _divergence_verdict(diag) -> str:
    """Return 'PRS', 'NRS', 'none' or 'unknown' from the probe tail."""
    tail = [v for _, v in diag[_TAIL_START:]]
    signs = {math.copysign(1.0, v) for v in tail if v != 0.0}
    if len(signs) > 1:
        return "unknown"
    mags = [abs(v) for v in tail]
    if any(m2 < m1 * (1.0 - 1e-9) for m1, m2 in zip(mags, mags[1:])):
        return "none"
    last = mags[-1]
    first = mags[0]
    diverges = last >= PROBE_HUGE or (
        last >= PROBE_MODEST and (first == 0.0 or last >= PROBE_GROWTH * first)
    )
    if not diverges:
        return "none"
    sign = signs.pop() if signs else 0.0
    if sign > 0:
        return "PRS"
    if sign < 0:
        return "NRS"
    return "none"


def classify(model: LevyModel, regime: str = SMALL_TIME) -> StabilityReport:
    """Classify relative stability of the model in the given regime."""
    if regime not in (SMALL_TIME, LARGE_TIME):
        raise DomainError(f"unknown regime {regime!r}")

    # degenerate case: no jumps at all
    if model.jumps.total_mass == 0.0:
        if model.sigma2 > 0.0 and regime == SMALL_TIME:
            prob = "none"
        elif model.gamma > 0.0:
            prob = "PRS"
        elif model.gamma < 0.0:
            prob = "NRS"
        else:
            prob = "none"
        asure, cert = _almost_sure(model, regime)
        return StabilityReport(regime, prob, asure, cert, tuple())

    diag = _probe_grid(model, regime)

    if regime == SMALL_TIME and model.sigma2 > 0.0:
        prob = "none"
    else:
        prob = _divergence_verdict(diag)

    asure, cert = _almost_sure(model, regime)
    if isinstance(model.jumps, TableTails) and regime == SMALL_TIME:
        if model.jumps.support_min > 10.0 ** -10:
            cert += ("; table probe extends below the sampled support via "
                     "log-log extrapolation")
    return StabilityReport(regime, prob, asure, cert, tuple(diag))


def _almost_sure(model: LevyModel, regime: str) -> tuple[str, str]:
    if regime == SMALL_TIME:
        d = model.drift
        if d is None:
            if model.sigma2 > 0.0:
                return "not_stable", "sigma2 > 0, no bounded-variation drift"
            return "not_stable", "unbounded-variation jumps, no drift"
        if d != 0.0:
            return "stable", f"bounded variation, d_X={d:.12g}"
        return "not_stable", "bounded variation with zero drift"
    mu = model.mean_mu
    if mu is None:
        if isinstance(model.jumps, TableTails) and not model.jumps.assume_finite_mean:
            return "unknown", "table mean not asserted finite"
        return "not_stable", "mean of X_1 undefined or divergent"
    if mu != 0.0:
        return "stable", f"finite mean, mu={mu:.12g}"
    return "not_stable", "mean of X_1 is zero"


# ---------------------------------------------------------------------------
# norming function B(t): fixed point of B = t |A(B)|
# ---------------------------------------------------------------------------

def solve_norming_B(
    model: LevyModel,
    t: float,
    regime: str = SMALL_TIME,
    rel_tol: float = 1e-10,
) -> float:
    """Solve B = t * |A(B)| by damped fixed-point iteration (damping 0.5),
    falling back to bisection on phi(B) = B - t|A(B)| when the iteration
    stalls.  Valid for models classified PRS or NRS."""
    if t <= 0.0:
        raise DomainError(f"norming solver requires t > 0, got {t}")

    def target(b):
        return t * abs(winsorized_mean_A(model, b))

    b0 = target(t)
    if b0 == 0.0:
        raise SolverError(f"A({t}) = 0; no positive starting point for the fixed point")

    trace = [b0]
    b = b0
    for _ in range(200):
        nb = 0.5 * b + 0.5 * target(b)
        trace.append(nb)
        if nb <= 0.0 or not math.isfinite(nb):
            break
        if abs(nb - b) <= rel_tol * max(abs(nb), 1e-300):
            if abs(nb - target(nb)) <= 10.0 * rel_tol * max(abs(nb), 1e-300):
                return nb
        b = nb

    # bisection fallback on phi(B) = B - t|A(B)|, bracketed outward from b0
    def phi(bb):
        return bb - target(bb)

    lo = hi = b0
    if phi(b0) > 0.0:
        for _ in range(1200):
            lo *= 0.5
            if phi(lo) <= 0.0:
                break
            if lo < 1e-300:
                raise SolverError("no sign change below the starting point", trace=trace)
        else:
            raise SolverError("no sign change for the norming fixed point", trace=trace)
    else:
        cap = max(1e6 * t, 2.0 * b0)
        for _ in range(1200):
            hi *= 2.0
            if phi(hi) >= 0.0:
                break
            if hi > cap:
                raise SolverError("no sign change up to 1e6 * t", trace=trace)
        else:
            raise SolverError("no sign change for the norming fixed point", trace=trace)

    fa = phi(lo)
    for _ in range(400):
        m = math.sqrt(lo * hi)
        fm = phi(m)
        if fm == 0.0 or (hi - lo) <= rel_tol * max(m, 1e-300):
            return m
        if fa * fm < 0:
            hi = m
        else:
            lo, fa = m, fm
    raise SolverError("norming bisection did not converge", trace=trace)


class NormingPair:
    """The pair (B, C) for a model and exponent b: B solves B = t|A(B)| and
    C inverts t -> B(t)/t^b on a bracketed, strictly increasing range.

    Instances are immutable after construction; evaluation is pure, so a pair
    can be shared freely across workers.
    """

    def __init__(self, model: LevyModel, b: float, regime: str, t_lo: float, t_hi: float,
                 grid_points: int = 61):
        if not 0.0 <= b < 1.0:
            raise DomainError(f"norming inversion requires 0 <= b < 1, got {b}")
        self.model = model
        self.b = float(b)
        self.regime = regime
        self.t_lo = float(t_lo)
        self.t_hi = float(t_hi)
        ts = np.geomspace(self.t_lo, self.t_hi, grid_points)
        bs = np.array([solve_norming_B(model, t, regime) for t in ts])
        ratios = bs / ts**self.b
        if np.any(np.diff(ratios) <= 0):
            raise RangeError(
                "B(t)/t^b is not strictly increasing on the requested range; "
                "narrow the range"
            )
        self.t_grid = ts
        self.B_grid = bs
        self.ratio_grid = ratios
        self.r_lo = float(ratios[0])
        self.r_hi = float(ratios[-1])

    @classmethod
    def build(cls, model: LevyModel, b: float, regime: str = SMALL_TIME,
              r_lo: float = None, r_hi: float = None, grid_points: int = 61):
        """Grow a t-bracket covering the requested r-range, then construct."""
        if r_lo is None or r_hi is None:
            raise DomainError("build() needs the target r range")
        if not (0 < r_lo <= r_hi):
            raise DomainError("need 0 < r_lo <= r_hi")

        def ratio(t):
            return solve_norming_B(model, t, regime) / t**b

        t_lo = t_hi = 1.0 if regime == LARGE_TIME else min(1.0, r_hi)
        for _ in range(400):
            if ratio(t_lo) <= r_lo * 0.5:
                break
            t_lo *= 0.2
        else:
            raise RangeError(f"could not bracket r_lo={r_lo}")
        for _ in range(400):
            if ratio(t_hi) >= r_hi * 2.0:
                break
            t_hi *= 5.0
        else:
            raise RangeError(f"could not bracket r_hi={r_hi}")
        return cls(model, b, regime, t_lo, t_hi, grid_points)

    def B(self, t: float) -> float:
        return solve_norming_B(self.model, t, self.regime)

    def B_interp(self, t) -> np.ndarray:
        """Log-log interpolation of B on the cached grid (fast path for
        per-path normalizations)."""
        t = np.asarray(t, float)
        return np.exp(
            np.interp(np.log(t), np.log(self.t_grid), np.log(self.B_grid))
        )

    def C(self, r: float, rel_tol: float = 1e-8) -> float:
        """Invert B(t)/t^b = r by bisection on the cached bracket; the bracket
        is shrunk to rel_tol in t, which bounds the round-trip error."""
        if not (self.r_lo <= r <= self.r_hi):
            raise RangeError(
                f"r={r} outside the invertible range [{self.r_lo:.6g}, {self.r_hi:.6g}]"
            )
        k = int(np.searchsorted(self.ratio_grid, r))
        k = min(max(k, 1), len(self.t_grid) - 1)
        a, c = float(self.t_grid[k - 1]), float(self.t_grid[k])

        def f(t):
            return self.B(t) / t**self.b - r

        fa = f(a)
        if fa == 0.0:
            return a
        m = a
        for _ in range(300):
            m = math.sqrt(a * c)
            if (c - a) <= 0.25 * rel_tol * m:
                return m
            fm = f(m)
            if fm == 0.0:
                return m
            if fa * fm < 0:
                c = m
            else:
                a, fa = m, fm
        raise SolverError(f"C({r}) bisection did not converge")


def invert_C(pair: NormingPair, r: float) -> float:
    """C(r) with B(C(r))/C(r)^b = r to 1e-8 relative."""
    if r <= 0:
        raise DomainError(f"invert_C requires r > 0, got {r}")
    return pair.C(r)


# ---------------------------------------------------------------------------
# regular-variation index estimation
# ---------------------------------------------------------------------------

def rv_index_estimate(samples) -> float:
    """Least squares slope of log f against log x for samples [(x, f(x)), ...]."""
    pts = list(samples)
    if len(pts) < 5:
        raise DomainError("need at least 5 grid points for the index estimate")
    xs = np.array([p[0] for p in pts], float)
    fs = np.array([p[1] for p in pts], float)
    if np.any(xs <= 0) or np.any(fs <= 0):
        raise DomainError("index estimation needs positive samples")
    slope, _ = np.polyfit(np.log(xs), np.log(fs), 1)
    return float(slope)


# ---------------------------------------------------------------------------
# the exit-geometry utility g and its inverse
# ---------------------------------------------------------------------------

def g_func(b: float, x) -> float:
    """g(x) = ((1+x)^b - 1)/x^b, strictly increasing from 0 to 1 on (0, inf)."""
    if not 0.0 < b < 1.0:
        raise DomainError(f"g requires 0 < b < 1, got b={b}")
    x = np.asarray(x, float)
    if np.any(x <= 0):
        raise DomainError("g requires x > 0")
    out = np.expm1(b * np.log1p(x)) / x**b
    return float(out) if out.ndim == 0 else out


def c_alpha(b: float, alpha: float, tol: float = 1e-12) -> float:
    """Solve g(c) = alpha; bracket grown geometrically, then bisected in log
    space until |g(c) - alpha| <= tol."""
    if not 0.0 < b < 1.0:
        raise DomainError(f"c_alpha requires 0 < b < 1, got b={b}")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"c_alpha requires 0 < alpha < 1, got {alpha}")
    lo, hi = 1.0, 1.0
    while g_func(b, lo) > alpha:
        lo *= 0.25
        if lo < 1e-250:
            raise SolverError(f"bracket for c({alpha}) collapsed below 1e-250")
    while g_func(b, hi) < alpha:
        hi *= 2.0
        if hi > 1e12:
            raise SolverError(f"bracket for c({alpha}) exceeded 1e12")
    for _ in range(300):
        mid = math.sqrt(lo * hi)
        val = g_func(b, mid)
        if abs(val - alpha) <= tol:
            return mid
        if val < alpha:
            lo = mid
        else:
            hi = mid
    raise SolverError(f"c_alpha({b}, {alpha}) did not reach tolerance {tol}")
