"""Jump-measure families: tails, tail integrals, and inverse-tail sampling.

Every family exposes its upper/lower tails ``pibar_plus``/``pibar_minus`` and
closed forms (or controlled quadrature) for the tail integrals that the model
functionals are built from.  All moment-type quantities are derived from tails
via integration by parts, so point masses need no special casing outside of
sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.optimize import brentq
from scipy.special import expn

from .errors import DomainError, NumericalError

QUAD_REL_TOL = 1e-10
QUAD_ABS_TOL = 1e-14

_EINV = math.exp(-1.0)   # support cutoff of the log-squared family
_EINV2 = math.exp(-2.0)  # end of the monotone branch of its tail formula


def _quad(f, a, b, points=None):
    """Adaptive quadrature with the package-wide tolerances."""
    kw = {"epsrel": QUAD_REL_TOL, "epsabs": QUAD_ABS_TOL, "limit": 200}
    if points and a < b and not math.isinf(b):
        kw["points"] = [p for p in points if a < p < b]
    val, err = integrate.quad(f, a, b, **kw)
    if err > max(QUAD_ABS_TOL, 100 * QUAD_REL_TOL * (1.0 + abs(val))):
        raise NumericalError(
            f"quadrature on [{a}, {b}] did not converge: value={val}, err={err}"
        )
    return val


def _cquad(f, a, b, points=None):
    re = _quad(lambda y: f(y).real, a, b, points)
    im = _quad(lambda y: f(y).imag, a, b, points)
    return complex(re, im)


def _quad_tail_from_zero(weighted, b):
    """integral_0^b weighted(y) dy via y = exp(-u); tames tails with
    integrable singularities at the origin."""
    if b <= 0.0:
        return 0.0
    lo = -math.log(b)

    def g(u):
        y = math.exp(-u)
        if y == 0.0:
            return 0.0
        return y * weighted(y)

    return _quad(g, lo, math.inf)


_U_MAX = 250.0  # y = exp(-250) ~ 1e-109: below this the head term takes over


def _cquad_weighted_low(pibar, int_tail_zero, f, f0, b):
    """integral_0^b f(y) pibar(y) dy for smooth f with f(0) = f0.

    The piece below exp(-_U_MAX) is f0 * integral of the tail (closed form per
    family; exact up to O(int y pibar) there, which is ~1e-55); the rest is
    quadrature in u = -log y, where tails with log-type singularities become
    polynomially decaying integrands on a finite interval.
    """
    if b <= 0.0:
        return 0.0 + 0.0j
    delta = math.exp(-_U_MAX)
    if b <= delta:
        return complex(f0) * int_tail_zero(b)
    head = complex(f0) * int_tail_zero(delta) if f0 != 0.0 else 0.0 + 0.0j
    lo = -math.log(b)

    def g(u):
        y = math.exp(-u)
        return y * f(y) * pibar(y)

    return head + _cquad(g, lo, _U_MAX)


class JumpFamily:
    """Base interface; quadrature-backed defaults, overridden with closed forms."""

    # -- tails ---------------------------------------------------------------
    def pibar_plus(self, x: float) -> float:
        raise NotImplementedError

    def pibar_minus(self, x: float) -> float:
        raise NotImplementedError

    def pibar(self, x: float) -> float:
        return self.pibar_plus(x) + self.pibar_minus(x)

    # -- structural flags ----------------------------------------------------
    @property
    def total_mass(self) -> float:
        """Pi(R); ``inf`` for infinite-activity families."""
        raise NotImplementedError

    @property
    def has_bv_jumps(self) -> bool:
        """True when int_{|x|<=1} |x| Pi(dx) < infinity."""
        raise NotImplementedError

    @property
    def support_sup(self) -> float:
        """Supremum of |x| over the support (inf when unbounded)."""
        return math.inf

    # -- tail integrals ------------------------------------------------------
    def int_tail_plus(self, a: float, b: float) -> float:
        """integral_a^b pibar_plus(y) dy, 0 <= a <= b (may be inf at a=0)."""
        if a >= b:
            return 0.0
        if a == 0.0:
            return _quad_tail_from_zero(self.pibar_plus, b)
        return _quad(self.pibar_plus, a, b)

    def int_tail_minus(self, a: float, b: float) -> float:
        if a >= b:
            return 0.0
        if a == 0.0:
            return _quad_tail_from_zero(self.pibar_minus, b)
        return _quad(self.pibar_minus, a, b)

    def int_y_tail(self, x: float) -> float:
        """integral_0^x y * pibar(y) dy; the y=exp(-u) substitution keeps the
        integrable singularity at 0 tame."""
        if x <= 0.0:
            return 0.0
        lo = -math.log(x)

        def g(u):
            y = math.exp(-u)
            return math.exp(-2.0 * u) * self.pibar(y)

        return _quad(g, lo, math.inf)

    def second_moment_below(self, x: float) -> float:
        """integral_{0<|y|<=x} y^2 Pi(dy), computed independently of int_y_tail
        where a closed form exists (identity cross-checks depend on that)."""
        return 2.0 * self.int_y_tail(x) - x * x * self.pibar(x)

    # -- first-moment pieces ---------------------------------------------------
    def abs_moment_below(self, h: float) -> float:
        """integral_{|y|<=h} |y| Pi(dy); ``inf`` for unbounded-variation jumps."""
        if h <= 0.0:
            return 0.0
        if not self.has_bv_jumps:
            return math.inf
        return (
            self.int_tail_plus(0.0, h) - h * self.pibar_plus(h)
            + self.int_tail_minus(0.0, h) - h * self.pibar_minus(h)
        )

    def signed_moment_below(self, h: float) -> float:
        """integral_{|y|<=h} y Pi(dy) (finite only for bounded-variation jumps)."""
        if h <= 0.0:
            return 0.0
        if not self.has_bv_jumps:
            raise DomainError("signed small-jump moment diverges for this family")
        return (
            self.int_tail_plus(0.0, h) - h * self.pibar_plus(h)
            - (self.int_tail_minus(0.0, h) - h * self.pibar_minus(h))
        )

    def mean_jump_outside_unit(self) -> float | None:
        """integral_{|x|>1} x Pi(dx), or None when it diverges."""
        if math.isinf(self.support_sup):
            return None
        up = self.support_sup + 1.0
        plus = self.pibar_plus(1.0) + self.int_tail_plus(1.0, up)
        minus = self.pibar_minus(1.0) + self.int_tail_minus(1.0, up)
        return plus - minus

    # -- characteristic-function integrals -------------------------------------
    def char_integral_bv(self, theta: float) -> complex:
        """integral (e^{i theta x} - 1) Pi(dx) via tails (bounded variation only)."""
        if not self.has_bv_jumps:
            raise DomainError("drift-form integral requires bounded-variation jumps")
        up = self.support_sup

        def one_side(sign, pibar, int_zero):
            t = sign * theta
            low = _cquad_weighted_low(
                pibar, int_zero, lambda y: np.exp(1j * t * y), 1.0, min(1.0, up)
            )
            high = 0.0 + 0.0j
            if up > 1.0:
                high = _cquad(lambda y: np.exp(1j * t * y) * pibar(y), 1.0, up)
            return 1j * t * (low + high)

        return one_side(+1, self.pibar_plus, lambda d: self.int_tail_plus(0.0, d)) + \
            one_side(-1, self.pibar_minus, lambda d: self.int_tail_minus(0.0, d))

    def char_integral_compensated(self, theta: float) -> complex:
        """integral (e^{i theta x} - 1 - i theta x 1_{|x|<=1}) Pi(dx) via tails."""
        up = self.support_sup

        def one_side(sign, pibar, int_zero):
            t = sign * theta
            head = 1j * t * pibar(1.0)
            low = _cquad_weighted_low(
                pibar, int_zero, lambda y: np.exp(1j * t * y) - 1.0, 0.0, min(1.0, up)
            )
            high = 0.0 + 0.0j
            if up > 1.0:
                high = _cquad(lambda y: np.exp(1j * t * y) * pibar(y), 1.0, up)
            return head + 1j * t * (low + high)

        return one_side(+1, self.pibar_plus, lambda d: self.int_tail_plus(0.0, d)) + \
            one_side(-1, self.pibar_minus, lambda d: self.int_tail_minus(0.0, d))

    # -- sampling --------------------------------------------------------------
    def sampling_tail_plus(self, h: float) -> float:
        return self.pibar_plus(h)

    def sampling_tail_minus(self, h: float) -> float:
        return self.pibar_minus(h)

    def inv_tail_plus(self, w: float) -> float:
        """Generalized inverse: largest x with pibar_plus(x) >= w."""
        raise NotImplementedError

    def inv_tail_minus(self, w: float) -> float:
        raise NotImplementedError

    def sample_sizes(self, rng: np.random.Generator, n: int, h: float) -> np.ndarray:
        """n i.i.d. signed jump sizes from Pi restricted to {|x| > h}."""
        lam_p = self.sampling_tail_plus(h)
        lam_m = self.sampling_tail_minus(h)
        lam = lam_p + lam_m
        if lam <= 0.0:
            raise DomainError(f"no jump mass above cutoff h={h}")
        w = rng.uniform(0.0, lam, size=n)
        out = np.empty(n)
        pos = w < lam_p
        for i in np.nonzero(pos)[0]:
            out[i] = self.inv_tail_plus(w[i])
        for i in np.nonzero(~pos)[0]:
            out[i] = -self.inv_tail_minus(w[i] - lam_p)
        return out

    def describe(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class NoJumps(JumpFamily):
    """Pi identically zero."""

    def pibar_plus(self, x):
        return 0.0

    def pibar_minus(self, x):
        return 0.0

    @property
    def total_mass(self):
        return 0.0

    @property
    def has_bv_jumps(self):
        return True

    @property
    def support_sup(self):
        return 0.0

    def int_tail_plus(self, a, b):
        return 0.0

    def int_tail_minus(self, a, b):
        return 0.0

    def int_y_tail(self, x):
        return 0.0

    def second_moment_below(self, x):
        return 0.0

    def mean_jump_outside_unit(self):
        return 0.0

    def char_integral_bv(self, theta):
        return 0.0 + 0.0j

    def char_integral_compensated(self, theta):
        return 0.0 + 0.0j

    def sample_sizes(self, rng, n, h):
        raise DomainError("the empty jump measure has no jumps to sample")

    def describe(self):
        return {"family": "none"}


@dataclass(frozen=True)
class ExponentialTails(JumpFamily):
    """pibar_plus(x) = lam_plus * exp(-alpha_plus * x), same shape on the
    negative side.  Finite activity, so it is a compound Poisson family."""

    lam_plus: float = 0.0
    alpha_plus: float = 1.0
    lam_minus: float = 0.0
    alpha_minus: float = 1.0

    def __post_init__(self):
        if self.lam_plus < 0 or self.lam_minus < 0:
            raise DomainError("jump rates must be nonnegative")
        if (self.lam_plus > 0 and self.alpha_plus <= 0) or (
            self.lam_minus > 0 and self.alpha_minus <= 0
        ):
            raise DomainError("tail decay parameters must be positive")

    def pibar_plus(self, x):
        return self.lam_plus * math.exp(-self.alpha_plus * x)

    def pibar_minus(self, x):
        return self.lam_minus * math.exp(-self.alpha_minus * x)

    @property
    def total_mass(self):
        return self.lam_plus + self.lam_minus

    @property
    def has_bv_jumps(self):
        return True

    @staticmethod
    def _int_exp(lam, alpha, a, b):
        if lam == 0.0 or a >= b:
            return 0.0
        if math.isinf(b):
            return lam / alpha * math.exp(-alpha * a)
        return lam / alpha * (math.exp(-alpha * a) - math.exp(-alpha * b))

    def int_tail_plus(self, a, b):
        return self._int_exp(self.lam_plus, self.alpha_plus, a, b)

    def int_tail_minus(self, a, b):
        return self._int_exp(self.lam_minus, self.alpha_minus, a, b)

    def int_y_tail(self, x):
        if x <= 0:
            return 0.0

        def side(lam, alpha):
            if lam == 0.0:
                return 0.0
            ax = alpha * x
            return lam / alpha**2 * (1.0 - math.exp(-ax) * (1.0 + ax))

        return side(self.lam_plus, self.alpha_plus) + side(self.lam_minus, self.alpha_minus)

    def second_moment_below(self, x):
        if x <= 0:
            return 0.0

        def side(lam, alpha):
            if lam == 0.0:
                return 0.0
            ax = alpha * x
            return (2.0 * lam / alpha**2) * (
                1.0 - math.exp(-ax) * (1.0 + ax + 0.5 * ax * ax)
            )

        return side(self.lam_plus, self.alpha_plus) + side(self.lam_minus, self.alpha_minus)

    def mean_jump_outside_unit(self):
        def side(lam, alpha):
            return lam * math.exp(-alpha) * (1.0 + 1.0 / alpha) if lam else 0.0

        return side(self.lam_plus, self.alpha_plus) - side(self.lam_minus, self.alpha_minus)

    def char_integral_bv(self, theta):
        out = 0.0 + 0.0j
        if self.lam_plus:
            out += 1j * theta * self.lam_plus / (self.alpha_plus - 1j * theta)
        if self.lam_minus:
            out += -1j * theta * self.lam_minus / (self.alpha_minus + 1j * theta)
        return out

    def char_integral_compensated(self, theta):
        return self.char_integral_bv(theta) - 1j * theta * self.signed_moment_below(1.0)

    def inv_tail_plus(self, w):
        return math.log(self.lam_plus / w) / self.alpha_plus

    def inv_tail_minus(self, w):
        return math.log(self.lam_minus / w) / self.alpha_minus

    def sample_sizes(self, rng, n, h):
        lam_p = self.pibar_plus(h)
        lam_m = self.pibar_minus(h)
        lam = lam_p + lam_m
        if lam <= 0.0:
            raise DomainError(f"no jump mass above cutoff h={h}")
        w = rng.uniform(0.0, lam, size=n)
        pos = w < lam_p
        out = np.empty(n)
        if lam_p:
            out[pos] = np.log(self.lam_plus / w[pos]) / self.alpha_plus
        if lam_m:
            out[~pos] = -np.log(self.lam_minus / (w[~pos] - lam_p)) / self.alpha_minus
        return out

    def describe(self):
        return {
            "family": "exponential_tails",
            "lam_plus": self.lam_plus,
            "alpha_plus": self.alpha_plus,
            "lam_minus": self.lam_minus,
            "alpha_minus": self.alpha_minus,
        }


@dataclass(frozen=True)
class ParetoTails(JumpFamily):
    """pibar_pm(x) = c_pm * x^{-beta_pm} on (0, x0], zero beyond.

    The cutoff puts an atom of mass c*x0^{-beta} at +-x0.  Requires beta < 2
    (square integrability near 0); bounded variation needs beta < 1.
    """

    c_plus: float = 0.0
    beta_plus: float = 0.5
    c_minus: float = 0.0
    beta_minus: float = 0.5
    x0: float = 1.0

    def __post_init__(self):
        if self.c_plus < 0 or self.c_minus < 0 or self.x0 <= 0:
            raise DomainError("pareto parameters out of range")
        for c, b in ((self.c_plus, self.beta_plus), (self.c_minus, self.beta_minus)):
            if c > 0 and not (0.0 < b < 2.0):
                raise DomainError("pareto tail index must lie in (0, 2)")

    def pibar_plus(self, x):
        if self.c_plus == 0.0 or x > self.x0:
            return 0.0
        return self.c_plus * x ** (-self.beta_plus)

    def pibar_minus(self, x):
        if self.c_minus == 0.0 or x > self.x0:
            return 0.0
        return self.c_minus * x ** (-self.beta_minus)

    @property
    def total_mass(self):
        return math.inf if (self.c_plus or self.c_minus) else 0.0

    @property
    def has_bv_jumps(self):
        ok_p = self.c_plus == 0.0 or self.beta_plus < 1.0
        ok_m = self.c_minus == 0.0 or self.beta_minus < 1.0
        return ok_p and ok_m

    @property
    def support_sup(self):
        return self.x0 if (self.c_plus or self.c_minus) else 0.0

    @staticmethod
    def _int_pow(c, beta, x0, a, b):
        if c == 0.0 or a >= b:
            return 0.0
        b = min(b, x0)
        if a >= b:
            return 0.0
        if a == 0.0 and beta >= 1.0:
            return math.inf
        if beta == 1.0:
            return c * math.log(b / a)
        return c * (b ** (1.0 - beta) - a ** (1.0 - beta)) / (1.0 - beta)

    def int_tail_plus(self, a, b):
        return self._int_pow(self.c_plus, self.beta_plus, self.x0, a, b)

    def int_tail_minus(self, a, b):
        return self._int_pow(self.c_minus, self.beta_minus, self.x0, a, b)

    def int_y_tail(self, x):
        def side(c, beta):
            if c == 0.0 or x <= 0.0:
                return 0.0
            top = min(x, self.x0)
            return c * top ** (2.0 - beta) / (2.0 - beta)

        return side(self.c_plus, self.beta_plus) + side(self.c_minus, self.beta_minus)

    def second_moment_below(self, x):
        def side(c, beta):
            if c == 0.0 or x <= 0.0:
                return 0.0
            top = min(x, self.x0)
            val = c * beta * top ** (2.0 - beta) / (2.0 - beta)
            if x >= self.x0:
                val += self.x0 ** 2 * c * self.x0 ** (-beta)  # cutoff atom
            return val

        return side(self.c_plus, self.beta_plus) + side(self.c_minus, self.beta_minus)

    def mean_jump_outside_unit(self):
        # tail form per side: pibar(1) + int_1^x0 pibar
        plus = 0.0
        if self.c_plus and self.x0 > 1.0:
            plus = self.c_plus + self._int_pow(self.c_plus, self.beta_plus, self.x0, 1.0, self.x0)
        minus = 0.0
        if self.c_minus and self.x0 > 1.0:
            minus = self.c_minus + self._int_pow(self.c_minus, self.beta_minus, self.x0, 1.0, self.x0)
        return plus - minus

    def inv_tail_plus(self, w):
        edge = self.c_plus * self.x0 ** (-self.beta_plus)
        if w <= edge:
            return self.x0
        return (self.c_plus / w) ** (1.0 / self.beta_plus)

    def inv_tail_minus(self, w):
        edge = self.c_minus * self.x0 ** (-self.beta_minus)
        if w <= edge:
            return self.x0
        return (self.c_minus / w) ** (1.0 / self.beta_minus)

    def describe(self):
        return {
            "family": "pareto_tails",
            "c_plus": self.c_plus,
            "beta_plus": self.beta_plus,
            "c_minus": self.c_minus,
            "beta_minus": self.beta_minus,
            "x0": self.x0,
        }


@dataclass(frozen=True)
class UnitRatePoissonNegative(JumpFamily):
    """Single atom at -1 with rate 1 (a rate-one Poisson stream of -1 jumps)."""

    def pibar_plus(self, x):
        return 0.0

    def pibar_minus(self, x):
        return 1.0 if x < 1.0 else 0.0

    @property
    def total_mass(self):
        return 1.0

    @property
    def has_bv_jumps(self):
        return True

    @property
    def support_sup(self):
        return 1.0

    def int_tail_plus(self, a, b):
        return 0.0

    def int_tail_minus(self, a, b):
        if a >= b:
            return 0.0
        return max(0.0, min(b, 1.0) - min(a, 1.0))

    def int_y_tail(self, x):
        t = min(x, 1.0)
        return 0.5 * t * t if x > 0 else 0.0

    def second_moment_below(self, x):
        return 1.0 if x >= 1.0 else 0.0

    def mean_jump_outside_unit(self):
        return 0.0

    def char_integral_bv(self, theta):
        # exact atom sum, no quadrature
        return complex(np.exp(-1j * theta) - 1.0)

    def char_integral_compensated(self, theta):
        return complex(np.exp(-1j * theta) - 1.0 + 1j * theta)

    def inv_tail_minus(self, w):
        return 1.0

    def sample_sizes(self, rng, n, h):
        if h >= 1.0:
            raise DomainError(f"no jump mass above cutoff h={h}")
        rng.uniform(0.0, 1.0, size=n)  # keep the draw pattern of the generic path
        return np.full(n, -1.0)

    def describe(self):
        return {"family": "unit_rate_poisson_negative"}


@dataclass(frozen=True)
class LogSquared(JumpFamily):
    """pibar_plus(x) = 1/(x log^2 x) for 0 < x < 1/e, zero beyond; no negative jumps.

    The formula is a genuine (strictly decreasing) tail only on (0, e^-2]; on
    (e^-2, 1/e) it rises, so the implied measure there is signed.  Analytic
    functionals use the formula literally; sampling draws from the monotone
    hull, which keeps the density on (0, e^-2] and places an atom of mass
    e^2/4 at 1/e.
    """

    def pibar_plus(self, x):
        if x >= _EINV:
            return 0.0
        lx = math.log(x)
        return 1.0 / (x * lx * lx)

    def pibar_minus(self, x):
        return 0.0

    @property
    def total_mass(self):
        return math.inf

    @property
    def has_bv_jumps(self):
        return True

    def int_tail_plus(self, a, b):
        if a >= b:
            return 0.0
        b = min(b, _EINV)
        if a >= b:
            return 0.0
        if a == 0.0:
            return -1.0 / math.log(b)  # antiderivative -1/log y has limit 0 at 0
        return -1.0 / math.log(b) + 1.0 / math.log(a)

    def int_tail_minus(self, a, b):
        return 0.0

    def int_y_tail(self, x):
        if x <= 0.0:
            return 0.0
        top = min(x, _EINV)
        u = -math.log(top)
        # integral_0^top dy/(log y)^2 = E2(u)/u with u = |log top|
        return float(expn(2, u)) / u

    def second_moment_below(self, x):
        if x <= 0.0:
            return 0.0
        top = min(x, _EINV)

        def dens_part(y):
            ly = math.log(y)
            return (ly + 2.0) / ly**3

        val = _quad(dens_part, 0.0, top, points=[_EINV2])
        if x >= _EINV:
            val += _EINV**2 * math.e  # cutoff atom: mass e at 1/e
        return val

    def mean_jump_outside_unit(self):
        return 0.0

    @property
    def support_sup(self):
        return _EINV

    def sampling_tail_plus(self, h):
        if h >= _EINV:
            return 0.0
        if h > _EINV2:
            return math.exp(2.0) / 4.0
        return self.pibar_plus(h)

    def inv_tail_plus(self, w):
        hull_edge = math.exp(2.0) / 4.0
        if w <= hull_edge:
            return _EINV
        # solve u^2 e^{-u} = 1/w on u >= 2 (strictly decreasing there)
        target = 1.0 / w
        g = lambda u: u * u * math.exp(-u) - target
        hi = 4.0
        while g(hi) > 0.0:
            hi *= 2.0
        u = brentq(g, 2.0, hi, xtol=1e-15, rtol=1e-15)
        return math.exp(-u)

    def describe(self):
        return {"family": "log_squared"}


@dataclass(frozen=True)
class TableTails(JumpFamily):
    """User-supplied monotone tail samples, log-log linearly interpolated.

    Between samples the tail is a power law; below the smallest x it is
    extrapolated with the first segment's slope, above the largest x it is
    zero (which places a cutoff atom there).  The small-x slope must exceed
    -2 so that the square-integrability requirement holds; this is validated
    on construction together with monotonicity.
    """

    xs_plus: tuple = ()
    ts_plus: tuple = ()
    xs_minus: tuple = ()
    ts_minus: tuple = ()
    assume_finite_mean: bool = True
    _grids: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        for xs, ts, lab in (
            (self.xs_plus, self.ts_plus, "plus"),
            (self.xs_minus, self.ts_minus, "minus"),
        ):
            xs = np.asarray(xs, float)
            ts = np.asarray(ts, float)
            if xs.size != ts.size:
                raise DomainError(f"table {lab}: x and tail sample counts differ")
            if xs.size:
                if xs.size < 2:
                    raise DomainError(f"table {lab}: need at least two samples")
                if np.any(xs <= 0) or np.any(ts <= 0):
                    raise DomainError(f"table {lab}: samples must be positive")
                if np.any(np.diff(xs) <= 0):
                    raise DomainError(f"table {lab}: x samples must increase")
                if np.any(np.diff(ts) > 0):
                    raise DomainError(f"table {lab}: tail samples must not increase")
                s0 = (math.log(ts[1]) - math.log(ts[0])) / (
                    math.log(xs[1]) - math.log(xs[0])
                )
                if s0 <= -2.0:
                    raise DomainError(
                        f"table {lab}: small-x slope {s0:.3f} <= -2 violates "
                        "square integrability near zero"
                    )
            self._grids[lab] = (xs, ts)
        # numerical spot check of int_0^1 y pibar(y) dy on a geometric grid
        ys = np.geomspace(1e-12, 1.0, 60)
        vals = np.array([y * self.pibar(y) for y in ys])
        if not np.all(np.isfinite(vals)):
            raise DomainError("table tails produce non-finite second-moment integrand")

    def _interp(self, lab, x):
        xs, ts = self._grids[lab]
        if xs.size == 0 or x <= 0:
            return 0.0
        if x > xs[-1]:
            return 0.0
        lx = math.log(x)
        lxs = np.log(xs)
        lts = np.log(ts)
        if x < xs[0]:
            s = (lts[1] - lts[0]) / (lxs[1] - lxs[0])
            return math.exp(lts[0] + s * (lx - lxs[0]))
        return math.exp(np.interp(lx, lxs, lts))

    def pibar_plus(self, x):
        return self._interp("plus", x)

    def pibar_minus(self, x):
        return self._interp("minus", x)

    @property
    def total_mass(self):
        m = 0.0
        for lab in ("plus", "minus"):
            xs, ts = self._grids[lab]
            if xs.size == 0:
                continue
            s0 = (math.log(ts[1]) - math.log(ts[0])) / (math.log(xs[1]) - math.log(xs[0]))
            if s0 < 0:
                return math.inf
            m += ts[0]
        return m

    @property
    def has_bv_jumps(self):
        for lab in ("plus", "minus"):
            xs, ts = self._grids[lab]
            if xs.size == 0:
                continue
            s0 = (math.log(ts[1]) - math.log(ts[0])) / (math.log(xs[1]) - math.log(xs[0]))
            if s0 <= -1.0:
                return False
        return True

    @property
    def support_sup(self):
        out = 0.0
        for lab in ("plus", "minus"):
            xs, _ = self._grids[lab]
            if xs.size:
                out = max(out, float(xs[-1]))
        return out

    @property
    def support_min(self) -> float:
        """Smallest sampled x over both sides (extrapolation is used below it)."""
        vals = [float(xs[0]) for xs in (self._grids["plus"][0], self._grids["minus"][0]) if len(xs)]
        return min(vals) if vals else 0.0

    def mean_jump_outside_unit(self):
        if not self.assume_finite_mean:
            return None
        return super().mean_jump_outside_unit()

    def _inv_side(self, lab, w):
        xs, ts = self._grids[lab]
        if xs.size == 0:
            raise DomainError(f"table {lab}: empty side cannot be sampled")
        if w <= ts[-1]:
            return float(xs[-1])  # cutoff atom
        if w >= ts[0]:
            # invert the extrapolated first segment
            s = (math.log(ts[1]) - math.log(ts[0])) / (math.log(xs[1]) - math.log(xs[0]))
            if s >= 0:
                return float(xs[0])
            return float(xs[0] * (w / ts[0]) ** (1.0 / s))
        k = int(np.searchsorted(-ts, -w, side="left"))
        k = max(1, min(k, len(xs) - 1))
        s = (math.log(ts[k]) - math.log(ts[k - 1])) / (math.log(xs[k]) - math.log(xs[k - 1]))
        if s == 0.0:
            return float(xs[k])
        return float(xs[k - 1] * (w / ts[k - 1]) ** (1.0 / s))

    def inv_tail_plus(self, w):
        return self._inv_side("plus", w)

    def inv_tail_minus(self, w):
        return self._inv_side("minus", w)

    def describe(self):
        return {
            "family": "table",
            "xs_plus": list(map(float, self.xs_plus)),
            "ts_plus": list(map(float, self.ts_plus)),
            "xs_minus": list(map(float, self.xs_minus)),
            "ts_minus": list(map(float, self.ts_minus)),
            "assume_finite_mean": self.assume_finite_mean,
        }


FAMILY_NAMES = {
    "none": NoJumps,
    "exponential_tails": ExponentialTails,
    "pareto_tails": ParetoTails,
    "unit_rate_poisson_negative": UnitRatePoissonNegative,
    "log_squared": LogSquared,
    "table": TableTails,
}
