"""Exact event-driven simulation of bounded-variation paths and first passage
across the curved boundary r * t^b.

Paths are piecewise affine between jump epochs, so passage times are found by
checking each affine segment (plus the post-jump values) against the boundary
and bisecting inside the unique bracketing segment.  There is no time grid
and hence no discretization error in the passage times.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .errors import ContractError, DomainError
from .model import LevyModel, truncated_mean_nu

SMALL_TIME = "small_time"
LARGE_TIME = "large_time"

TIME_REL_TOL = 1e-12    # bisection tolerance on passage times
BOUNDARY_SLACK = 1e-14  # relative slack for boundary comparisons


def path_rng(seed: int, stream: int) -> np.random.Generator:
    """Counter-keyed generator: one independent stream per path index."""
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, stream & 0xFFFFFFFFFFFFFFFF],
                   dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


class _RngPool(threading.local):
    """Thread-local reusable generator; rekeying a Philox template yields the
    same stream as constructing it fresh, at a fraction of the cost."""

    def __init__(self):
        self.bg = np.random.Philox(key=np.zeros(2, dtype=np.uint64))
        self.gen = np.random.Generator(self.bg)


_RNG_POOL = _RngPool()


def borrowed_rng(seed: int, stream: int) -> np.random.Generator:
    """Same stream as path_rng(seed, stream), but reusing a thread-local
    generator object.  The returned generator is invalidated by the next
    borrowed_rng call on the same thread."""
    bg = _RNG_POOL.bg
    st = bg.state
    st["state"]["key"][0] = seed & 0xFFFFFFFFFFFFFFFF
    st["state"]["key"][1] = stream & 0xFFFFFFFFFFFFFFFF
    st["state"]["counter"][:] = 0
    st["buffer_pos"] = 4
    st["has_uint32"] = 0
    st["uinteger"] = 0
    bg.state = st
    return _RNG_POOL.gen


@dataclass(frozen=True)
class PathEvents:
    """One sampled path: drift slope plus finitely many jumps on (0, horizon].

    ``drift_slope`` is nu(cutoff_h), which equals the bounded-variation drift
    when no jumps fall below the cutoff.  ``small_jump_bias_bound`` is
    horizon * integral_{|x|<=h} |x| Pi(dx), the recorded budget for the
    dropped small-jump component.
    """

    drift_slope: float
    jump_times: np.ndarray
    jump_sizes: np.ndarray
    horizon: float
    cutoff_h: float
    small_jump_bias_bound: float

    def value_at_horizon(self) -> float:
        return self.drift_slope * self.horizon + float(np.sum(self.jump_sizes))

    def mirrored(self) -> "PathEvents":
        return replace(self, drift_slope=-self.drift_slope,
                       jump_sizes=-self.jump_sizes)


@dataclass(frozen=True)
class PassageRecord:
    """Outcome of one passage search on one path."""

    passage_time: float
    position: float
    boundary_value: float
    overshoot_ratio: float
    censored: bool
    crossed_by_jump: bool = False
    two_sided_equal: bool | None = None


@lru_cache(maxsize=512)
def _sampling_plan(model: LevyModel, cutoff_h: float):
    """(drift slope, jump rate above the cutoff, bias bound per unit horizon);
    validated once per (model, cutoff) and reused across paths."""
    if cutoff_h < 0:
        raise DomainError(f"cutoff_h must be nonnegative, got {cutoff_h}")
    if model.sigma2 > 0:
        raise ContractError("exact path sampling requires sigma2 = 0")
    j = model.jumps
    if j.total_mass == 0.0:
        return model.gamma, 0.0, 0.0
    if cutoff_h == 0.0:
        if math.isinf(j.total_mass):
            raise DomainError(
                "the jump measure has infinite activity; pass a cutoff_h > 0 "
                "with finite tail mass"
            )
        slope = model.drift
        if slope is None:
            raise ContractError("exact sampling needs bounded variation when cutoff_h = 0")
        return slope, j.total_mass, 0.0
    slope = truncated_mean_nu(model, cutoff_h)
    rate = j.sampling_tail_plus(cutoff_h) + j.sampling_tail_minus(cutoff_h)
    return slope, rate, j.abs_moment_below(cutoff_h)


def sample_path(
    model: LevyModel,
    rng: np.random.Generator,
    horizon: float,
    cutoff_h: float = 0.0,
) -> PathEvents:
    """Sample drift plus all jumps larger than ``cutoff_h`` on (0, horizon].

    Draw order is fixed (count, then sorted arrival times, then sizes), so a
    given (seed, stream) reproduces the path bit for bit.
    """
    if horizon <= 0:
        raise DomainError(f"horizon must be positive, got {horizon}")
    slope, rate, bias_rate = _sampling_plan(model, cutoff_h)
    bias = horizon * bias_rate
    if rate <= 0.0:
        return PathEvents(slope, _EMPTY, _EMPTY, horizon, cutoff_h, bias)

    count = int(rng.poisson(rate * horizon))
    if count == 0:
        return PathEvents(slope, _EMPTY, _EMPTY, horizon, cutoff_h, bias)
    times = np.sort(rng.uniform(0.0, horizon, size=count))
    sizes = model.jumps.sample_sizes(rng, count, cutoff_h)
    return PathEvents(slope, times, sizes, horizon, cutoff_h, bias)


_EMPTY = np.empty(0)


# ---------------------------------------------------------------------------
# passage detection
# ---------------------------------------------------------------------------

def _crossed(value: float, bound: float) -> bool:
    return value > bound + BOUNDARY_SLACK * max(abs(bound), abs(value), 1e-300)


def _bisect_segment(x0, slope, seg_start, r, b, lo, hi):
    """First root of x(t) - r t^b in (lo, hi] given x(lo) <= bound < x(hi).
    Returns the upper bisection end so the reported position clears the
    boundary."""
    for _ in range(200):
        if hi - lo <= TIME_REL_TOL * hi:
            break
        mid = 0.5 * (lo + hi)
        v = x0 + slope * (mid - seg_start)
        bound = r * mid**b
        av, ab_ = abs(v), abs(bound)
        if v > bound + BOUNDARY_SLACK * (av if av > ab_ else ab_):
            hi = mid
        else:
            lo = mid
    return hi


def _segment_crossing(x0, slope, seg_start, r, b, t_lo, t_hi):
    """Earliest crossing of the affine piece x(t) = x0 + slope (t - seg_start)
    above r t^b for t in (t_lo, t_hi]; None when the piece stays below.

    For b <= 1 the comparison is convex, so an interior crossing requires the
    right endpoint to clear the boundary.  For b > 1 it is concave and the
    interior maximum must be checked as well.
    """
    if not t_lo < t_hi:
        return None

    end_val = x0 + slope * (t_hi - seg_start)
    end_bound = r * t_hi**b
    if b <= 1.0:
        if not _crossed(end_val, end_bound):
            return None
        return _bisect_segment(x0, slope, seg_start, r, b, t_lo, t_hi)

    hi = None
    if _crossed(end_val, end_bound):
        hi = t_hi
    elif slope > 0.0:
        t_star = (slope / (r * b)) ** (1.0 / (b - 1.0))
        if t_lo < t_star < t_hi and _crossed(
            x0 + slope * (t_star - seg_start), r * t_star**b
        ):
            hi = t_star
    if hi is None:
        return None
    return _bisect_segment(x0, slope, seg_start, r, b, t_lo, hi)


def first_passage(
    path: PathEvents,
    r: float,
    b: float,
    sided: str = "one",
    regime: str = SMALL_TIME,
) -> PassageRecord:
    """First time the path (one-sided) or its absolute value (two-sided)
    strictly exceeds r * t^b, censored at the path horizon.

    The stability theory concerns 0 <= b < 1; larger b is accepted so the
    impossibility of stable passage on superlinear boundaries can be
    demonstrated.  In the large-time regime the infimum runs over t >= 1.
    """
    if r <= 0:
        raise DomainError(f"boundary level r must be positive, got {r}")
    if b < 0:
        raise DomainError(f"boundary exponent b must be nonnegative, got {b}")
    if sided not in ("one", "two"):
        raise DomainError(f"sided must be 'one' or 'two', got {sided!r}")
    if regime not in (SMALL_TIME, LARGE_TIME):
        raise DomainError(f"unknown regime {regime!r}")
    t_min = 1.0 if regime == LARGE_TIME else 0.0
    if regime == LARGE_TIME and path.horizon < 1.0:
        raise ContractError("large-time passage needs horizon >= 1")

    slope = path.drift_slope
    two = sided == "two"

    # immediate crossing at t = 0+: for b > 1 (or b = 1 with slope beyond r)
    # the boundary starts below any positive drift slope, so the infimum is 0.
    if t_min == 0.0:
        up0 = slope > 0.0 if b > 1.0 else (b == 1.0 and slope > r)
        dn0 = two and (slope < 0.0 if b > 1.0 else (b == 1.0 and -slope > r))
        if up0 or dn0:
            return PassageRecord(0.0, 0.0, 0.0, 1.0, censored=False)

    times = path.jump_times.tolist()
    sizes = path.jump_sizes.tolist()
    n = len(times)

    def record(t_hit, position, by_jump):
        bound = r * t_hit**b
        ratio = position / bound if bound > 0 else 1.0
        return PassageRecord(t_hit, position, bound, ratio,
                             censored=False, crossed_by_jump=by_jump)

    x0 = 0.0
    seg_start = 0.0
    for k in range(n + 1):
        seg_end = times[k] if k < n else path.horizon
        if seg_end > t_min:
            t_lo = max(seg_start, t_min)
            x_lo = x0 + slope * (t_lo - seg_start)
            bound_lo = r * t_lo**b
            # value check at the segment's effective start (t_min clamp)
            if t_lo > seg_start or (t_lo == t_min and t_min > 0.0):
                if _crossed(x_lo, bound_lo):
                    return record(t_lo, x_lo, False)
                if two and _crossed(-x_lo, bound_lo):
                    return record(t_lo, x_lo, False)
            hit_up = _segment_crossing(x0, slope, seg_start, r, b, t_lo, seg_end)
            hit_dn = (
                _segment_crossing(-x0, -slope, seg_start, r, b, t_lo, seg_end)
                if two else None
            )
            hits = [h for h in (hit_up, hit_dn) if h is not None]
            if hits:
                t_hit = min(hits)
                return record(t_hit, x0 + slope * (t_hit - seg_start), False)
        if k < n:
            x_jump = x0 + slope * (seg_end - seg_start) + sizes[k]
            if seg_end >= t_min:
                bound = r * seg_end**b
                if _crossed(x_jump, bound) or (two and _crossed(-x_jump, bound)):
                    return record(seg_end, x_jump, True)
            x0 = x_jump
            seg_start = seg_end

    return PassageRecord(math.inf, math.nan, math.nan, math.nan, censored=True)


def passage_pair(path: PathEvents, r: float, b: float,
                 regime: str = SMALL_TIME) -> tuple[PassageRecord, PassageRecord]:
    """One- and two-sided records on the same path, with the equality flag
    (times identical to 1e-12 relative) filled in on both."""
    one = first_passage(path, r, b, "one", regime)
    both = first_passage(path, r, b, "two", regime)
    if one.censored and both.censored:
        equal = None  # neither time observed before the horizon
    elif one.censored or both.censored:
        equal = False
    else:
        t1, t2 = one.passage_time, both.passage_time
        equal = abs(t1 - t2) <= 1e-12 * max(t1, t2, 1e-300)
    one = replace(one, two_sided_equal=equal)
    both = replace(both, two_sided_equal=equal)
    return one, both


def running_max_at(path: PathEvents, t: float, absolute: bool = False) -> float:
    """sup_{0<=s<=t} X_s (or of |X_s|), exact on the affine skeleton."""
    if t < 0 or t > path.horizon:
        raise DomainError("t outside the sampled horizon")
    best = 0.0
    x0, seg_start = 0.0, 0.0
    times = path.jump_times.tolist()
    sizes = path.jump_sizes.tolist()
    for k in range(len(times) + 1):
        seg_end = times[k] if k < len(times) else path.horizon
        upto = min(seg_end, t)
        if upto > seg_start:
            ends = (x0, x0 + path.drift_slope * (upto - seg_start))
            vals = [abs(v) for v in ends] if absolute else list(ends)
            best = max(best, *vals)
        if upto < seg_end or k >= len(times):
            break
        x0 = x0 + path.drift_slope * (seg_end - seg_start) + sizes[k]
        if seg_end <= t:
            best = max(best, abs(x0) if absolute else x0)
        seg_start = seg_end
    return best


def value_at(path: PathEvents, t: float) -> float:
    """X_t on the sampled path (right-continuous)."""
    if t < 0 or t > path.horizon:
        raise DomainError("t outside the sampled horizon")
    x0 = path.drift_slope * t
    if len(path.jump_times):
        x0 += float(np.sum(path.jump_sizes[path.jump_times <= t]))
    return x0


def dump_path_csv(path: PathEvents, fh, seed: int | None = None,
                  stream: int | None = None) -> None:
    """Write the jump skeleton as CSV with a metadata header line."""
    fh.write(
        f"# seed={seed},stream={stream},h={path.cutoff_h!r},"
        f"bias_bound={path.small_jump_bias_bound!r},"
        f"drift_slope={path.drift_slope!r},horizon={path.horizon!r}\n"
    )
    fh.write("time,size\n")
    for t, s in zip(path.jump_times, path.jump_sizes):
        fh.write(f"{float(t)!r},{float(s)!r}\n")
