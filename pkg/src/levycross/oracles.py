"""Closed-form and brute-force reference values for validating the solvers
and the Monte-Carlo harness.

Each oracle is a pure function that raises on inputs outside its stated
validity range rather than extrapolating silently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, RangeError, SizeError

MAX_SEQUENCES = 10_000_000


def drift_passage_exact(gamma: float, b: float, r: float) -> float:
    """Passage time of the pure-drift path gamma*t over r*t^b: (r/gamma)^{1/(1-b)}."""
    if not 0.0 <= b < 1.0:
        raise DomainError(f"requires 0 <= b < 1, got {b}")
    if gamma <= 0:
        raise DomainError(f"requires gamma > 0, got {gamma}")
    if r <= 0:
        raise DomainError(f"requires r > 0, got {r}")
    return (r / gamma) ** (1.0 / (1.0 - b))


def poisson_drift_truncated_moment(a: float, b: float, p: float, eps: float,
                                   r: float) -> float:
    """E (T* ^ eps)^p for the drift-a-minus-unit-Poisson path.

    Valid when eps < 1/a and (r/a)^{1/(1-b)} < eps, in which case
    E = C^p e^{-C} + eps^p (1 - e^{-C}) with C = (r/a)^{1/(1-b)}.
    """
    if a <= 0 or not 0.0 <= b < 1.0 or p <= 0 or eps <= 0 or r <= 0:
        raise DomainError("parameters out of range")
    c = (r / a) ** (1.0 / (1.0 - b))
    if not eps < 1.0 / a:
        raise RangeError(f"needs eps < 1/a, got eps={eps}, 1/a={1.0 / a}")
    if not c < eps:
        raise RangeError(f"needs (r/a)^(1/(1-b)) < eps, got {c} >= {eps}")
    return c**p * math.exp(-c) + eps**p * (1.0 - math.exp(-c))


def log_example_C(b: float, r: float) -> float:
    """C(r) = ((1-b)^-1 r |log r|)^{1/(1-b)} for the log-squared jump tail."""
    if not 0.0 <= b < 1.0:
        raise DomainError(f"requires 0 <= b < 1, got {b}")
    if not 0.0 < r < 1.0:
        raise DomainError(f"requires 0 < r < 1, got {r}")
    return ((r * abs(math.log(r))) / (1.0 - b)) ** (1.0 / (1.0 - b))


# ---------------------------------------------------------------------------
# brute-force random-walk skeleton
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RandomWalkSkeleton:
    """Discrete skeleton: i.i.d. increments on a small support, unit steps.

    Passage is the first step k with S_k > r * k^b (or |S_k| two-sided).
    Meant for exact cross-validation of harness plumbing: at most 20 steps
    and 4 support points.
    """

    values: tuple
    probs: tuple
    n_steps: int

    def __post_init__(self):
        if len(self.values) != len(self.probs) or not self.values:
            raise DomainError("values and probs must be nonempty and same length")
        if len(self.values) > 4:
            raise DomainError("at most 4 support points")
        if self.n_steps < 1 or self.n_steps > 20:
            raise DomainError("n_steps must lie in 1..20")
        if abs(sum(self.probs) - 1.0) > 1e-12 or any(p < 0 for p in self.probs):
            raise DomainError("probs must be a probability vector")


def brute_force_small_instance(skel: RandomWalkSkeleton, r: float, b: float,
                               sided: str = "one") -> dict:
    """Exact passage-time distribution over the skeleton by enumerating all
    increment sequences (with pruning at the first crossing)."""
    if sided not in ("one", "two"):
        raise DomainError("sided must be 'one' or 'two'")
    if r <= 0:
        raise DomainError("r must be positive")
    n_seq = len(skel.values) ** skel.n_steps
    if n_seq > MAX_SEQUENCES:
        raise SizeError(f"{n_seq} sequences exceed the supported {MAX_SEQUENCES}")

    prob_t = {k: 0.0 for k in range(1, skel.n_steps + 1)}
    censored = 0.0

    def crossed(s, k):
        bound = r * k**b
        return s > bound or (sided == "two" and -s > bound)

    stack = [(0, 0.0, 1.0)]
    while stack:
        k, s, pr = stack.pop()
        if k == skel.n_steps:
            censored += pr
            continue
        for v, pv in zip(skel.values, skel.probs):
            if pv == 0.0:
                continue
            s2 = s + v
            if crossed(s2, k + 1):
                prob_t[k + 1] += pr * pv
            else:
                stack.append((k + 1, s2, pr * pv))

    mean = sum(k * p for k, p in prob_t.items())
    total = sum(prob_t.values())
    return {
        "prob": prob_t,
        "censored": censored,
        "crossing_prob": total,
        "mean_given_crossing": (mean / total) if total > 0 else None,
    }


def walk_passage_mc(skel: RandomWalkSkeleton, r: float, b: float,
                    sided: str, n_paths: int, seed: int) -> dict:
    """Monte Carlo over the same skeleton, for enumeration cross-checks."""
    rng = np.random.default_rng(seed)
    vals = np.asarray(skel.values)
    idx = rng.choice(len(vals), size=(n_paths, skel.n_steps), p=np.asarray(skel.probs))
    s = np.cumsum(vals[idx], axis=1)
    ks = np.arange(1, skel.n_steps + 1, dtype=float)
    bound = r * ks**b
    hit = s > bound
    if sided == "two":
        hit |= -s > bound
    any_hit = hit.any(axis=1)
    first = np.where(any_hit, hit.argmax(axis=1) + 1, 0)
    counts = {k: float(np.sum(first == k)) / n_paths for k in range(1, skel.n_steps + 1)}
    return {"prob": counts, "censored": float(np.sum(~any_hit)) / n_paths}


ORACLES = {
    "drift_passage_exact": drift_passage_exact,
    "poisson_drift_truncated_moment": poisson_drift_truncated_moment,
    "log_example_C": log_example_C,
}
