"""Monte-Carlo estimation of the passage-time limit statements.

All sweeps draw one independent RNG stream per (boundary level, path index),
so results are bit-identical across reruns and across worker counts, and the
aggregation reduces full per-path arrays with numpy's pairwise summation.
Censored paths are excluded from ratio statistics but always counted.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import ContractError, DomainError
from .model import LevyModel
from .pathsim import (
    LARGE_TIME,
    SMALL_TIME,
    borrowed_rng,
    first_passage,
    passage_pair,
    sample_path,
)
from .stability import NormingPair, classify, solve_norming_B

DEFAULT_SEED = 20260810
DEFAULT_DELTAS = (0.1, 0.01)
CENSOR_WARN_FRACTION = 0.5

QUANTILE_LEVELS = (0.05, 0.25, 0.50, 0.75, 0.95)

CSV_WIDE_COLUMNS = [
    "r", "c_value", "horizon", "n_paths", "n_censored", "censor_warning",
    "mean_ratio", "stderr_ratio", "q05", "q25", "q50", "q75", "q95",
    "prob_dev_first", "prob_dev_second",
    "equality_fraction", "n_equality_indeterminate",
    "overshoot_mean", "overshoot_q95",
    "overshoot_mean_b_at_T", "overshoot_mean_b_at_C", "overshoot_mean_r_Cb",
    "moment_p", "moment_eps", "moment_value", "moment_stderr", "moment_ratio",
]


def default_r_grid(r_max: float = 1e-1, points: int = 8,
                   ratio: float = 10.0 ** -0.5) -> list[float]:
    """Geometric grid descending from r_max (default ratio 10^-1/2, 8 points)."""
    return [r_max * ratio**k for k in range(points)]


@dataclass
class RRow:
    """One aggregate row of an experiment, keyed by the boundary level r."""

    r: float
    c_value: float | None = None
    horizon: float | None = None
    n_paths: int = 0
    n_censored: int = 0
    censor_warning: bool = False
    mean_ratio: float | None = None
    stderr_ratio: float | None = None
    q05: float | None = None
    q25: float | None = None
    q50: float | None = None
    q75: float | None = None
    q95: float | None = None
    prob_dev: dict = field(default_factory=dict)
    equality_fraction: float | None = None
    n_equality_indeterminate: int | None = None
    overshoot_mean: float | None = None
    overshoot_q95: float | None = None
    overshoot_mean_b_at_T: float | None = None
    overshoot_mean_b_at_C: float | None = None
    overshoot_mean_r_Cb: float | None = None
    moment_p: float | None = None
    moment_eps: float | None = None
    moment_value: float | None = None
    moment_stderr: float | None = None
    moment_ratio: float | None = None


@dataclass
class ExperimentResult:
    """Aggregate Monte-Carlo table over an r-grid, with provenance."""

    kind: str
    regime: str
    sided: str
    b: float
    seed: int
    n_paths: int
    deltas: tuple
    model: dict
    model_fingerprint: str
    rows: list[RRow]
    config_echo: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["deltas"] = list(self.deltas)
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_csv_wide(self) -> str:
        """One row per r; column order fixed by CSV_WIDE_COLUMNS (see the
        shipped csv_schema.md)."""
        lines = [",".join(CSV_WIDE_COLUMNS)]
        d1, d2 = (list(self.deltas) + [None, None])[:2]
        for row in self.rows:
            vals = {
                "r": row.r, "c_value": row.c_value, "horizon": row.horizon,
                "n_paths": row.n_paths, "n_censored": row.n_censored,
                "censor_warning": int(row.censor_warning),
                "mean_ratio": row.mean_ratio, "stderr_ratio": row.stderr_ratio,
                "q05": row.q05, "q25": row.q25, "q50": row.q50,
                "q75": row.q75, "q95": row.q95,
                "prob_dev_first": row.prob_dev.get(d1),
                "prob_dev_second": row.prob_dev.get(d2),
                "equality_fraction": row.equality_fraction,
                "n_equality_indeterminate": row.n_equality_indeterminate,
                "overshoot_mean": row.overshoot_mean,
                "overshoot_q95": row.overshoot_q95,
                "overshoot_mean_b_at_T": row.overshoot_mean_b_at_T,
                "overshoot_mean_b_at_C": row.overshoot_mean_b_at_C,
                "overshoot_mean_r_Cb": row.overshoot_mean_r_Cb,
                "moment_p": row.moment_p, "moment_eps": row.moment_eps,
                "moment_value": row.moment_value,
                "moment_stderr": row.moment_stderr,
                "moment_ratio": row.moment_ratio,
            }
            lines.append(",".join(
                "" if vals[c] is None else repr(vals[c]) if isinstance(vals[c], float)
                else str(vals[c]) for c in CSV_WIDE_COLUMNS
            ))
        return "\n".join(lines) + "\n"

    def to_csv_long(self) -> str:
        """Plot-ready long format: r, statistic, value, lo, hi."""
        lines = ["r,statistic,value,lo,hi"]

        def put(r, name, value, stderr=None):
            if value is None:
                return
            lo = hi = ""
            if stderr is not None:
                lo = repr(value - 1.96 * stderr)
                hi = repr(value + 1.96 * stderr)
            lines.append(f"{r!r},{name},{value!r},{lo},{hi}")

        for row in self.rows:
            put(row.r, "c_value", row.c_value)
            put(row.r, "mean_ratio", row.mean_ratio, row.stderr_ratio)
            for q, v in zip(QUANTILE_LEVELS,
                            (row.q05, row.q25, row.q50, row.q75, row.q95)):
                put(row.r, f"q{int(q * 100):02d}", v)
            for dl, v in row.prob_dev.items():
                put(row.r, f"prob_dev_{dl}", v)
            put(row.r, "censor_fraction",
                row.n_censored / row.n_paths if row.n_paths else None)
            put(row.r, "equality_fraction", row.equality_fraction)
            put(row.r, "overshoot_mean", row.overshoot_mean)
            put(row.r, "overshoot_q95", row.overshoot_q95)
            put(row.r, "moment_value", row.moment_value, row.moment_stderr)
            put(row.r, "moment_ratio", row.moment_ratio)
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# internal driving loop
# ---------------------------------------------------------------------------

def _run_paths(work_one, n_paths: int, workers: int):
    """Apply work_one(i) for i in range(n_paths), optionally on threads.

    Each path owns its RNG stream, so the split cannot change any result."""
    if workers <= 1:
        for i in range(n_paths):
            work_one(i)
        return
    chunks = np.array_split(np.arange(n_paths), workers)

    def run_chunk(chunk):
        for i in chunk:
            work_one(int(i))

    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(run_chunk, chunks))


def _stream_base(r_index: int, n_paths: int) -> int:
    return r_index * n_paths


def _quantiles(x: np.ndarray):
    if x.size == 0:
        return (None,) * len(QUANTILE_LEVELS)
    qs = np.quantile(x, QUANTILE_LEVELS)
    return tuple(float(v) for v in qs)


def _mean_stderr(x: np.ndarray):
    if x.size == 0:
        return None, None
    mean = float(np.sum(x) / x.size)
    if x.size == 1:
        return mean, 0.0
    sd = float(np.sqrt(np.sum((x - mean) ** 2) / (x.size - 1)))
    return mean, sd / math.sqrt(x.size)


def _check_stability_gate(model, regime, sided, allow_unstable):
    if allow_unstable:
        return
    rep = classify(model, regime)
    ok = rep.class_in_probability == "PRS" or (
        rep.class_in_probability == "NRS" and sided == "two"
    )
    if not ok:
        raise ContractError(
            f"model classifies as {rep.class_in_probability!r} in {regime}; "
            "pass allow_unstable=True to sweep anyway"
        )


def make_horizon_rule(regime: str, factor: float = 10.0):
    """Default horizon: factor * C(r), floored at 2 in the large-time regime."""
    if regime == LARGE_TIME:
        return lambda r, c: max(factor * c, 2.0)
    return lambda r, c: factor * c


def passage_sweep(
    model: LevyModel,
    b: float,
    sided: str = "one",
    regime: str = SMALL_TIME,
    r_grid=None,
    n_paths: int = 100_000,
    seed: int = DEFAULT_SEED,
    horizon_rule=None,
    deltas=DEFAULT_DELTAS,
    cutoff_h: float = 0.0,
    c_func=None,
    pair: NormingPair | None = None,
    workers: int = 1,
    allow_unstable: bool = False,
    normalization: str = "c",
    collect_overshoot: bool = False,
    config_echo: dict | None = None,
) -> ExperimentResult:
    """Simulate n_paths first passages per boundary level and tabulate the
    normalized passage-time statistics.

    The normalizer C(r) comes from ``c_func`` when given, otherwise from the
    norming-pair inversion.  ``normalization='median'`` divides by the
    empirical median instead (the only meaningful normalization when no
    norming function exists, e.g. for b >= 1 demonstrations).
    """
    if r_grid is None:
        r_grid = default_r_grid()
    r_grid = [float(r) for r in r_grid]
    _check_stability_gate(model, regime, sided, allow_unstable)

    if normalization not in ("c", "median"):
        raise DomainError(f"unknown normalization {normalization!r}")
    if normalization == "c" and c_func is None and pair is None:
        pair = NormingPair.build(model, b, regime,
                                 r_lo=min(r_grid), r_hi=max(r_grid))

    def c_of(r):
        if normalization == "median":
            return None
        if c_func is not None:
            return float(c_func(r))
        return pair.C(r)

    if horizon_rule is None:
        horizon_rule = make_horizon_rule(regime)

    rows = []
    for ri, r in enumerate(r_grid):
        c_val = c_of(r)
        horizon = float(horizon_rule(r, c_val if c_val is not None else 1.0))
        base = _stream_base(ri, n_paths)

        times = np.full(n_paths, np.inf)
        poss = np.full(n_paths, np.nan)
        cens = np.zeros(n_paths, dtype=bool)

        def work_one(i):
            rng = borrowed_rng(seed, base + i)
            path = sample_path(model, rng, horizon, cutoff_h)
            rec = first_passage(path, r, b, sided, regime)
            if rec.censored:
                cens[i] = True
            else:
                times[i] = rec.passage_time
                poss[i] = rec.position

        _run_paths(work_one, n_paths, workers)

        keep = ~cens
        t_ok = times[keep]
        x_ok = poss[keep]
        n_cens = int(np.sum(cens))
        if normalization == "median":
            c_row = float(np.median(t_ok)) if t_ok.size else math.nan
        else:
            c_row = c_val
        ratios = t_ok / c_row if t_ok.size else t_ok
        mean, stderr = _mean_stderr(ratios)
        q = _quantiles(ratios)
        pdev = {
            float(d): (float(np.mean(np.abs(ratios - 1.0) > d)) if ratios.size else None)
            for d in deltas
        }
        row = RRow(
            r=r, c_value=c_row, horizon=horizon, n_paths=n_paths,
            n_censored=n_cens,
            censor_warning=n_cens > CENSOR_WARN_FRACTION * n_paths,
            mean_ratio=mean, stderr_ratio=stderr,
            q05=q[0], q25=q[1], q50=q[2], q75=q[3], q95=q[4],
            prob_dev=pdev,
        )
        if collect_overshoot and t_ok.size:
            over = x_ok / (r * t_ok**b)
            row.overshoot_mean = float(np.sum(over) / over.size)
            row.overshoot_q95 = float(np.quantile(over, 0.95))
            if pair is not None and normalization == "c":
                bt = pair.B_interp(t_ok)
                row.overshoot_mean_b_at_T = float(np.sum(x_ok / bt) / over.size)
                bc = pair.B(c_row)
                row.overshoot_mean_b_at_C = float(np.sum(x_ok / bc) / over.size)
            if c_row is not None and not math.isnan(c_row):
                row.overshoot_mean_r_Cb = float(
                    np.sum(x_ok / (r * c_row**b)) / over.size
                )
        rows.append(row)

    return ExperimentResult(
        kind="passage_sweep", regime=regime, sided=sided, b=float(b),
        seed=seed, n_paths=n_paths, deltas=tuple(float(d) for d in deltas),
        model=model.describe(), model_fingerprint=model.fingerprint(),
        rows=rows, config_echo=config_echo or {},
    )


def convergence_probe(result: ExperimentResult, delta: float) -> dict:
    """Per-r exceedance of |T/C - 1| > delta plus a monotone-trend verdict.

    The verdict is positive when the smallest-r exceedance is below 1%."""
    delta = float(delta)
    rows = sorted(result.rows, key=lambda row: -row.r)
    table = []
    for row in rows:
        p = row.prob_dev.get(delta)
        if p is None and row.mean_ratio is not None:
            raise DomainError(f"delta={delta} was not tabulated in the sweep")
        table.append({"r": row.r, "prob_dev": p})
    vals = [t["prob_dev"] for t in table if t["prob_dev"] is not None]
    n = result.n_paths
    slack = 3.0 / math.sqrt(max(n, 1))
    monotone = all(b2 <= b1 + slack for b1, b2 in zip(vals, vals[1:]))
    smallest = vals[-1] if vals else None
    consistent = smallest is not None and smallest < 0.01
    verdict = (
        "consistent with the ratio converging to 1 in probability"
        if consistent else "not consistent with convergence to 1 in probability"
    )
    return {
        "delta": delta,
        "per_r": table,
        "trend_monotone_decreasing": monotone,
        "smallest_r_prob_dev": smallest,
        "consistent": consistent,
        "verdict": verdict,
    }


def equality_prob(
    model: LevyModel,
    b: float,
    r_grid=None,
    n_paths: int = 100_000,
    seed: int = DEFAULT_SEED,
    regime: str = SMALL_TIME,
    horizon_rule=None,
    cutoff_h: float = 0.0,
    c_func=None,
    workers: int = 1,
    config_echo: dict | None = None,
) -> ExperimentResult:
    """Fraction of paths whose one- and two-sided passage times coincide
    (to 1e-12 relative).  Paths censored on both sides are indeterminate and
    excluded from the denominator."""
    if r_grid is None:
        r_grid = default_r_grid()
    r_grid = [float(r) for r in r_grid]
    rep = classify(model, regime)
    if rep.class_in_probability != "PRS":
        raise ContractError("equality probability is a PRS statement")
    if c_func is None:
        d = model.drift if regime == SMALL_TIME else model.mean_mu
        if d is not None and d > 0:
            c_func = lambda r: (r / d) ** (1.0 / (1.0 - b))
        else:
            local_pair = NormingPair.build(model, b, regime,
                                           r_lo=min(r_grid), r_hi=max(r_grid))
            c_func = local_pair.C
    if horizon_rule is None:
        horizon_rule = make_horizon_rule(regime)

    rows = []
    for ri, r in enumerate(r_grid):
        c_val = float(c_func(r))
        horizon = float(horizon_rule(r, c_val))
        base = _stream_base(ri, n_paths)
        flags = np.zeros(n_paths, dtype=np.int8)  # 1 equal, 0 unequal, -1 indeterminate

        def work_one(i):
            rng = borrowed_rng(seed, base + i)
            path = sample_path(model, rng, horizon, cutoff_h)
            one, _ = passage_pair(path, r, b, regime)
            if one.two_sided_equal is None:
                flags[i] = -1
            elif one.two_sided_equal:
                flags[i] = 1

        _run_paths(work_one, n_paths, workers)
        n_ind = int(np.sum(flags == -1))
        n_eq = int(np.sum(flags == 1))
        denom = n_paths - n_ind
        rows.append(RRow(
            r=r, c_value=c_val, horizon=horizon, n_paths=n_paths,
            n_censored=0,
            equality_fraction=(n_eq / denom) if denom else None,
            n_equality_indeterminate=n_ind,
        ))

    return ExperimentResult(
        kind="equality_prob", regime=regime, sided="both", b=float(b),
        seed=seed, n_paths=n_paths, deltas=tuple(),
        model=model.describe(), model_fingerprint=model.fingerprint(),
        rows=rows, config_echo=config_echo or {},
    )


def overshoot_stats(result: ExperimentResult) -> list[dict]:
    """Per-r overshoot summary extracted from a sweep that collected it."""
    out = []
    for row in result.rows:
        if row.overshoot_mean is None:
            raise DomainError("the sweep did not collect overshoot statistics")
        out.append({
            "r": row.r,
            "mean": row.overshoot_mean,
            "q95": row.overshoot_q95,
            "mean_b_at_T": row.overshoot_mean_b_at_T,
            "mean_b_at_C": row.overshoot_mean_b_at_C,
            "mean_r_Cb": row.overshoot_mean_r_Cb,
        })
    return out


def truncated_moment(
    model: LevyModel,
    b: float,
    p: float,
    eps: float,
    r_grid=None,
    n_paths: int = 100_000,
    seed: int = DEFAULT_SEED,
    horizon_rule=None,
    cutoff_h: float = 0.0,
    workers: int = 1,
    config_echo: dict | None = None,
) -> ExperimentResult:
    """Monte-Carlo E (T* ^ eps)^p per r (one-sided, small-time).

    The horizon never falls below eps, so a censored path contributes exactly
    eps^p and the truncated moment is computed without truncation bias."""
    if eps <= 0 or p <= 0:
        raise DomainError("need eps > 0 and p > 0")
    if not model.is_bounded_variation:
        raise ContractError("truncated moments are stated for bounded variation")
    if r_grid is None:
        r_grid = default_r_grid()
    r_grid = [float(r) for r in r_grid]

    d = model.drift
    c_func = (lambda r: (r / d) ** (1.0 / (1.0 - b))) if d and d > 0 else (lambda r: r)

    rows = []
    for ri, r in enumerate(r_grid):
        c_val = float(c_func(r))
        horizon = eps
        if horizon_rule is not None:
            horizon = float(horizon_rule(r, c_val))
            if horizon < eps:
                raise ContractError(
                    f"horizon {horizon} < eps {eps}: truncated moment would be biased"
                )
        base = _stream_base(ri, n_paths)
        vals = np.empty(n_paths)

        def work_one(i):
            rng = borrowed_rng(seed, base + i)
            path = sample_path(model, rng, horizon, cutoff_h)
            rec = first_passage(path, r, b, "one", SMALL_TIME)
            t_eff = eps if rec.censored else min(rec.passage_time, eps)
            vals[i] = t_eff**p

        _run_paths(work_one, n_paths, workers)
        mean, stderr = _mean_stderr(vals)
        rows.append(RRow(
            r=r, c_value=c_val, horizon=horizon, n_paths=n_paths,
            moment_p=float(p), moment_eps=float(eps),
            moment_value=mean, moment_stderr=stderr,
            moment_ratio=mean / c_val**p,
        ))

    return ExperimentResult(
        kind="truncated_moment", regime=SMALL_TIME, sided="one", b=float(b),
        seed=seed, n_paths=n_paths, deltas=tuple(),
        model=model.describe(), model_fingerprint=model.fingerprint(),
        rows=rows, config_echo=config_echo or {},
    )


# ---------------------------------------------------------------------------
# uniform path-convergence probe
# ---------------------------------------------------------------------------

def _sup_deviation_on_path(path, t, b, B_t, eta, lam_upper):
    """sup over lambda in [eta, lam_upper] of
    | lam^-b X_{lam t} / B(t) - lam^{1-b} |, exact on the affine skeleton."""
    best = 0.0
    x0, seg_start = 0.0, 0.0
    times = path.jump_times.tolist()
    sizes = path.jump_sizes.tolist()
    slope = path.drift_slope
    for k in range(len(times) + 1):
        seg_end = times[k] if k < len(times) else path.horizon
        lam1 = max(seg_start / t, eta)
        lam2 = min(seg_end / t, lam_upper)
        if lam1 < lam2:
            a = (x0 - slope * seg_start) / B_t
            c = slope * t / B_t - 1.0
            cands = [lam1, lam2]
            if b > 0.0 and c != 0.0:
                lam_star = a * b / (c * (1.0 - b)) if b != 1.0 else None
                if lam_star is not None and lam1 < lam_star < lam2:
                    cands.append(lam_star)
            for lam in cands:
                w = a * lam**-b + c * lam ** (1.0 - b) if b > 0 else a + c * lam
                best = max(best, abs(w))
        if k < len(times):
            x0 = x0 + slope * (seg_end - seg_start) + sizes[k]
            lam_j = seg_end / t
            if eta <= lam_j <= lam_upper:
                w = lam_j**-b * x0 / B_t - lam_j ** (1.0 - b)
                best = max(best, abs(w))
            seg_start = seg_end
        if seg_start / t > lam_upper:
            break
    return best


def skorohod_sup_probe(
    model: LevyModel,
    b: float,
    t_grid,
    n_paths: int = 10_000,
    seed: int = DEFAULT_SEED,
    eta: float = 0.1,
    lam_upper: float = 2.0,
    delta: float = 0.1,
    B_func=None,
    cutoff_h: float = 0.0,
    euler_steps: int | None = None,
    workers: int = 1,
) -> list[dict]:
    """Per-t fraction of paths whose normalized sup-deviation from the linear
    profile exceeds delta.

    For sigma2 > 0 this runs in diagnostic mode on a Euler grid (there is no
    valid norming function; pass B_func explicitly)."""
    if not 0 < eta <= lam_upper:
        raise DomainError("need 0 < eta <= lam_upper")
    gaussian = model.sigma2 > 0
    if gaussian and (B_func is None or euler_steps is None):
        raise DomainError(
            "sigma2 > 0 runs only in diagnostic mode: pass B_func and euler_steps"
        )
    if B_func is None:
        rep = classify(model, SMALL_TIME)
        if rep.class_in_probability not in ("PRS", "NRS"):
            raise ContractError("sup probe needs a relatively stable model or B_func")
        B_func = lambda t: solve_norming_B(model, t)

    out = []
    for ti, t in enumerate(t_grid):
        t = float(t)
        B_t = float(B_func(t))
        base = _stream_base(ti, n_paths)
        exceed = np.zeros(n_paths, dtype=bool)

        if gaussian:
            lam_grid = np.linspace(0.0, lam_upper, euler_steps + 1)
            mask = lam_grid >= eta
            lam_eval = lam_grid[mask]
            sig = math.sqrt(model.sigma2)

            def work_one(i):
                rng = borrowed_rng(seed, base + i)
                dw = rng.normal(0.0, math.sqrt(t * lam_upper / euler_steps),
                                size=euler_steps)
                w = np.concatenate([[0.0], np.cumsum(dw)])
                x = model.gamma * lam_grid * t + sig * w
                dev = np.abs(lam_eval**-b * x[mask] / B_t - lam_eval ** (1.0 - b))
                exceed[i] = bool(np.max(dev) > delta)
        else:
            def work_one(i):
                rng = borrowed_rng(seed, base + i)
                path = sample_path(model, rng, horizon=t * lam_upper,
                                   cutoff_h=cutoff_h)
                dev = _sup_deviation_on_path(path, t, b, B_t, eta, lam_upper)
                exceed[i] = dev > delta

        _run_paths(work_one, n_paths, workers)
        out.append({
            "t": t,
            "exceedance": float(np.sum(exceed) / n_paths),
            "delta": float(delta),
            "n_paths": n_paths,
        })
    return out
