"""Configuration-driven command line front end.

Subcommands tie the library into reproducible experiments whose JSON and CSV
artifacts are named by a hash of the canonicalized config, so re-running a
config byte-reproduces its artifacts and parameter tweaks never overwrite
older outputs.

Exit codes: 0 success, 2 config error, 3 solver or numerical error,
4 contract error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

from .errors import (
    ConfigError,
    ContractError,
    DomainError,
    LevycrossError,
    NumericalError,
    RangeError,
    SizeError,
    SolverError,
)
from .estimators import (
    DEFAULT_SEED,
    convergence_probe,
    default_r_grid,
    equality_prob,
    passage_sweep,
    truncated_moment,
)
from .model import model_from_entries
from .oracles import ORACLES, poisson_drift_truncated_moment
from .stability import LARGE_TIME, SMALL_TIME, NormingPair, classify, invert_C

OUT_ENV_VAR = "LEVYCROSS_OUT"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_CONTRACT = 4


# ---------------------------------------------------------------------------
# config handling
# ---------------------------------------------------------------------------

def parse_config_text(text: str) -> dict:
    """Flat ``key = value`` pairs, one per line, '#' comments, one dotted
    nesting level (``model.family`` etc.)."""
    entries: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", key=line, line=lineno)
        key, val = (s.strip() for s in line.split("=", 1))
        if not key or not val:
            raise ConfigError("empty key or value", key=key or line, line=lineno)
        entries[key] = (val, lineno)
    return entries


def _to_float(entries, key, default=None):
    if key not in entries:
        return default
    val, line = entries.pop(key)
    try:
        return float(val)
    except ValueError:
        raise ConfigError(f"not a number: {val!r}", key=key, line=line) from None


def _to_int(entries, key, default=None):
    if key not in entries:
        return default
    val, line = entries.pop(key)
    try:
        return int(float(val))
    except ValueError:
        raise ConfigError(f"not an integer: {val!r}", key=key, line=line) from None


def _to_str(entries, key, default=None, choices=None):
    if key not in entries:
        return default
    val, line = entries.pop(key)
    if choices and val not in choices:
        raise ConfigError(f"{val!r} not one of {sorted(choices)}", key=key, line=line)
    return val


def _to_float_list(entries, key, default=()):
    if key not in entries:
        return list(default)
    val, line = entries.pop(key)
    try:
        return [float(v) for v in val.split(",")]
    except ValueError:
        raise ConfigError(f"bad list value {val!r}", key=key, line=line) from None


class ExperimentConfig:
    """Validated experiment configuration with verbatim echo for provenance."""

    def __init__(self, entries: dict, overrides: dict | None = None):
        self.echo = {k: v for k, (v, _) in entries.items()}
        entries = dict(entries)
        overrides = overrides or {}

        model_entries = {
            k[len("model."):]: v for k, v in entries.items() if k.startswith("model.")
        }
        if not model_entries:
            raise ConfigError("missing model.* keys", key="model.family")
        for k in list(entries):
            if k.startswith("model."):
                entries.pop(k)
        self.model = model_from_entries(model_entries)

        self.b = _to_float(entries, "b", 0.0)
        self.regime = _to_str(entries, "regime", SMALL_TIME,
                              choices={SMALL_TIME, LARGE_TIME})
        self.sided = _to_str(entries, "sided", "one", choices={"one", "two"})
        r_min = _to_float(entries, "r_min")
        r_max = _to_float(entries, "r_max")
        r_points = _to_int(entries, "r_points", 8)
        if r_min is not None and r_max is not None:
            if not 0 < r_min <= r_max:
                raise ConfigError("need 0 < r_min <= r_max", key="r_min")
            if r_points < 1:
                raise ConfigError("r_points must be >= 1", key="r_points")
            if r_points == 1:
                self.r_grid = [r_max]
            else:
                ratio = (r_min / r_max) ** (1.0 / (r_points - 1))
                self.r_grid = [r_max * ratio**k for k in range(r_points)]
        else:
            self.r_grid = default_r_grid(points=r_points)
        self.n_paths = _to_int(entries, "n_paths", 100_000)
        self.seed = int(overrides.get("seed") or _to_int(entries, "seed", DEFAULT_SEED))
        self.workers = int(overrides.get("workers") or _to_int(entries, "workers", 1))
        self.deltas = tuple(_to_float_list(entries, "deltas", (0.1, 0.01)))
        self.eps_list = _to_float_list(entries, "eps_list", (0.5,))
        self.p_list = _to_float_list(entries, "p_list", (1.0,))
        self.cutoff_h = _to_float(entries, "cutoff_h", 0.0)
        self.horizon_factor = _to_float(entries, "horizon_factor", 10.0)
        self.allow_unstable = (_to_str(entries, "allow_unstable", "false")
                               .lower() in ("1", "true", "yes"))
        self.normalization = _to_str(entries, "normalization", "c",
                                     choices={"c", "median"})
        self.out_dir = overrides.get("out") or (
            entries.pop("out_dir", (None, None))[0]
        ) or os.environ.get(OUT_ENV_VAR) or "artifacts"
        if entries:
            key, (val, line) = next(iter(entries.items()))
            raise ConfigError(f"unknown key with value {val!r}", key=key, line=line)

    def config_hash(self) -> str:
        canon = dict(self.echo, _seed=self.seed, _workers=self.workers)
        blob = json.dumps(canon, sort_keys=True).encode()
        return hashlib.sha1(blob).hexdigest()[:12]

    def horizon_rule(self):
        factor = self.horizon_factor
        if self.regime == LARGE_TIME:
            return lambda r, c: max(factor * c, 2.0)
        return lambda r, c: factor * c


def _load_config(path, overrides) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", key=str(path)) from None
    return ExperimentConfig(parse_config_text(text), overrides)


# ---------------------------------------------------------------------------
# artifacts
# ---------------------------------------------------------------------------

def _write_artifacts(cfg: ExperimentConfig, subcommand: str, doc: dict,
                     csv_text: str | None) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{subcommand}-{cfg.config_hash()}"
    jpath = out / f"{stem}.json"
    jpath.write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n",
                     encoding="utf-8")
    if csv_text is not None:
        (out / f"{stem}.csv").write_text(csv_text, encoding="utf-8")
    return jpath


def _doc(cfg: ExperimentConfig, subcommand: str, payload: dict,
         checks: list | None = None) -> dict:
    return {
        "subcommand": subcommand,
        "config": cfg.echo,
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
        "checks": checks or [],
        "result": payload,
    }


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_classify(cfg: ExperimentConfig) -> int:
    rep = classify(cfg.model, cfg.regime)
    payload = rep.to_dict()
    path = _write_artifacts(cfg, "classify", _doc(cfg, "classify", payload), None)
    print(json.dumps(payload, sort_keys=True))
    print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


def _cmd_norming(cfg: ExperimentConfig) -> int:
    pair = NormingPair.build(cfg.model, cfg.b, cfg.regime,
                             r_lo=min(cfg.r_grid), r_hi=max(cfg.r_grid))
    c_grid = [[r, invert_C(pair, r)] for r in cfg.r_grid]
    payload = {
        "b": cfg.b,
        "regime": cfg.regime,
        "B_grid": [[float(t), float(v)] for t, v in zip(pair.t_grid, pair.B_grid)],
        "C_grid": c_grid,
        "classify": classify(cfg.model, cfg.regime).to_dict(),
    }
    csv_lines = ["r,statistic,value,lo,hi"]
    for r, c in c_grid:
        csv_lines.append(f"{r!r},c_value,{c!r},,")
    path = _write_artifacts(cfg, "norming", _doc(cfg, "norming", payload),
                            "\n".join(csv_lines) + "\n")
    print(json.dumps({"C_grid": c_grid}, sort_keys=True))
    print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


def _sweep(cfg: ExperimentConfig, collect_overshoot=False):
    return passage_sweep(
        cfg.model, cfg.b, cfg.sided, cfg.regime, cfg.r_grid,
        n_paths=cfg.n_paths, seed=cfg.seed, horizon_rule=cfg.horizon_rule(),
        deltas=cfg.deltas, cutoff_h=cfg.cutoff_h, workers=cfg.workers,
        allow_unstable=cfg.allow_unstable, normalization=cfg.normalization,
        collect_overshoot=collect_overshoot, config_echo=cfg.echo,
    )


def _cmd_simulate(cfg: ExperimentConfig) -> int:
    res = _sweep(cfg)
    path = _write_artifacts(cfg, "simulate", _doc(cfg, "simulate", res.to_dict()),
                            res.to_csv_long())
    print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


def _cmd_converge(cfg: ExperimentConfig) -> int:
    res = _sweep(cfg)
    probes = [convergence_probe(res, d) for d in cfg.deltas]
    flag = "STABLE-CONSISTENT" if probes[0]["consistent"] else "NOT-STABLE"
    payload = {"sweep": res.to_dict(), "probes": probes, "stability_flag": flag}
    path = _write_artifacts(cfg, "converge", _doc(cfg, "converge", payload),
                            res.to_csv_long())
    print(json.dumps({"stability_flag": flag,
                      "verdicts": [p["verdict"] for p in probes]}))
    print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


def _cmd_equality(cfg: ExperimentConfig) -> int:
    res = equality_prob(cfg.model, cfg.b, cfg.r_grid, n_paths=cfg.n_paths,
                        seed=cfg.seed, regime=cfg.regime,
                        horizon_rule=cfg.horizon_rule(), cutoff_h=cfg.cutoff_h,
                        workers=cfg.workers, config_echo=cfg.echo)
    path = _write_artifacts(cfg, "equality", _doc(cfg, "equality", res.to_dict()),
                            res.to_csv_long())
    print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


def _cmd_overshoot(cfg: ExperimentConfig) -> int:
    res = _sweep(cfg, collect_overshoot=True)
    path = _write_artifacts(cfg, "overshoot", _doc(cfg, "overshoot", res.to_dict()),
                            res.to_csv_long())
    print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


def _cmd_moments(cfg: ExperimentConfig) -> int:
    results = []
    checks = []
    fam = cfg.model.describe().get("family")
    drift = cfg.model.drift
    for eps in cfg.eps_list:
        for p in cfg.p_list:
            res = truncated_moment(cfg.model, cfg.b, p, eps, cfg.r_grid,
                                   n_paths=cfg.n_paths, seed=cfg.seed,
                                   cutoff_h=cfg.cutoff_h, workers=cfg.workers,
                                   config_echo=cfg.echo)
            results.append(res.to_dict())
            if fam == "unit_rate_poisson_negative" and drift and drift > 0:
                for row in res.rows:
                    try:
                        ref = poisson_drift_truncated_moment(drift, cfg.b, p, eps, row.r)
                    except RangeError:
                        continue
                    tol = 3.0 * (row.moment_stderr or 0.0)
                    checks.append({
                        "name": "truncated-moment-closed-form",
                        "r": row.r, "p": p, "eps": eps,
                        "value": row.moment_value, "target": ref,
                        "tol": tol,
                        "passed": abs(row.moment_value - ref) <= max(tol, 1e-15),
                    })
    payload = {"moments": results}
    csv_text = None
    if results:
        from .estimators import ExperimentResult, RRow  # local to rebuild CSV

        first = results[0]
        rows = [RRow(**row) for row in first["rows"]]
        res0 = ExperimentResult(**{**first, "rows": rows})
        csv_text = res0.to_csv_wide()
    path = _write_artifacts(cfg, "moments", _doc(cfg, "moments", payload, checks),
                            csv_text)
    n_fail = sum(1 for c in checks if not c["passed"])
    print(json.dumps({"n_checks": len(checks), "n_failed": n_fail}))
    print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK if n_fail == 0 else EXIT_NUMERICAL


def _cmd_oracle(args) -> int:
    name = args.name
    if name not in ORACLES:
        raise ConfigError(f"unknown oracle {name!r}; expected one of {sorted(ORACLES)}",
                          key="--name")
    params = {}
    for item in args.param or []:
        if "=" not in item:
            raise ConfigError("oracle params look like key=value", key=item)
        k, v = item.split("=", 1)
        try:
            params[k] = float(v)
        except ValueError:
            raise ConfigError(f"not a number: {v!r}", key=k) from None
    value = ORACLES[name](**params)
    doc = {"oracle": name, "params": params, "value": value}
    print(json.dumps(doc, sort_keys=True))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        blob = hashlib.sha1(json.dumps(doc, sort_keys=True).encode()).hexdigest()[:12]
        (out / f"oracle-{blob}.json").write_text(
            json.dumps(doc, sort_keys=True, indent=1) + "\n", encoding="utf-8")
    return EXIT_OK


def _cmd_report(args) -> int:
    root = Path(args.dir or os.environ.get(OUT_ENV_VAR, "artifacts"))
    if not root.is_dir():
        raise ConfigError(f"artifact directory {root} does not exist", key="--dir")
    rows = []
    n_failed = 0
    for jpath in sorted(root.glob("*.json")):
        try:
            doc = json.loads(jpath.read_text(encoding="utf-8"))
        except json.JSONDecodeError:
            continue
        sub = doc.get("subcommand", jpath.stem.split("-")[0])
        checks = doc.get("checks", [])
        failed = [c for c in checks if not c.get("passed", True)]
        n_failed += len(failed)
        summary = ""
        result = doc.get("result", {})
        if sub == "classify":
            summary = f"class={result.get('class')}"
        elif sub == "converge":
            summary = f"flag={result.get('stability_flag')}"
        elif sub == "moments":
            summary = f"checks={len(checks)} failed={len(failed)}"
        elif sub == "equality":
            rws = result.get("rows", [])
            if rws:
                summary = f"min_equality={min(r['equality_fraction'] for r in rws):.4f}"
        rows.append({
            "artifact": jpath.name,
            "claim": _CLAIM_BY_SUBCOMMAND.get(sub, sub),
            "n_checks": len(checks),
            "n_failed": len(failed),
            "summary": summary,
        })
    width = max((len(r["artifact"]) for r in rows), default=10)
    print(f"{'artifact':<{width}}  {'claim':<34} checks failed  summary")
    for r in rows:
        print(f"{r['artifact']:<{width}}  {r['claim']:<34} "
              f"{r['n_checks']:>6} {r['n_failed']:>6}  {r['summary']}")
    if n_failed:
        print(f"{n_failed} oracle comparison(s) exceeded tolerance", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


_CLAIM_BY_SUBCOMMAND = {
    "classify": "stability-classification",
    "norming": "norming-function-inversion",
    "simulate": "passage-ratio-distribution",
    "converge": "ratio-convergence-in-probability",
    "equality": "one-vs-two-sided-equality",
    "overshoot": "exit-position-ratio",
    "moments": "truncated-moment-limit",
    "oracle": "closed-form-reference",
}


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="levycross",
        description="First-passage experiments for Levy processes across "
                    "power-law boundaries",
    )
    sub = ap.add_subparsers(dest="subcommand", required=True)

    def add_config_cmd(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="experiment config file")
        p.add_argument("--seed", type=int, default=None, help="override seed")
        p.add_argument("--workers", type=int, default=None, help="worker count")
        p.add_argument("--out", default=None, help="output directory")
        return p

    add_config_cmd("classify", "stability classification report")
    add_config_cmd("norming", "norming-function grids B and C")
    add_config_cmd("simulate", "passage-time sweep over the r grid")
    add_config_cmd("converge", "sweep plus convergence-in-probability probe")
    add_config_cmd("equality", "one-sided vs two-sided equality fraction")
    add_config_cmd("overshoot", "sweep collecting exit-position ratios")
    add_config_cmd("moments", "truncated passage-time moments")

    po = sub.add_parser("oracle", help="evaluate a closed-form reference value")
    po.add_argument("--name", required=True)
    po.add_argument("--param", action="append", help="key=value (repeatable)")
    po.add_argument("--out", default=None)

    pr = sub.add_parser("report", help="collate artifacts into a summary table")
    pr.add_argument("--dir", default=None, help="artifact directory")
    return ap


_CMDS = {
    "classify": _cmd_classify,
    "norming": _cmd_norming,
    "simulate": _cmd_simulate,
    "converge": _cmd_converge,
    "equality": _cmd_equality,
    "overshoot": _cmd_overshoot,
    "moments": _cmd_moments,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.subcommand == "oracle":
            return _cmd_oracle(args)
        if args.subcommand == "report":
            return _cmd_report(args)
        overrides = {"seed": args.seed, "workers": args.workers, "out": args.out}
        cfg = _load_config(args.config, overrides)
        return _CMDS[args.subcommand](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ContractError,) as exc:
        print(f"contract error: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    except (SolverError, NumericalError, RangeError, SizeError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (DomainError, LevycrossError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONTRACT


if __name__ == "__main__":
    sys.exit(main())
