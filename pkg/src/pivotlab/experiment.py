"""Seeded batch runs with exact, byte-reproducible reports.

Per-trial seeds derive from the master seed as mix64(master, index), so a
config file pins every random choice in the run.  Numeric report cells are
integers or "p/q" strings, never floats (pass approx=True for an extra
decimal convenience column).  Timestamps go to a sidecar log only: two runs
of one config produce byte-identical row and summary files.
"""

from __future__ import annotations

import csv
import io
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction

from .cube import CubeOrientation, klee_minty_orientation, linear_orientation, run_cube_rule
from .errors import PivotLabError
from .rationals import fmt_rat, mix64, parse_rat
from .rules import Instance, InstanceSpec, PivotRuleSpec, Rule, gen_instance, solve_simplex
from .ssg import SimpleStochasticGame, ludwig_solve, policy_fixpoint, value_iteration


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str  # "lp" | "cube" | "ssg"
    params: dict
    rule: str
    trials: int
    seed: int
    out: str
    format: str = "csv"
    jobs: int = 1
    approx: bool = False

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        data = json.loads(text)
        return cls(**data)


def _span(value) -> list[int]:
    """An int, or [lo, hi] inclusive, normalized to a list of ints."""
    if isinstance(value, int):
        return [value]
    lo, hi = value
    return list(range(lo, hi + 1))


# trial workers are module-level so process pools can pickle them


def _lp_trial(args) -> tuple:
    params, rule_name, d, trial_seed = args
    kind = Instance(params["instance"])
    if kind is Instance.RANDOM_BOUNDED:
        spec = InstanceSpec(kind=kind, d=d, n=params["n"], seed=mix64(trial_seed, 0))
        rule_seed = mix64(trial_seed, 1)
    else:
        spec = InstanceSpec(kind=kind, d=d, n=params.get("n", 0))
        rule_seed = trial_seed
    lp = gen_instance(spec)
    res = solve_simplex(lp, PivotRuleSpec.parse(rule_name), rule_seed)
    value = fmt_rat(res.value) if res.value is not None else ""
    return (params["instance"], d, lp.n, rule_name, trial_seed, res.status.value, value, res.pivots)


def _cube_trial(args) -> tuple:
    params, rule_name, d, trial_seed = args
    aof = params["aof"]
    if aof == "km":
        o = klee_minty_orientation(d)
    elif aof == "linear":
        o = linear_orientation(d, [2**i + 1 for i in range(d)])
    else:
        with open(params["file"]) as fh:
            o = CubeOrientation.from_json(fh.read())
    steps, _ = run_cube_rule(o, rule_name, seed=trial_seed)
    return (aof, d, rule_name, trial_seed, steps)


def _ssg_trial(args) -> tuple:
    params, method, _d, trial_seed = args
    with open(params["game"]) as fh:
        g = SimpleStochasticGame.from_json(fh.read())
    if method == "ludwig":
        r = ludwig_solve(g, seed=trial_seed)
        return (params["game"], method, trial_seed, fmt_rat(r.values[g.start]),
                r.facet_steps["evaluations"])
    if method == "policy":
        values, _, _ = policy_fixpoint(g)
        return (params["game"], method, trial_seed, fmt_rat(values[g.start]), 0)
    if method == "vi":
        values, residual = value_iteration(g, iterations=params.get("iters", 64))
        return (params["game"], method, trial_seed, fmt_rat(values[g.start]),
                params.get("iters", 64))
    raise PivotLabError(f"unknown ssg method {method!r}")


_KINDS = {
    "lp": (_lp_trial, ("instance", "d", "n", "rule", "seed", "status", "value", "pivots"), 7),
    "cube": (_cube_trial, ("aof", "d", "rule", "seed", "steps"), 4),
    "ssg": (_ssg_trial, ("game", "method", "seed", "value", "work"), 4),
}


@dataclass
class Summary:
    group: tuple
    count: int
    mean: Fraction
    minimum: int
    maximum: int
    variance: Fraction


def _summarize(rows: list[tuple], count_col: int, group_cols: tuple[int, ...]) -> list[Summary]:
    groups: dict[tuple, list[int]] = {}
    order: list[tuple] = []
    for row in rows:
        key = tuple(row[i] for i in group_cols)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(row[count_col])
    out = []
    for key in order:
        xs = groups[key]
        n = len(xs)
        mean = Fraction(sum(xs), n)
        if n > 1:
            var = sum((x - mean) ** 2 for x in xs) / (n - 1)
        else:
            var = Fraction(0)
        out.append(Summary(group=key, count=n, mean=mean,
                           minimum=min(xs), maximum=max(xs), variance=var))
    return out


def run_experiment(cfg: ExperimentConfig) -> list[Summary]:
    """Execute all trials, write row + summary files, return the summaries."""
    if cfg.kind not in _KINDS:
        raise PivotLabError(f"unknown experiment kind {cfg.kind!r}")
    worker, header, count_col = _KINDS[cfg.kind]
    dims = _span(cfg.params.get("d", 0))
    tasks = []
    index = 0
    for d in dims:
        for _ in range(cfg.trials):
            tasks.append((cfg.params, cfg.rule, d, mix64(cfg.seed, index)))
            index += 1
    jobs = int(os.environ.get("PIVOTLAB_JOBS", cfg.jobs))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(worker, tasks))
    else:
        rows = [worker(t) for t in tasks]

    group_cols = tuple(i for i in range(len(header)) if header[i] not in ("seed", "status", "value", "pivots", "steps", "work"))
    summaries = _summarize(rows, count_col, group_cols)

    written: list[str] = []
    try:
        _write_rows(cfg, header, rows, written)
        _write_summary(cfg, header, group_cols, summaries, written)
    except BaseException:
        for path in written:
            if os.path.exists(path):
                os.remove(path)
        raise
    with open(cfg.out + ".log", "w") as fh:
        fh.write(f"finished {time.strftime('%Y-%m-%dT%H:%M:%S')} rows={len(rows)}\n")
    return summaries


def _approx_cell(cell) -> str:
    if isinstance(cell, str) and cell:
        try:
            return repr(float(parse_rat(cell)))
        except ValueError:
            return ""
    return ""


def _write_rows(cfg: ExperimentConfig, header, rows, written: list[str]) -> None:
    add_approx = cfg.approx and "value" in header
    if cfg.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(header) + (["value_approx"] if add_approx else []))
        for row in rows:
            out = list(row)
            if add_approx:
                out.append(_approx_cell(row[header.index("value")]))
            w.writerow(out)
        payload = buf.getvalue()
    else:
        payload = json.dumps([dict(zip(header, row)) for row in rows], sort_keys=True)
    with open(cfg.out, "w", newline="") as fh:
        fh.write(payload)
    written.append(cfg.out)


def _write_summary(cfg: ExperimentConfig, header, group_cols, summaries, written: list[str]) -> None:
    path = cfg.out + (".summary.csv" if cfg.format == "csv" else ".summary.json")
    names = [header[i] for i in group_cols]
    if cfg.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(names + ["count", "mean", "min", "max", "variance"])
        for s in summaries:
            w.writerow(list(s.group) + [s.count, fmt_rat(s.mean), s.minimum, s.maximum, fmt_rat(s.variance)])
        payload = buf.getvalue()
    else:
        payload = json.dumps(
            [
                dict(zip(names, s.group))
                | {
                    "count": s.count,
                    "mean": fmt_rat(s.mean),
                    "min": s.minimum,
                    "max": s.maximum,
                    "variance": fmt_rat(s.variance),
                }
                for s in summaries
            ],
            sort_keys=True,
        )
    with open(path, "w", newline="") as fh:
        fh.write(payload)
    written.append(path)
