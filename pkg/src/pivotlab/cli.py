"""Command-line experiment harness.

Every subcommand is a thin shell over the library; anything random takes a
--seed and reruns byte-identically.  Rationals print as "p/q".
"""

from __future__ import annotations

import json
import sys

import click

from .cube import (
    CubeOrientation,
    klee_minty_orientation,
    linear_orientation,
    recurrence_tables,
)
from .errors import PivotLabError
from .experiment import ExperimentConfig, run_experiment
from .haehnle import MonomialFamily, haehnle_search, haehnle_verify
from .rationals import fmt_rat
from .reconstruct import (
    PolytopeGraph,
    SimplePolytope,
    diameter_and_hirsch,
    enumerate_faces,
    reconstruct_faces,
)
from .ssg import SimpleStochasticGame, ludwig_solve, policy_fixpoint, value_iteration


def _fail(exc: BaseException) -> None:
    raise click.ClickException(f"{type(exc).__name__}: {exc}")


@click.group()
def main():
    """Exact-rational pivot rule laboratory."""


# -- lp ---------------------------------------------------------------------


@main.group()
def lp():
    """Linear programs and simplex pivot rules."""


@lp.command("solve")
@click.option("--instance", type=click.Choice(["cube", "km", "rand"]), required=True)
@click.option("--d", "dim", type=int, required=True)
@click.option("--n", type=int, default=0, help="rows for rand instances")
@click.option("--rule", type=click.Choice(["dantzig", "bland", "redge", "rfacet"]), required=True)
@click.option("--seed", type=int, default=0)
@click.option("--trials", type=int, default=1)
@click.option("--out", type=click.Path(), required=True)
@click.option("--approx", is_flag=True, help="add a float convenience column")
@click.option("--jobs", type=int, default=1)
def lp_solve(instance, dim, n, rule, seed, trials, out, approx, jobs):
    """Solve seeded instances and write a CSV report plus summary."""
    params = {"instance": instance, "d": dim}
    if instance == "rand":
        if n <= 0:
            raise click.ClickException("rand instances need --n")
        params["n"] = n
    cfg = ExperimentConfig(
        kind="lp", params=params, rule=rule, trials=trials, seed=seed,
        out=out, format="csv", jobs=jobs, approx=approx,
    )
    try:
        summaries = run_experiment(cfg)
    except PivotLabError as exc:
        _fail(exc)
    for s in summaries:
        click.echo(f"{s.group}: trials={s.count} mean_pivots={fmt_rat(s.mean)} "
                   f"min={s.minimum} max={s.maximum}")


# -- cube -------------------------------------------------------------------


@main.group()
def cube():
    """Orderings of the hypercube and abstract pivot rules."""


@cube.command("run")
@click.option("--d", "dim", type=int, required=True)
@click.option("--aof", type=click.Choice(["km", "linear", "file"]), default="km")
@click.option("--file", "path", type=click.Path(exists=True), help="orientation JSON when --aof file")
@click.option("--rule", type=click.Choice(["redge", "rfacet"]), required=True)
@click.option("--trials", type=int, default=1)
@click.option("--seed", type=int, default=0)
@click.option("--out", type=click.Path(), help="optional CSV report")
def cube_run(dim, aof, path, rule, trials, seed, out):
    """Run Random Edge / Random Facet on a cube ordering."""
    params = {"aof": aof, "d": dim}
    if aof == "file":
        if not path:
            raise click.ClickException("--aof file needs --file")
        params["file"] = path
    cfg = ExperimentConfig(
        kind="cube", params=params, rule=rule, trials=trials, seed=seed,
        out=out or "cube_run.csv", format="csv",
    )
    try:
        summaries = run_experiment(cfg)
    except PivotLabError as exc:
        _fail(exc)
    for s in summaries:
        click.echo(f"{s.group}: trials={s.count} mean_steps={fmt_rat(s.mean)} "
                   f"min={s.minimum} max={s.maximum}")


@cube.command("make")
@click.option("--d", "dim", type=int, required=True)
@click.option("--kind", type=click.Choice(["km", "linear"]), default="km")
@click.option("--out", type=click.Path(), required=True)
def cube_make(dim, kind, out):
    """Write an orientation file (JSON {"d": .., "rank": [..]})."""
    o = klee_minty_orientation(dim) if kind == "km" else linear_orientation(
        dim, [2**i + 1 for i in range(dim)]
    )
    with open(out, "w") as fh:
        fh.write(o.to_json())
    click.echo(f"wrote {out}")


# -- recurrences ------------------------------------------------------------


@main.group()
def rec():
    """Recurrence tables."""


@rec.command("table")
@click.option("--kind", type=click.Choice(["f", "g", "a", "b", "haehnle"]), required=True)
@click.option("--dmax", type=int, default=0)
@click.option("--nmax", type=int, required=True)
@click.option("--out", type=click.Path(), required=True)
def rec_table(kind, dmax, nmax, out):
    """Write exact recurrence values as CSV."""
    import csv as _csv

    try:
        table = recurrence_tables(kind, dmax, nmax)
    except (PivotLabError, ValueError) as exc:
        _fail(exc)
    rows = []
    if kind in ("f", "g", "haehnle"):
        t = table
        header = ["d", "n", "value"] + (["bound"] if t.bound else [])
        for (d, n), v in sorted(t.values.items()):
            row = [d, n, fmt_rat(v) if not isinstance(v, int) else v]
            if t.bound:
                row.append(t.bound.get((d, n), ""))
            rows.append(row)
    elif kind == "a":
        header = ["n", "value"]
        rows = [[n, v] for n, v in sorted(table.values.items())]
    else:
        exact, approx = table
        header = ["n", "value", "float"]
        for n in sorted(approx):
            rows.append([n, fmt_rat(exact.values[n]) if n in exact.values else "", repr(approx[n])])
    with open(out, "w", newline="") as fh:
        w = _csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    click.echo(f"wrote {len(rows)} rows to {out}")


# -- haehnle ----------------------------------------------------------------


@main.group()
def haehnle():
    """Monomial-family diameter abstraction."""


@haehnle.command("search")
@click.option("--d", "deg", type=int, required=True)
@click.option("--n", type=int, required=True)
def haehnle_search_cmd(deg, n):
    """Exhaustive maximum family count with witness."""
    try:
        t, witness = haehnle_search(deg, n)
    except PivotLabError as exc:
        _fail(exc)
    click.echo(f"max t = {t} (conjectured bound {deg * (n - 1) + 1})")
    for idx, fam in enumerate(witness.families):
        click.echo(f"  F{idx + 1}: {list(fam)}")


@haehnle.command("verify")
@click.option("--file", "path", type=click.Path(exists=True), required=True,
              help='JSON {"d":..,"n":..,"families":[[[e,..],..],..]}')
def haehnle_verify_cmd(path):
    """Check the gcd-divisibility condition for a family file."""
    with open(path) as fh:
        data = json.load(fh)
    fam = MonomialFamily(
        d=data["d"], n=data["n"],
        families=tuple(tuple(tuple(m) for m in f) for f in data["families"]),
    )
    violation = haehnle_verify(fam)
    if violation is None:
        click.echo(f"valid: t = {fam.t}")
    else:
        click.echo(f"violation: {violation}")
        sys.exit(1)


# -- reconstruct -------------------------------------------------------------


@main.command("reconstruct")
@click.option("--graph", "graph_path", type=click.Path(exists=True), required=True,
              help="edge list, one 'u v' per line, 0-indexed")
@click.option("--oracle", "oracle_path", type=click.Path(exists=True),
              help="vertex-facet incidence JSON to compare against")
@click.option("--budget", type=int, default=None, help="search node budget")
@click.option("--out", type=click.Path(), help="face lattice JSON output")
def reconstruct_cmd(graph_path, oracle_path, budget, out):
    """Recover the face lattice of a simple polytope from its graph."""
    with open(graph_path) as fh:
        g = PolytopeGraph.from_edge_list(fh.read())
    try:
        lattice, info = reconstruct_faces(g, node_budget=budget)
    except PivotLabError as exc:
        _fail(exc)
    click.echo(f"F = {lattice.total}, faces by dim = {lattice.counts()}, "
               f"min weight = {info['min_weight']}, orderings = {info['aof_count']}")
    report = diameter_and_hirsch(g)
    click.echo(f"graph diameter = {report.diameter}")
    if oracle_path:
        with open(oracle_path) as fh:
            p = SimplePolytope.from_json(fh.read())
        oracle = enumerate_faces(p)
        if oracle.by_dim == lattice.by_dim:
            click.echo("oracle: exact match")
        else:
            click.echo("oracle: MISMATCH")
            sys.exit(1)
    if out:
        with open(out, "w") as fh:
            fh.write(lattice.to_json())


# -- ssg ---------------------------------------------------------------------


@main.group()
def ssg():
    """Simple stochastic games."""


@ssg.command("solve")
@click.option("--game", "game_path", type=click.Path(exists=True), required=True)
@click.option("--method", type=click.Choice(["ludwig", "policy", "vi"]), default="ludwig")
@click.option("--seed", type=int, default=0)
@click.option("--iters", type=int, default=64, help="value iteration sweeps")
def ssg_solve(game_path, method, seed, iters):
    """Solve one game and print exact (or certified) vertex values."""
    with open(game_path) as fh:
        g = SimpleStochasticGame.from_json(fh.read())
    try:
        if method == "ludwig":
            r = ludwig_solve(g, seed=seed)
            values = r.values
            click.echo(f"facet stats: {r.facet_steps}")
        elif method == "policy":
            values, _, _ = policy_fixpoint(g)
        else:
            values, residual = value_iteration(g, iterations=iters)
            click.echo(f"certified residual: {fmt_rat(residual)}")
    except (PivotLabError, ValueError) as exc:
        _fail(exc)
    for v in range(g.n):
        marker = " (start)" if v == g.start else ""
        click.echo(f"value[{v}] = {fmt_rat(values[v])}{marker}")


# -- experiment ---------------------------------------------------------------


@main.group()
def experiment():
    """Config-driven batch runs."""


@experiment.command("run")
@click.option("--config", "config_path", type=click.Path(exists=True), required=True)
@click.option("--jobs", type=int, default=None, help="workers (PIVOTLAB_JOBS overrides)")
def experiment_run(config_path, jobs):
    """Run the experiment described by a JSON config file."""
    with open(config_path) as fh:
        cfg = ExperimentConfig.from_json(fh.read())
    if jobs is not None:
        cfg = ExperimentConfig(**{**json.loads(cfg.to_json()), "jobs": jobs})
    try:
        summaries = run_experiment(cfg)
    except (PivotLabError, OSError) as exc:
        _fail(exc)
    click.echo(f"wrote {cfg.out} (+summary); {len(summaries)} summary groups")


if __name__ == "__main__":
    main()
