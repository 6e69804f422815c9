"""Pivot rule selectors and instance generators.

Rules: Dantzig (largest reduced cost, lowest row on ties), Bland (lowest
improving row), Random Edge (uniform improving row), and the geometric
Random Facet recursion.  Instances: unit cube, Klee-Minty cube, and
rejection-sampled random bounded LPs with small integer entries.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from .errors import GenerationFailed, NoBlockingRow, RecursionBudgetExceeded, TooLarge
from .lp import (
    InfeasibleCertificate,
    LinearProgram,
    SolveResult,
    Status,
    Tableau,
    enumerate_vertices,
    invert,
    optimize,
    phase_one,
    pivot_step,
)
from .rationals import rat


class Rule(Enum):
    DANTZIG = "dantzig"
    BLAND = "bland"
    RANDOM_EDGE = "redge"
    RANDOM_FACET = "rfacet"


@dataclass(frozen=True)
class PivotRuleSpec:
    kind: Rule
    seed: int = 0

    @classmethod
    def parse(cls, name: str, seed: int = 0) -> "PivotRuleSpec":
        return cls(kind=Rule(name), seed=seed)


class Instance(Enum):
    UNIT_CUBE = "cube"
    KLEE_MINTY = "km"
    RANDOM_BOUNDED = "rand"


@dataclass(frozen=True)
class InstanceSpec:
    kind: Instance
    d: int
    n: int = 0
    epsilon: Fraction = Fraction(1, 3)
    seed: int = 0


def select_entering(t: Tableau, rule: PivotRuleSpec, rng: random.Random | None = None) -> int | None:
    """Entering row for one pivot, or None when the vertex is optimal."""
    rcs = t.reduced_costs()
    improving = sorted(r for r, rc in rcs.items() if rc > 0)
    if not improving:
        return None
    if rule.kind is Rule.DANTZIG:
        return max(improving, key=lambda r: (rcs[r], -r))
    if rule.kind is Rule.BLAND:
        return improving[0]
    if rule.kind is Rule.RANDOM_EDGE:
        if rng is None:
            rng = random.Random(rule.seed)
        return rng.choice(improving)
    raise ValueError(f"{rule.kind.value} is not a single-step selector")


# ---------------------------------------------------------------------------
# random facet


def random_facet_solve(
    lp: LinearProgram,
    start: Tableau | None = None,
    seed: int = 0,
    *,
    variant: str = "restart",
    budget: int = 1_000_000,
) -> SolveResult:
    """Recursive random-facet solve from `start` (phase one when omitted).

    A facet of the current face is a tight row not yet frozen; the chosen
    row stays tight throughout the subcall.  At one free dimension the rule
    walks straight to the top of the segment.  After a subcall returns,
    ``variant="restart"`` redraws a facet at the new vertex, while
    ``variant="step"`` first pivots along the unique improving edge leaving
    the exhausted facet.
    """
    if variant not in ("restart", "step"):
        raise ValueError(f"unknown variant {variant!r}")
    if start is None:
        outcome = phase_one(lp)
        if isinstance(outcome, InfeasibleCertificate):
            return SolveResult(status=Status.INFEASIBLE, certificate=outcome)
        start = outcome
    rng = random.Random(seed)
    stats = {"calls": 0, "max_depth": 0}
    trace = [start.vertex]
    start_pivots = start.pivot_count

    def descend(t: Tableau, frozen: frozenset[int], depth: int) -> Tableau:
        stats["calls"] += 1
        stats["max_depth"] = max(stats["max_depth"], depth)
        if stats["calls"] > budget or t.pivot_count - start_pivots > budget:
            raise RecursionBudgetExceeded(f"random facet budget {budget} exhausted")
        while True:
            rcs = t.reduced_costs()
            free = sorted(r for r in t.basis if r not in frozen)
            improving = [r for r in free if rcs[r] > 0]
            if not improving:
                return t
            if len(free) == 1:
                t = pivot_step(t, free[0])
                if t.vertex != trace[-1]:
                    trace.append(t.vertex)
                continue
            facet = rng.choice(free)
            t = descend(t, frozen | {facet}, depth + 1)
            if variant == "step":
                rcs = t.reduced_costs()
                if rcs.get(facet, 0) > 0:
                    t = pivot_step(t, facet)
                    if t.vertex != trace[-1]:
                        trace.append(t.vertex)

    try:
        final = descend(start, frozenset(), 0)
    except NoBlockingRow as exc:
        return SolveResult(
            status=Status.UNBOUNDED,
            unbounded_ray=tuple(exc.ray),
            trace=tuple(trace),
            stats=stats,
        )
    pivots = final.pivot_count - start_pivots
    stats["pivots"] = pivots
    return SolveResult(
        status=Status.OPTIMAL,
        vertex=final.vertex,
        value=final.objective_value(),
        trace=tuple(trace),
        pivots=pivots,
        tableau=final,
        stats=stats,
    )


def solve_simplex(
    lp: LinearProgram,
    rule: PivotRuleSpec,
    seed: int | None = None,
    *,
    anti_cycling: bool = True,
    max_pivots: int | None = None,
) -> SolveResult:
    """Two-phase solve under the given rule; deterministic per (lp, rule, seed)."""
    effective_seed = rule.seed if seed is None else seed
    if rule.kind is Rule.RANDOM_FACET:
        return random_facet_solve(lp, seed=effective_seed)
    outcome = phase_one(lp)
    if isinstance(outcome, InfeasibleCertificate):
        return SolveResult(status=Status.INFEASIBLE, certificate=outcome)
    rng = random.Random(effective_seed)
    return optimize(
        outcome,
        lambda t: select_entering(t, rule, rng),
        anti_cycling=anti_cycling,
        max_pivots=max_pivots,
    )


# ---------------------------------------------------------------------------
# instance generators


def unit_cube(d: int) -> LinearProgram:
    """Maximize x_1 + ... + x_d over 0 <= x_i <= 1 (rows: d uppers, d lowers)."""
    c = [1] * d
    A = []
    b = []
    for i in range(d):
        A.append([1 if j == i else 0 for j in range(d)])
        b.append(1)
    for i in range(d):
        A.append([-1 if j == i else 0 for j in range(d)])
        b.append(0)
    return LinearProgram.create(c, A, b)


def klee_minty(d: int, epsilon: Fraction = Fraction(1, 3)) -> LinearProgram:
    """Klee-Minty cube on which Dantzig's rule visits all 2^d vertices.

    Scaled form with base mu = 1/epsilon (an integer >= 3):

        maximize   sum_j mu^(d-j) x_j
        subject to 2*sum_{j<i} mu^(i-j) x_j + x_i <= mu^(2(i-1)),  x >= 0.

    The all-lower-bound starting vertex is the origin.
    """
    eps = rat(epsilon)
    if eps.numerator != 1 or eps.denominator < 3:
        raise ValueError("epsilon must be 1/mu for an integer mu >= 3")
    mu = eps.denominator
    c = [mu ** (d - j) for j in range(1, d + 1)]
    A = []
    b = []
    for i in range(1, d + 1):
        row = [2 * mu ** (i - j) if j < i else (1 if j == i else 0) for j in range(1, d + 1)]
        A.append(row)
        b.append(mu ** (2 * (i - 1)))
    for i in range(d):
        A.append([-1 if j == i else 0 for j in range(d)])
        b.append(0)
    return LinearProgram.create(c, A, b)


def _recession_ray(lp: LinearProgram) -> bool:
    """True iff {u : Au <= 0} contains a nonzero ray (region unbounded)."""
    from itertools import combinations

    from .lp import _null_direction

    d = lp.d
    if d == 1:
        return any(
            all(lp.A[i][0] * s <= 0 for i in range(lp.n)) for s in (1, -1)
        )
    # extreme rays lie in null spaces of (d-1)-subsets of rows
    for subset in combinations(range(lp.n), d - 1):
        u = _null_direction([list(lp.A[i]) for i in subset], d)
        if u is None:
            continue
        for cand in (u, [-x for x in u]):
            if all(sum(lp.A[i][j] * cand[j] for j in range(d)) <= 0 for i in range(lp.n)):
                return True
    return False


def random_bounded(d: int, n: int, seed: int, *, max_rounds: int = 1000) -> LinearProgram:
    """Random LP with integer entries in [-9, 9], rejected until the feasible
    region is bounded and has a vertex.  Checked by enumeration, not by the
    simplex driver, so the generator stays independent of what it tests."""
    rng = random.Random(seed)
    for _ in range(max_rounds):
        c = [rng.randint(-9, 9) for _ in range(d)]
        if all(x == 0 for x in c):
            continue
        A = [[rng.randint(-9, 9) for _ in range(d)] for _ in range(n)]
        b = [rng.randint(-9, 9) for _ in range(n)]
        lp = LinearProgram.create(c, A, b)
        try:
            vertices = enumerate_vertices(lp)
        except TooLarge:
            raise
        if not vertices:
            continue
        if _recession_ray(lp):
            continue
        return lp
    raise GenerationFailed(f"no bounded feasible instance in {max_rounds} rounds")


def gen_instance(spec: InstanceSpec) -> LinearProgram:
    if spec.kind is Instance.UNIT_CUBE:
        return unit_cube(spec.d)
    if spec.kind is Instance.KLEE_MINTY:
        return klee_minty(spec.d, spec.epsilon)
    if spec.kind is Instance.RANDOM_BOUNDED:
        return random_bounded(spec.d, spec.n, spec.seed)
    raise ValueError(f"unknown instance kind {spec.kind}")
