"""Selectors, instance generators, and the random facet recursion."""

import random
from fractions import Fraction
from statistics import mean

import pytest

from pivotlab.cube import g_table
from pivotlab.errors import GenerationFailed, RecursionBudgetExceeded
from pivotlab.lp import LinearProgram, Status, enumerate_vertices, phase_one
from pivotlab.rules import (
    Instance,
    InstanceSpec,
    PivotRuleSpec,
    Rule,
    gen_instance,
    klee_minty,
    random_bounded,
    random_facet_solve,
    select_entering,
    solve_simplex,
    unit_cube,
)

ALL_RULES = [PivotRuleSpec(kind) for kind in Rule]


def _tableau_with_reduced_costs():
    """An instance whose origin tableau has reduced costs (3, 5, -1) on its
    three lower-bound rows 3, 4, 5."""
    lp = LinearProgram.create(
        [3, 5, -1],
        [[1, 0, 0], [0, 1, 0], [0, 0, 1], [-1, 0, 0], [0, -1, 0], [0, 0, -1]],
        [1, 1, 1, 0, 0, 0],
    )
    t = phase_one(lp)
    rcs = t.reduced_costs()
    assert [rcs[r] for r in (3, 4, 5)] == [3, 5, -1]
    return t


def test_select_dantzig_argmax():
    t = _tableau_with_reduced_costs()
    assert select_entering(t, PivotRuleSpec(Rule.DANTZIG)) == 4


def test_select_bland_first_improving():
    t = _tableau_with_reduced_costs()
    assert select_entering(t, PivotRuleSpec(Rule.BLAND)) == 3


def test_select_random_edge_frequencies():
    t = _tableau_with_reduced_costs()
    hits = {3: 0, 4: 0}
    trials = 10_000
    for seed in range(trials):
        hits[select_entering(t, PivotRuleSpec(Rule.RANDOM_EDGE, seed=seed))] += 1
    for row in (3, 4):
        assert abs(hits[row] / trials - 0.5) < 0.02


def test_select_none_at_optimum():
    res = solve_simplex(unit_cube(2), PivotRuleSpec(Rule.DANTZIG))
    assert select_entering(res.tableau, PivotRuleSpec(Rule.BLAND)) is None


def test_select_rejects_random_facet():
    t = _tableau_with_reduced_costs()
    with pytest.raises(ValueError):
        select_entering(t, PivotRuleSpec(Rule.RANDOM_FACET))


# -- generators ----------------------------------------------------------------


def test_unit_cube_spec():
    lp = gen_instance(InstanceSpec(kind=Instance.UNIT_CUBE, d=2))
    assert lp.n == 4 and lp.d == 2
    res = solve_simplex(lp, PivotRuleSpec(Rule.DANTZIG))
    assert res.value == 2 and res.vertex == (1, 1)


def test_klee_minty_spec():
    lp = gen_instance(InstanceSpec(kind=Instance.KLEE_MINTY, d=3))
    assert lp.n == 6
    assert len(enumerate_vertices(lp)) == 8


def test_klee_minty_epsilon_must_be_unit_fraction():
    with pytest.raises(ValueError):
        klee_minty(3, Fraction(2, 5))


def test_random_bounded_rules_agree():
    lp = gen_instance(InstanceSpec(kind=Instance.RANDOM_BOUNDED, d=3, n=8, seed=1))
    values = {
        rule.kind: solve_simplex(lp, rule, seed=5).value for rule in ALL_RULES
    }
    assert len(set(values.values())) == 1


def test_random_bounded_is_bounded_and_feasible():
    for seed in range(10):
        lp = random_bounded(2, 6, seed=seed)
        vertices = enumerate_vertices(lp)
        assert vertices
        res = solve_simplex(lp, PivotRuleSpec(Rule.DANTZIG))
        assert res.status is Status.OPTIMAL


def test_generation_failure_budget():
    with pytest.raises(GenerationFailed):
        random_bounded(3, 4, seed=0, max_rounds=1)


# -- invariants ----------------------------------------------------------------


def test_cube_speed_every_rule():
    for d in (1, 2, 3, 6):
        lp = unit_cube(d)
        for rule in ALL_RULES:
            for seed in range(25):
                res = solve_simplex(lp, rule, seed=seed)
                assert res.pivots <= d and res.value == d


@pytest.mark.parametrize("d", range(2, 8))
def test_klee_minty_exponential_dantzig(d):
    res = solve_simplex(klee_minty(d), PivotRuleSpec(Rule.DANTZIG))
    assert res.pivots == 2**d - 1
    assert len(res.trace) == 2**d


def test_rule_agreement_on_random_instances():
    rng = random.Random(7)
    for _ in range(8):
        lp = random_bounded(3, 8, seed=rng.randrange(10**6))
        seeds = [rng.randrange(10**6) for _ in range(3)]
        values = {
            solve_simplex(lp, rule, seed=s).value
            for rule in ALL_RULES
            for s in seeds
        }
        assert len(values) == 1


# -- random facet ----------------------------------------------------------------


def test_random_facet_cube_d3():
    lp = unit_cube(3)
    for seed in range(30):
        res = random_facet_solve(lp, seed=seed)
        assert res.status is Status.OPTIMAL
        assert res.vertex == (1, 1, 1) and res.pivots <= 3


def test_random_facet_interval():
    lp = unit_cube(1)
    res = random_facet_solve(lp, seed=0)
    assert res.value == 1 and res.pivots == 1


def test_random_facet_km6_mean_below_recurrence():
    lp = klee_minty(6)
    table = g_table(6, 12).values
    bound = float(table[(6, 12)])
    pivots = [random_facet_solve(lp, seed=s).pivots for s in range(1000)]
    m = mean(pivots)
    sigma = (sum((p - m) ** 2 for p in pivots) / (len(pivots) - 1)) ** 0.5
    assert m + 3 * sigma / len(pivots) ** 0.5 <= bound


def test_random_facet_statistics_and_determinism():
    lp = klee_minty(5)
    a = random_facet_solve(lp, seed=11)
    b = random_facet_solve(lp, seed=11)
    assert a.trace == b.trace and a.stats == b.stats
    assert a.stats["calls"] >= 1 and a.stats["pivots"] == a.pivots
    assert a.stats["max_depth"] <= 5


def test_random_facet_variants_agree_on_value():
    lp = klee_minty(4)
    for seed in range(10):
        r1 = random_facet_solve(lp, seed=seed)
        r2 = random_facet_solve(lp, seed=seed, variant="step")
        assert r1.value == r2.value


def test_random_facet_unbounded():
    lp = LinearProgram.create([1, 0], [[-1, 0], [0, 1], [0, -1]], [0, 1, 0])
    res = random_facet_solve(lp, seed=0)
    assert res.status is Status.UNBOUNDED


def test_random_facet_budget():
    with pytest.raises(RecursionBudgetExceeded):
        random_facet_solve(klee_minty(6), seed=0, budget=1)


def test_random_facet_infeasible():
    lp = LinearProgram.create([1], [[1], [-1]], [-1, 0])
    res = random_facet_solve(lp, seed=0)
    assert res.status is Status.INFEASIBLE
    assert res.certificate is not None and res.certificate.verify(lp)
