"""Simple stochastic games: exact values, best responses, and a
random-facet solver over the maximizer's strategy cube.

Games are two-player zero-sum reachability games with coin-flip vertices
and two absorbing sinks.  Only stopping games are solved (every strategy
pair reaches a sink almost surely), which makes every linear system met
here nonsingular and the values unique rationals in [0, 1].

Fixing the minimizer turns the game into a one-player maximization whose
optimum is a linear program; fixing both players leaves an absorbing chain
solved by exact elimination.  The solver walks the maximizer's strategy
cube with the random-facet rule, comparing strategies by the total of the
min-best-response value vector (strictly improved by any improving switch)
with lexicographic tie-breaking.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .cube import CubeOrientation, random_facet_walk
from .errors import BudgetExceeded, SingularSystem
from .lp import LinearProgram, Status
from .rationals import fmt_rat


class Label(Enum):
    MAX = "max"
    MIN = "min"
    NEUTRAL = "neutral"
    SINK0 = "sink0"
    SINK1 = "sink1"


SINKS = (Label.SINK0, Label.SINK1)


@dataclass(frozen=True)
class SimpleStochasticGame:
    labels: tuple[Label, ...]
    out: tuple[tuple[int, int] | None, ...]
    start: int

    @property
    def n(self) -> int:
        return len(self.labels)

    def vertices_with(self, label: Label) -> list[int]:
        return [v for v in range(self.n) if self.labels[v] is label]

    def to_json(self) -> str:
        verts = []
        for v in range(self.n):
            entry = {"id": v, "label": self.labels[v].value}
            entry["out"] = list(self.out[v]) if self.out[v] is not None else []
            verts.append(entry)
        return json.dumps({"vertices": verts, "start": self.start})

    @classmethod
    def from_json(cls, text: str) -> "SimpleStochasticGame":
        data = json.loads(text)
        verts = sorted(data["vertices"], key=lambda e: e["id"])
        if [e["id"] for e in verts] != list(range(len(verts))):
            raise ValueError("vertex ids must be 0..n-1")
        labels = tuple(Label(e["label"]) for e in verts)
        out = tuple(
            tuple(e.get("out") or ()) or None for e in verts
        )
        out = tuple(o if o else None for o in out)
        return cls(labels=labels, out=out, start=data["start"])

    @classmethod
    def create(cls, labels, out, start) -> "SimpleStochasticGame":
        return cls(
            labels=tuple(Label(l) if not isinstance(l, Label) else l for l in labels),
            out=tuple(tuple(o) if o is not None else None for o in out),
            start=start,
        )


@dataclass(frozen=True)
class Defect:
    kind: str
    detail: str


def validate_game(g: SimpleStochasticGame) -> list[Defect]:
    """Structural checks plus the stopping property; defects, never raises."""
    defects: list[Defect] = []
    if not 0 <= g.start < g.n:
        defects.append(Defect("start", f"start vertex {g.start} does not exist"))
    for v in range(g.n):
        if g.labels[v] in SINKS:
            if g.out[v] is not None:
                defects.append(Defect("outdegree", f"sink {v} has out-edges"))
        else:
            o = g.out[v]
            if o is None or len(o) != 2:
                defects.append(
                    Defect("outdegree", f"vertex {v} must have exactly 2 out-edges")
                )
            elif any(not 0 <= w < g.n for w in o):
                defects.append(Defect("edge", f"vertex {v} points outside the game"))
    if defects:
        return defects
    for lbl in SINKS:
        if not g.vertices_with(lbl):
            defects.append(Defect("sinks", f"no {lbl.value} vertex"))
    # stopping: no set of non-sink vertices is closed under some strategy
    # pair, i.e. controlled vertices keep one edge inside and neutral keep
    # both.  Greedy removal of escapers finds the largest such trap.
    trapped = {v for v in range(g.n) if g.labels[v] not in SINKS}
    changed = True
    while changed:
        changed = False
        for v in sorted(trapped):
            a, b = g.out[v]
            if g.labels[v] is Label.NEUTRAL:
                stays = a in trapped and b in trapped
            else:
                stays = a in trapped or b in trapped
            if not stays:
                trapped.discard(v)
                changed = True
    if trapped:
        defects.append(
            Defect("stopping", f"sink-avoiding trap exists: {sorted(trapped)}")
        )
    return defects


def require_valid(g: SimpleStochasticGame) -> None:
    defects = validate_game(g)
    if defects:
        raise ValueError("invalid game: " + "; ".join(d.detail for d in defects))


# ---------------------------------------------------------------------------
# exact evaluation


def _solve_linear(matrix: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    """Exact Gaussian elimination with partial pivoting by nonzero."""
    n = len(matrix)
    m = [list(row) + [r] for row, r in zip(matrix, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            raise SingularSystem("strategy-pair chain is not absorbing")
        m[col], m[piv] = m[piv], m[col]
        inv = Fraction(1) / m[col][col]
        m[col] = [x * inv for x in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [m[r][n] for r in range(n)]


def evaluate_strategy_pair(
    g: SimpleStochasticGame,
    s_max: dict[int, int],
    s_min: dict[int, int],
) -> dict[int, Fraction]:
    """Exact absorption probabilities into the 1-sink under fixed strategies."""
    interior = [v for v in range(g.n) if g.labels[v] not in SINKS]
    index = {v: i for i, v in enumerate(interior)}

    def contrib(row, rhs, v, w, weight):
        if g.labels[w] is Label.SINK1:
            rhs[index[v]] += weight
        elif g.labels[w] is not Label.SINK0:
            row[index[w]] -= weight

    k = len(interior)
    matrix = [[Fraction(0)] * k for _ in range(k)]
    rhs = [Fraction(0)] * k
    for v in interior:
        matrix[index[v]][index[v]] = Fraction(1)
        a, b = g.out[v]
        if g.labels[v] is Label.MAX:
            w = g.out[v][s_max[v]]
            contrib(matrix[index[v]], rhs, v, w, Fraction(1))
        elif g.labels[v] is Label.MIN:
            w = g.out[v][s_min[v]]
            contrib(matrix[index[v]], rhs, v, w, Fraction(1))
        else:
            contrib(matrix[index[v]], rhs, v, a, Fraction(1, 2))
            contrib(matrix[index[v]], rhs, v, b, Fraction(1, 2))
    sol = _solve_linear(matrix, rhs)
    values: dict[int, Fraction] = {}
    for v in range(g.n):
        if g.labels[v] is Label.SINK1:
            values[v] = Fraction(1)
        elif g.labels[v] is Label.SINK0:
            values[v] = Fraction(0)
        else:
            values[v] = sol[index[v]]
    return values


def _lexicographic_strategy(g: SimpleStochasticGame, label: Label) -> dict[int, int]:
    return {v: 0 for v in g.vertices_with(label)}


def _best_response(
    g: SimpleStochasticGame,
    fixed: dict[int, int],
    player: Label,
) -> tuple[dict[int, int], dict[int, Fraction]]:
    """Howard policy iteration for `player` against the fixed opponent.

    Switches every strictly improving vertex each round; exact arithmetic
    makes each round a strict componentwise improvement, so it terminates.
    """
    opponent = Label.MIN if player is Label.MAX else Label.MAX
    strategy = _lexicographic_strategy(g, player)
    while True:
        if player is Label.MAX:
            values = evaluate_strategy_pair(g, strategy, fixed)
        else:
            values = evaluate_strategy_pair(g, fixed, strategy)
        switched = False
        for v in g.vertices_with(player):
            a, b = g.out[v]
            current = values[g.out[v][strategy[v]]]
            other = values[g.out[v][1 - strategy[v]]]
            improves = other > current if player is Label.MAX else other < current
            if improves:
                strategy[v] = 1 - strategy[v]
                switched = True
        if not switched:
            return strategy, values


def mdp_value_lp(g: SimpleStochasticGame, s_min: dict[int, int]) -> tuple[LinearProgram, list[int]]:
    """The maximizer's best-response MDP as an LP (minimize the total of a
    superharmonic vector); optimum equals the value vector.  Returns the
    program and the variable order."""
    interior = [v for v in range(g.n) if g.labels[v] not in SINKS]
    index = {v: i for i, v in enumerate(interior)}
    d = len(interior)

    def term(row, v, w, weight):
        # accumulate "value(w) >= ..." style contributions: returns constant part
        if g.labels[w] is Label.SINK1:
            return weight
        if g.labels[w] is Label.SINK0:
            return Fraction(0)
        row[index[w]] += weight
        return Fraction(0)

    A: list[list[Fraction]] = []
    b: list[Fraction] = []
    for v in interior:
        i = index[v]
        if g.labels[v] is Label.MAX:
            for w in g.out[v]:
                row = [Fraction(0)] * d
                row[i] -= 1
                const = term(row, v, w, Fraction(1))
                A.append(row)
                b.append(-const)
        else:
            row = [Fraction(0)] * d
            row[i] -= 1
            if g.labels[v] is Label.MIN:
                const = term(row, v, g.out[v][s_min[v]], Fraction(1))
            else:
                a_succ, b_succ = g.out[v]
                const = term(row, v, a_succ, Fraction(1, 2))
                const += term(row, v, b_succ, Fraction(1, 2))
            A.append(row)
            b.append(-const)
            A.append([-x for x in row])
            b.append(const)
    objective = [Fraction(-1)] * d  # maximize -sum(v) == minimize sum(v)
    return LinearProgram.create(objective, A, b), interior


def best_response_mdp(
    g: SimpleStochasticGame,
    s_min: dict[int, int],
    *,
    lp_check: bool = True,
) -> tuple[dict[int, int], dict[int, Fraction]]:
    """Optimal maximizer strategy against a fixed minimizer.

    Policy iteration produces the answer; the LP formulation must agree
    exactly and is recomputed as a cross-check unless disabled.
    """
    require_valid(g)
    strategy, values = _best_response(g, s_min, Label.MAX)
    if lp_check and g.vertices_with(Label.MAX):
        from .rules import PivotRuleSpec, Rule, solve_simplex

        lp, interior = mdp_value_lp(g, s_min)
        res = solve_simplex(lp, PivotRuleSpec(Rule.DANTZIG))
        if res.status is not Status.OPTIMAL:
            raise AssertionError(f"best-response LP came back {res.status}")
        for v, x in zip(interior, res.vertex):
            if x != values[v]:
                raise AssertionError(
                    f"LP and policy iteration disagree at vertex {v}: "
                    f"{fmt_rat(x)} vs {fmt_rat(values[v])}"
                )
    return strategy, values


def _apply_operator(g: SimpleStochasticGame, v: dict[int, Fraction]) -> dict[int, Fraction]:
    def read(w: int) -> Fraction:
        if g.labels[w] is Label.SINK1:
            return Fraction(1)
        if g.labels[w] is Label.SINK0:
            return Fraction(0)
        return v[w]

    out: dict[int, Fraction] = {}
    for u in range(g.n):
        lbl = g.labels[u]
        if lbl is Label.SINK1:
            out[u] = Fraction(1)
        elif lbl is Label.SINK0:
            out[u] = Fraction(0)
        else:
            a, b = (read(w) for w in g.out[u])
            if lbl is Label.MAX:
                out[u] = max(a, b)
            elif lbl is Label.MIN:
                out[u] = min(a, b)
            else:
                out[u] = (a + b) / 2
    return out


def value_iteration(
    g: SimpleStochasticGame,
    iterations: int | None = None,
    *,
    target_residual: Fraction | None = None,
    max_iterations: int = 20000,
) -> tuple[dict[int, Fraction], Fraction]:
    """Monotone fixpoint iteration from the zero vector.

    A twin chain descends from the all-ones vector; on a stopping game both
    chains converge to the unique fixpoint, so their componentwise gap is a
    genuine error bound.  Returns (ascending values, certified residual).
    """
    require_valid(g)
    lower = {v: Fraction(0) for v in range(g.n)}
    upper = {v: Fraction(1) for v in range(g.n)}
    residual = Fraction(1)
    done = 0
    while True:
        lower = _apply_operator(g, lower)
        upper = _apply_operator(g, upper)
        residual = max(upper[v] - lower[v] for v in range(g.n))
        done += 1
        if iterations is not None and done >= iterations:
            break
        if target_residual is not None and residual <= target_residual:
            break
        if done >= max_iterations:
            if target_residual is not None:
                raise BudgetExceeded(
                    f"residual {residual} above target after {done} iterations"
                )
            break
    return lower, residual


def optimality_defect(g: SimpleStochasticGame, values: dict[int, Fraction]) -> int | None:
    """First vertex whose local max/min/average equation fails, else None."""
    for v in range(g.n):
        lbl = g.labels[v]
        if lbl is Label.SINK1:
            ok = values[v] == 1
        elif lbl is Label.SINK0:
            ok = values[v] == 0
        else:
            a, b = (values[w] for w in g.out[v])
            if lbl is Label.MAX:
                ok = values[v] == max(a, b)
            elif lbl is Label.MIN:
                ok = values[v] == min(a, b)
            else:
                ok = values[v] == (a + b) / 2
        if not ok:
            return v
    return None


def policy_fixpoint(
    g: SimpleStochasticGame,
) -> tuple[dict[int, Fraction], dict[int, int], dict[int, int]]:
    """Strategy iteration on the full game: the maximizer switches all
    improving vertices against the minimizer's exact best response."""
    require_valid(g)
    s_max = _lexicographic_strategy(g, Label.MAX)
    while True:
        s_min, values = _best_response(g, s_max, Label.MIN)
        switched = False
        for v in g.vertices_with(Label.MAX):
            current = values[g.out[v][s_max[v]]]
            other = values[g.out[v][1 - s_max[v]]]
            if other > current:
                s_max[v] = 1 - s_max[v]
                switched = True
        if not switched:
            defect = optimality_defect(g, values)
            if defect is not None:
                raise AssertionError(f"fixpoint violates optimality at {defect}")
            return values, s_max, s_min


# ---------------------------------------------------------------------------
# the subexponential solver


def _swap_game(g: SimpleStochasticGame) -> SimpleStochasticGame:
    swap = {
        Label.MAX: Label.MIN,
        Label.MIN: Label.MAX,
        Label.SINK0: Label.SINK1,
        Label.SINK1: Label.SINK0,
        Label.NEUTRAL: Label.NEUTRAL,
    }
    return SimpleStochasticGame(
        labels=tuple(swap[l] for l in g.labels), out=g.out, start=g.start
    )


@dataclass(frozen=True)
class LudwigResult:
    values: dict[int, Fraction]
    s_max: dict[int, int]
    s_min: dict[int, int]
    facet_steps: dict


MAX_CUBE_DIM = 24


def ludwig_solve(
    g: SimpleStochasticGame,
    seed: int = 0,
    *,
    budget: int = 200_000,
    lp_check: bool = False,
    record_moves: bool = False,
) -> LudwigResult:
    """Random facet over the maximizer's strategy cube.

    Each visited strategy is scored by the minimizer's exact best response;
    the comparator is (sum of the value vector, strategy bits), under which
    every improving single switch is a strict step up.  When the minimizer
    owns more vertices the swapped game is solved and values complement.
    """
    require_valid(g)
    n_max = len(g.vertices_with(Label.MAX))
    n_min = len(g.vertices_with(Label.MIN))
    if n_min < n_max:  # walk the smaller strategy cube
        inner = ludwig_solve(
            _swap_game(g), seed,
            budget=budget, lp_check=lp_check, record_moves=record_moves,
        )
        return LudwigResult(
            values={v: 1 - x for v, x in inner.values.items()},
            s_max=inner.s_min,
            s_min=inner.s_max,
            facet_steps=inner.facet_steps,
        )
    cube_vertices = sorted(g.vertices_with(Label.MAX))
    k = len(cube_vertices)
    if k > MAX_CUBE_DIM:
        raise BudgetExceeded(f"strategy cube dimension {k} exceeds {MAX_CUBE_DIM}")

    cache: dict[int, tuple[Fraction, dict[int, Fraction], dict[int, int]]] = {}

    def strategy_of(bits: int) -> dict[int, int]:
        return {v: bits >> i & 1 for i, v in enumerate(cube_vertices)}

    def score(bits: int):
        if bits not in cache:
            if k == 0:
                s_min, values = _best_response(g, {}, Label.MIN)
            else:
                s_max = strategy_of(bits)
                if lp_check:
                    swapped = _swap_game(g)
                    s_min_sw, _ = best_response_mdp(swapped, s_max, lp_check=True)
                    s_min, values = _best_response(g, s_max, Label.MIN)
                    assert s_min_sw.keys() == s_min.keys()
                else:
                    s_min, values = _best_response(g, s_max, Label.MIN)
            cache[bits] = (sum(values.values()), values, s_min)
        return cache[bits]

    improvements = 0
    recorded: list[tuple[int, int]] = []

    def better(u_bits: int, v_bits: int) -> bool:
        su, sv = score(u_bits), score(v_bits)
        return (su[0], u_bits) > (sv[0], v_bits)

    def on_move(old: int, new: int):
        nonlocal improvements
        assert (score(new)[0], new) > (score(old)[0], old)
        improvements += 1
        if record_moves:
            recorded.append((old, new))

    if k == 0:
        _, values, s_min = score(0)
        defect = optimality_defect(g, values)
        if defect is not None:
            raise AssertionError(f"one-player solve violates optimality at {defect}")
        return LudwigResult(
            values=values,
            s_max={},
            s_min=s_min,
            facet_steps={
                "evaluations": 1,
                "moves": 0,
                "walk_steps": 0,
                "path_length": 1,
                "recorded_moves": (),
            },
        )

    rng = random.Random(seed)
    final_bits, steps, path = random_facet_walk(
        k, 0, better, rng, budget=budget, on_move=on_move
    )
    _, values, s_min = score(final_bits)
    defect = optimality_defect(g, values)
    if defect is not None:
        raise AssertionError(f"random facet stopped short of optimal ({defect})")
    return LudwigResult(
        values=values,
        s_max=strategy_of(final_bits),
        s_min=s_min,
        facet_steps={
            "evaluations": len(cache),
            "moves": improvements,
            "walk_steps": steps,
            "path_length": len(path),
            "recorded_moves": tuple(recorded) if record_moves else (),
        },
    )


def strategy_cube_orientation(g: SimpleStochasticGame) -> CubeOrientation:
    """Total order of all maximizer strategies by (value total, bits); the
    exhaustive companion to the lazy comparator in ludwig_solve."""
    require_valid(g)
    cube_vertices = sorted(g.vertices_with(Label.MAX))
    k = len(cube_vertices)
    if k > 12:
        raise BudgetExceeded("exhaustive strategy order is capped at 12 bits")
    keys = []
    for bits in range(1 << k):
        s_max = {v: bits >> i & 1 for i, v in enumerate(cube_vertices)}
        _, values = _best_response(g, s_max, Label.MIN)
        keys.append((sum(values.values()), bits))
    order = sorted(range(1 << k), key=lambda bits: keys[bits])
    rank = [0] * (1 << k)
    for pos, bits in enumerate(order):
        rank[bits] = pos
    return CubeOrientation(d=k, rank=tuple(rank))


# ---------------------------------------------------------------------------
# generator


def random_stopping_game(
    n: int, seed: int, *, max_rounds: int = 1000
) -> SimpleStochasticGame:
    """Random valid stopping game with n vertices (the last two are sinks)."""
    if n < 3:
        raise ValueError("need at least one interior vertex and two sinks")
    rng = random.Random(seed)
    interior = n - 2
    for _ in range(max_rounds):
        labels = [rng.choice([Label.MAX, Label.MIN, Label.NEUTRAL]) for _ in range(interior)]
        labels += [Label.SINK0, Label.SINK1]
        out = [
            (rng.randrange(n), rng.randrange(n)) for _ in range(interior)
        ] + [None, None]
        g = SimpleStochasticGame(labels=tuple(labels), out=tuple(out), start=0)
        if not validate_game(g):
            return g
    raise BudgetExceeded(f"no stopping game found in {max_rounds} rounds")
