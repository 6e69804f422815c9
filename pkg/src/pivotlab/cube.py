"""Orderings of the d-cube's vertices, abstract rule runners, recurrences.

A cube vertex is an integer bitmask; an orientation assigns each vertex its
position in a total order (``rank``), edges pointing toward higher rank.
The ordering is an abstract objective function when every subcube has a
unique local maximum, which is what linear objectives produce and what the
local-search rules here rely on.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from math import ceil, comb, log2

from .errors import NotAnAOF, RecursionBudgetExceeded
from .rationals import rat
from .rules import klee_minty


@dataclass(frozen=True)
class CubeOrientation:
    d: int
    rank: tuple[int, ...]

    def __post_init__(self):
        if len(self.rank) != 1 << self.d or sorted(self.rank) != list(range(1 << self.d)):
            raise ValueError("rank must be a permutation of 0..2^d-1")

    @property
    def top(self) -> int:
        return self.rank.index((1 << self.d) - 1)

    @property
    def bottom(self) -> int:
        return self.rank.index(0)

    def to_json(self) -> str:
        return json.dumps({"d": self.d, "rank": list(self.rank)})

    @classmethod
    def from_json(cls, text: str) -> "CubeOrientation":
        data = json.loads(text)
        return cls(d=data["d"], rank=tuple(data["rank"]))


@dataclass(frozen=True)
class SubcubeFace:
    """A face of the cube: coordinates in `free` vary, the rest are pinned."""

    d: int
    free_mask: int
    fixed_bits: int

    def vertices(self):
        free = [i for i in range(self.d) if self.free_mask >> i & 1]
        for k in range(1 << len(free)):
            v = self.fixed_bits
            for pos, i in enumerate(free):
                if k >> pos & 1:
                    v |= 1 << i
            yield v


def _faces(d: int):
    for free_mask in range(1, 1 << d):
        pinned = [i for i in range(d) if not free_mask >> i & 1]
        for assign in range(1 << len(pinned)):
            fixed = 0
            for pos, i in enumerate(pinned):
                if assign >> pos & 1:
                    fixed |= 1 << i
            yield SubcubeFace(d=d, free_mask=free_mask, fixed_bits=fixed)


@dataclass(frozen=True)
class AofValidation:
    valid: bool
    witness: SubcubeFace | None = None


def validate_aof(o: CubeOrientation) -> AofValidation:
    """Check every subcube face has exactly one local maximum."""
    d, rank = o.d, o.rank
    for face in _faces(d):
        free = [i for i in range(d) if face.free_mask >> i & 1]
        maxima = 0
        for v in face.vertices():
            if all(rank[v] > rank[v ^ (1 << i)] for i in free):
                maxima += 1
                if maxima > 1:
                    return AofValidation(valid=False, witness=face)
    return AofValidation(valid=True)


def unique_sink_check(o: CubeOrientation) -> bool:
    """Independent dual check: no subcube holds two sinks of the reversed
    orientation.  Counts, per vertex, the faces in which it has no lower
    neighbor, accumulating over subsets of its ascending directions."""
    d, rank = o.d, o.rank
    counts: dict[tuple[int, int], int] = {}
    for v in range(1 << d):
        asc = [i for i in range(d) if rank[v ^ (1 << i)] > rank[v]]
        for k in range(1, 1 << len(asc)):
            mask = 0
            for pos, i in enumerate(asc):
                if k >> pos & 1:
                    mask |= 1 << i
            key = (mask, v & ~mask)
            counts[key] = counts.get(key, 0) + 1
            if counts[key] > 1:
                return False
    return True


def linear_orientation(d: int, weights) -> CubeOrientation:
    """Ordering induced by a generic linear objective sum(w_i x_i)."""
    ws = [rat(w) for w in weights]
    values = []
    for v in range(1 << d):
        values.append(sum(ws[i] for i in range(d) if v >> i & 1))
    if len(set(values)) != 1 << d:
        raise ValueError("weights are not generic: tied vertex values")
    order = sorted(range(1 << d), key=lambda v: values[v])
    rank = [0] * (1 << d)
    for pos, v in enumerate(order):
        rank[v] = pos
    return CubeOrientation(d=d, rank=tuple(rank))


def klee_minty_orientation(d: int, epsilon: Fraction = Fraction(1, 3)) -> CubeOrientation:
    """Ordering of cube vertices by objective value on the Klee-Minty cube.

    Bit i set means the i-th resource row is tight instead of x_i >= 0; the
    coordinates follow by forward substitution.
    """
    if not 1 <= d <= 20:
        raise ValueError("d must be in 1..20")
    lp = klee_minty(d, epsilon)
    mu = rat(epsilon).denominator
    values = []
    for v in range(1 << d):
        x = [Fraction(0)] * d
        for i in range(d):
            if v >> i & 1:
                x[i] = lp.b[i] - sum(lp.A[i][j] * x[j] for j in range(i))
        values.append(sum(mu ** (d - 1 - j) * x[j] for j in range(d)))
    if len(set(values)) != 1 << d:
        raise ValueError("Klee-Minty objective failed to separate vertices")
    order = sorted(range(1 << d), key=lambda v: values[v])
    rank = [0] * (1 << d)
    for pos, v in enumerate(order):
        rank[v] = pos
    return CubeOrientation(d=d, rank=tuple(rank))


# ---------------------------------------------------------------------------
# abstract rule runners


def random_facet_walk(
    d: int,
    start: int,
    better,
    rng: random.Random,
    *,
    budget: int = 1_000_000,
    on_move=None,
):
    """Random-facet local search on the cube under comparator `better(u, v)`.

    `better(u, v)` says vertex u beats vertex v in the underlying total
    order.  A facet containing the current vertex pins one more coordinate;
    one free coordinate means walking straight to the segment's top.
    Returns (final vertex, steps, path).
    """
    steps = 0
    path = [start]

    def descend(v: int, free: tuple[int, ...]) -> int:
        nonlocal steps
        while True:
            if steps > budget:
                raise RecursionBudgetExceeded(f"budget {budget} exhausted")
            improving = [i for i in free if better(v ^ (1 << i), v)]
            if not improving:
                return v
            if len(free) == 1:
                w = v ^ (1 << free[0])
                if on_move is not None:
                    on_move(v, w)
                steps += 1
                path.append(w)
                v = w
                continue
            pin = rng.choice(free)
            v = descend(v, tuple(i for i in free if i != pin))

    final = descend(start, tuple(range(d)))
    return final, steps, path


def run_cube_rule(
    o: CubeOrientation,
    rule: str,
    start: int | None = None,
    seed: int = 0,
    *,
    budget: int = 1_000_000,
):
    """Run Random Edge or Random Facet on an orientation; (steps, path).

    Raises NotAnAOF lazily: the walk always terminates at some local
    maximum, and landing anywhere but the global top exposes the violation.
    """
    d, rank = o.d, o.rank
    v = o.bottom if start is None else start
    rng = random.Random(seed)
    if rule == "redge":
        steps = 0
        path = [v]
        while True:
            improving = [i for i in range(d) if rank[v ^ (1 << i)] > rank[v]]
            if not improving:
                break
            v ^= 1 << rng.choice(improving)
            steps += 1
            path.append(v)
            if steps > budget:
                raise RecursionBudgetExceeded(f"budget {budget} exhausted")
    elif rule == "rfacet":
        v, steps, path = random_facet_walk(
            d, v, lambda u, w: rank[u] > rank[w], rng, budget=budget
        )
    else:
        raise ValueError(f"unknown cube rule {rule!r}")
    if rank[v] != (1 << d) - 1:
        raise NotAnAOF(f"walk stopped at rank {rank[v]}, not at the top")
    return steps, path


# ---------------------------------------------------------------------------
# recurrence tables


@dataclass(frozen=True)
class RecurrenceTable:
    kind: str
    values: dict
    bound: dict | None = None

    def check(self) -> bool:
        """Re-evaluate the defining recurrence on the stored exact values."""
        v = self.values
        if self.kind == "f":
            for (d, n), val in v.items():
                if d == 1:
                    ok = val == (1 if n >= 1 else 0)
                elif n == 0:
                    ok = val == 0
                elif n == 1:
                    ok = val == 1
                else:
                    ok = val == 2 * v[(d, n // 2)] + v[(d - 1, n - 1)]
                if not ok:
                    return False
            return True
        if self.kind == "g":
            for (d, n), val in v.items():
                if n < d:
                    ok = val == 0
                elif d == 1:
                    ok = val == 1
                else:
                    ok = val == v[(d - 1, n - 1)] + Fraction(
                        sum(v[(d, n - i)] for i in range(1, d)), d - 1
                    )
                if not ok:
                    return False
            return True
        if self.kind == "a":
            return all(
                val == 1 if n == 1 else val == v[n - 1] + v[n // 2]
                for n, val in v.items()
            )
        if self.kind == "b":
            total = Fraction(0)
            prev = None
            for n in sorted(v):
                if n == 1:
                    ok = v[n] == 1
                else:
                    ok = v[n] == prev + total / (n - 1)
                if not ok:
                    return False
                total += v[n]
                prev = v[n]
            return True
        if self.kind == "haehnle":
            return all(val == d * (n - 1) + 1 for (d, n), val in v.items())
        raise ValueError(f"unknown table kind {self.kind}")


def f_table(d_max: int, n_max: int) -> RecurrenceTable:
    """Monotone-path recurrence f(d,n) = 2 f(d,n/2) + f(d-1,n-1), solved with
    equality; bases f(1,n)=1, f(d,0)=0, f(d,1)=1.  The companion bound table
    holds n * C(d + ceil(log2 n), d)."""
    if d_max > 32 or n_max > 1000:
        raise ValueError("table guard: d_max <= 32, n_max <= 1000")
    f: dict[tuple[int, int], int] = {}
    for d in range(1, d_max + 1):
        for n in range(0, n_max + 1):
            if d == 1:
                f[(d, n)] = 1 if n >= 1 else 0
            elif n == 0:
                f[(d, n)] = 0
            elif n == 1:
                f[(d, n)] = 1
            else:
                f[(d, n)] = 2 * f[(d, n // 2)] + f[(d - 1, n - 1)]
    bound = {
        (d, n): n * comb(d + ceil(log2(n)), d)
        for d in range(1, d_max + 1)
        for n in range(1, n_max + 1)
    }
    return RecurrenceTable(kind="f", values=f, bound=bound)


def g_table(d_max: int, n_max: int) -> RecurrenceTable:
    """Random-facet expectation recurrence, solved with equality as an upper
    bound oracle: g(1,n)=1, g(d,n)=0 for n<d, and

        g(d,n) = g(d-1,n-1) + (1/(d-1)) * sum_{i=1..d-1} g(d,n-i).
    """
    if d_max > 32 or n_max > 1000:
        raise ValueError("table guard: d_max <= 32, n_max <= 1000")
    g: dict[tuple[int, int], Fraction] = {}
    for d in range(1, d_max + 1):
        for n in range(0, n_max + 1):
            if n < d:
                g[(d, n)] = Fraction(0)
            elif d == 1:
                g[(d, n)] = Fraction(1)
            else:
                g[(d, n)] = g[(d - 1, n - 1)] + Fraction(
                    sum(g[(d, n - i)] for i in range(1, d)), d - 1
                )
    return RecurrenceTable(kind="g", values=g)


def a_sequence(n_max: int) -> RecurrenceTable:
    """a_1 = 1, a_{n+1} = a_n + a_{ceil(n/2)}; quasi-polynomial growth."""
    if n_max > 10**5:
        raise ValueError("sequence guard: n_max <= 1e5")
    a: dict[int, int] = {1: 1}
    for n in range(1, n_max):
        a[n + 1] = a[n] + a[(n + 1) // 2]
    return RecurrenceTable(kind="a", values=a)


def b_sequence(n_max: int, exact_limit: int = 2000) -> tuple[RecurrenceTable, dict[int, float]]:
    """b_1 = 1, b_{n+1} = b_n + (b_1 + ... + b_n)/n.

    Exact rationals up to `exact_limit` (their reduced denominators grow
    like lcm(1..n), so full exactness at n = 1e5 is out of reach); beyond
    that the sequence continues in float64, which stays finite up to
    n = 1e5.  Returns (exact table, float values for the whole range).
    """
    if n_max > 10**5:
        raise ValueError("sequence guard: n_max <= 1e5")
    exact: dict[int, Fraction] = {1: Fraction(1)}
    approx: dict[int, float] = {1: 1.0}
    b = Fraction(1)
    total = Fraction(1)
    n = 1
    while n < min(n_max, exact_limit):
        b = b + total / n
        n += 1
        total += b
        exact[n] = b
        approx[n] = float(b)
    bf, tf = float(b), float(total)
    while n < n_max:
        bf = bf + tf / n
        n += 1
        tf += bf
        approx[n] = bf
    return RecurrenceTable(kind="b", values=exact), approx


def haehnle_bound_table(d_max: int, n_max: int) -> RecurrenceTable:
    """Conjectured diameter-abstraction bound d(n-1)+1 as a lookup table."""
    values = {
        (d, n): d * (n - 1) + 1
        for d in range(1, d_max + 1)
        for n in range(1, n_max + 1)
    }
    return RecurrenceTable(kind="haehnle", values=values)


def recurrence_tables(kind: str, d_max: int = 0, n_max: int = 0, **kwargs):
    """Dispatch by kind: 'f' | 'g' | 'a' | 'b' | 'haehnle'."""
    if kind == "f":
        return f_table(d_max, n_max)
    if kind == "g":
        return g_table(d_max, n_max)
    if kind == "a":
        return a_sequence(n_max)
    if kind == "b":
        return b_sequence(n_max, **kwargs)
    if kind == "haehnle":
        return haehnle_bound_table(d_max, n_max)
    raise ValueError(f"unknown recurrence kind {kind!r}")
