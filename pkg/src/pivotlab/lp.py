"""Exact rational simplex over inequality systems  max c'x  s.t.  Ax <= b.

The working state is geometric: a vertex is a set of d tight rows with an
invertible submatrix, and a pivot relaxes one tight row and walks the edge
until another row blocks.  Degeneracy is handled by a symbolic lexicographic
perturbation of b: row i receives an implicit +eps^sigma(i), where the power
assignment sigma is fixed once per solve with the starting basis given the
highest powers.  Under that ordering every LP behaves as simple and generic,
the ratio test has a unique winner, and the objective strictly increases at
every pivot, so every selection rule terminates.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import combinations
from math import comb

from .errors import (
    CertificateUnavailable,
    CycleDetected,
    NoBlockingRow,
    NotImproving,
    NoVertex,
    TooLarge,
)
from .rationals import bit_size, fmt_rat, rat

_ZERO = Fraction(0)
_ONE = Fraction(1)

ENUMERATION_GUARD = 10**6
MAX_ENUMERATION_ROWS = 30


class Status(Enum):
    OPTIMAL = "optimal"
    UNBOUNDED = "unbounded"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class LinearProgram:
    """Immutable max problem: d variables, n inequality rows, exact entries."""

    d: int
    n: int
    c: tuple[Fraction, ...]
    A: tuple[tuple[Fraction, ...], ...]
    b: tuple[Fraction, ...]

    def __post_init__(self):
        if self.d < 1 or self.n < 1:
            raise ValueError("need d >= 1 and n >= 1")
        if len(self.c) != self.d or len(self.b) != self.n or len(self.A) != self.n:
            raise ValueError("shape mismatch between d, n and c, A, b")
        if any(len(row) != self.d for row in self.A):
            raise ValueError("ragged constraint matrix")

    @classmethod
    def create(cls, c, A, b) -> "LinearProgram":
        c = tuple(rat(x) for x in c)
        A = tuple(tuple(rat(x) for x in row) for row in A)
        b = tuple(rat(x) for x in b)
        return cls(d=len(c), n=len(b), c=c, A=A, b=b)

    @property
    def encoding_size(self) -> int:
        """Total bit-length L of all numerators and denominators."""
        entries = list(self.c) + list(self.b) + [x for row in self.A for x in row]
        return sum(bit_size(x) for x in entries)

    def row_value(self, i: int, x) -> Fraction:
        row = self.A[i]
        return sum(row[j] * x[j] for j in range(self.d) if row[j] and x[j])

    def slack(self, i: int, x) -> Fraction:
        return self.b[i] - self.row_value(i, x)

    def is_feasible(self, x) -> bool:
        return all(self.slack(i, x) >= 0 for i in range(self.n))

    def objective(self, x) -> Fraction:
        return sum(self.c[j] * x[j] for j in range(self.d))

    def to_json(self) -> str:
        return json.dumps(
            {
                "d": self.d,
                "n": self.n,
                "c": [fmt_rat(x) for x in self.c],
                "A": [[fmt_rat(x) for x in row] for row in self.A],
                "b": [fmt_rat(x) for x in self.b],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "LinearProgram":
        data = json.loads(text)
        lp = cls.create(data["c"], data["A"], data["b"])
        if lp.d != data["d"] or lp.n != data["n"]:
            raise ValueError("declared d/n disagree with array shapes")
        return lp


@dataclass(frozen=True)
class Tableau:
    """Simplex state: tight rows (the basis), cached inverse, current vertex.

    ``basis`` is kept in pivot order, not sorted; column p of ``binv`` is
    the column of A_B^{-1} matching basis position p.  ``perturb[i]`` is the
    lexicographic rank of row i's symbolic perturbation and never changes
    during a solve.
    """

    lp: LinearProgram
    basis: tuple[int, ...]
    binv: tuple[tuple[Fraction, ...], ...]
    vertex: tuple[Fraction, ...]
    perturb: tuple[int, ...]
    pivot_count: int = 0

    @property
    def basis_set(self) -> frozenset[int]:
        return frozenset(self.basis)

    def edge_direction(self, row: int) -> tuple[Fraction, ...]:
        """Direction that relaxes `row` while keeping the other basis rows tight.

        Normalized so the slack of `row` grows at unit rate (A_row . u = -1).
        """
        p = self.basis.index(row)
        return tuple(-self.binv[j][p] for j in range(self.lp.d))

    def reduced_cost(self, row: int) -> Fraction:
        return self.reduced_costs()[row]

    def reduced_costs(self) -> dict[int, Fraction]:
        cached = getattr(self, "_rcs", None)
        if cached is None:
            c, binv, d = self.lp.c, self.binv, self.lp.d
            cached = {
                r: -sum(c[j] * binv[j][p] for j in range(d) if c[j] and binv[j][p])
                for p, r in enumerate(self.basis)
            }
            object.__setattr__(self, "_rcs", cached)
        return cached

    def improving_rows(self) -> list[int]:
        return sorted(r for r, rc in self.reduced_costs().items() if rc > 0)

    def objective_value(self) -> Fraction:
        return self.lp.objective(self.vertex)


@dataclass(frozen=True)
class InfeasibleCertificate:
    """Farkas witness: y >= 0 with y'A = 0 and y'b < 0."""

    y: tuple[Fraction, ...]

    def verify(self, lp: LinearProgram) -> bool:
        if any(yi < 0 for yi in self.y):
            return False
        combo = [
            sum(self.y[i] * lp.A[i][j] for i in range(lp.n)) for j in range(lp.d)
        ]
        rhs = sum(self.y[i] * lp.b[i] for i in range(lp.n))
        return all(v == 0 for v in combo) and rhs < 0


@dataclass(frozen=True)
class DualCertificate:
    """Strong duality witness: y >= 0, y'A = c', y'b = optimal value."""

    y: tuple[Fraction, ...]
    value: Fraction

    def verify(self, lp: LinearProgram) -> bool:
        if any(yi < 0 for yi in self.y):
            return False
        combo = [
            sum(self.y[i] * lp.A[i][j] for i in range(lp.n)) for j in range(lp.d)
        ]
        rhs = sum(self.y[i] * lp.b[i] for i in range(lp.n))
        return all(combo[j] == lp.c[j] for j in range(lp.d)) and rhs == self.value


@dataclass(frozen=True)
class SolveResult:
    status: Status
    vertex: tuple[Fraction, ...] | None = None
    value: Fraction | None = None
    unbounded_ray: tuple[Fraction, ...] | None = None
    trace: tuple[tuple[Fraction, ...], ...] = ()
    pivots: int = 0
    tableau: Tableau | None = None
    certificate: InfeasibleCertificate | None = None
    stats: dict = field(default_factory=dict)

    def trace_json(self) -> str:
        return json.dumps(
            {
                "status": self.status.value,
                "value": fmt_rat(self.value) if self.value is not None else None,
                "vertex": [fmt_rat(x) for x in self.vertex] if self.vertex else None,
                "pivots": self.pivots,
                "trace": [[fmt_rat(x) for x in v] for v in self.trace],
            }
        )


# ---------------------------------------------------------------------------
# exact linear algebra helpers


def _identity(d: int) -> list[list[Fraction]]:
    return [[_ONE if i == j else _ZERO for j in range(d)] for i in range(d)]


def invert(rows: list[list[Fraction]]) -> list[list[Fraction]] | None:
    """Exact Gauss-Jordan inverse; None when the matrix is singular."""
    d = len(rows)
    m = [list(r) + ident for r, ident in zip(rows, _identity(d))]
    for col in range(d):
        piv = next((r for r in range(col, d) if m[r][col] != 0), None)
        if piv is None:
            return None
        m[col], m[piv] = m[piv], m[col]
        inv_p = _ONE / m[col][col]
        m[col] = [x * inv_p for x in m[col]]
        for r in range(d):
            if r != col and m[r][col] != 0:
                factor = m[r][col]
                m[r] = [x - factor * y for x, y in zip(m[r], m[col])]
    return [row[d:] for row in m]


def _row_rank_basis(rows: list[tuple[int, list[Fraction]]], d: int) -> list[int]:
    """Greedy: indices (from `rows` labels) of a maximal independent subset."""
    basis_rows: list[list[Fraction]] = []
    picked: list[int] = []
    for label, row in rows:
        work = list(row)
        for prev in basis_rows:
            lead = next((j for j in range(d) if prev[j] != 0), None)
            if lead is not None and work[lead] != 0:
                factor = work[lead] / prev[lead]
                work = [x - factor * y for x, y in zip(work, prev)]
        if any(x != 0 for x in work):
            basis_rows.append(work)
            picked.append(label)
        if len(picked) == d:
            break
    return picked


def _null_direction(rows: list[list[Fraction]], d: int) -> list[Fraction] | None:
    """A nonzero u with (row . u) = 0 for every row, or None if full rank."""
    reduced: list[list[Fraction]] = []
    for row in rows:
        work = list(row)
        for prev in reduced:
            lead = next(j for j in range(d) if prev[j] != 0)
            if work[lead] != 0:
                factor = work[lead] / prev[lead]
                work = [x - factor * y for x, y in zip(work, prev)]
        if any(x != 0 for x in work):
            reduced.append(work)
    if len(reduced) == d:
        return None
    leads = []
    for prev in reduced:
        leads.append(next(j for j in range(d) if prev[j] != 0))
    free = next(j for j in range(d) if j not in leads)
    u = [_ZERO] * d
    u[free] = _ONE
    # back-substitute in reverse so each lead is resolved against later entries
    for prev, lead in reversed(list(zip(reduced, leads))):
        u[lead] = -sum(prev[j] * u[j] for j in range(d) if j != lead) / prev[lead]
    return u


# ---------------------------------------------------------------------------
# phase one


def _standard_form_feasible(lp: LinearProgram):
    """Feasibility of Ax <= b by a textbook artificial-variable simplex.

    Works in equational form with x split into positive and negative parts.
    Returns a feasible point of the original system, or an exact Farkas
    certificate.  Bland's rule keeps it finite.
    """
    n, d = lp.n, lp.d
    sign = [_ONE if lp.b[i] >= 0 else -_ONE for i in range(n)]
    ncols = 2 * d + n  # x+ columns, x- columns, slack columns; artificials after
    tab = []
    for i in range(n):
        row = [sign[i] * lp.A[i][j] for j in range(d)]
        row += [-sign[i] * lp.A[i][j] for j in range(d)]
        row += [sign[i] if k == i else _ZERO for k in range(n)]
        row += [_ONE if k == i else _ZERO for k in range(n)]
        row.append(sign[i] * lp.b[i])
        tab.append(row)
    # objective: minimize sum of artificials; reduced-cost row below
    cost = [_ZERO] * (ncols + n) + [_ZERO]
    for j in range(ncols, ncols + n):
        cost[j] = _ONE
    basis = list(range(ncols, ncols + n))
    # price out the starting basis
    for i in range(n):
        cost = [cj - ti for cj, ti in zip(cost, tab[i])]

    while True:
        enter = next((j for j in range(ncols + n) if cost[j] < 0), None)
        if enter is None:
            break
        best = None
        for i in range(n):
            if tab[i][enter] > 0:
                ratio = tab[i][-1] / tab[i][enter]
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:  # aux objective is bounded below by 0
            raise AssertionError("phase-one auxiliary cannot be unbounded")
        _, leave = best
        piv = tab[leave][enter]
        tab[leave] = [x / piv for x in tab[leave]]
        for i in range(n):
            if i != leave and tab[i][enter] != 0:
                f = tab[i][enter]
                tab[i] = [x - f * y for x, y in zip(tab[i], tab[leave])]
        if cost[enter] != 0:
            f = cost[enter]
            cost = [x - f * y for x, y in zip(cost, tab[leave])]
        basis[leave] = enter

    if -cost[-1] > 0:  # leftover artificial mass: infeasible
        # multipliers: reduced cost of artificial k is 1 - y'_k
        y = tuple(-sign[k] * (_ONE - cost[ncols + k]) for k in range(n))
        cert = InfeasibleCertificate(y=y)
        if not cert.verify(lp):
            raise AssertionError("derived Farkas certificate failed recomputation")
        return cert
    x = [_ZERO] * (2 * d)
    for i, col in enumerate(basis):
        if col < 2 * d:
            x[col] = tab[i][-1]
    point = tuple(x[j] - x[d + j] for j in range(d))
    assert lp.is_feasible(point)
    return point


def _purify_to_vertex(lp: LinearProgram, x: tuple[Fraction, ...]) -> tuple[Fraction, ...]:
    """Walk a feasible point to a vertex, tightening one extra row per step."""
    d = lp.d
    while True:
        tight = [i for i in range(lp.n) if lp.slack(i, x) == 0]
        tight_rows = [list(lp.A[i]) for i in tight]
        u = _null_direction(tight_rows, d)
        if u is None:
            return x
        moved = False
        for direction in (u, [-v for v in u]):
            best = None
            for i in range(lp.n):
                if i in tight:
                    continue
                adv = sum(lp.A[i][j] * direction[j] for j in range(d))
                if adv > 0:
                    t = lp.slack(i, x) / adv
                    if best is None or t < best:
                        best = t
            if best is not None:
                x = tuple(xj + best * uj for xj, uj in zip(x, direction))
                moved = True
                break
        if not moved:
            raise NoVertex("feasible region contains a line; no vertex exists")


def _tableau_at(lp: LinearProgram, basis: list[int]) -> Tableau:
    rows = [list(lp.A[i]) for i in basis]
    binv = invert(rows)
    if binv is None:
        raise ValueError("basis rows are linearly dependent")
    x = tuple(
        sum(binv[j][p] * lp.b[basis[p]] for p in range(lp.d)) for j in range(lp.d)
    )
    # highest perturbation powers go to the starting basis so that tied
    # non-basis rows stay lexicographically positive at the start
    outside = [i for i in range(lp.n) if i not in basis]
    perturb = [0] * lp.n
    power = 1
    for i in sorted(outside):
        perturb[i] = power
        power += 1
    for i in sorted(basis):
        perturb[i] = power
        power += 1
    return Tableau(
        lp=lp,
        basis=tuple(basis),
        binv=tuple(tuple(row) for row in binv),
        vertex=x,
        perturb=tuple(perturb),
    )


def phase_one(lp: LinearProgram) -> Tableau | InfeasibleCertificate:
    """Tableau at a feasible vertex, or an exact Farkas certificate."""
    if all(bi >= 0 for bi in lp.b):
        outcome: tuple[Fraction, ...] | InfeasibleCertificate = (_ZERO,) * lp.d
    else:
        outcome = _standard_form_feasible(lp)
    if isinstance(outcome, InfeasibleCertificate):
        return outcome
    x = _purify_to_vertex(lp, outcome)
    tight = [(i, list(lp.A[i])) for i in range(lp.n) if lp.slack(i, x) == 0]
    basis = _row_rank_basis(tight, lp.d)
    if len(basis) < lp.d:
        raise NoVertex("purified point is not a vertex; rank(A) < d")
    return _tableau_at(lp, basis)


# ---------------------------------------------------------------------------
# pivoting


def _perturbation_coefficient(t: Tableau, row: int, power_row: int, arow_binv) -> Fraction:
    """Coefficient of eps^sigma(power_row) in the slack polynomial of `row`."""
    coef = _ONE if power_row == row else _ZERO
    if power_row in t.basis_set:
        p = t.basis.index(power_row)
        coef -= arow_binv[p]
    return coef


def _lex_ratio_leaving(t: Tableau, direction) -> int | None:
    """Minimum-ratio row under the symbolic perturbation order (unique)."""
    lp = t.lp
    basis_set = t.basis_set
    candidates = []
    for i in range(lp.n):
        if i in basis_set:
            continue
        row = lp.A[i]
        adv = sum(row[j] * direction[j] for j in range(lp.d) if row[j] and direction[j])
        if adv > 0:
            candidates.append((i, adv, lp.slack(i, t.vertex) / adv))
    if not candidates:
        return None
    rows_by_power = sorted(range(lp.n), key=lambda i: t.perturb[i])

    cache: dict[int, list[Fraction]] = {}

    def arow_binv(i: int) -> list[Fraction]:
        if i not in cache:
            row = lp.A[i]
            cache[i] = [
                sum(row[j] * t.binv[j][p] for j in range(lp.d) if row[j] and t.binv[j][p])
                for p in range(lp.d)
            ]
        return cache[i]

    best_i, best_adv, best_ratio = candidates[0]
    for i, adv, ratio in candidates[1:]:
        # constant term first, then perturbation coefficients in power order
        if ratio != best_ratio:
            if ratio < best_ratio:
                best_i, best_adv, best_ratio = i, adv, ratio
            continue
        decided = False
        for prow in rows_by_power:
            ci = _perturbation_coefficient(t, i, prow, arow_binv(i)) / adv
            cb = _perturbation_coefficient(t, best_i, prow, arow_binv(best_i)) / best_adv
            if ci != cb:
                if ci < cb:
                    best_i, best_adv, best_ratio = i, adv, ratio
                decided = True
                break
        if not decided:
            raise AssertionError("perturbed ratio test produced a tie")
    return best_i


def _plain_ratio_leaving(t: Tableau, direction) -> int | None:
    """Unperturbed ratio test; ties broken by lowest row index."""
    lp = t.lp
    best = None
    for i in range(lp.n):
        if i in t.basis_set:
            continue
        adv = sum(lp.A[i][j] * direction[j] for j in range(lp.d))
        if adv > 0:
            ratio = lp.slack(i, t.vertex) / adv
            if best is None or ratio < best[0]:
                best = (ratio, i)
    return None if best is None else best[1]


def pivot_step(
    t: Tableau,
    entering: int,
    leaving: int | None = None,
    *,
    force: bool = False,
    anti_cycling: bool = True,
) -> Tableau:
    """Relax tight row `entering` and walk its edge to the blocking row.

    `entering` must carry positive reduced cost unless `force` is set.  The
    leaving row is determined by the (perturbed) minimum-ratio test; passing
    an explicit `leaving` merely asserts the caller agrees with it.
    """
    if entering not in t.basis_set:
        raise ValueError(f"row {entering} is not in the current basis")
    if not force and t.reduced_cost(entering) <= 0:
        raise NotImproving(f"row {entering} has nonpositive reduced cost")
    direction = t.edge_direction(entering)
    ratio_test = _lex_ratio_leaving if anti_cycling else _plain_ratio_leaving
    blocking = ratio_test(t, direction)
    if blocking is None:
        raise NoBlockingRow(ray=direction)
    if leaving is not None and leaving != blocking:
        raise ValueError(
            f"leaving row {leaving} contradicts the ratio test ({blocking})"
        )
    lp = t.lp
    p = t.basis.index(entering)
    adv = sum(
        lp.A[blocking][j] * direction[j]
        for j in range(lp.d)
        if lp.A[blocking][j] and direction[j]
    )
    step = lp.slack(blocking, t.vertex) / adv
    if step:
        new_vertex = tuple(x + step * u if u else x for x, u in zip(t.vertex, direction))
    else:
        new_vertex = t.vertex
    # rank-one update of the cached inverse, new row lands in position p
    brow = lp.A[blocking]
    g = [
        sum(brow[j] * t.binv[j][q] for j in range(lp.d) if brow[j] and t.binv[j][q])
        for q in range(lp.d)
    ]
    gp = g[p]
    new_binv = []
    for j in range(lp.d):
        mjp = t.binv[j][p]
        row = []
        for q in range(lp.d):
            delta = g[q] - (_ONE if q == p else _ZERO)
            row.append(t.binv[j][q] - mjp * delta / gp if mjp and delta else t.binv[j][q])
        new_binv.append(tuple(row))
    new_basis = list(t.basis)
    new_basis[p] = blocking
    return Tableau(
        lp=lp,
        basis=tuple(new_basis),
        binv=tuple(new_binv),
        vertex=new_vertex,
        perturb=t.perturb,
        pivot_count=t.pivot_count + 1,
    )


def optimize(
    t: Tableau,
    select,
    *,
    anti_cycling: bool = True,
    max_pivots: int | None = None,
) -> SolveResult:
    """Drive pivots with `select(tableau) -> row | None` until optimal.

    With the perturbation enabled termination is guaranteed; with it
    disabled a repeated basis raises CycleDetected.
    """
    trace = [t.vertex]
    seen: set[frozenset[int]] = {t.basis_set}
    start_pivots = t.pivot_count
    while True:
        row = select(t)
        if row is None:
            pivots = t.pivot_count - start_pivots
            return SolveResult(
                status=Status.OPTIMAL,
                vertex=t.vertex,
                value=t.objective_value(),
                trace=tuple(trace),
                pivots=pivots,
                tableau=t,
            )
        try:
            t = pivot_step(t, row, anti_cycling=anti_cycling)
        except NoBlockingRow as exc:
            return SolveResult(
                status=Status.UNBOUNDED,
                unbounded_ray=tuple(exc.ray),
                trace=tuple(trace),
                pivots=t.pivot_count - start_pivots,
                tableau=t,
            )
        if t.vertex != trace[-1]:
            trace.append(t.vertex)
        if not anti_cycling:
            if t.basis_set in seen:
                raise CycleDetected(f"basis {sorted(t.basis_set)} repeated")
            seen.add(t.basis_set)
        if max_pivots is not None and t.pivot_count - start_pivots > max_pivots:
            raise TooLarge(f"pivot budget {max_pivots} exhausted")


# ---------------------------------------------------------------------------
# brute-force oracle and duality


def enumerate_vertices(lp: LinearProgram) -> list[tuple[tuple[Fraction, ...], Fraction]]:
    """All basic feasible solutions with objective values, deduplicated.

    Ground truth for the simplex drivers: tries every d-subset of rows.
    """
    if lp.n > MAX_ENUMERATION_ROWS or comb(lp.n, lp.d) > ENUMERATION_GUARD:
        raise TooLarge(
            f"vertex enumeration guard: n={lp.n}, C(n,d)={comb(lp.n, lp.d)}"
        )
    seen: dict[tuple[Fraction, ...], Fraction] = {}
    for subset in combinations(range(lp.n), lp.d):
        rows = [list(lp.A[i]) for i in subset]
        inv = invert(rows)
        if inv is None:
            continue
        x = tuple(
            sum(inv[j][p] * lp.b[subset[p]] for p in range(lp.d))
            for j in range(lp.d)
        )
        if lp.is_feasible(x):
            seen.setdefault(x, lp.objective(x))
    return sorted(seen.items())


def standard_dual(lp: LinearProgram) -> LinearProgram:
    """The textbook dual min{y'b : y'A = c, y >= 0}, re-encoded as a max
    problem over y (so its optimal value is the negated primal optimum).

    Note this has n variables, not n - d; pairing it with the primal gives
    exact weak/strong duality checks without any claimed variable count.
    """
    d, n = lp.d, lp.n
    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    for j in range(d):  # y'A = c as two inequalities per coordinate
        col = [lp.A[i][j] for i in range(n)]
        rows.append(col)
        rhs.append(lp.c[j])
        rows.append([-x for x in col])
        rhs.append(-lp.c[j])
    for i in range(n):  # y >= 0
        rows.append([-_ONE if k == i else _ZERO for k in range(n)])
        rhs.append(_ZERO)
    objective = [-bi for bi in lp.b]
    return LinearProgram(d=n, n=len(rows), c=tuple(objective),
                         A=tuple(tuple(r) for r in rows), b=tuple(rhs))


def duality_certificate(lp: LinearProgram, res: SolveResult) -> DualCertificate:
    """Exact dual multipliers read off the final basis."""
    if res.status is not Status.OPTIMAL:
        raise ValueError("duality certificate requires an optimal result")
    if res.tableau is None:
        raise CertificateUnavailable("result carries no final tableau")
    t = res.tableau
    y = [_ZERO] * lp.n
    for p, row in enumerate(t.basis):
        y[row] = sum(lp.c[j] * t.binv[j][p] for j in range(lp.d))
    cert = DualCertificate(y=tuple(y), value=res.value)
    if not cert.verify(lp):
        raise AssertionError("dual certificate failed exact recomputation")
    return cert
