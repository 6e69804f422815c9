"""Disjoint monomial families with the gcd-divisibility connectivity rule.

A monomial is an exponent tuple over n variables with total degree d.  An
ordered sequence F_1..F_t is admissible when for all i < j < k and every
m_i in F_i, m_k in F_k some m_j in F_j is divisible by gcd(m_i, m_k).  The
search for the longest admissible sequence abstracts polytope diameter;
d(n-1)+1 is the conjectured maximum and both generators below attain it.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement

from .errors import TooLarge

Monomial = tuple[int, ...]

SEARCH_GUARD = 12


@dataclass(frozen=True)
class MonomialFamily:
    d: int
    n: int
    families: tuple[tuple[Monomial, ...], ...]

    def __post_init__(self):
        seen: set[Monomial] = set()
        for fam in self.families:
            if not fam:
                raise ValueError("families must be nonempty")
            for m in fam:
                if len(m) != self.n or sum(m) != self.d or any(e < 0 for e in m):
                    raise ValueError(f"not a degree-{self.d} monomial in {self.n} vars: {m}")
                if m in seen:
                    raise ValueError(f"families are not pairwise disjoint at {m}")
                seen.add(m)

    @property
    def t(self) -> int:
        return len(self.families)


@dataclass(frozen=True)
class Violation:
    i: int
    j: int
    k: int
    m_i: Monomial
    m_k: Monomial


def all_monomials(d: int, n: int) -> list[Monomial]:
    """Degree-d monomials in n variables, lexicographic."""
    out = []
    for combo in combinations_with_replacement(range(n), d):
        exp = [0] * n
        for v in combo:
            exp[v] += 1
        out.append(tuple(exp))
    return sorted(out)


def monomial_gcd(a: Monomial, b: Monomial) -> Monomial:
    return tuple(min(x, y) for x, y in zip(a, b))


def divides(a: Monomial, b: Monomial) -> bool:
    return all(x <= y for x, y in zip(a, b))


def haehnle_verify(fam: MonomialFamily) -> Violation | None:
    """None when admissible, else a witness triple with no bridging monomial."""
    fams = fam.families
    t = len(fams)
    for i in range(t):
        for k in range(i + 2, t):
            for m_i in fams[i]:
                for m_k in fams[k]:
                    g = monomial_gcd(m_i, m_k)
                    for j in range(i + 1, k):
                        if not any(divides(g, m_j) for m_j in fams[j]):
                            return Violation(i=i, j=j, k=k, m_i=m_i, m_k=m_k)
    return None


def index_sum_family(d: int, n: int) -> MonomialFamily:
    """F_s = all degree-d monomials whose variable indices sum to s.

    Index sums run from d (all x_1) to dn (all x_n), so t = d(n-1)+1.
    """
    buckets: dict[int, list[Monomial]] = {}
    for m in all_monomials(d, n):
        s = sum((i + 1) * e for i, e in enumerate(m))
        buckets.setdefault(s, []).append(m)
    families = tuple(tuple(buckets[s]) for s in sorted(buckets))
    return MonomialFamily(d=d, n=n, families=families)


def staircase_family(d: int, n: int) -> MonomialFamily:
    """Singleton families x_i^(d-l) x_{i+1}^l for k = d..dn, i = k//d, l = k%d."""
    families = []
    for k in range(d, d * n + 1):
        i, ell = divmod(k, d)
        exp = [0] * n
        exp[i - 1] += d - ell
        if ell:
            exp[i] += ell
        families.append((tuple(exp),))
    return MonomialFamily(d=d, n=n, families=tuple(families))


def haehnle_search(d: int, n: int) -> tuple[int, MonomialFamily]:
    """Exact maximum t over ordered sequences of disjoint nonempty families.

    Depth-first over candidate next families with incremental admissibility
    (appending F_t only adds triples ending at t) and the bound
    t + #unused <= best for pruning.
    """
    monomials = all_monomials(d, n)
    count = len(monomials)
    if count > SEARCH_GUARD:
        raise TooLarge(f"{count} monomials exceeds the search guard {SEARCH_GUARD}")

    # divisibility masks per possible gcd value, computed on demand
    super_mask: dict[Monomial, int] = {}

    def mask_of_multiples(g: Monomial) -> int:
        if g not in super_mask:
            super_mask[g] = sum(
                1 << idx for idx, m in enumerate(monomials) if divides(g, m)
            )
        return super_mask[g]

    best_t = 0
    best_families: tuple[tuple[Monomial, ...], ...] = ()

    def subsets_of(mask: int):
        sub = mask
        while sub:
            yield sub
            sub = (sub - 1) & mask

    def compatible(prefix: list[int], new: int) -> bool:
        t = len(prefix)
        for i in range(t - 1):
            for mi_idx in _bits(prefix[i]):
                for mk_idx in _bits(new):
                    g = monomial_gcd(monomials[mi_idx], monomials[mk_idx])
                    need = mask_of_multiples(g)
                    if any(prefix[j] & need == 0 for j in range(i + 1, t)):
                        return False
        return True

    def _bits(mask: int):
        while mask:
            low = mask & -mask
            yield low.bit_length() - 1
            mask ^= low

    def extend(prefix: list[int], used: int):
        nonlocal best_t, best_families
        if len(prefix) > best_t:
            best_t = len(prefix)
            best_families = tuple(
                tuple(monomials[i] for i in _bits(m)) for m in prefix
            )
        remaining = ((1 << count) - 1) & ~used
        if len(prefix) + bin(remaining).count("1") <= best_t:
            return
        for sub in subsets_of(remaining):
            if compatible(prefix, sub):
                prefix.append(sub)
                extend(prefix, used | sub)
                prefix.pop()

    extend([], 0)
    witness = MonomialFamily(d=d, n=n, families=best_families)
    return best_t, witness
