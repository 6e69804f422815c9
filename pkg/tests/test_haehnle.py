"""Monomial families: verification, the two equality families, the search."""

from math import comb

import pytest

from pivotlab.errors import TooLarge
from pivotlab.haehnle import (
    MonomialFamily,
    Violation,
    all_monomials,
    haehnle_search,
    haehnle_verify,
    index_sum_family,
    monomial_gcd,
    staircase_family,
)


def test_monomial_enumeration():
    assert all_monomials(2, 2) == [(0, 2), (1, 1), (2, 0)]
    assert len(all_monomials(3, 3)) == comb(5, 3)


def test_family_invariants():
    with pytest.raises(ValueError):
        MonomialFamily(d=2, n=2, families=(((2, 0),), ((2, 0),)))  # not disjoint
    with pytest.raises(ValueError):
        MonomialFamily(d=2, n=2, families=(((1, 0),),))  # wrong degree
    with pytest.raises(ValueError):
        MonomialFamily(d=2, n=2, families=((),))  # empty family


def test_distinct_variables_are_valid():
    fam = MonomialFamily(
        d=1, n=3, families=(((1, 0, 0),), ((0, 1, 0),), ((0, 0, 1),))
    )
    assert haehnle_verify(fam) is None
    assert fam.t == 3 == 1 * (3 - 1) + 1


def test_index_sum_family_d2_n3():
    fam = index_sum_family(2, 3)
    assert fam.t == 5 == 2 * (3 - 1) + 1
    assert haehnle_verify(fam) is None


def test_staircase_family_shape():
    fam = staircase_family(2, 2)
    assert fam.families == (((2, 0),), ((1, 1),), ((0, 2),))
    assert haehnle_verify(fam) is None


def test_violation_reported_with_witness():
    fam = MonomialFamily(
        d=2, n=2, families=(((2, 0),), ((0, 2),), ((1, 1),))
    )
    v = haehnle_verify(fam)
    assert isinstance(v, Violation)
    assert (v.i, v.j, v.k) == (0, 1, 2)
    assert monomial_gcd(v.m_i, v.m_k) == (1, 0)  # x1 does not divide x2^2


def test_both_families_valid_within_budget():
    cases = [
        (d, n)
        for d in range(1, 13)
        for n in range(1, 14)
        if comb(n + d - 1, d) <= 12
    ]
    assert len(cases) >= 30
    for d, n in cases:
        for builder in (index_sum_family, staircase_family):
            fam = builder(d, n)
            assert haehnle_verify(fam) is None, (builder.__name__, d, n)
            assert fam.t == d * (n - 1) + 1


@pytest.mark.parametrize(
    "d,n,expected",
    [(1, 1, 1), (1, 2, 2), (1, 3, 3), (1, 4, 4), (2, 2, 3), (2, 3, 5)],
)
def test_search_matches_conjectured_bound(d, n, expected):
    t, witness = haehnle_search(d, n)
    assert t == expected == d * (n - 1) + 1
    assert haehnle_verify(witness) is None
    assert witness.t == t


def test_search_guard():
    with pytest.raises(TooLarge):
        haehnle_search(2, 5)  # 15 monomials


def test_search_beats_generators():
    for d, n in [(1, 4), (2, 2), (2, 3)]:
        t, _ = haehnle_search(d, n)
        assert t >= index_sum_family(d, n).t
        assert t >= staircase_family(d, n).t
