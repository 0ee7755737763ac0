from fractions import Fraction
from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from syzlab.jets import (CycleError, ZeroCycle, check_cycle, curve_closed_form,
                         imposes_independent_conditions, jet_matrix, parse_cycle,
                         search_violating_cycle, target_dim)
from syzlab.sections import BASE_POINT, INF, EllipticSystem, ProjLineSystem, ToricSystem, box

E = EllipticSystem(0, 1, b=3, d=1)


def test_cycle_validation_and_parsing():
    s = ProjLineSystem(2, 1)
    c = parse_cycle(s, "0^3 + 1/2 + inf^2")
    assert c.support == ((Fraction(0), 3), (Fraction(1, 2), 1), (INF, 2))
    assert c.degree == 6 and not c.is_reduced
    assert parse_cycle(s, c.format(s)) == c
    assert parse_cycle(E, "(2,3) + (0,-1) + O").support[2] == (BASE_POINT, 1)
    for bad in ("", "1 + 1", "2^0", "3^x"):
        with pytest.raises(CycleError):
            parse_cycle(s, bad)


def test_vandermonde_examples():
    assert check_cycle(ProjLineSystem(2, 1), ZeroCycle.reduced([0, 1, 2])).rank == 3
    chk = check_cycle(ProjLineSystem(1, 1), ZeroCycle.reduced([0, 1, 2]))
    assert (chk.rank, chk.target_dim, chk.independent) == (2, 3, False)
    assert imposes_independent_conditions(ProjLineSystem(3, 1), ZeroCycle.reduced([-1, 0, 5, INF]))
    # full 2-jet at a point
    assert check_cycle(ProjLineSystem(2, 1), parse_cycle(ProjLineSystem(2, 1), "0^3")).independent


def test_single_point():
    assert check_cycle(ToricSystem(box(2, 1), box(2, 1)), ZeroCycle.reduced([(1, 1)])).rank == 1
    assert check_cycle(ProjLineSystem(0, 1), ZeroCycle.reduced([INF])).rank == 1


def test_elliptic_three_points():
    P, Q = (Fraction(2), Fraction(3)), (Fraction(2), Fraction(-3))
    assert imposes_independent_conditions(E, ZeroCycle.reduced([P, Q, (Fraction(0), Fraction(1))]))
    # P + Q + O = O in the group law: a line section through all three
    assert not imposes_independent_conditions(E, ZeroCycle.reduced([P, Q, BASE_POINT]))


def test_target_dim_formula():
    c = ZeroCycle((((1, 1), 3), ((2, 1), 1)))
    assert target_dim(2, c) == comb(4, 2) + 1 == 7
    assert target_dim(1, c) == c.degree
    jm = jet_matrix(ToricSystem(box(2, 1), box(2, 2)), c)
    assert jm.matrix.nrows == len(jm.rows) == jm.target_dim


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 4), st.lists(st.integers(-6, 6), min_size=1, max_size=5, unique=True), st.randoms())
def test_permuting_support_keeps_rank(b, pts, rnd):
    s = ProjLineSystem(b, 1)
    shuffled = list(pts)
    rnd.shuffle(shuffled)
    assert check_cycle(s, ZeroCycle.reduced(pts)).rank == check_cycle(s, ZeroCycle.reduced(shuffled)).rank


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 3), st.integers(1, 3)), min_size=1, max_size=4, unique=True),
       st.integers(1, 3))
def test_monotonicity_on_toric(pts, extra):
    s = ToricSystem(box(2, 1), box(2, 1))
    full = ZeroCycle(((pts[0], extra),) + tuple((pt, 1) for pt in pts[1:]))
    sub = ZeroCycle.reduced(pts[:-1]) if len(pts) > 1 else ZeroCycle.reduced(pts[:1])
    big, small = check_cycle(s, full), check_cycle(s, sub)
    assert big.rank >= small.rank and big.target_dim >= small.target_dim
    if big.independent:
        assert small.independent


def test_search_examples():
    res = search_violating_cycle(ProjLineSystem(1, 1), 2)
    assert res.certified and res.found and res.cycle.is_reduced and res.cycle.degree == 3
    assert res.verdict == "NOT_JET_VERY_AMPLE"
    res = search_violating_cycle(ProjLineSystem(4, 1), 2)
    assert res.certified and not res.found and res.verdict == "JET_VERY_AMPLE"


def test_toric_quadric_violation_found():
    s = ToricSystem(box(2, 1), box(2, 1))
    for seed in range(5):
        res = search_violating_cycle(s, 2, budget=10_000, seed=seed)
        assert res.found and res.method == "search"
        assert not check_cycle(s, res.cycle).independent
    again = search_violating_cycle(s, 2, budget=10_000, seed=3)
    assert again.cycle == search_violating_cycle(s, 2, budget=10_000, seed=3).cycle


def test_elliptic_closed_form_counterexamples():
    for b, p in [(1, 1), (2, 1), (3, 2), (1, 0)]:
        s = EllipticSystem(0, 1, b, 1)
        res = search_violating_cycle(s, p)
        assert res.certified and res.jet_very_ample is False
        assert res.found and not check_cycle(s, res.cycle).independent
    assert curve_closed_form(EllipticSystem(0, 1, 0, 1), 0)
    assert not curve_closed_form(EllipticSystem(0, 1, 0, 1), 1)
    assert curve_closed_form(ToricSystem(box(2, 1), box(2, 1)), 1) is None


@pytest.mark.parametrize("b", range(0, 4))
@pytest.mark.parametrize("p", range(0, 4))
def test_closed_form_agrees_with_search_on_projline(b, p):
    s = ProjLineSystem(b, 1)
    res = search_violating_cycle(s, p, budget=300, strategy="mixed", seed=b + p)
    assert res.found == (not curve_closed_form(s, p))


@pytest.mark.parametrize("b,p", [(1, 0), (2, 1), (3, 1), (1, 1), (4, 2)])
def test_closed_form_agrees_with_search_on_elliptic(b, p):
    s = EllipticSystem(0, 1, b, 1)
    res = search_violating_cycle(s, p, budget=300, strategy="mixed", seed=1, box=3)
    if curve_closed_form(s, p):
        assert not res.found and res.verdict == "NOT_FALSIFIED" and not res.certified
    elif s.dim_w(0) < p + 1:
        # too few sections: every cycle of degree p+1 violates
        assert res.found


def test_search_rejects_bad_arguments():
    with pytest.raises(ValueError):
        search_violating_cycle(ProjLineSystem(1, 1), -1)
    with pytest.raises(ValueError):
        search_violating_cycle(ProjLineSystem(1, 1), 1, strategy="magic")
    with pytest.raises(ValueError):
        search_violating_cycle(ToricSystem(box(2, 1), box(2, 1)), 1, strategy="closed-form")
