import json
import random
from fractions import Fraction
from math import comb

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import X, Y, elliptic_basis, elliptic_coords

from syzlab.koszul import kpq_dim
from syzlab.sections import (BASE_POINT, INF, V, EllipticSystem, FileSystemAlgebra, FormatError,
                             GradeOutOfRange, IndexOutOfRange, ProjLineSystem, ToricSystem,
                             UnsupportedPoint, box, export_system, simplex, system_from_descriptor,
                             validate_system)


# -- projective line -----------------------------------------------------------

def test_projline_dimensions_and_products():
    s = ProjLineSystem(2, 3)
    assert s.dim_v == 4
    assert [s.dim_w(m) for m in range(3)] == [3, 6, 9]
    assert ProjLineSystem(-3, 1).dim_w(0) == 0
    assert s.multiply(3, 1, 5) == {8: 1}
    with pytest.raises(IndexOutOfRange):
        s.multiply(4, 0, 0)


def test_projline_jets():
    s = ProjLineSystem(3, 1)
    # t^3 at tau = 2: value 8, first derivative 12, then 6, 1
    assert [s.jet_row(0, 3, Fraction(2), k) for k in range(4)] == [8, 12, 6, 1]
    # at infinity the section t^i s^(3-i) is sigma^(3-i)
    assert [s.jet_row(0, i, INF, 0) for i in range(4)] == [0, 0, 0, 1]
    assert s.jet_row(0, 1, INF, 2) == 1
    assert s.parse_point(" inf ") == INF
    assert s.parse_point("3/4") == Fraction(3, 4)
    with pytest.raises(UnsupportedPoint):
        s.parse_point("(1,2)")


# -- elliptic curves -----------------------------------------------------------

CURVES = [(0, 1), (-1, 0), (Fraction(-2, 3), 5)]


@pytest.mark.parametrize("A,B", CURVES)
def test_elliptic_products_match_sympy_reduction(A, B):
    s = EllipticSystem(A, B, b=1, d=3)
    Vb = elliptic_basis(3)
    for m in range(3):
        Wm = elliptic_basis(1 + 3 * m)
        assert len(Wm) == s.dim_w(m)
        for v, fv in enumerate(Vb):
            for w, fw in enumerate(Wm):
                expect = elliptic_coords(fv * fw, 1 + 3 * (m + 1), A, B)
                got = [0] * len(expect)
                for k, c in s.multiply(v, m, w).items():
                    got[k] = c
                assert got == expect, (m, v, w)


def test_elliptic_riemann_roch_and_basis():
    assert [EllipticSystem.riemann_roch(k) for k in range(-1, 6)] == [0, 1, 1, 2, 3, 4, 5]
    assert [EllipticSystem.monomial(5, i) for i in range(5)] == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1)]
    assert EllipticSystem.index_of(2, 1) == 6
    with pytest.raises(ValueError):
        EllipticSystem(0, 0)
    with pytest.raises(UnsupportedPoint):
        EllipticSystem(0, 1, 2, 1).jet_row(0, 0, (Fraction(1), Fraction(1)), 0)


def _series(expr, var, n):
    poly = sympy.series(expr, var, 0, n + 1).removeO()
    return [Fraction(str(poly.coeff(var, k))) for k in range(n + 1)]


def test_elliptic_jets_at_affine_points():
    s = EllipticSystem(0, 1, b=5, d=1)
    u = sympy.symbols("u")
    # (2, 3): parameter u = x - 2, y = sqrt(u^3 + 6u^2 + 12u + 9)
    y_of_u = sympy.sqrt((2 + u) ** 3 + 1)
    for idx in range(s.dim_w(0)):
        i, j = s.monomial(5, idx)
        expect = _series((2 + u) ** i * y_of_u ** j, u, 4)
        assert [s.jet_row(0, idx, (2, 3), k) for k in range(5)] == expect
    # (-1, 0): parameter y, x = -1 + y^2/3 + ...; check x(y)^3 + 1 = y^2 up to order 6
    xs = [s.jet_row(0, 1, (-1, 0), k) for k in range(7)]
    t = sympy.symbols("t")
    x_poly = sum(sympy.Rational(c.numerator, c.denominator) * t**k for k, c in enumerate(xs))
    residual = sympy.expand(x_poly**3 + 1 - t**2)
    assert all(residual.coeff(t, k) == 0 for k in range(7))


def test_elliptic_jets_at_base_point():
    s = EllipticSystem(0, 1, b=4, d=1)
    # in the trivialization z^-4 only the pole-order-4 monomial x^2 is nonzero at O
    assert [s.jet_row(0, idx, BASE_POINT, 0) for idx in range(4)] == [0, 0, 0, 1]
    # y has pole order 3 and sign -1 in the parameter z = -x/y
    assert s.jet_row(0, 2, BASE_POINT, 1) == -1
    assert s.parse_point("O") == BASE_POINT


def test_elliptic_rational_points_and_group_law():
    s = EllipticSystem(0, 1)
    pts = s.rational_points()
    assert len(pts) == 6  # y^2 = x^3 + 1 has E(Q) = Z/6
    assert all(s.on_curve(P) for P in pts)
    P = (Fraction(2), Fraction(3))
    multiples = [P]
    for _ in range(5):
        multiples.append(s.add(multiples[-1], P))
    assert multiples[-1] == BASE_POINT and len(set(multiples)) == 6


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_group_law_associative(data):
    s = EllipticSystem(-2, 1)
    pts = s.rational_points(limit=20)
    P, Q_, R = (data.draw(st.sampled_from(pts)) for _ in range(3))
    assert s.add(s.add(P, Q_), R) == s.add(P, s.add(Q_, R))
    assert s.add(P, s.neg(P)) == BASE_POINT


# -- toric -----------------------------------------------------------------------

def test_toric_dimensions():
    ver = ToricSystem.from_family([(0, 0)], simplex(2, 1), 3)
    assert ver.dim_v == 10
    assert [ver.dim_w(m) for m in range(4)] == [1, 10, 28, 55]
    quad = ToricSystem(box(2, 1), box(2, 2))
    assert quad.dim_v == 9 and quad.dim_w(1) == 16
    assert len(simplex(3, 2)) == comb(5, 3)
    assert not ver.extra_checks()


def test_toric_jets_are_taylor_coefficients():
    s = ToricSystem([(2, 1)], [(0, 0)])
    # z1^2 z2 at (3, -1):  d/dz1 -> 2 z1 z2 = -6,  d^2/dz1^2 / 2! -> z2 = -1
    assert s.jet_row(0, 0, (Fraction(3), Fraction(-1)), (1, 0)) == -6
    assert s.jet_row(0, 0, (Fraction(3), Fraction(-1)), (2, 0)) == -1
    assert s.jet_row(0, 0, (Fraction(3), Fraction(-1)), (3, 0)) == 0
    assert s.jet_row(0, 0, (Fraction(3), Fraction(-1)), (1, 1)) == 6
    with pytest.raises(UnsupportedPoint):
        s.jet_row(0, 0, (0, 1), (0, 0))
    with pytest.raises(UnsupportedPoint):
        s.parse_point("1,2,3")


# -- validation and the file format ------------------------------------------------

@pytest.mark.parametrize("sys_", [ProjLineSystem(2, 3), EllipticSystem(0, 1, 2, 3),
                                  EllipticSystem(Fraction(1, 2), 3, 1, 2),
                                  ToricSystem(box(2, 1), box(2, 1))])
def test_builtin_backends_validate(sys_):
    rep = validate_system(sys_)
    assert rep.ok, rep.violations
    assert rep.checked_triples > 0


def test_descriptor_roundtrip():
    for s in (ProjLineSystem(1, 2), EllipticSystem(-1, 0, 2, 3), ToricSystem.from_family([(0, 0)], simplex(2), 2)):
        again = system_from_descriptor(json.loads(json.dumps(s.descriptor())))
        assert again.descriptor() == s.descriptor()
        assert [again.dim_w(m) for m in range(3)] == [s.dim_w(m) for m in range(3)]


def test_file_roundtrip_preserves_koszul_numbers(tmp_path):
    s = EllipticSystem(0, 1, 2, 3)
    doc = export_system(s, 0, 3, name="e23", points=[(Fraction(2), Fraction(3))], jet_order=2)
    path = tmp_path / "e23.json"
    path.write_text(json.dumps(doc))
    f = FileSystemAlgebra.load(path)
    assert f.hypothesis_source == "asserted by input"
    assert f.higher_cohomology_vanishes
    assert validate_system(f).ok
    for p, q in [(0, 0), (1, 1), (2, 1), (1, 0)]:
        assert kpq_dim(f, p, q) == kpq_dim(s, p, q)
    assert f.jet_row(0, 1, "(2,3)", 1) == s.jet_row(0, 1, (2, 3), 1)
    with pytest.raises(UnsupportedPoint):
        f.jet_row(0, 1, "(2,3)", 3)
    with pytest.raises(GradeOutOfRange):
        f.dim_w(4)
    assert f.dim_w(-1) == 0
    assert f.descriptor()["sha256"] == FileSystemAlgebra.load(path).descriptor()["sha256"]


def _doc():
    return export_system(ProjLineSystem(1, 2), 0, 2, name="p12")


@pytest.mark.parametrize("mutate,message", [
    (lambda d: d.update(extra=1), "unknown fields"),
    (lambda d: d["header"].pop("hcv"), "missing"),
    (lambda d: d["mult"].append(list(d["mult"][0])), "duplicate"),
    (lambda d: d["mult"][0].__setitem__(4, 2) or d["mult"][0].__setitem__(5, 4), "not reduced"),
    (lambda d: d["mult"][0].__setitem__(3, 99), "out of range"),
    (lambda d: d["header"].__setitem__("dims", [2, 4]), "one entry per grade"),
])
def test_file_format_rejects(mutate, message):
    doc = _doc()
    mutate(doc)
    with pytest.raises(FormatError, match=message):
        FileSystemAlgebra(doc)


def test_corrupted_structure_constants_name_the_triple():
    doc = _doc()
    # break commutativity: v=1 * w=0 in grade 0 now lands on the wrong section
    for e in doc["mult"]:
        if e[:3] == [0, 1, 0]:
            e[3] = 3
    rep = validate_system(FileSystemAlgebra(doc))
    assert not rep.ok
    assert any("grade 0" in v and "v1=" in v for v in rep.violations)
