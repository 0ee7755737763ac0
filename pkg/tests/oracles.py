"""Independent reference computations used by the tests.

Nothing here imports the package's linear algebra or Koszul assembly:
ranks come from dense Bareiss elimination, and curve matrices are assembled
from polynomial arithmetic (sympy for the elliptic reduction).
"""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations, combinations_with_replacement
from math import comb, lcm
from typing import List, Sequence

import sympy


def bareiss_rank(rows: Sequence[Sequence]) -> int:
    """Rank of a dense rational matrix by fraction-free Bareiss elimination."""
    rows = [list(r) for r in rows if any(x != 0 for x in r)]
    if not rows:
        return 0
    scale = lcm(*(Fraction(x).denominator for r in rows for x in r))
    a = [[int(Fraction(x) * scale) for x in r] for r in rows]
    m, n = len(a), len(a[0])
    r = 0
    prev = 1
    for c in range(n):
        piv = next((i for i in range(r, m) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        for i in range(r + 1, m):
            for j in range(c + 1, n):
                a[i][j] = (a[i][j] * a[r][c] - a[i][c] * a[r][j]) // prev
            a[i][c] = 0
        prev = a[r][c]
        r += 1
        if r == m:
            break
    return r


# -- P^1 by polynomials -------------------------------------------------------


def p1_koszul_dense(b: int, d: int, p: int, q: int):
    """Dense (d_in, d_out, middle dim) of the wedge complex for O(b) graded by O(d) on P^1.

    Sections of O(k) are polynomials in t of degree <= k, V = H^0(O(d)) has
    basis t^0..t^d, and wedges are ordered by ``itertools.combinations``.
    """
    def h0(k):
        return max(0, k + 1)

    def differential(pp, qq):
        if pp <= 0 or qq < 0:
            return []
        src = list(combinations(range(d + 1), pp))
        tgt = {w: i for i, w in enumerate(combinations(range(d + 1), pp - 1))}
        dw_src, dw_tgt = h0(b + qq * d), h0(b + (qq + 1) * d)
        rows = [[0] * (len(src) * dw_src) for _ in range(len(tgt) * dw_tgt)]
        for wi, w in enumerate(src):
            for s in range(dw_src):
                for j in range(pp):
                    # e_{w_j} ⊗ t^s  ->  t^{w_j + s}
                    rows[tgt[w[:j] + w[j + 1:]] * dw_tgt + w[j] + s][wi * dw_src + s] += (-1) ** j
        return rows

    middle = comb(d + 1, p) * h0(b + q * d) if q >= 0 else 0
    return differential(p + 1, q - 1), differential(p, q), middle


def p1_kpq(b: int, d: int, p: int, q: int) -> int:
    d_in, d_out, middle = p1_koszul_dense(b, d, p, q)
    return middle - bareiss_rank(d_out) - bareiss_rank(d_in)


def sym2_kernel(d: int) -> int:
    """dim ker(Sym^2 H^0(O(d)) -> H^0(O(2d))) on P^1."""
    pairs = list(combinations_with_replacement(range(d + 1), 2))
    rows = [[0] * len(pairs) for _ in range(2 * d + 1)]
    for c, (i, j) in enumerate(pairs):
        rows[i + j][c] = 1
    return len(pairs) - bareiss_rank(rows)


# -- elliptic curves via sympy reduction --------------------------------------

X, Y = sympy.symbols("x y")


def elliptic_basis(k: int) -> List[sympy.Expr]:
    """Monomials x^i y^j (j <= 1) of pole order <= k, by increasing pole order."""
    if k < 0:
        return []
    mons = [(2 * i + 3 * j, X**i * Y**j) for i in range(k // 2 + 1) for j in (0, 1) if 2 * i + 3 * j <= k]
    return [m for _, m in sorted(mons, key=lambda t: t[0])]


def elliptic_reduce(expr, A, B) -> sympy.Poly:
    rel = sympy.Poly(Y**2 - X**3 - A * X - B, Y, X)
    return sympy.Poly(sympy.expand(expr), Y, X).rem(rel)


def elliptic_coords(expr, k: int, A, B) -> List[Fraction]:
    basis = elliptic_basis(k)
    red = elliptic_reduce(expr, A, B)
    out = [Fraction(0)] * len(basis)
    pos = {sympy.Poly(m, Y, X).monoms()[0]: i for i, m in enumerate(basis)}
    for mono, coef in zip(red.monoms(), red.coeffs()):
        out[pos[mono]] = Fraction(int(sympy.numer(coef)), int(sympy.denom(coef)))
    return out


def elliptic_kpq(A, B, b: int, d: int, p: int, q: int) -> int:
    """K_{p,q}(E, O(b·O); O(d·O)) from sympy-reduced products and Bareiss ranks."""
    V = elliptic_basis(d)

    def differential(pp, qq):
        if pp <= 0 or qq < 0:
            return []
        src_w = elliptic_basis(b + qq * d)
        tgt_w = elliptic_basis(b + (qq + 1) * d)
        tgt = {w: i for i, w in enumerate(combinations(range(len(V)), pp - 1))}
        src = list(combinations(range(len(V)), pp))
        rows = [[Fraction(0)] * (len(src) * len(src_w)) for _ in range(len(tgt) * len(tgt_w))]
        for wi, w in enumerate(src):
            for si, s in enumerate(src_w):
                col = wi * len(src_w) + si
                for j in range(pp):
                    face = tgt[w[:j] + w[j + 1:]]
                    vec = elliptic_coords(V[w[j]] * s, b + (qq + 1) * d, A, B)
                    for k, c in enumerate(vec):
                        if c:
                            rows[face * len(tgt_w) + k][col] += (-1) ** j * c
        return rows

    middle = comb(len(V), p) * len(elliptic_basis(b + q * d)) if q >= 0 else 0
    return middle - bareiss_rank(differential(p, q)) - bareiss_rank(differential(p + 1, q - 1))


# -- closed forms on P^1 ------------------------------------------------------


def p1_tensor_h1(b: int, d: int, p: int) -> int:
    """M_{O(d)} = O(-1)^d on P^1, so the tensor product is O(b-p-1)^{d^{p+1}}."""
    return d ** (p + 1) * max(0, p - b)


def p1_tensor_h0(b: int, d: int, p: int) -> int:
    return d ** (p + 1) * max(0, b - p)
