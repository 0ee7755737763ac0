"""Line bundles O(k·O) on a Weierstrass elliptic curve y^2 = x^3 + A x + B.

The basis of L(k·O) = H^0(O(k·O)) is the monomials x^i y^j (j <= 1) with pole
order 2i + 3j <= k, listed by increasing pole order: 1, x, y, x^2, x y, ...
Pole orders 0, 2, 3, 4, ... are all distinct, so the monomial of pole order
``n`` sits at index ``0`` if n == 0 else ``n - 1``.

Local parameters used for jets:

* affine point with y0 != 0:  u = x - x0,
* affine point with y0 == 0:  y,
* the base point O:           z = -x/y, with O(k·O) trivialized by z^-k.
"""
from __future__ import annotations

import random
from fractions import Fraction
from math import isqrt
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .base import (CurveInfo, GradedSectionSystem, IndexOutOfRange, ReductionFailure,
                   Scalar, Space, SparseVec, UnsupportedPoint, V, normalize_order, to_fraction)

BASE_POINT = "O"
Series = List[Fraction]


# -- truncated power series ---------------------------------------------------

def _mul(a: Series, b: Series, n: int) -> Series:
    out = [Fraction(0)] * (n + 1)
    for i, x in enumerate(a[: n + 1]):
        if x:
            for j, y in enumerate(b[: n + 1 - i]):
                out[i + j] += x * y
    return out


def _pow(a: Series, e: int, n: int) -> Series:
    out: Series = [Fraction(1)] + [Fraction(0)] * n
    for _ in range(e):
        out = _mul(out, a, n)
    return out


def _inv(a: Series, n: int) -> Series:
    out = [Fraction(0)] * (n + 1)
    out[0] = 1 / a[0]
    for k in range(1, n + 1):
        s = sum(a[i] * out[k - i] for i in range(1, min(k, len(a) - 1) + 1))
        out[k] = -s / a[0]
    return out


def _pad(a: Sequence, n: int) -> Series:
    a = [Fraction(x) for x in a[: n + 1]]
    return a + [Fraction(0)] * (n + 1 - len(a))


def _is_square(q: Fraction) -> Optional[Fraction]:
    if q < 0:
        return None
    rn, rd = isqrt(q.numerator), isqrt(q.denominator)
    if rn * rn == q.numerator and rd * rd == q.denominator:
        return Fraction(rn, rd)
    return None


class EllipticSystem(GradedSectionSystem):
    dim_x = 1

    def __init__(self, A=0, B=1, b: int = 0, d: int = 1):
        super().__init__()
        self.A = Fraction(A)
        self.B = Fraction(B)
        if 4 * self.A ** 3 + 27 * self.B ** 2 == 0:
            raise ValueError(f"y^2 = x^3 + {self.A} x + {self.B} is singular")
        if d < 1:
            raise ValueError("L = O(d·O) needs d >= 1")
        self.b = int(b)
        self.d = int(d)
        # deg(B + kL) >= 1 for every k >= 0 is what kills H^1 on genus 1
        self.higher_cohomology_vanishes = self.b >= 1
        self.curve = CurveInfo(genus=1, deg_b=self.b, deg_l=self.d, gonality=2)
        self._series: Dict[Tuple[Any, int], Tuple[Series, Series]] = {}
        self._h_inv: Dict[int, Series] = {}

    # -- bases ---------------------------------------------------------------
    def degree(self, space: Space) -> int:
        return self.d if space == V else self.b + int(space) * self.d

    @staticmethod
    def riemann_roch(k: int) -> int:
        if k < 0:
            return 0
        return 1 if k == 0 else k

    @staticmethod
    def monomial(k: int, index: int) -> Tuple[int, int]:
        """(i, j) of the basis element ``index`` of L(k·O)."""
        if not 0 <= index < EllipticSystem.riemann_roch(k):
            raise IndexOutOfRange(f"index {index} outside L({k}·O)")
        pole = 0 if index == 0 else index + 1
        return (pole // 2, 0) if pole % 2 == 0 else ((pole - 3) // 2, 1)

    @staticmethod
    def index_of(i: int, j: int) -> int:
        pole = 2 * i + 3 * j
        return 0 if pole == 0 else pole - 1

    @property
    def dim_v(self) -> int:
        return self.riemann_roch(self.d)

    def dim_w(self, m: int) -> int:
        return self.riemann_roch(self.b + m * self.d)

    def _multiply(self, v: int, m: int, w: int) -> SparseVec:
        i1, j1 = self.monomial(self.d, v)
        i2, j2 = self.monomial(self.b + m * self.d, w)
        i, j = i1 + i2, j1 + j2
        if j < 2:
            terms = {(i, j): Fraction(1)}
        else:
            # y^2 = x^3 + A x + B
            terms = {(i + 3, 0): Fraction(1)}
            if self.A:
                terms[(i + 1, 0)] = self.A
            if self.B:
                terms[(i, 0)] = self.B
        target = self.riemann_roch(self.b + (m + 1) * self.d)
        out: SparseVec = {}
        for (a, c), coef in terms.items():
            k = self.index_of(a, c)
            if not 0 <= k < target:
                raise ReductionFailure(f"x^{a} y^{c} escapes L({self.b + (m + 1) * self.d}·O)")
            out[k] = coef.numerator if coef.denominator == 1 else coef
        return out

    # -- points ----------------------------------------------------------------
    def rhs(self, x: Fraction) -> Fraction:
        return x ** 3 + self.A * x + self.B

    def on_curve(self, point: Any) -> bool:
        if point == BASE_POINT:
            return True
        x, y = point
        return y * y == self.rhs(x)

    def _check_point(self, point: Any) -> Any:
        if point == BASE_POINT:
            return point
        try:
            x, y = Fraction(point[0]), Fraction(point[1])
        except (TypeError, ValueError, IndexError):
            raise UnsupportedPoint(f"{point!r} is not a point (x, y)") from None
        if y * y != self.rhs(x):
            raise UnsupportedPoint(f"({x}, {y}) is not on y^2 = x^3 + {self.A}x + {self.B}")
        return (x, y)

    def _affine_series(self, point: Tuple[Fraction, Fraction], n: int) -> Tuple[Series, Series]:
        key = (point, n)
        hit = self._series.get(key)
        if hit is not None:
            return hit
        x0, y0 = point
        g1 = 3 * x0 * x0 + self.A
        g2 = 3 * x0
        if y0:
            # parameter u = x - x0; solve y^2 = g(x0 + u) term by term
            g = _pad([y0 * y0, g1, g2, 1], n)
            ys = [y0] + [Fraction(0)] * n
            for k in range(1, n + 1):
                s = sum(ys[i] * ys[k - i] for i in range(1, k))
                ys[k] = (g[k] - s) / (2 * y0)
            xs = _pad([x0, 1], n)
        else:
            # parameter y; solve g1 u + g2 u^2 + u^3 = y^2 for u = x - x0
            u = [Fraction(0)] * (n + 1)
            t2 = _pad([0, 0, 1], n)
            for _ in range(n + 1):
                u2 = _mul(u, u, n)
                u3 = _mul(u2, u, n)
                u = [(t2[k] - g2 * u2[k] - u3[k]) / g1 for k in range(n + 1)]
            xs = [x0 + u[0]] + u[1:]
            ys = _pad([0, 1], n)
        self._series[key] = (xs, ys)
        return xs, ys

    def _base_h_inv(self, n: int) -> Series:
        # w = -1/y = z^3 h(z) with h = 1 + A z^4 h^2 + B z^6 h^3
        hit = self._h_inv.get(n)
        if hit is not None:
            return hit
        h = _pad([1], n)
        for _ in range(n // 4 + 2):
            h2 = _mul(h, h, n)
            h3 = _mul(h2, h, n)
            h = [Fraction(int(k == 0)) + (self.A * h2[k - 4] if k >= 4 else 0)
                 + (self.B * h3[k - 6] if k >= 6 else 0) for k in range(n + 1)]
        inv = _inv(h, n)
        self._h_inv[n] = inv
        return inv

    def jet_row(self, space: Space, index: int, point: Any, order) -> Scalar:
        (k,) = normalize_order(order, 1)
        deg = self.degree(space)
        i, j = self.monomial(deg, index)
        point = self._check_point(point)
        if point == BASE_POINT:
            # x^i y^j z^deg = (-1)^j z^(deg - 2i - 3j) h^-(i+j)
            shift = deg - (2 * i + 3 * j)
            if k < shift:
                return 0
            hinv = self._base_h_inv(k)
            coef = _pow(hinv, i + j, k)[k - shift]
            return -coef if j else coef
        xs, ys = self._affine_series(point, k)
        f = _mul(_pow(xs, i, k), _pow(ys, j, k), k)
        return f[k]

    # -- rational points and the group law -------------------------------------
    def add(self, P: Any, Q: Any) -> Any:
        if P == BASE_POINT:
            return Q
        if Q == BASE_POINT:
            return P
        (x1, y1), (x2, y2) = P, Q
        if x1 == x2 and y1 == -y2:
            return BASE_POINT
        if P == Q:
            lam = (3 * x1 * x1 + self.A) / (2 * y1)
        else:
            lam = (y2 - y1) / (x2 - x1)
        x3 = lam * lam - x1 - x2
        return (x3, lam * (x1 - x3) - y1)

    def neg(self, P: Any) -> Any:
        return P if P == BASE_POINT else (P[0], -P[1])

    def rational_points(self, height: int = 12, limit: int = 64) -> List[Any]:
        """Rational points found by small-height search plus group-law closure.

        Points with x = a/c^2 (|a| <= height c^2, c <= 3) are tested for a
        rational y; sums of found points are added until ``limit`` points.
        """
        found: List[Any] = [BASE_POINT]
        seen = {BASE_POINT}
        for c in range(1, 4):
            for a in range(-height * c * c, height * c * c + 1):
                x = Fraction(a, c * c)
                y = _is_square(self.rhs(x))
                if y is None:
                    continue
                for pt in ((x, y), (x, -y)):
                    if pt not in seen:
                        seen.add(pt)
                        found.append(pt)
        frontier = list(found)
        while frontier and len(found) < limit:
            nxt = []
            for P in frontier:
                for Q in list(found):
                    R = self.add(P, Q)
                    if R not in seen and (R == BASE_POINT or max(abs(R[0].numerator), R[0].denominator) < 10**6):
                        seen.add(R)
                        found.append(R)
                        nxt.append(R)
                        if len(found) >= limit:
                            break
                if len(found) >= limit:
                    break
            frontier = nxt
        return found

    def descriptor(self) -> Dict[str, Any]:
        return {"system": "elliptic", "A": str(self.A), "B": str(self.B), "b": self.b, "d": self.d}

    def parse_point(self, text: str) -> Any:
        text = text.strip()
        if text.upper() in (BASE_POINT, "INF"):
            return BASE_POINT
        body = text.strip("()")
        try:
            xs, ys = body.split(",")
            return self._check_point((to_fraction(xs), to_fraction(ys)))
        except (ValueError, ZeroDivisionError):
            raise UnsupportedPoint(f"cannot parse {text!r} as a curve point") from None

    def random_point(self, rng: random.Random, box: int) -> Any:
        pts = self._point_pool()
        return rng.choice(pts)

    def _point_pool(self) -> List[Any]:
        pool = getattr(self, "_pool", None)
        if pool is None:
            pool = self.rational_points()
            self._pool = pool
        return pool

    def format_point(self, point: Any) -> str:
        return BASE_POINT if point == BASE_POINT else f"({point[0]},{point[1]})"
