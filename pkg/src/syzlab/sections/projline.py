"""O(b) on the projective line, graded by L = O(d)."""
from __future__ import annotations

import random
from fractions import Fraction
from math import comb
from typing import Any, Dict, List

from .base import (CurveInfo, GradedSectionSystem, IndexOutOfRange, Scalar, Space,
                   SparseVec, UnsupportedPoint, V, normalize_order, to_fraction)

INF = "inf"


class ProjLineSystem(GradedSectionSystem):
    """Basis of H^0(O(k)) is t^i s^(k-i), i = 0..k; index i.

    On the chart s = 1 the section is the function τ^i; at infinity the chart
    t = 1 with parameter σ = s/t turns it into σ^(k-i).
    """

    dim_x = 1

    def __init__(self, b: int, d: int):
        super().__init__()
        if d < 1:
            raise ValueError("L = O(d) needs d >= 1")
        self.b = int(b)
        self.d = int(d)
        # H^1(O(b + k d)) = 0 for all k >= 0 exactly when b >= -1
        self.higher_cohomology_vanishes = self.b >= -1
        self.curve = CurveInfo(genus=0, deg_b=self.b, deg_l=self.d, gonality=1)

    @property
    def dim_v(self) -> int:
        return self.d + 1

    def degree(self, space: Space) -> int:
        return self.d if space == V else self.b + int(space) * self.d

    def dim_w(self, m: int) -> int:
        return max(0, self.b + m * self.d + 1)

    def _multiply(self, v: int, m: int, w: int) -> SparseVec:
        return {v + w: 1}

    def jet_row(self, space: Space, index: int, point: Any, order) -> Scalar:
        (k,) = normalize_order(order, 1)
        deg = self.degree(space)
        if not 0 <= index <= deg:
            raise IndexOutOfRange(f"section {index} outside H^0(O({deg}))")
        if point == INF:
            return 1 if deg - index == k else 0
        if not isinstance(point, (int, Fraction)):
            raise UnsupportedPoint(f"{point!r} is not a point of P^1")
        if k > index:
            return 0
        return comb(index, k) * Fraction(point) ** (index - k)

    def descriptor(self) -> Dict[str, Any]:
        return {"system": "projline", "b": self.b, "d": self.d}

    def parse_point(self, text: str) -> Any:
        text = text.strip()
        if text.lower() in (INF, "infinity", "∞"):
            return INF
        try:
            return to_fraction(text)
        except (ValueError, ZeroDivisionError):
            raise UnsupportedPoint(f"cannot parse {text!r} as a point of P^1") from None

    def random_point(self, rng: random.Random, box: int) -> Any:
        return Fraction(rng.randint(-box, box))

    def format_point(self, point: Any) -> str:
        return INF if point == INF else str(point)

    def distinct_points(self, count: int) -> List[Any]:
        return [Fraction(i) for i in range(count)]
