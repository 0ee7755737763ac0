"""Toric backend: sections are lattice points of polytopes.

Polytopes are given as explicit lattice-point lists.  W_m is the Minkowski
sum P_B + m·P_L of point sets, computed by pairwise addition; bases are
sorted lexicographically.  Sections are Laurent monomials on the torus.
"""
from __future__ import annotations

import random
from fractions import Fraction
from math import factorial
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from .base import (GradedSectionSystem, IndexOutOfRange, Scalar, Space, SparseVec,
                   UnsupportedPoint, V, normalize_order, to_fraction)

Point = Tuple[int, ...]


def minkowski(a: Iterable[Point], b: Iterable[Point]) -> List[Point]:
    b = list(b)
    return sorted({tuple(x + y for x, y in zip(u, w)) for u in a for w in b})


def dilate(points: Sequence[Point], k: int, base: Optional[Sequence[Point]] = None) -> List[Point]:
    """base + k·points (base defaults to the origin)."""
    n = len(points[0])
    out = sorted(set(base)) if base is not None else [(0,) * n]
    for _ in range(k):
        out = minkowski(out, points)
    return out


def simplex(n: int, k: int = 1) -> List[Point]:
    """Lattice points of k times the standard n-simplex."""
    unit = [(0,) * n] + [tuple(int(i == j) for j in range(n)) for i in range(n)]
    return dilate(unit, k)


def box(n: int, k: int = 1) -> List[Point]:
    """Lattice points of [0, k]^n."""
    unit = [(0,) * n] + [tuple(int(i == j) for j in range(n)) for i in range(n)]
    out = [(0,) * n]
    for i in range(n):
        out = minkowski(out, dilate([unit[0], unit[i + 1]], k))
    return out


def parse_points(text: str) -> List[Point]:
    """``"0,0; 1,0; 0,1"`` -> list of integer tuples."""
    pts = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if chunk:
            pts.append(tuple(int(c) for c in chunk.split(",")))
    return pts


def _gen_binom(u: int, k: int) -> Fraction:
    num = 1
    for i in range(k):
        num *= u - i
    return Fraction(num, factorial(k))


class ToricSystem(GradedSectionSystem):
    higher_cohomology_vanishes = True

    def __init__(self, pb: Sequence[Sequence[int]], pl: Sequence[Sequence[int]],
                 family: Optional[Dict[str, Any]] = None):
        super().__init__()
        pb = [tuple(int(c) for c in u) for u in pb]
        pl = [tuple(int(c) for c in u) for u in pl]
        if not pl:
            raise ValueError("P_L must contain a lattice point")
        n = len(pl[0])
        if any(len(u) != n for u in pb + pl):
            raise ValueError("all lattice points must have the same dimension")
        self.dim_x = n
        self.pb = sorted(set(pb))
        self.pl = sorted(set(pl))
        self.family = family
        self._grades: Dict[int, List[Point]] = {0: self.pb}
        self._index: Dict[int, Dict[Point, int]] = {}

    @classmethod
    def from_family(cls, pb, pa, d: int, pp=None) -> "ToricSystem":
        """L_d = d·P_A + P_P, with P_P the origin by default."""
        pa = [tuple(u) for u in pa]
        n = len(pa[0])
        pp = [tuple(u) for u in pp] if pp else [(0,) * n]
        pl = dilate(pa, d, base=pp)
        return cls(pb, pl, family={"pa": [list(u) for u in sorted(set(pa))],
                                   "pp": [list(u) for u in sorted(set(pp))], "d": d})

    def grade_points(self, m: int) -> List[Point]:
        if m < 0:
            return []
        pts = self._grades.get(m)
        if pts is None:
            pts = minkowski(self.grade_points(m - 1), self.pl)
            self._grades[m] = pts
        return pts

    def _positions(self, m: int) -> Dict[Point, int]:
        pos = self._index.get(m)
        if pos is None:
            pos = {u: i for i, u in enumerate(self.grade_points(m))}
            self._index[m] = pos
        return pos

    def __getstate__(self):
        state = super().__getstate__()
        state["_grades"] = {0: self.pb}
        state["_index"] = {}
        return state

    @property
    def dim_v(self) -> int:
        return len(self.pl)

    def dim_w(self, m: int) -> int:
        return len(self.grade_points(m))

    def _multiply(self, v: int, m: int, w: int) -> SparseVec:
        u = self.pl[v]
        s = self.grade_points(m)[w]
        return {self._positions(m + 1)[tuple(a + b for a, b in zip(u, s))]: 1}

    def jet_row(self, space: Space, index: int, point: Any, order) -> Scalar:
        alpha = normalize_order(order, self.dim_x)
        pts = self.pl if space == V else self.grade_points(int(space))
        if not 0 <= index < len(pts):
            raise IndexOutOfRange(f"section {index} outside space {space}")
        z = self._check_point(point)
        u = pts[index]
        out = Fraction(1)
        for ui, ai, zi in zip(u, alpha, z):
            c = _gen_binom(ui, ai)
            if not c:
                return 0
            out *= c * zi ** (ui - ai)
        return out

    def _check_point(self, point: Any) -> Tuple[Fraction, ...]:
        try:
            z = tuple(Fraction(c) for c in point)
        except (TypeError, ValueError):
            raise UnsupportedPoint(f"{point!r} is not a torus point") from None
        if len(z) != self.dim_x or any(c == 0 for c in z):
            raise UnsupportedPoint(f"{point!r} is not in the torus (C^*)^{self.dim_x}")
        return z

    def descriptor(self) -> Dict[str, Any]:
        desc: Dict[str, Any] = {"system": "toric", "pb": [list(u) for u in self.pb],
                                "pl": [list(u) for u in self.pl]}
        if self.family:
            desc["family"] = self.family
        return desc

    def parse_point(self, text: str) -> Any:
        try:
            return self._check_point([to_fraction(c) for c in text.strip().strip("()").split(",")])
        except (ValueError, ZeroDivisionError):
            raise UnsupportedPoint(f"cannot parse {text!r} as a torus point") from None

    def random_point(self, rng: random.Random, box: int) -> Any:
        vals = [c for c in range(-box, box + 1) if c]
        return tuple(Fraction(rng.choice(vals)) for _ in range(self.dim_x))

    def format_point(self, point: Any) -> str:
        return ",".join(str(c) for c in point)

    def extra_checks(self) -> List[str]:
        out = []
        for m in self.default_grades():
            have = set(self.grade_points(m + 1))
            for s in self.grade_points(m):
                for u in self.pl:
                    if tuple(a + b for a, b in zip(u, s)) not in have:
                        out.append(f"grade {m}: {s} + {u} missing from W_{m + 1}")
        return out

    def default_grades(self) -> range:
        return range(0, 2)
