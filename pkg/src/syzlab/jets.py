"""Jet evaluation on zero-cycles and p-jet very ampleness.

A cycle Σ a_i x_i imposes the conditions "all derivatives of order < a_i
vanish at x_i"; the jet matrix has one row per (support point, multi-index
α with |α| < a_i) and one column per basis section of H^0(B).

On curves p-jet very ampleness is p-very ampleness and is decided by degree
alone (classical: deg B >= 2g + p suffices; on P^1 and genus 1 the bound is
sharp apart from the trivial bundle).  Elsewhere the only output is a
counterexample found by search, or "not falsified within budget".
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .exact_linalg import ExactMatrix, FieldSpec, rank
from .sections import (BASE_POINT, EllipticSystem, FileSystemAlgebra, GradedSectionSystem,
                       ProjLineSystem, UnsupportedPoint, multi_indices)


class CycleError(ValueError):
    pass


@dataclass(frozen=True)
class ZeroCycle:
    """Effective zero-cycle Σ a_i x_i with pairwise distinct points."""

    support: Tuple[Tuple[Any, int], ...]

    def __post_init__(self):
        if not self.support:
            raise CycleError("a zero-cycle needs at least one point")
        pts = [pt for pt, _ in self.support]
        if len(set(pts)) != len(pts):
            raise CycleError("support points must be distinct")
        if any(int(a) < 1 for _, a in self.support):
            raise CycleError("multiplicities must be >= 1")

    @classmethod
    def reduced(cls, points: Sequence[Any]) -> "ZeroCycle":
        return cls(tuple((pt, 1) for pt in points))

    @property
    def degree(self) -> int:
        return sum(a for _, a in self.support)

    @property
    def is_reduced(self) -> bool:
        return all(a == 1 for _, a in self.support)

    def format(self, sys: GradedSectionSystem) -> str:
        return " + ".join(sys.format_point(pt) + (f"^{a}" if a > 1 else "") for pt, a in self.support)


def _split_terms(text: str) -> List[str]:
    terms, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "+" and depth == 0 and "".join(cur).strip():
            terms.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    terms.append("".join(cur))
    return [t.strip() for t in terms if t.strip()]


def parse_cycle(sys: GradedSectionSystem, text: str) -> ZeroCycle:
    """Parse ``point^mult + point^mult + ...`` in the backend's point syntax."""
    support = []
    for term in _split_terms(text):
        if "^" in term:
            pt_text, mult_text = term.rsplit("^", 1)
            try:
                mult = int(mult_text)
            except ValueError:
                raise CycleError(f"bad multiplicity in {term!r}") from None
        else:
            pt_text, mult = term, 1
        support.append((sys.parse_point(pt_text), mult))
    return ZeroCycle(tuple(support))


@dataclass(frozen=True)
class JetMatrix:
    matrix: ExactMatrix
    rows: Tuple[Tuple[int, Tuple[int, ...]], ...]
    target_dim: int


def target_dim(n: int, cycle: ZeroCycle) -> int:
    return sum(comb(n + a - 1, n) for _, a in cycle.support)


def jet_matrix(sys: GradedSectionSystem, cycle: ZeroCycle) -> JetMatrix:
    """Matrix of H^0(B) -> H^0(B ⊗ O/∏ m_i^{a_i}) in jet coordinates."""
    n = sys.dim_x
    ncols = sys.dim_w(0)
    rows: List[Tuple[int, Tuple[int, ...]]] = []
    dense: List[List[Any]] = []
    for i, (pt, a) in enumerate(cycle.support):
        for alpha in multi_indices(n, a - 1):
            rows.append((i, alpha))
            dense.append([sys.jet_row(0, s, pt, alpha) for s in range(ncols)])
    mat = ExactMatrix(len(rows), ncols, ((r, c, x) for r, row in enumerate(dense) for c, x in enumerate(row) if x))
    return JetMatrix(mat, tuple(rows), target_dim(n, cycle))


@dataclass(frozen=True)
class JetCheck:
    rank: int
    target_dim: int
    certified: bool

    @property
    def independent(self) -> bool:
        return self.rank == self.target_dim


def check_cycle(sys: GradedSectionSystem, cycle: ZeroCycle, f: Optional[FieldSpec] = None) -> JetCheck:
    jm = jet_matrix(sys, cycle)
    r = rank(jm.matrix, f or FieldSpec.rational())
    return JetCheck(r.rank, jm.target_dim, r.certified)


def imposes_independent_conditions(sys: GradedSectionSystem, cycle: ZeroCycle,
                                   f: Optional[FieldSpec] = None) -> bool:
    return check_cycle(sys, cycle, f).independent


# ---------------------------------------------------------------------------
# deciding / falsifying p-jet very ampleness


def curve_closed_form(sys: GradedSectionSystem, p: int) -> Optional[bool]:
    """Exact p-very-ampleness of B for the built-in curve backends, else None."""
    if isinstance(sys, ProjLineSystem):
        return sys.b >= p
    if isinstance(sys, EllipticSystem):
        return sys.b >= p + 2 or (sys.b == 0 and p == 0)
    return None


@dataclass
class SearchResult:
    p: int
    cycle: Optional[ZeroCycle]
    jet_very_ample: Optional[bool]
    certified: bool
    method: str
    strategy: str
    seed: int
    trials: int = 0
    rank: Optional[int] = None
    target_dim: Optional[int] = None
    note: str = ""

    @property
    def found(self) -> bool:
        return self.cycle is not None

    @property
    def verdict(self) -> str:
        if self.jet_very_ample is True:
            return "JET_VERY_AMPLE"
        if self.jet_very_ample is False:
            return "NOT_JET_VERY_AMPLE"
        return "NOT_FALSIFIED"

    def to_dict(self, sys: GradedSectionSystem) -> Dict[str, Any]:
        return {
            "p": self.p,
            "verdict": self.verdict,
            "certified": self.certified,
            "method": self.method,
            "strategy": self.strategy,
            "seed": self.seed,
            "trials": self.trials,
            "cycle": self.cycle.format(sys) if self.cycle else None,
            "reduced": self.cycle.is_reduced if self.cycle else None,
            "rank": self.rank,
            "target_dim": self.target_dim,
            "note": self.note,
        }


def _distinct_points(sys: GradedSectionSystem, count: int, rng: random.Random, box: int,
                     avoid: Sequence[Any] = ()) -> Optional[List[Any]]:
    pts: List[Any] = []
    for _ in range(50 * count + 50):
        if len(pts) == count:
            break
        pt = sys.random_point(rng, box)
        if pt not in pts and pt not in avoid:
            pts.append(pt)
    return pts if len(pts) == count else None


def _aligned_points(sys: GradedSectionSystem, count: int, rng: random.Random, box: int) -> Optional[List[Any]]:
    """Points sharing coordinates with earlier ones (rulings, coordinate lines)."""
    n = sys.dim_x
    if n < 2 or not isinstance(sys.random_point(rng, box), tuple):
        return _distinct_points(sys, count, rng, box)
    pts: List[Any] = [sys.random_point(rng, box)]
    for _ in range(50 * count):
        if len(pts) == count:
            break
        base = rng.choice(pts)
        fresh = sys.random_point(rng, box)
        keep = set(rng.sample(range(n), rng.randint(1, n - 1)))
        pt = tuple(base[i] if i in keep else fresh[i] for i in range(n))
        if pt not in pts:
            pts.append(pt)
    return pts if len(pts) == count else None


def _draw(sys: GradedSectionSystem, p: int, kind: str, rng: random.Random, box: int) -> Optional[ZeroCycle]:
    deg = p + 1
    if kind == "random":
        pts = _distinct_points(sys, deg, rng, box)
        return ZeroCycle.reduced(pts) if pts else None
    if kind == "aligned":
        pts = _aligned_points(sys, deg, rng, box)
        return ZeroCycle.reduced(pts) if pts else None
    # weighted: one fat point of multiplicity >= 2, the rest reduced
    if deg < 2:
        return _draw(sys, p, "random", rng, box)
    fat = rng.randint(2, deg)
    pts = (_aligned_points if rng.random() < 0.5 else _distinct_points)(sys, deg - fat + 1, rng, box)
    if not pts:
        return None
    return ZeroCycle(((pts[0], fat),) + tuple((pt, 1) for pt in pts[1:]))


STRATEGIES = ("auto", "closed-form", "random", "weighted", "aligned", "mixed")


def _curve_counterexample(sys: GradedSectionSystem, p: int, f: FieldSpec) -> Tuple[Optional[ZeroCycle], str]:
    deg = p + 1
    if isinstance(sys, ProjLineSystem):
        return ZeroCycle.reduced(sys.distinct_points(deg)), ""
    assert isinstance(sys, EllipticSystem)
    pool = sys._point_pool()
    if sys.dim_w(0) < deg:
        if len(pool) >= deg:
            return ZeroCycle.reduced(pool[:deg]), ""
        return None, f"only {len(pool)} rational points located"
    # deg B = p + 1: the points must add up to O in the group law
    for combo in combinations(pool, deg):
        total = BASE_POINT
        for pt in combo:
            total = sys.add(total, pt)
        if total == BASE_POINT:
            return ZeroCycle.reduced(list(combo)), ""
    return None, "no rational points summing to O located; verdict from degree alone"


def search_violating_cycle(sys: GradedSectionSystem, p: int, budget: int = 10_000,
                           strategy: str = "auto", seed: int = 0, box: int = 5,
                           f: Optional[FieldSpec] = None) -> SearchResult:
    """Look for a degree-(p+1) cycle on which the jet map is not surjective.

    ``auto`` uses the exact curve criterion when available (certified, with a
    deterministic reduced counterexample) and ``mixed`` search otherwise.
    A failed search is never a certificate.
    """
    if p < 0:
        raise ValueError("p must be >= 0")
    if strategy not in STRATEGIES:
        raise ValueError(f"strategy must be one of {STRATEGIES}")
    f = f or FieldSpec.rational()
    closed = curve_closed_form(sys, p)
    if strategy in ("auto", "closed-form") and closed is not None:
        if closed:
            return SearchResult(p, None, True, True, "closed-form", strategy, seed)
        cycle, note = _curve_counterexample(sys, p, f)
        res = SearchResult(p, cycle, False, True, "closed-form", strategy, seed, note=note)
        if cycle is not None:
            chk = check_cycle(sys, cycle, f)
            if chk.independent:
                raise AssertionError(f"constructed cycle {cycle.format(sys)} imposes independent conditions")
            res.rank, res.target_dim = chk.rank, chk.target_dim
        return res
    if strategy == "closed-form":
        raise ValueError("no closed-form criterion for this backend")

    rng = random.Random(seed)
    kinds = {"random": ["random"], "weighted": ["weighted"], "aligned": ["aligned"]}.get(
        strategy, ["random", "weighted", "aligned"])
    for trial in range(1, budget + 1):
        kind = kinds[trial % len(kinds)]
        try:
            cycle = _draw(sys, p, kind, rng, box)
        except UnsupportedPoint:
            cycle = None
        if cycle is None:
            continue
        chk = check_cycle(sys, cycle, f)
        if not chk.independent:
            return SearchResult(p, cycle, False, True, "search", strategy, seed, trial,
                                chk.rank, chk.target_dim)
    return SearchResult(p, None, None, False, "search", strategy, seed, budget,
                        note="no violation within budget" + ("" if closed is None else f"; closed form: {closed}"))
