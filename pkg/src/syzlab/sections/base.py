"""The graded section system interface and its validator.

A system describes a pair (B, L) on a variety X through

* ``V = H^0(L)`` with a fixed basis,
* ``W_m = H^0(B + mL)`` with fixed bases for every integer m,
* the module action ``V x W_m -> W_{m+1}`` as sparse coordinate vectors,
* jets of basis sections at points, in a per-point local trivialization.

Spaces are addressed as an integer grade ``m`` (``0`` is ``H^0(B)``) or the
string ``"V"``.
"""
from __future__ import annotations

import random
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

Scalar = Union[int, Fraction]
Space = Union[int, str]
SparseVec = Dict[int, Scalar]
Order = Tuple[int, ...]
V = "V"


class SectionsError(Exception):
    pass


class UnsupportedPoint(SectionsError, ValueError):
    pass


class IndexOutOfRange(SectionsError, IndexError):
    pass


class ReductionFailure(SectionsError):
    pass


class GradeOutOfRange(SectionsError):
    pass


@dataclass(frozen=True)
class CurveInfo:
    genus: int
    deg_b: int
    deg_l: int
    gonality: int


def normalize_order(order: Union[int, Sequence[int]], n: int) -> Order:
    if isinstance(order, int):
        order = (order,)
    order = tuple(int(a) for a in order)
    if len(order) != n or any(a < 0 for a in order):
        raise ValueError(f"derivative order {order} is not a multi-index of length {n}")
    return order


def multi_indices(n: int, max_total: int) -> List[Order]:
    """Multi-indices of length n with total degree <= max_total, by degree then lex."""
    out: List[Order] = []
    for total in range(max_total + 1):
        out.extend(_compositions(n, total))
    return out


def _compositions(n: int, total: int) -> List[Order]:
    if n == 1:
        return [(total,)]
    out = []
    for first in range(total, -1, -1):
        for rest in _compositions(n - 1, total - first):
            out.append((first,) + rest)
    return out


def to_fraction(text: Any) -> Fraction:
    return Fraction(str(text).strip())


class GradedSectionSystem(ABC):
    dim_x: int = 1
    higher_cohomology_vanishes: bool = True
    # "derived" for built-in backends, "asserted by input" for file systems
    hypothesis_source: str = "derived"
    curve: Optional[CurveInfo] = None

    def __init__(self):
        self._tables: Dict[int, List[List[Tuple[Tuple[int, Scalar], ...]]]] = {}

    # -- capabilities -----------------------------------------------------
    @property
    @abstractmethod
    def dim_v(self) -> int:
        ...

    @abstractmethod
    def dim_w(self, m: int) -> int:
        ...

    @abstractmethod
    def _multiply(self, v: int, m: int, w: int) -> SparseVec:
        ...

    @abstractmethod
    def jet_row(self, space: Space, index: int, point: Any, order) -> Scalar:
        """Taylor coefficient (∂^α/α!) of a basis section at ``point``."""

    @abstractmethod
    def descriptor(self) -> Dict[str, Any]:
        """JSON-able description; identical systems give identical descriptors."""

    @abstractmethod
    def parse_point(self, text: str) -> Any:
        ...

    @abstractmethod
    def random_point(self, rng: random.Random, box: int) -> Any:
        ...

    def format_point(self, point: Any) -> str:
        return str(point)

    # -- derived helpers ----------------------------------------------------
    def space_dim(self, space: Space) -> int:
        return self.dim_v if space == V else self.dim_w(int(space))

    def multiply(self, v: int, m: int, w: int) -> SparseVec:
        if not 0 <= v < self.dim_v:
            raise IndexOutOfRange(f"v index {v} outside [0, {self.dim_v})")
        if not 0 <= w < self.dim_w(m):
            raise IndexOutOfRange(f"w index {w} outside [0, {self.dim_w(m)}) in grade {m}")
        return self._multiply(v, m, w)

    def mult_table(self, m: int) -> List[List[Tuple[Tuple[int, Scalar], ...]]]:
        """``table[v][w]`` = product ``v*w`` as a tuple of (index, coefficient)."""
        table = self._tables.get(m)
        if table is None:
            dw = self.dim_w(m)
            table = [[tuple(self._multiply(v, m, w).items()) for w in range(dw)] for v in range(self.dim_v)]
            self._tables[m] = table
        return table

    def __getstate__(self):
        state = self.__dict__.copy()
        state["_tables"] = {}
        return state

    def __repr__(self) -> str:
        d = self.descriptor()
        return f"{type(self).__name__}({', '.join(f'{k}={v}' for k, v in d.items() if k != 'system')})"

    def default_grades(self) -> range:
        return range(0, 3)

    def extra_checks(self) -> List[str]:
        """Backend-specific consistency checks for :func:`validate_system`."""
        return []


@dataclass
class ValidationReport:
    system: Dict[str, Any]
    checked_triples: int = 0
    sampled: bool = False
    violations: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> Dict[str, Any]:
        return {
            "system": self.system,
            "checked_triples": self.checked_triples,
            "sampled": self.sampled,
            "ok": self.ok,
            "violations": list(self.violations),
        }


def _add_into(acc: Dict[int, Scalar], vec, coef: Scalar) -> None:
    for k, x in vec:
        acc[k] = acc.get(k, 0) + coef * x


def validate_system(sys: GradedSectionSystem, grades: Optional[Sequence[int]] = None,
                    max_triples: int = 20_000, seed: int = 0) -> ValidationReport:
    """Check dimensions, index ranges and commutativity of the module action.

    Commutativity means ``v1*(v2*w) == v2*(v1*w)`` for all v1 < v2 and w in
    W_m; above ``max_triples`` triples a seeded random sample is checked.
    """
    report = ValidationReport(sys.descriptor())
    grades = list(sys.default_grades() if grades is None else grades)
    for m in grades:
        for mm in (m, m + 1, m + 2):
            try:
                if sys.dim_w(mm) < 0:
                    report.violations.append(f"negative dimension in grade {mm}")
            except GradeOutOfRange:
                pass

    for m in grades:
        try:
            dims = (sys.dim_w(m), sys.dim_w(m + 1), sys.dim_w(m + 2))
        except GradeOutOfRange:
            continue
        bad_index = False
        for mm in (m, m + 1):
            for v in range(sys.dim_v):
                for w in range(sys.dim_w(mm)):
                    for k, _ in sys._multiply(v, mm, w).items():
                        if not 0 <= k < sys.dim_w(mm + 1):
                            report.violations.append(
                                f"grade {mm}: v={v} * w={w} lands on index {k} outside W_{mm + 1}")
                            bad_index = True
        if bad_index:
            continue
        t1 = sys.mult_table(m)
        t2 = sys.mult_table(m + 1)
        triples = [(v1, v2, w) for v1, v2 in combinations(range(sys.dim_v), 2) for w in range(dims[0])]
        if len(triples) > max_triples:
            triples = random.Random(seed).sample(triples, max_triples)
            report.sampled = True
        for v1, v2, w in triples:
            left: Dict[int, Scalar] = {}
            for k, x in t1[v2][w]:
                _add_into(left, t2[v1][k], x)
            right: Dict[int, Scalar] = {}
            for k, x in t1[v1][w]:
                _add_into(right, t2[v2][k], x)
            left = {k: x for k, x in left.items() if x}
            right = {k: x for k, x in right.items() if x}
            if left != right:
                report.violations.append(
                    f"grade {m}: (v1={v1}, v2={v2}, w={w}) has v1*(v2*w) != v2*(v1*w)")
            report.checked_triples += 1
    report.violations.extend(sys.extra_checks())
    return report
