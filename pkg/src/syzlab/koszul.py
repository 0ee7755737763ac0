"""Koszul cohomology K_{p,q}(X, B; L) from the three-term wedge complex.

The complex at (p, q) is

    Λ^{p+1} V ⊗ W_{q-1}  --d_in-->  Λ^p V ⊗ W_q  --d_out-->  Λ^{p-1} V ⊗ W_{q+1}

with d(e_{i_0} ∧ ... ∧ e_{i_{p-1}} ⊗ s) = Σ_j (-1)^j e_{...î_j...} ⊗ (v_{i_j} · s).
Grades m < 0 are treated as empty: the module is ⊕_{m >= 0} W_m.

Basis of Λ^p V ⊗ W_q: wedge-major (lexicographic wedges), section-minor, so
the basis element (w, s) has index ``rank_of(w) * dim W_q + s``.
"""
from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Protocol, Tuple

from .exact_linalg import Column, ExactMatrix, FieldSpec, compose_check, rank
from .exterior import binom, wedge_basis, wedge_positions
from .sections import (EllipticSystem, GradedSectionSystem, GradeOutOfRange, ProjLineSystem,
                       SectionsError)

DEFAULT_BUDGET = 200_000
FORMAT_VERSION = 1


class KoszulError(Exception):
    pass


class SizeBudgetExceeded(KoszulError):
    def __init__(self, what: str, size: int, budget: int):
        super().__init__(f"{what}: {size} exceeds the size budget {budget}")
        self.what = what
        self.size = size
        self.budget = budget


class NegativeDimension(KoszulError):
    """A computed cohomology dimension came out negative: the assembly is wrong."""


class UnsupportedBackend(KoszulError):
    pass


class RankCache(Protocol):
    def get(self, key: str) -> Optional[dict]: ...
    def put(self, key: str, value: dict) -> None: ...


def grade_dim(sys: GradedSectionSystem, m: int) -> int:
    return 0 if m < 0 else sys.dim_w(m)


def koszul_map(sys: GradedSectionSystem, p: int, q: int,
               budget: Optional[int] = DEFAULT_BUDGET) -> ExactMatrix:
    """The differential Λ^p V ⊗ W_q -> Λ^{p-1} V ⊗ W_{q+1}, built column by column."""
    dv = sys.dim_v
    dw = grade_dim(sys, q)
    ncols = binom(dv, p) * dw
    if p <= 0 or ncols == 0:
        nrows = binom(dv, p - 1) * grade_dim(sys, q + 1) if p > 0 else 0
        return ExactMatrix.zeros(nrows, ncols)
    dw1 = grade_dim(sys, q + 1)
    nrows = binom(dv, p - 1) * dw1
    if budget is not None and max(ncols, nrows) > budget:
        raise SizeBudgetExceeded(f"Λ^{p}V⊗W_{q} -> Λ^{p - 1}V⊗W_{q + 1} ({nrows}x{ncols})",
                                 max(ncols, nrows), budget)
    if nrows == 0:
        return ExactMatrix.zeros(0, ncols)
    table = sys.mult_table(q)
    target = wedge_positions(dv, p - 1)
    cols: List[Column] = []
    nnz = 0
    for w in wedge_basis(dv, p):
        faces = [(target[w[:j] + w[j + 1:]] * dw1, -1 if j % 2 else 1, table[w[j]]) for j in range(p)]
        for s in range(dw):
            col: Column = {}
            for base, sign, row in faces:
                for out, c in row[s]:
                    r = base + out
                    col[r] = col.get(r, 0) + (c if sign > 0 else -c)
            col = {r: x for r, x in col.items() if x}
            nnz += len(col)
            cols.append(col)
        if budget is not None and nnz > budget:
            raise SizeBudgetExceeded(f"nonzeros of Λ^{p}V⊗W_{q} -> Λ^{p - 1}V⊗W_{q + 1}", nnz, budget)
    return ExactMatrix._from_owned_columns(nrows, cols)


@dataclass(frozen=True)
class KoszulSlice:
    p: int
    q: int
    d_in: ExactMatrix
    d_out: ExactMatrix
    middle_dim: int

    def is_complex(self) -> bool:
        return compose_check(self.d_out, self.d_in)


def build_slice(sys: GradedSectionSystem, p: int, q: int,
                budget: Optional[int] = DEFAULT_BUDGET) -> KoszulSlice:
    if p < 0:
        raise ValueError("p must be >= 0")
    middle = binom(sys.dim_v, p) * grade_dim(sys, q)
    if budget is not None and middle > budget:
        raise SizeBudgetExceeded(f"middle term Λ^{p}V⊗W_{q}", middle, budget)
    return KoszulSlice(p, q, koszul_map(sys, p + 1, q - 1, budget), koszul_map(sys, p, q, budget), middle)


@dataclass(frozen=True)
class KpqResult:
    p: int
    q: int
    dim: int
    rank_in: int
    rank_out: int
    middle_dim: int
    certified: bool


def _combine(p: int, q: int, middle: int, r_in: int, r_out: int, certified: bool) -> KpqResult:
    kernel = middle - r_out
    dim = kernel - r_in
    if dim != middle - r_out - r_in or dim < 0 or kernel < 0:
        raise NegativeDimension(f"K_{p},{q}: middle {middle}, ranks {r_in}/{r_out}")
    return KpqResult(p, q, dim, r_in, r_out, middle, certified)


def kpq(sys: GradedSectionSystem, p: int, q: int, f: Optional[FieldSpec] = None,
        budget: Optional[int] = DEFAULT_BUDGET) -> KpqResult:
    sl = build_slice(sys, p, q, budget)
    r_in = rank(sl.d_in, f)
    r_out = rank(sl.d_out, f)
    return _combine(p, q, sl.middle_dim, r_in.rank, r_out.rank, r_in.certified and r_out.certified)


def kpq_dim(sys: GradedSectionSystem, p: int, q: int, f: Optional[FieldSpec] = None,
            budget: Optional[int] = DEFAULT_BUDGET) -> int:
    """dim K_{p,q}(X, B; L) = dim Λ^pV⊗W_q - rank d_out - rank d_in."""
    return kpq(sys, p, q, f, budget).dim


# ---------------------------------------------------------------------------
# Betti tables


@dataclass
class Cell:
    dim: Optional[int]
    certified: bool = False
    seconds: float = 0.0
    error: Optional[str] = None


@dataclass
class BettiTable:
    system: Dict[str, Any]
    p_max: int
    q_max: int
    field: FieldSpec
    cells: Dict[Tuple[int, int], Cell] = field(default_factory=dict)
    dim_v: int = 0

    def __getitem__(self, pq: Tuple[int, int]) -> int:
        cell = self.cells.get(pq)
        if cell is None:
            p, q = pq
            if p < 0 or q < 0 or p >= self.dim_v:
                return 0
            raise KeyError(f"K_{pq} was not computed")
        if cell.dim is None:
            raise KeyError(f"K_{pq} failed: {cell.error}")
        return cell.dim

    @property
    def certified(self) -> bool:
        return all(c.certified for c in self.cells.values() if c.error is None)

    @property
    def errors(self) -> Dict[Tuple[int, int], str]:
        return {pq: c.error for pq, c in self.cells.items() if c.error}

    def nonzero(self) -> Dict[Tuple[int, int], int]:
        return {pq: c.dim for pq, c in self.cells.items() if c.dim}

    def to_text(self) -> str:
        ps = range(self.p_max + 1)
        qs = range(self.q_max + 1)

        def show(p, q):
            c = self.cells[(p, q)]
            if c.dim is None:
                return "?"
            return str(c.dim) if c.dim else "."

        def total(p):
            vals = [self.cells[(p, q)].dim for q in qs]
            return "?" if any(v is None for v in vals) else str(sum(vals))

        grid = [[""] + [str(p) for p in ps], ["total:"] + [total(p) for p in ps]]
        grid += [[f"{q}:"] + [show(p, q) for p in ps] for q in qs]
        width = max(len(x) for row in grid for x in row) + 1
        lines = [row[0].rjust(7) + "".join(x.rjust(width) for x in row[1:]) for row in grid]
        return "\n".join(line.rstrip() for line in lines) + "\n"

    def to_dict(self, timings: bool = False) -> Dict[str, Any]:
        cells = []
        for (p, q) in sorted(self.cells, key=lambda pq: (pq[1], pq[0])):
            c = self.cells[(p, q)]
            rec: Dict[str, Any] = {"p": p, "q": q, "dim": c.dim, "certified": c.certified}
            if c.error:
                rec["error"] = c.error
            if timings:
                rec["seconds"] = round(c.seconds, 6)
            cells.append(rec)
        return {
            "format_version": FORMAT_VERSION,
            "kind": "betti",
            "system": self.system,
            "field": self.field.describe(),
            "certified": self.certified,
            "p_max": self.p_max,
            "q_max": self.q_max,
            "table": [[self.cells[(p, q)].dim for p in range(self.p_max + 1)] for q in range(self.q_max + 1)],
            "cells": cells,
        }

    def to_json(self, timings: bool = False) -> str:
        return json.dumps(self.to_dict(timings), sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        lines = ["q\\p," + ",".join(str(p) for p in range(self.p_max + 1))]
        for q in range(self.q_max + 1):
            vals = ["" if self.cells[(p, q)].dim is None else str(self.cells[(p, q)].dim)
                    for p in range(self.p_max + 1)]
            lines.append(f"{q}," + ",".join(vals))
        return "\n".join(lines) + "\n"


def map_cache_key(sys: GradedSectionSystem, p: int, q: int, f: FieldSpec) -> str:
    return json.dumps({"v": FORMAT_VERSION, "op": "koszul_map_rank", "system": sys.descriptor(),
                       "p": p, "q": q, "field": f.to_dict()}, sort_keys=True)


def _map_rank_task(sys: GradedSectionSystem, p: int, q: int, f: FieldSpec,
                   budget: Optional[int]) -> Dict[str, Any]:
    t0 = time.perf_counter()
    try:
        m = koszul_map(sys, p, q, budget)
        r = rank(m, f)
        return {"rank": r.rank, "certified": r.certified, "seconds": time.perf_counter() - t0}
    except (SizeBudgetExceeded, SectionsError, GradeOutOfRange) as exc:
        return {"error": f"{type(exc).__name__}: {exc}", "seconds": time.perf_counter() - t0}


def betti_table(sys: GradedSectionSystem, p_max: int, q_max: int, f: Optional[FieldSpec] = None,
                *, jobs: int = 1, budget: Optional[int] = DEFAULT_BUDGET,
                cache: Optional[RankCache] = None) -> BettiTable:
    """All cells 0 <= p <= p_max, 0 <= q <= q_max.

    Each differential's rank is computed once and shared by the two cells it
    borders; with ``jobs > 1`` the ranks are computed in worker processes.
    Failures (budget, grades out of range) are recorded per cell.
    """
    f = f or FieldSpec.multi()
    needed = set()
    for p in range(p_max + 1):
        for q in range(q_max + 1):
            needed.add((p, q))
            needed.add((p + 1, q - 1))
    results: Dict[Tuple[int, int], Dict[str, Any]] = {}
    todo = []
    for pq in sorted(needed):
        p, q = pq
        if p == 0 or binom(sys.dim_v, p) == 0 or q < 0:
            results[pq] = {"rank": 0, "certified": True, "seconds": 0.0}
            continue
        if cache is not None:
            hit = cache.get(map_cache_key(sys, p, q, f))
            if hit is not None:
                results[pq] = hit
                continue
        todo.append(pq)
    # largest maps first so the pool stays busy
    todo.sort(key=lambda pq: -binom(sys.dim_v, pq[0]) * _safe_dim(sys, pq[1]))
    if jobs > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futs = {pq: pool.submit(_map_rank_task, sys, pq[0], pq[1], f, budget) for pq in todo}
            for pq, fut in futs.items():
                results[pq] = fut.result()
    else:
        for pq in todo:
            results[pq] = _map_rank_task(sys, pq[0], pq[1], f, budget)
    if cache is not None:
        for pq in todo:
            if "error" not in results[pq]:
                cache.put(map_cache_key(sys, pq[0], pq[1], f), results[pq])

    table = BettiTable(sys.descriptor(), p_max, q_max, f, dim_v=sys.dim_v)
    for p in range(p_max + 1):
        for q in range(q_max + 1):
            r_out, r_in = results[(p, q)], results[(p + 1, q - 1)]
            secs = r_out.get("seconds", 0.0) + r_in.get("seconds", 0.0)
            err = r_out.get("error") or r_in.get("error")
            if err:
                table.cells[(p, q)] = Cell(None, False, secs, err)
                continue
            try:
                middle = binom(sys.dim_v, p) * grade_dim(sys, q)
            except GradeOutOfRange as exc:
                table.cells[(p, q)] = Cell(None, False, secs, f"GradeOutOfRange: {exc}")
                continue
            res = _combine(p, q, middle, r_in["rank"], r_out["rank"],
                           r_in["certified"] and r_out["certified"])
            table.cells[(p, q)] = Cell(res.dim, res.certified, secs)
    return table


def _safe_dim(sys: GradedSectionSystem, q: int) -> int:
    try:
        return grade_dim(sys, q)
    except GradeOutOfRange:
        return 0


# ---------------------------------------------------------------------------
# duality on curves


def retwist(sys: GradedSectionSystem, b: int, d: int) -> GradedSectionSystem:
    """The same curve with B = O(b) (resp. O(b·O)) and L of degree d."""
    if isinstance(sys, ProjLineSystem):
        return ProjLineSystem(b, d)
    if isinstance(sys, EllipticSystem):
        return EllipticSystem(sys.A, sys.B, b, d)
    raise UnsupportedBackend(f"{type(sys).__name__} is not a built-in curve backend")


def canonical_degree(sys: GradedSectionSystem) -> int:
    if sys.curve is None or sys.dim_x != 1:
        raise UnsupportedBackend("duality needs a curve backend")
    return 2 * sys.curve.genus - 2


def duality_pair(curve: GradedSectionSystem, p: int, d: int,
                 f: Optional[FieldSpec] = None) -> Tuple[int, int]:
    """(dim K_{p,1}(X, K_X; L_d), dim K_{r_d-1-p,1}(X; L_d)) on a curve.

    Only the curve of ``curve`` is used; B and L are replaced by K_X
    (resp. O_X) and the degree-d bundle of the backend.
    """
    if curve.dim_x != 1 or curve.curve is None:
        raise UnsupportedBackend("duality_pair needs a curve backend (dim_x = 1)")
    with_k = retwist(curve, canonical_degree(curve), d)
    plain = retwist(curve, 0, d)
    r_d = plain.dim_v - 1
    if not 0 <= p <= r_d - 1:
        return (0, 0)
    return (kpq_dim(with_k, p, 1, f), kpq_dim(plain, r_d - 1 - p, 1, f))
