"""Cohomology of (⊗^{p+1} M_L) ⊗ B through global sections.

Tensoring p+1 copies of 0 -> M_L -> V ⊗ O -> L -> 0 and twisting by B gives
a resolution of (⊗^{p+1} M_L) ⊗ B by the sheaves

    E_k = ⊕_{|S| = k} (⊗_{i ∉ S} V) ⊗ (B + kL),   S ⊆ {0, ..., p},

so when H^i(B + kL) = 0 for i > 0 and k >= 0, H^j of the kernel bundle
product is the cohomology at position j of the complex of global sections
E_0 -> E_1 -> ... -> E_{p+1}.  The map E_k -> E_{k+1} multiplies the V
factor in slot i into the section factor and inserts i into S, with sign
(-1)^{#{s in S : s < i}}.

Basis order: |S|, then S lexicographically, then the remaining tensor
factors lexicographically, then the section index.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from math import comb
from typing import Any, Dict, List, Optional, Tuple

from .exact_linalg import Column, ExactMatrix, FieldSpec, compose_check, rank
from .koszul import DEFAULT_BUDGET, SizeBudgetExceeded, grade_dim, kpq_dim
from .sections import GradedSectionSystem


class HypothesisNotAsserted(Exception):
    """The backend does not assert H^i(B + kL) = 0 for i > 0, k >= 0."""


def term_dim(sys: GradedSectionSystem, p: int, k: int) -> int:
    if not 0 <= k <= p + 1:
        return 0
    return sys.dim_v ** (p + 1 - k) * comb(p + 1, k) * grade_dim(sys, k)


def tensor_map(sys: GradedSectionSystem, p: int, k: int,
               budget: Optional[int] = DEFAULT_BUDGET) -> ExactMatrix:
    """The differential E_k -> E_{k+1} of the (p+1)-fold tensor resolution."""
    n = p + 1
    dv = sys.dim_v
    ncols = term_dim(sys, p, k)
    nrows = term_dim(sys, p, k + 1)
    if budget is not None and max(ncols, nrows) > budget:
        raise SizeBudgetExceeded(f"tensor term E_{k} -> E_{k + 1} ({nrows}x{ncols})", max(ncols, nrows), budget)
    if ncols == 0 or nrows == 0:
        return ExactMatrix.zeros(nrows, ncols)
    dw = grade_dim(sys, k)
    dw1 = grade_dim(sys, k + 1)
    table = sys.mult_table(k)
    free_out = dv ** (n - k - 1)
    subset_pos = {s: i for i, s in enumerate(combinations(range(n), k + 1))}

    cols: List[Column] = []
    nnz = 0
    for subset in combinations(range(n), k):
        rest = [i for i in range(n) if i not in subset]
        # for each free slot: (factor position, row offset of S ∪ {i}, sign)
        slots = []
        for j, i in enumerate(rest):
            target = tuple(sorted(subset + (i,)))
            sign = -1 if sum(s < i for s in subset) % 2 else 1
            slots.append((j, subset_pos[target] * free_out, sign))
        for factors in product(range(dv), repeat=n - k):
            faces = []
            for j, base, sign in slots:
                others = factors[:j] + factors[j + 1:]
                idx = 0
                for x in others:
                    idx = idx * dv + x
                faces.append(((base + idx) * dw1, sign, table[factors[j]]))
            for s in range(dw):
                col: Column = {}
                for offset, sign, row in faces:
                    for out, c in row[s]:
                        r = offset + out
                        col[r] = col.get(r, 0) + (c if sign > 0 else -c)
                col = {r: x for r, x in col.items() if x}
                nnz += len(col)
                cols.append(col)
            if budget is not None and nnz > budget:
                raise SizeBudgetExceeded(f"nonzeros of tensor map E_{k} -> E_{k + 1}", nnz, budget)
    return ExactMatrix._from_owned_columns(nrows, cols)


@dataclass(frozen=True)
class TensorResolutionComplex:
    p: int
    dims: Tuple[int, ...]
    maps: Tuple[ExactMatrix, ...]

    def is_complex(self) -> bool:
        return all(compose_check(b, a) for a, b in zip(self.maps, self.maps[1:]))


def build_complex(sys: GradedSectionSystem, p: int, upto: Optional[int] = None,
                  budget: Optional[int] = DEFAULT_BUDGET) -> TensorResolutionComplex:
    """Maps E_0 -> ... -> E_{upto}; the whole complex by default."""
    if p < 0:
        raise ValueError("p must be >= 0")
    last = p + 1 if upto is None else min(upto, p + 1)
    dims = tuple(term_dim(sys, p, k) for k in range(last + 1))
    maps = tuple(tensor_map(sys, p, k, budget) for k in range(last))
    return TensorResolutionComplex(p, dims, maps)


def _require_hypothesis(sys: GradedSectionSystem) -> None:
    if not sys.higher_cohomology_vanishes:
        raise HypothesisNotAsserted(
            f"{type(sys).__name__} does not assert H^i(B + kL) = 0 for i > 0, k >= 0")


def complex_cohomology(sys: GradedSectionSystem, p: int, position: int,
                       f: Optional[FieldSpec] = None, budget: Optional[int] = DEFAULT_BUDGET) -> int:
    """dim ker(E_j -> E_{j+1}) - rank(E_{j-1} -> E_j), without the hypothesis check."""
    out_rank = rank(tensor_map(sys, p, position, budget), f).rank if position <= p else 0
    in_rank = rank(tensor_map(sys, p, position - 1, budget), f).rank if position >= 1 else 0
    dim = term_dim(sys, p, position) - out_rank - in_rank
    if dim < 0:
        raise ArithmeticError(f"negative cohomology at position {position}")
    return dim


def tensor_m_h0(sys: GradedSectionSystem, p: int, f: Optional[FieldSpec] = None,
                budget: Optional[int] = DEFAULT_BUDGET) -> int:
    """h^0((⊗^{p+1} M_L) ⊗ B)."""
    _require_hypothesis(sys)
    return complex_cohomology(sys, p, 0, f, budget)


def tensor_m_h1(sys: GradedSectionSystem, p: int, f: Optional[FieldSpec] = None,
                budget: Optional[int] = DEFAULT_BUDGET) -> int:
    """h^1((⊗^{p+1} M_L) ⊗ B); its vanishing forces K_{p,1}(X, B; L) = 0."""
    _require_hypothesis(sys)
    return complex_cohomology(sys, p, 1, f, budget)


@dataclass(frozen=True)
class ImplicationReport:
    system: Dict[str, Any]
    p: int
    h1: int
    k_p1: int
    hypothesis_source: str

    @property
    def holds(self) -> bool:
        return self.h1 != 0 or self.k_p1 == 0

    @property
    def verdict(self) -> str:
        if self.h1 == 0:
            return "HOLDS" if self.k_p1 == 0 else "VIOLATED"
        return "VACUOUS"

    def to_dict(self) -> Dict[str, Any]:
        out = {"system": self.system, "p": self.p, "tensor_m_h1": self.h1, "k_p1": self.k_p1,
               "verdict": self.verdict, "hypothesis": self.hypothesis_source}
        if self.hypothesis_source == "asserted by input":
            out["caveat"] = "hypothesis asserted by input, not verified"
        return out


def summand_implication_check(sys: GradedSectionSystem, p: int, f: Optional[FieldSpec] = None,
                              budget: Optional[int] = DEFAULT_BUDGET) -> ImplicationReport:
    """Compute h^1 and dim K_{p,1} and test "h^1 = 0 implies K_{p,1} = 0"."""
    h1 = tensor_m_h1(sys, p, f, budget)
    k = kpq_dim(sys, p, 1, f, budget)
    return ImplicationReport(sys.descriptor(), p, h1, k, sys.hypothesis_source)
