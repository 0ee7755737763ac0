"""Basis bookkeeping for exterior powers of a finite-dimensional space.

Basis elements of Λ^p V are strictly increasing index tuples, ordered
lexicographically; every matrix in the package indexes Λ^p V this way.
"""
from __future__ import annotations

from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Dict, List, Tuple

WedgeIndex = Tuple[int, ...]


class InvalidIndex(ValueError):
    pass


@lru_cache(maxsize=None)
def binom(n: int, k: int) -> int:
    if k < 0 or n < 0 or k > n:
        return 0
    return comb(n, k)


@lru_cache(maxsize=256)
def wedge_basis(dim_v: int, p: int) -> Tuple[WedgeIndex, ...]:
    """All C(dim_v, p) increasing p-tuples in lexicographic order."""
    if p < 0 or p > dim_v:
        return ()
    return tuple(combinations(range(dim_v), p))


@lru_cache(maxsize=256)
def wedge_positions(dim_v: int, p: int) -> Dict[WedgeIndex, int]:
    """Lookup table ``wedge -> rank``; the fast path used when assembling matrices."""
    return {w: i for i, w in enumerate(wedge_basis(dim_v, p))}


def contract(w: WedgeIndex, j: int) -> Tuple[WedgeIndex, int]:
    """Drop the j-th factor of ``w``; the sign is (-1)^j."""
    if not 0 <= j < len(w):
        raise IndexError(f"position {j} out of range for {w}")
    return w[:j] + w[j + 1:], -1 if j % 2 else 1


def _check(w: WedgeIndex, dim_v: int) -> None:
    if any(not 0 <= i < dim_v for i in w) or any(a >= b for a, b in zip(w, w[1:])):
        raise InvalidIndex(f"{w} is not an increasing tuple in [0, {dim_v})")


def rank_of(w: WedgeIndex, dim_v: int) -> int:
    """Lexicographic position of ``w`` among increasing len(w)-tuples."""
    _check(w, dim_v)
    p = len(w)
    pos = 0
    prev = -1
    for k, i in enumerate(w):
        # tuples agreeing so far but with a smaller entry in slot k
        for c in range(prev + 1, i):
            pos += binom(dim_v - c - 1, p - k - 1)
        prev = i
    return pos


def unrank(pos: int, dim_v: int, p: int) -> WedgeIndex:
    """Inverse of :func:`rank_of`."""
    if not 0 <= pos < binom(dim_v, p):
        raise InvalidIndex(f"position {pos} outside [0, C({dim_v},{p}))")
    out: List[int] = []
    c = 0
    for k in range(p):
        while True:
            block = binom(dim_v - c - 1, p - k - 1)
            if pos < block:
                break
            pos -= block
            c += 1
        out.append(c)
        c += 1
    return tuple(out)
