"""Exact sparse linear algebra over Q and over large random prime fields.

Matrices act on column vectors and are stored column-wise as dicts
``row -> scalar``.  Scalars are Python ints or :class:`fractions.Fraction`;
prime-field work converts them to residues on the fly.

Every rank goes through the same pipeline: split the matrix into the
connected components of its row/column incidence graph (rank is additive
over blocks), then eliminate each block.  For the Koszul matrices built in
this package the components are exactly the torus-weight blocks, which is
what keeps desk-scale Betti tables cheap.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from heapq import heappop, heappush
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

Scalar = Union[int, Fraction]
Column = Dict[int, Scalar]

PRIME_LOW = 2**61
PRIME_HIGH = 2**62
# Blocks with more nonzeros than this go to the black-box (Wiedemann) rank
# when working over a prime field.
DEFAULT_ITERATIVE_THRESHOLD = 1_000_000


class LinalgError(Exception):
    pass


class PrimeClash(LinalgError):
    """A rational entry has a denominator divisible by the chosen prime."""

    def __init__(self, prime: int, denominator: int):
        super().__init__(f"denominator {denominator} vanishes modulo {prime}")
        self.prime = prime
        self.denominator = denominator


class DimensionMismatch(LinalgError, ValueError):
    pass


def _is_probable_prime(n: int) -> bool:
    from sympy import isprime

    return bool(isprime(n))


def random_prime(rng: random.Random) -> int:
    """A uniformly placed prime in [2^61, 2^62)."""
    from sympy import nextprime

    while True:
        p = int(nextprime(rng.randrange(PRIME_LOW, PRIME_HIGH)))
        if p < PRIME_HIGH:
            return p


@lru_cache(maxsize=256)
def _draw_primes(seed: int, n: int) -> Tuple[int, ...]:
    rng = random.Random(seed)
    out: List[int] = []
    while len(out) < n:
        p = random_prime(rng)
        if p not in out:
            out.append(p)
    return tuple(out)


@dataclass(frozen=True)
class FieldSpec:
    """Which field ranks are computed over.

    ``kind`` is ``"rational"``, ``"prime"`` or ``"multi"``.  Random primes are
    drawn from ``seed`` so every run is reproducible.
    """

    kind: str = "multi"
    prime: Optional[int] = None
    count: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("rational", "prime", "multi"):
            raise ValueError(f"unknown field kind {self.kind!r}")
        if self.kind == "multi" and self.count < 2:
            raise ValueError("multi-prime consensus needs at least 2 primes")
        if self.kind == "prime" and self.prime is not None:
            if self.prime <= 2**31 or not _is_probable_prime(self.prime):
                raise ValueError(f"{self.prime} is not a prime above 2^31")

    @classmethod
    def rational(cls) -> "FieldSpec":
        return cls("rational")

    @classmethod
    def prime_field(cls, prime: Optional[int] = None, seed: int = 0) -> "FieldSpec":
        return cls("prime", prime=prime, seed=seed)

    @classmethod
    def multi(cls, count: int = 3, seed: int = 0) -> "FieldSpec":
        return cls("multi", count=count, seed=seed)

    @classmethod
    def parse(cls, text: str, seed: int = 0) -> "FieldSpec":
        """Parse the CLI syntax ``auto | rational | prime[:P] | multi:N``."""
        text = text.strip().lower()
        if text == "auto":
            return cls.multi(3, seed)
        if text == "rational":
            return cls.rational()
        if text == "prime":
            return cls.prime_field(seed=seed)
        if text.startswith("prime:"):
            return cls.prime_field(int(text[6:]), seed=seed)
        if text.startswith("multi:"):
            return cls.multi(int(text[6:]), seed)
        raise ValueError(f"unrecognised field {text!r}")

    def primes(self, extra: int = 0) -> List[int]:
        """Primes for this field; ``extra`` draws replacements after clashes."""
        if self.kind == "rational":
            return []
        if self.kind == "prime" and self.prime is not None:
            return [self.prime]
        return list(_draw_primes(self.seed, (1 if self.kind == "prime" else self.count) + extra))

    def describe(self) -> str:
        if self.kind == "rational":
            return "rational"
        if self.kind == "prime":
            return f"prime:{self.primes()[0]}"
        return f"multi:{self.count}@seed={self.seed}"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "prime": self.prime, "count": self.count, "seed": self.seed}


@dataclass(frozen=True)
class RankResult:
    rank: int
    field: FieldSpec
    certified: bool
    escalated: bool = False
    primes: Tuple[int, ...] = ()

    def __int__(self) -> int:
        return self.rank


class ExactMatrix:
    """Immutable sparse matrix with exact scalar entries.

    Stored as one ``{row: value}`` dict per column; explicit zeros are never
    kept.
    """

    __slots__ = ("nrows", "ncols", "_cols", "_nnz")

    def __init__(self, nrows: int, ncols: int, entries: Iterable[Tuple[int, int, Scalar]] = ()):
        if nrows < 0 or ncols < 0:
            raise ValueError("negative dimension")
        cols: List[Column] = [{} for _ in range(ncols)]
        for r, c, v in entries:
            if not (0 <= r < nrows and 0 <= c < ncols):
                raise IndexError(f"entry ({r}, {c}) outside {nrows}x{ncols}")
            col = cols[c]
            x = col.get(r, 0) + v
            if x:
                col[r] = x
            else:
                col.pop(r, None)
        self._init(nrows, ncols, cols)

    def _init(self, nrows: int, ncols: int, cols: List[Column]) -> None:
        self.nrows = nrows
        self.ncols = ncols
        self._cols = cols
        self._nnz = sum(len(c) for c in cols)

    @classmethod
    def from_columns(cls, nrows: int, columns: Sequence[Column]) -> "ExactMatrix":
        """Build from column dicts; zeros are dropped, the dicts are copied."""
        cols = []
        for col in columns:
            for r in col:
                if not 0 <= r < nrows:
                    raise IndexError(f"row {r} outside [0, {nrows})")
            cols.append({r: v for r, v in col.items() if v})
        m = cls.__new__(cls)
        m._init(nrows, len(cols), cols)
        return m

    @classmethod
    def _from_owned_columns(cls, nrows: int, columns: List[Column]) -> "ExactMatrix":
        # Caller guarantees in-range rows, no zeros, and hands over ownership.
        m = cls.__new__(cls)
        m._init(nrows, len(columns), columns)
        return m

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence[Scalar]]) -> "ExactMatrix":
        nrows = len(rows)
        ncols = len(rows[0]) if nrows else 0
        return cls(nrows, ncols, ((i, j, v) for i, row in enumerate(rows) for j, v in enumerate(row) if v))

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "ExactMatrix":
        return cls(nrows, ncols)

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        return cls(n, n, ((i, i, 1) for i in range(n)))

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.nrows, self.ncols)

    @property
    def nnz(self) -> int:
        return self._nnz

    def column(self, j: int) -> Dict[int, Scalar]:
        return dict(self._cols[j])

    def entries(self) -> Iterator[Tuple[int, int, Scalar]]:
        for c, col in enumerate(self._cols):
            for r in sorted(col):
                yield r, c, col[r]

    def transpose(self) -> "ExactMatrix":
        cols: List[Column] = [{} for _ in range(self.nrows)]
        for c, col in enumerate(self._cols):
            for r, v in col.items():
                cols[r][c] = v
        return ExactMatrix._from_owned_columns(self.ncols, cols)

    def to_dense(self) -> List[List[Scalar]]:
        out: List[List[Scalar]] = [[0] * self.ncols for _ in range(self.nrows)]
        for c, col in enumerate(self._cols):
            for r, v in col.items():
                out[r][c] = v
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return self.shape == other.shape and self._cols == other._cols

    def __repr__(self) -> str:
        return f"ExactMatrix({self.nrows}x{self.ncols}, nnz={self.nnz})"

    def dump(self) -> str:
        """Debug text: ``rows cols`` header then ``row col num/den`` lines."""
        lines = [f"{self.nrows} {self.ncols}"]
        for r, c, v in self.entries():
            v = Fraction(v)
            lines.append(f"{r} {c} {v.numerator}/{v.denominator}")
        return "\n".join(lines) + "\n"

    @classmethod
    def load(cls, text: str) -> "ExactMatrix":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        nrows, ncols = map(int, lines[0].split())
        entries = []
        for ln in lines[1:]:
            r, c, v = ln.split()
            entries.append((int(r), int(c), _normalize(Fraction(v))))
        return cls(nrows, ncols, entries)


def _normalize(v: Fraction) -> Scalar:
    return v.numerator if v.denominator == 1 else v


def matmul(a: ExactMatrix, b: ExactMatrix) -> ExactMatrix:
    """The product a·b (b applied first)."""
    if a.ncols != b.nrows:
        raise DimensionMismatch(f"cannot compose {a.shape} after {b.shape}")
    acols = a._cols
    out: List[Column] = []
    for col in b._cols:
        acc: Column = {}
        for k, x in col.items():
            for r, y in acols[k].items():
                acc[r] = acc.get(r, 0) + x * y
        out.append({r: v for r, v in acc.items() if v})
    return ExactMatrix._from_owned_columns(a.nrows, out)


def compose_check(a: ExactMatrix, b: ExactMatrix) -> bool:
    """True iff a∘b (b applied first) is the zero matrix.

    Works column by column so nothing is ever densified.
    """
    if a.ncols != b.nrows:
        raise DimensionMismatch(f"cannot compose {a.shape} after {b.shape}")
    acols = a._cols
    for col in b._cols:
        acc: Column = {}
        for k, x in col.items():
            for r, y in acols[k].items():
                acc[r] = acc.get(r, 0) + x * y
        for v in acc.values():
            if v:
                return False
    return True


# ---------------------------------------------------------------------------
# rank machinery


def _components(m: ExactMatrix) -> List[List[Column]]:
    """Column blocks of the connected components of the incidence graph."""
    nonzero_cols = [j for j, c in enumerate(m._cols) if c]
    if not nonzero_cols:
        return []
    if len(nonzero_cols) == 1:
        return [[m._cols[nonzero_cols[0]]]]
    rows, cols = [], []
    for j in nonzero_cols:
        for r in m._cols[j]:
            rows.append(r)
            cols.append(j)
    n = m.ncols + m.nrows
    graph = coo_matrix(
        (np.ones(len(rows), dtype=np.int8), (np.asarray(cols), np.asarray(rows) + m.ncols)),
        shape=(n, n),
    )
    _, labels = connected_components(graph, directed=False)
    blocks: Dict[int, List[Column]] = {}
    for j in nonzero_cols:
        blocks.setdefault(int(labels[j]), []).append(m._cols[j])
    return list(blocks.values())


def _ordered(vectors: List[Column]) -> List[Column]:
    """Static Markowitz-style ordering.

    Coordinates are relabelled by increasing occurrence count and vectors
    sorted by increasing length, so sparse pivots are taken first.
    """
    counts: Dict[int, int] = {}
    for v in vectors:
        for r in v:
            counts[r] = counts.get(r, 0) + 1
    relabel = {r: i for i, r in enumerate(sorted(counts, key=lambda r: (counts[r], r)))}
    out = [{relabel[r]: x for r, x in v.items()} for v in vectors]
    out.sort(key=len)
    return out


def _to_residues(vectors: List[Column], p: int) -> List[Column]:
    out = []
    for v in vectors:
        w = {}
        for r, x in v.items():
            if isinstance(x, Fraction):
                den = x.denominator
                if den % p == 0:
                    raise PrimeClash(p, den)
                y = x.numerator * pow(den, -1, p) % p
            else:
                y = x % p
            if y:
                w[r] = y
        if w:
            out.append(w)
    return out


def _rank_mod_p(vectors: List[Column], p: int) -> int:
    """Row-echelon rank over F_p; each vector is reduced only until it
    acquires a fresh leading coordinate."""
    pivots: Dict[int, Column] = {}
    for vec in vectors:
        v = dict(vec)
        heap = sorted(v)
        while heap:
            c = heappop(heap)
            a = v.get(c)
            if a is None:
                continue
            piv = pivots.get(c)
            if piv is None:
                inv = pow(a, -1, p)
                if inv != 1:
                    for k in v:
                        v[k] = v[k] * inv % p
                pivots[c] = v
                break
            del v[c]
            for k, x in piv.items():
                if k == c:
                    continue
                old = v.get(k)
                if old is None:
                    v[k] = (-a * x) % p
                    heappush(heap, k)
                else:
                    y = (old - a * x) % p
                    if y:
                        v[k] = y
                    else:
                        del v[k]
    return len(pivots)


def _integral(vectors: List[Column]) -> List[Column]:
    out = []
    for v in vectors:
        dens = [x.denominator for x in v.values() if isinstance(x, Fraction)]
        if dens:
            scale = math.lcm(*dens)
            w = {r: int(x * scale) for r, x in v.items()}
        else:
            w = dict(v)
        out.append(w)
    return out


def _rank_integer(vectors: List[Column]) -> int:
    """Fraction-free echelon rank over Q.

    Elimination step ``v <- b*v - a*pivot`` with the common factor of the two
    leading entries removed, followed by content reduction of ``v``.
    """
    pivots: Dict[int, Column] = {}
    for vec in vectors:
        v = dict(vec)
        heap = sorted(v)
        while heap:
            c = heappop(heap)
            a = v.get(c)
            if a is None:
                continue
            piv = pivots.get(c)
            if piv is None:
                g = math.gcd(*v.values())
                if a < 0:
                    g = -g
                if g != 1:
                    for k in v:
                        v[k] //= g
                pivots[c] = v
                break
            b = piv[c]
            g = math.gcd(a, b)
            a //= g
            b //= g
            del v[c]
            if b != 1:
                for k in v:
                    v[k] *= b
            for k, x in piv.items():
                if k == c:
                    continue
                old = v.get(k)
                if old is None:
                    v[k] = -a * x
                    heappush(heap, k)
                else:
                    y = old - a * x
                    if y:
                        v[k] = y
                    else:
                        del v[k]
            if v:
                g = math.gcd(*v.values())
                if g > 1:
                    for k in v:
                        v[k] //= g
    return len(pivots)


def _berlekamp_massey(seq: Sequence[int], p: int) -> Tuple[List[int], int]:
    """Shortest connection polynomial C (C[0] = 1) and its length L."""
    c = [1]
    b = [1]
    length, shift, last = 0, 1, 1
    for n, s in enumerate(seq):
        disc = s
        for i in range(1, min(len(c), length + 1)):
            disc = (disc + c[i] * seq[n - i]) % p
        if disc == 0:
            shift += 1
            continue
        coef = disc * pow(last, -1, p) % p
        new = c + [0] * max(0, len(b) + shift - len(c))
        for i, x in enumerate(b):
            new[i + shift] = (new[i + shift] - coef * x) % p
        if 2 * length <= n:
            b, c = c, new
            length, last, shift = n + 1 - length, disc, 1
        else:
            c = new
            shift += 1
    return c, length


def _wiedemann_rank(vectors: List[Column], p: int, rng: random.Random, trials: int = 2) -> int:
    """Monte Carlo rank over F_p from the minimal polynomial of D1·Aᵀ·D2·A·D1.

    With random diagonal D1, D2 the minimal polynomial of the preconditioned
    matrix is x·g(x) with deg g = rank (or g alone when of full rank), with
    high probability over a large field.  Every estimate is a lower bound,
    so the maximum over trials is returned.
    """
    ncols = len(vectors)
    rows = sorted({r for v in vectors for r in v})
    rindex = {r: i for i, r in enumerate(rows)}
    cols = [{rindex[r]: x for r, x in v.items()} for v in vectors]
    nrows = len(rows)
    bound = min(nrows, ncols) + 1
    best = 0
    for _ in range(trials):
        d1 = [rng.randrange(1, p) for _ in range(ncols)]
        d2 = [rng.randrange(1, p) for _ in range(nrows)]
        u = [rng.randrange(p) for _ in range(ncols)]
        x = [rng.randrange(p) for _ in range(ncols)]
        seq = []
        for _ in range(2 * bound):
            seq.append(sum(a * b for a, b in zip(u, x)) % p)
            y = [0] * nrows
            for j, col in enumerate(cols):
                xj = x[j] * d1[j] % p
                if xj:
                    for r, v in col.items():
                        y[r] += v * xj
            y = [yy * dd % p for yy, dd in zip(y, d2)]
            x = [sum(v * y[r] for r, v in col.items()) * d1[j] % p for j, col in enumerate(cols)]
        conn, length = _berlekamp_massey(seq, p)
        conn = conn + [0] * (length + 1 - len(conn))
        est = length - 1 if conn[length] == 0 else length
        best = max(best, min(est, nrows, ncols))
    return best


def _narrow(block: List[Column]) -> List[Column]:
    """Transpose a block when that gives fewer vectors: rank is the same and
    fewer vectors means fewer reductions to zero."""
    rows: Dict[int, Column] = {}
    for j, v in enumerate(block):
        for r, x in v.items():
            rows.setdefault(r, {})[j] = x
    return list(rows.values()) if len(rows) < len(block) else block


def _block_rank_prime(block: List[Column], p: int, threshold: int, rng: random.Random) -> int:
    res = _to_residues(block, p)
    if not res:
        return 0
    if sum(len(v) for v in res) > threshold:
        return _wiedemann_rank(res, p, rng)
    return _rank_mod_p(_ordered(_narrow(res)), p)


def _block_rank_rational(block: List[Column]) -> int:
    return _rank_integer(_ordered(_integral(_narrow(block))))


def rank(m: ExactMatrix, f: Optional[FieldSpec] = None, *,
         iterative_threshold: int = DEFAULT_ITERATIVE_THRESHOLD) -> RankResult:
    """Exact rank of ``m`` over the field described by ``f`` (default: 3-prime consensus).

    Multi-prime mode computes each block over every prime; blocks where the
    primes disagree are recomputed over Q.  A denominator divisible by a
    drawn prime triggers a redraw in multi-prime mode and :class:`PrimeClash`
    for an explicit single prime.
    """
    f = f or FieldSpec.multi()
    blocks = _components(m)
    if f.kind == "rational":
        return RankResult(sum(_block_rank_rational(b) for b in blocks), f, True)

    rng = random.Random(1_000_003 * f.seed + 17)
    if f.kind == "prime":
        p = f.primes()[0]
        r = sum(_block_rank_prime(b, p, iterative_threshold, rng) for b in blocks)
        return RankResult(r, f, False, primes=(p,))

    clashed: set = set()
    while True:
        primes = [p for p in f.primes(len(clashed)) if p not in clashed]
        try:
            total = 0
            escalated = False
            for b in blocks:
                ranks = {_block_rank_prime(b, p, iterative_threshold, rng) for p in primes}
                if len(ranks) == 1:
                    total += ranks.pop()
                else:
                    escalated = True
                    total += _block_rank_rational(b)
            return RankResult(total, f, True, escalated=escalated, primes=tuple(primes))
        except PrimeClash as exc:
            clashed.add(exc.prime)


def kernel_dim(m: ExactMatrix, f: Optional[FieldSpec] = None) -> int:
    """Nullity: column count minus rank."""
    return m.ncols - rank(m, f).rank
