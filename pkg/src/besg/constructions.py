"""Explicit dense configurations and the (t+3, t) chains.

Two ambient tables are used throughout: the integer addition table of
``{0..k-1}`` (no wraparound, see :func:`besg.grids.interval_grid`) and the
addition table of ``Z_p^m`` with elements indexed lexicographically by their
coordinate vectors, first coordinate most significant.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import BudgetTooSmall, DimensionTooSmall, GridTooSmall, OutOfRange
from .grids import Configuration, TripleSystem, from_group, interval_grid
from .groups import ElementaryAbelian, build_group, is_prime


@dataclass(frozen=True)
class IntervalPlan:
    v: int
    r: int
    s: int

    @property
    def unused(self) -> int:
        return self.v - 2 * self.r - self.s


def interval_plan(v: int) -> IntervalPlan:
    """``r = v//3`` rows and columns, the remaining budget as labels (at most ``2r-1``)."""
    if v < 3:
        raise BudgetTooSmall("vertex budget must be at least 3")
    r = v // 3
    s = min(v - 2 * r, 2 * r - 1)
    return IntervalPlan(v, r, s)


@dataclass(frozen=True)
class BlockPlan:
    v: int
    p: int
    l: int
    lam: Fraction
    a: int

    @property
    def faces(self) -> int:
        return self.a**2 * self.p ** (2 * self.l)


def block_plan(v: int, p: int) -> BlockPlan:
    """Level ``l`` minimal with ``3p^(l+1) > v``, and ``a`` maximal with ``4a-1 <= v/p^l``."""
    if v < 3:
        raise BudgetTooSmall("vertex budget must be at least 3")
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    l = 0
    while 3 * p ** (l + 1) <= v:
        l += 1
    lam = Fraction(v, p**l)
    a = math.floor(lam / 4 + Fraction(1, 4))
    return BlockPlan(v, p, l, lam, a)


def interval_face_count(r: int, s: int) -> int:
    """Faces on the ``s`` most numerous falling diagonals of an ``r x r`` integer grid."""
    if r < 1 or not 1 <= s <= 2 * r - 1:
        raise OutOfRange(f"need r >= 1 and 1 <= s <= 2r-1, got r={r}, s={s}")
    value = Fraction(s * r) - Fraction(s * (s - 1), 4) - Fraction(s // 2, 2)
    if value.denominator != 1:
        raise ArithmeticError(f"non-integral face count {value} for r={r}, s={s}")
    return int(value)


def _top_labels(counts: dict[int, int], s: int) -> list[int]:
    # most numerous first, smaller label on ties
    return sorted(counts, key=lambda lab: (-counts[lab], lab))[:s]


def interval_configuration(r: int, s: int, k: int) -> Configuration:
    """Rows and columns ``0..r-1`` of ``interval_grid(k)`` with the ``s`` most numerous labels."""
    if r < 1 or not 1 <= s <= 2 * r - 1:
        raise OutOfRange(f"need r >= 1 and 1 <= s <= 2r-1, got r={r}, s={s}")
    if k < r:
        raise GridTooSmall(f"interval grid of side {k} cannot host {r} rows")
    counts = {c: min(c + 1, 2 * r - 1 - c) for c in range(2 * r - 1)}
    keep = set(_top_labels(counts, s))
    triples = frozenset((a, b, a + b) for a in range(r) for b in range(r) if a + b in keep)
    return Configuration(_interval_parent(k), triples)


@lru_cache(maxsize=64)
def _interval_parent(k: int) -> TripleSystem:
    return interval_grid(k)


@lru_cache(maxsize=16)
def elementary_system(p: int, m: int) -> TripleSystem:
    """Cached addition table of ``Z_p^m`` as a triple system."""
    return from_group(build_group(ElementaryAbelian(p, m), max_order=max(p**m, 1)))


def interval_construction(v: int, k: int) -> Configuration:
    plan = interval_plan(v)
    if k < plan.r:
        raise GridTooSmall(f"need k >= {plan.r} for budget {v}")
    return interval_configuration(plan.r, plan.s, k)


def _embed(p: int, m: int, coords) -> np.ndarray:
    """Indices in ``Z_p^m`` of vectors whose leading coordinates are ``coords`` (rest zero)."""
    coords = np.asarray(coords, dtype=np.int64).reshape(len(coords), -1)
    weights = p ** np.arange(m - 1, m - 1 - coords.shape[1], -1, dtype=np.int64)
    return coords @ weights


def _cyclic_interval_counts(r: int, p: int) -> dict[int, int]:
    counts: dict[int, int] = {}
    for i in range(r):
        for j in range(r):
            counts[(i + j) % p] = counts.get((i + j) % p, 0) + 1
    return counts


def block_face_count(v: int, p: int) -> int:
    """Face count of :func:`block_construction` without building it."""
    if v < 3:
        raise BudgetTooSmall("vertex budget must be at least 3")
    if 3 * p >= v:
        r = v // 3
        counts = _cyclic_interval_counts(r, p)
        s = min(v - 2 * r, len(counts))
        return sum(counts[c] for c in _top_labels(counts, s))
    return block_plan(v, p).faces


def block_construction(v: int, p: int, m: int) -> Configuration:
    """Dense configuration with at most ``v`` vertices in the table of ``Z_p^m``.

    For ``p >= v/3`` this is the interval construction inside one copy of
    ``Z_p`` (labels wrap mod ``p``).  Otherwise it takes the bottom-left
    ``a x a`` grid of coset blocks of ``Z_p^l`` inside ``Z_p^(l+1)``.
    """
    if v < 3:
        raise BudgetTooSmall("vertex budget must be at least 3")
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if 3 * p >= v:
        if m < 1:
            raise DimensionTooSmall("need m >= 1")
        r = v // 3
        counts = _cyclic_interval_counts(r, p)
        s = min(v - 2 * r, len(counts))
        keep = set(_top_labels(counts, s))
        unit = p ** (m - 1)
        triples = frozenset(
            (i * unit, j * unit, ((i + j) % p) * unit) for i in range(r) for j in range(r) if (i + j) % p in keep
        )
        return Configuration(elementary_system(p, m), triples)
    plan = block_plan(v, p)
    if m < plan.l + 1:
        raise DimensionTooSmall(f"need m >= {plan.l + 1} for v={v}, p={p}")
    return _block_configuration(p, m, plan.l, plan.a)


@lru_cache(maxsize=256)
def _block_configuration(p: int, m: int, l: int, a: int) -> Configuration:
    # consecutive budgets often share (l, a), hence the cache
    side = np.array(
        [(x0,) + rest for x0 in range(a) for rest in itertools.product(range(p), repeat=l)],
        dtype=np.int64,
    )
    idx = _embed(p, m, side)
    labels = _elementary_product(p, m)[np.ix_(idx, idx)]
    rows = np.repeat(idx, len(idx))
    cols = np.tile(idx, len(idx))
    return Configuration(elementary_system(p, m), frozenset(zip(rows.tolist(), cols.tolist(), labels.ravel().tolist())))


@lru_cache(maxsize=16)
def _elementary_product(p: int, m: int) -> np.ndarray:
    return build_group(ElementaryAbelian(p, m), max_order=p**m).product


# ---------------------------------------------------------------------------
# (t+3, t) chains
# ---------------------------------------------------------------------------


def _chain_cells(t: int):
    """``(0,0), (0,1), (1,0), (1,1), (2,0), ...`` truncated at ``t`` cells."""
    return [(i // 2, i % 2) for i in range(t)]


def bes_interval(t: int, k: int) -> Configuration:
    """``t`` faces on ``t + 3`` vertices inside ``interval_grid(k)``."""
    if t < 3:
        raise BudgetTooSmall("chain needs t >= 3")
    need = max(2, math.ceil(t / 2))
    if k < need:
        raise GridTooSmall(f"chain of {t} cells needs k >= {need}")
    triples = frozenset((i, j, i + j) for i, j in _chain_cells(t))
    return Configuration(_interval_parent(k), triples)


def bes_elementary_copies(t: int, p: int) -> int:
    return math.ceil(t / (2 * p))


def bes_elementary_min_dimension(t: int, p: int) -> int:
    """Smallest ``m`` with ``p^(m-1)`` at least the number of ``Z_p`` copies used."""
    copies = bes_elementary_copies(t, p)
    m = 1
    while p ** (m - 1) < copies:
        m += 1
    return m


def bes_elementary(t: int, p: int, m: int) -> Configuration:
    """``t`` faces on at most ``t + 3`` vertices inside the table of ``Z_p^m``.

    Copy ``j`` takes the cells ``(u_j + i e, -u_j + c e)`` for ``c`` in
    ``{0, 1}`` and ``i`` in ``Z_p``, where ``e`` is the first basis vector and
    ``u_j`` the ``j``-th vector (lexicographically) with first coordinate zero.
    Every copy reuses the labels of the first one, so each new face costs at
    most one new vertex after the first face of a copy, which costs two.
    """
    if t < 3:
        raise BudgetTooSmall("chain needs t >= 3")
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    need = bes_elementary_min_dimension(t, p)
    if m < need:
        raise DimensionTooSmall(f"chain of {t} cells over Z{p} needs m >= {need}")
    unit = p ** (m - 1)
    prod = _elementary_product(p, m)
    triples = set()
    for cell in range(t):
        j, pos = divmod(cell, 2 * p)
        i, c = divmod(pos, 2)
        u = j  # index of u_j: the first coordinate is zero, so j < p^(m-1) is the index itself
        neg_u = int(np.flatnonzero(prod[u] == 0)[0])
        row = int(prod[u, i * unit])
        col = int(prod[neg_u, c * unit])
        triples.add((row, col, int(prod[row, col])))
    return Configuration(elementary_system(p, m), frozenset(triples))


# ---------------------------------------------------------------------------
# bounds on F(t)
# ---------------------------------------------------------------------------


def _primes_below(n: int) -> list[int]:
    return [q for q in range(2, n) if is_prime(q)]


def _chain_faces(v: int) -> int:
    # t cells of the chain span at most t + 3 vertices (t >= 2)
    return v - 3 if v >= 5 else 0


@lru_cache(maxsize=None)
def interval_best(v: int) -> int:
    """Most faces any implemented construction places on ``<= v`` vertices of an interval grid."""
    if v < 3:
        return 0
    plan = interval_plan(v)
    here = max(interval_face_count(plan.r, plan.s), _chain_faces(v))
    return max(here, interval_best(v - 1))


@lru_cache(maxsize=None)
def block_best(v: int, p: int) -> int:
    """Same as :func:`interval_best` for the table of ``Z_p^m``, ``m`` large."""
    if v < 3:
        return 0
    here = max(block_face_count(v, p), _chain_faces(v))
    return max(here, block_best(v - 1, p))


@lru_cache(maxsize=None)
def worst_case_best(v: int) -> int:
    """Faces guaranteed at budget ``v`` in every ambient table the pipeline can land in."""
    return min([interval_best(v)] + [block_best(v, p) for p in _primes_below(v)])


def bound_f(t: int) -> int:
    if t < 1:
        raise ValueError("t must be positive")
    v = 3
    while interval_best(v) < t:
        v += 1
    return v


def bound_g(t: int, p: int) -> int:
    if t < 1:
        raise ValueError("t must be positive")
    v = 3
    while block_best(v, p) < t:
        v += 1
    return v


def bound_F(t: int) -> int:
    """Smallest budget at which every ambient table admits ``t`` faces via these constructions.

    Ambients are the interval grid and ``Z_p^m`` for every prime ``p < v``;
    larger primes fall in the interval regime and never do worse.
    """
    if t < 1:
        raise ValueError("t must be positive")
    v = 3
    while worst_case_best(v) < t:
        v += 1
    return v
