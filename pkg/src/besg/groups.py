"""Finite groups materialised as Cayley tables.

Groups are described by a small grammar (``Z12``, ``Z2^5``, ``D4xZ3``, ``S4``,
``Q8``) and built into a :class:`GroupTable` whose identity is always index 0.
Elements of a direct product are ordered lexicographically over the component
indices, so the first factor is the most significant digit.
"""

from __future__ import annotations

import itertools
import math
import os
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import InvalidSpec, InvalidSubgroup, NotAbelian, NotFound, SpecTooLarge
from .grids import TripleSystem, subgrid

DEFAULT_MAX_ORDER = 10000
MAX_SYMMETRIC_DEGREE = 8


def default_max_order() -> int:
    env = os.environ.get("BESG_MAX_ORDER")
    if env:
        try:
            return int(env)
        except ValueError:
            raise InvalidSpec(f"BESG_MAX_ORDER must be an integer, got {env!r}") from None
    return DEFAULT_MAX_ORDER


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % d for d in range(2, math.isqrt(n) + 1))


def prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


# ---------------------------------------------------------------------------
# group specifications
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Cyclic:
    n: int

    def __str__(self):
        return f"Z{self.n}"


@dataclass(frozen=True)
class ElementaryAbelian:
    p: int
    m: int

    def __str__(self):
        return f"Z{self.p}^{self.m}"


@dataclass(frozen=True)
class Dihedral:
    """Dihedral group of the regular ``n``-gon (order ``2n``)."""

    n: int

    def __str__(self):
        return f"D{self.n}"


@dataclass(frozen=True)
class Symmetric:
    n: int

    def __str__(self):
        return f"S{self.n}"


@dataclass(frozen=True)
class Quaternion:
    def __str__(self):
        return "Q8"


@dataclass(frozen=True)
class DirectProduct:
    factors: tuple

    def __str__(self):
        return "x".join(str(f) for f in self.factors)


GroupSpec = Union[Cyclic, ElementaryAbelian, Dihedral, Symmetric, Quaternion, DirectProduct]

_ATOM = re.compile(r"^(?:z(\d+)(?:\^(\d+))?|d(\d+)|s(\d+)|(q8))$")


def parse_group_spec(text: str) -> GroupSpec:
    """Parse ``Z<n>``, ``Z<p>^<m>``, ``D<n>``, ``S<n>``, ``Q8`` joined by ``x``."""
    src = text.strip().lower()
    if not src or any(ch.isspace() for ch in src):
        raise InvalidSpec(f"malformed group spec {text!r}")
    atoms = []
    for part in src.split("x"):
        match = _ATOM.match(part)
        if not match:
            raise InvalidSpec(f"malformed group atom {part!r} in {text!r}")
        zn, zexp, dn, sn, q8 = match.groups()
        if zn is not None and zexp is not None:
            atoms.append(ElementaryAbelian(int(zn), int(zexp)))
        elif zn is not None:
            atoms.append(Cyclic(int(zn)))
        elif dn is not None:
            atoms.append(Dihedral(int(dn)))
        elif sn is not None:
            atoms.append(Symmetric(int(sn)))
        else:
            atoms.append(Quaternion())
    spec = atoms[0] if len(atoms) == 1 else DirectProduct(tuple(atoms))
    validate_spec(spec)
    return spec


def validate_spec(spec: GroupSpec) -> None:
    if isinstance(spec, Cyclic):
        if spec.n < 1:
            raise InvalidSpec("Cyclic(n) needs n >= 1")
    elif isinstance(spec, ElementaryAbelian):
        if not is_prime(spec.p):
            raise InvalidSpec(f"Z{spec.p}^{spec.m}: {spec.p} is not prime")
        if spec.m < 1:
            raise InvalidSpec("elementary abelian power needs m >= 1")
    elif isinstance(spec, Dihedral):
        if spec.n < 3:
            raise InvalidSpec("Dihedral(n) needs n >= 3")
    elif isinstance(spec, Symmetric):
        if not 1 <= spec.n <= MAX_SYMMETRIC_DEGREE:
            raise InvalidSpec(f"Symmetric(n) needs 1 <= n <= {MAX_SYMMETRIC_DEGREE}")
    elif isinstance(spec, Quaternion):
        pass
    elif isinstance(spec, DirectProduct):
        if not spec.factors:
            raise InvalidSpec("empty direct product")
        for f in spec.factors:
            validate_spec(f)
    else:
        raise InvalidSpec(f"unknown group atom {spec!r}")


def spec_order(spec: GroupSpec) -> int:
    if isinstance(spec, Cyclic):
        return spec.n
    if isinstance(spec, ElementaryAbelian):
        return spec.p**spec.m
    if isinstance(spec, Dihedral):
        return 2 * spec.n
    if isinstance(spec, Symmetric):
        return math.factorial(spec.n)
    if isinstance(spec, Quaternion):
        return 8
    if isinstance(spec, DirectProduct):
        return math.prod(spec_order(f) for f in spec.factors)
    raise InvalidSpec(f"unknown group atom {spec!r}")


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GroupTable:
    """Full Cayley table over element indices ``0..n-1``.

    ``product[a, b]`` is the index of ``a*b``.
    """

    product: np.ndarray
    element_names: tuple[str, ...]
    identity: int = 0
    name: str = ""
    _orders: list = field(default_factory=list, init=False, repr=False)

    def __post_init__(self):
        prod = np.asarray(self.product)
        if prod.ndim != 2 or prod.shape[0] != prod.shape[1]:
            raise ValueError("product table must be square")
        n = prod.shape[0]
        if n == 0:
            raise ValueError("empty group table")
        if prod.min() < 0 or prod.max() >= n:
            raise ValueError("product table entries out of range")
        if len(self.element_names) != n:
            raise ValueError("element_names length does not match table order")
        prod = prod.astype(np.int64, copy=True)
        prod.setflags(write=False)
        object.__setattr__(self, "product", prod)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], names: Sequence[str] | None = None, name: str = ""):
        """Wrap a hand-supplied table, locating the identity if there is one."""
        prod = np.asarray(rows, dtype=np.int64)
        n = len(prod)
        ident = 0
        ar = np.arange(n)
        for e in range(n):
            if np.array_equal(prod[e], ar) and np.array_equal(prod[:, e], ar):
                ident = e
                break
        names = tuple(names) if names is not None else tuple(str(i) for i in range(n))
        return cls(prod, names, ident, name)

    @property
    def order(self) -> int:
        return self.product.shape[0]

    def mul(self, a: int, b: int) -> int:
        return int(self.product[a, b])

    def power(self, a: int, e: int) -> int:
        x = self.identity
        for _ in range(e):
            x = int(self.product[x, a])
        return x

    def inverse(self, a: int) -> int:
        return int(np.flatnonzero(self.product[a] == self.identity)[0])

    def element_orders(self) -> list[int]:
        if not self._orders:
            orders = []
            for a in range(self.order):
                k, x = 1, a
                while x != self.identity:
                    x = int(self.product[x, a])
                    k += 1
                orders.append(k)
            self._orders.extend(orders)
        return list(self._orders)

    def element_order(self, a: int) -> int:
        return self.element_orders()[a]

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.product, self.product.T))


def _cyclic_table(n: int):
    ar = np.arange(n)
    return (ar[:, None] + ar[None, :]) % n, [str(i) for i in range(n)]


def _dihedral_table(n: int):
    # element (f, a) <-> s^f r^a, index f*n + a; (s^f r^a)(s^g r^b) = s^(f+g) r^((-1)^g a + b)
    size = 2 * n
    prod = np.empty((size, size), dtype=np.int64)
    for x in range(size):
        f, a = divmod(x, n)
        for y in range(size):
            g, b = divmod(y, n)
            rot = ((-a if g else a) + b) % n
            prod[x, y] = ((f + g) % 2) * n + rot
    names = [f"r{a}" for a in range(n)] + [f"sr{a}" for a in range(n)]
    return prod, names


def _perm_rank(perms: np.ndarray) -> np.ndarray:
    """Lexicographic rank of each row of ``perms`` (rows are permutations of 0..k-1)."""
    count, k = perms.shape
    ranks = np.zeros(count, dtype=np.int64)
    for i in range(k):
        smaller_later = (perms[:, i + 1 :] < perms[:, i : i + 1]).sum(axis=1)
        ranks += smaller_later * math.factorial(k - 1 - i)
    return ranks


def _symmetric_table(n: int):
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64).reshape(-1, n)
    size = len(perms)
    prod = np.empty((size, size), dtype=np.int64)
    for a in range(size):
        # (a o b)(i) = a(b(i))
        prod[a] = _perm_rank(perms[a][perms])
    names = ["[" + ",".join(map(str, p)) + "]" for p in perms]
    return prod, names


# unit quaternions 1, i, j, k as 0..3; _QMUL[u][v] = (sign, w)
_QMUL = [
    [(0, 0), (0, 1), (0, 2), (0, 3)],
    [(0, 1), (1, 0), (0, 3), (1, 2)],
    [(0, 2), (1, 3), (1, 0), (0, 1)],
    [(0, 3), (0, 2), (1, 1), (1, 0)],
]


def _quaternion_table():
    prod = np.empty((8, 8), dtype=np.int64)
    for x in range(8):
        s, u = divmod(x, 4)
        for y in range(8):
            t, v = divmod(y, 4)
            sign, w = _QMUL[u][v]
            prod[x, y] = ((s + t + sign) % 2) * 4 + w
    names = [sgn + unit for sgn in ("", "-") for unit in ("1", "i", "j", "k")]
    return prod, names


def _direct_product(left, right):
    p1, n1 = left
    p2, n2 = right
    a, b = len(n1), len(n2)
    prod = np.repeat(np.repeat(p1, b, axis=0), b, axis=1) * b + np.tile(p2, (a, a))
    names = [f"({x},{y})" for x in n1 for y in n2]
    return prod, names


def _build_atom(spec: GroupSpec):
    if isinstance(spec, Cyclic):
        return _cyclic_table(spec.n)
    if isinstance(spec, ElementaryAbelian):
        base = _cyclic_table(spec.p)
        out = base
        for _ in range(spec.m - 1):
            out = _direct_product(out, base)
        if spec.m == 1:
            return out
        # flatten nested pair names into plain coordinate tuples
        names = ["(" + ",".join(map(str, coords)) + ")" for coords in itertools.product(range(spec.p), repeat=spec.m)]
        return out[0], names
    if isinstance(spec, Dihedral):
        return _dihedral_table(spec.n)
    if isinstance(spec, Symmetric):
        return _symmetric_table(spec.n)
    if isinstance(spec, Quaternion):
        return _quaternion_table()
    if isinstance(spec, DirectProduct):
        out = _build_atom(spec.factors[0])
        for f in spec.factors[1:]:
            out = _direct_product(out, _build_atom(f))
        return out
    raise InvalidSpec(f"unknown group atom {spec!r}")


def build_group(spec: GroupSpec | str, max_order: int | None = None) -> GroupTable:
    """Materialise the Cayley table of ``spec``.

    Raises :class:`SpecTooLarge` when the order exceeds ``max_order`` (default
    10000, overridable through ``BESG_MAX_ORDER``).
    """
    if isinstance(spec, str):
        spec = parse_group_spec(spec)
    validate_spec(spec)
    cap = default_max_order() if max_order is None else max_order
    n = spec_order(spec)
    if n > cap:
        raise SpecTooLarge(f"{spec} has order {n} > cap {cap}")
    prod, names = _build_atom(spec)
    return GroupTable(np.asarray(prod), tuple(names), 0, str(spec))


# ---------------------------------------------------------------------------
# axioms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AxiomReport:
    latin: bool
    identity: bool
    inverses: bool
    associative: bool
    failures: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return self.latin and self.identity and self.inverses and self.associative


def verify_group_axioms(table: GroupTable) -> AxiomReport:
    """Check Latin-square, identity, inverse and (O(n^3)) associativity axioms."""
    prod = table.product
    n = table.order
    failures = []
    full = np.arange(n)
    latin = all(np.array_equal(np.sort(prod[i]), full) and np.array_equal(np.sort(prod[:, i]), full) for i in range(n))
    if not latin:
        failures.append("latin: some row or column is not a permutation")
    e = table.identity
    identity = bool(np.array_equal(prod[e], full) and np.array_equal(prod[:, e], full))
    if not identity:
        failures.append(f"identity: element {e} is not a two-sided identity")
    inverses = True
    for a in range(n):
        right = np.flatnonzero(prod[a] == e)
        if not any(prod[b, a] == e for b in right):
            inverses = False
            failures.append(f"inverses: element {a} has no two-sided inverse")
            break
    associative = True
    for a in range(n):
        # (a*b)*c versus a*(b*c) for all b, c
        lhs = prod[prod[a]]
        rhs = prod[a][prod]
        if not np.array_equal(lhs, rhs):
            b, c = np.argwhere(lhs != rhs)[0]
            associative = False
            failures.append(f"associativity: ({a}*{b})*{c} != {a}*({b}*{c})")
            break
    return AxiomReport(latin, identity, inverses, associative, tuple(failures))


# ---------------------------------------------------------------------------
# subgroups
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Subgroup:
    parent_order: int
    members: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(sorted(set(int(m) for m in self.members))))

    @property
    def order(self) -> int:
        return len(self.members)

    def __contains__(self, x) -> bool:
        return x in set(self.members)


def check_subgroup(table: GroupTable, members: Iterable[int]) -> None:
    """Raise :class:`InvalidSubgroup` unless ``members`` is a subgroup."""
    mem = sorted(set(int(m) for m in members))
    if not mem:
        raise InvalidSubgroup("empty member set")
    if any(m < 0 or m >= table.order for m in mem):
        raise InvalidSubgroup("member index out of range")
    if table.identity not in mem:
        raise InvalidSubgroup("identity missing")
    idx = np.array(mem)
    closed = np.isin(table.product[np.ix_(idx, idx)], idx)
    if not closed.all():
        raise InvalidSubgroup("not closed under the product")
    if table.order % len(mem):
        raise InvalidSubgroup("order does not divide the group order")


def generated_subgroup(table: GroupTable, gens: Iterable[int]) -> Subgroup:
    members = {table.identity}
    frontier = [table.identity]
    gens = list(gens)
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = int(table.product[x, g])
                if y not in members:
                    members.add(y)
                    nxt.append(y)
        frontier = nxt
    return Subgroup(table.order, tuple(members))


def cyclic_powers(table: GroupTable, g: int) -> list[int]:
    """``[g^0, g^1, ..., g^(ord g - 1)]``."""
    out = [table.identity]
    x = g
    while x != table.identity:
        out.append(x)
        x = int(table.product[x, g])
    return out


def _set_product(table: GroupTable, left: Sequence[int], right: Sequence[int]) -> tuple[int, ...]:
    return tuple(sorted(set(np.unique(table.product[np.ix_(list(left), list(right))]).tolist())))


def find_abelian_subgroup(table: GroupTable, min_order: int = 1) -> Subgroup:
    """Largest abelian subgroup located by a two-generator search.

    Every subgroup generated by at most two commuting elements is enumerated;
    the largest one (ties: lexicographically smallest member set) is then
    greedily extended by adjoining, in index order, each element commuting with
    everything collected so far.  Abelian input returns the whole group.

    Raises :class:`NotFound` if the result is smaller than ``min_order``; this is
    a search failure, not a proof of absence.
    """
    n = table.order
    if table.is_abelian():
        best = tuple(range(n))
    else:
        prod = table.product
        cyclic: dict[tuple[int, ...], int] = {}
        for g in range(n):
            key = tuple(sorted(cyclic_powers(table, g)))
            cyclic.setdefault(key, g)
        subs = sorted(cyclic.items())
        candidates = {key for key, _ in subs}
        for i in range(len(subs)):
            k1, g1 = subs[i]
            for j in range(i + 1, len(subs)):
                k2, g2 = subs[j]
                if prod[g1, g2] == prod[g2, g1]:
                    candidates.add(_set_product(table, k1, k2))
        best = min(candidates, key=lambda c: (-len(c), c))
        best = _greedy_extend(table, best)
    if len(best) < min_order:
        raise NotFound(f"no abelian subgroup of order >= {min_order} found (largest found: {len(best)})")
    return Subgroup(n, best)


def _greedy_extend(table: GroupTable, members: tuple[int, ...]) -> tuple[int, ...]:
    prod = table.product
    current = list(members)
    inside = set(current)
    for x in range(table.order):
        if x in inside:
            continue
        idx = np.array(current)
        if np.array_equal(prod[x, idx], prod[idx, x]):
            current = list(_set_product(table, current, cyclic_powers(table, x)))
            inside = set(current)
    return tuple(sorted(current))


def is_abelian_subgroup(table: GroupTable, subgroup: Subgroup) -> bool:
    idx = np.array(subgroup.members)
    block = table.product[np.ix_(idx, idx)]
    return bool(np.array_equal(block, block.T))


# ---------------------------------------------------------------------------
# primary decomposition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PrimaryDecomposition:
    """Multiset of cyclic prime-power factors as ``(p, a, multiplicity)`` triples."""

    factors: tuple[tuple[int, int, int], ...]

    @property
    def order(self) -> int:
        return math.prod(p ** (a * mult) for p, a, mult in self.factors)

    def multiplicity(self, p: int) -> int:
        """Number of cyclic factors belonging to the prime ``p``."""
        return sum(mult for q, _, mult in self.factors if q == p)

    def cyclic_orders(self) -> list[int]:
        return [p**a for p, a, mult in self.factors for _ in range(mult)]


def _exact_log(value: int, p: int) -> int:
    e = 0
    while value > 1:
        if value % p:
            raise ArithmeticError(f"{value} is not a power of {p}")
        value //= p
        e += 1
    return e


def primary_decomposition(table: GroupTable, subgroup: Subgroup) -> PrimaryDecomposition:
    """Recover the prime-power cyclic factors of an abelian subgroup from element orders."""
    if not is_abelian_subgroup(table, subgroup):
        raise NotAbelian("subgroup contains a non-commuting pair")
    orders = table.element_orders()
    sub_orders = [orders[x] for x in subgroup.members]
    factors = []
    for p in prime_factors(subgroup.order):
        full = p ** _exact_log_part(subgroup.order, p)
        # counts[i] = #{x : x^(p^i) = e}
        counts = [1]
        i = 0
        while counts[-1] < full:
            i += 1
            counts.append(sum(1 for o in sub_orders if (p**i) % o == 0))
        # ranks[i] = number of cyclic factors of order >= p^i
        ranks = [_exact_log(counts[i] // counts[i - 1], p) for i in range(1, len(counts))]
        ranks.append(0)
        for a in range(1, len(ranks)):
            mult = ranks[a - 1] - ranks[a]
            if mult:
                factors.append((p, a, mult))
    return PrimaryDecomposition(tuple(sorted(factors)))


def _exact_log_part(n: int, p: int) -> int:
    e = 0
    while n % p == 0:
        n //= p
        e += 1
    return e


# ---------------------------------------------------------------------------
# coset blocks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CosetBlock:
    """Left coset ``rH`` of rows against right coset ``Hs`` of columns.

    ``rows[i] = r*h_i`` and ``cols[j] = h_j*s`` for one fixed ordering
    ``h_0 = e, h_1, ...`` of the subgroup, so cell ``(i, j)`` carries label
    ``r*h_i*h_j*s``.
    """

    rows: tuple[int, ...]
    cols: tuple[int, ...]
    subgroup_order: int


def coset_blocks(table: GroupTable, subgroup: Subgroup, ordering: Sequence[int] | None = None) -> list[CosetBlock]:
    """All ``(|G|/|H|)^2`` blocks, left cosets by smallest member, then right cosets.

    ``ordering`` fixes how subgroup elements are listed inside each coset; it
    defaults to ascending index order.
    """
    check_subgroup(table, subgroup.members)
    if ordering is None:
        ordering = list(subgroup.members)
    else:
        ordering = [int(h) for h in ordering]
        if sorted(ordering) != list(subgroup.members):
            raise InvalidSubgroup("ordering is not a permutation of the subgroup")
    prod = table.product
    h = np.array(ordering)
    left, right = [], []
    seen_l, seen_r = set(), set()
    for x in range(table.order):
        if x not in seen_l:
            coset = tuple(int(v) for v in prod[x, h])
            left.append(coset)
            seen_l.update(coset)
        if x not in seen_r:
            coset = tuple(int(v) for v in prod[h, x])
            right.append(coset)
            seen_r.update(coset)
    return [CosetBlock(rows, cols, len(ordering)) for rows in left for cols in right]


def densest_block(a: TripleSystem, blocks: Sequence[CosetBlock]) -> tuple[CosetBlock, TripleSystem, Fraction]:
    """Block holding the most triples of ``a`` (first one on ties).

    Returns the block, ``a`` restricted to it and the density
    ``|a ∩ block| / |H|^2``.  By pigeonhole the density is at least that of
    ``a`` in the full table.
    """
    if not blocks:
        raise ValueError("no blocks given")
    size = 1 + max(max(max(b.rows), max(b.cols)) for b in blocks)
    cells = np.zeros((size, size), dtype=np.int64)
    for r, c, _ in a.triples:
        if r < size and c < size:
            cells[r, c] = 1
    best, best_count = None, -1
    for blk in blocks:
        count = int(cells[np.ix_(blk.rows, blk.cols)].sum())
        if count > best_count:
            best, best_count = blk, count
    restricted = subgrid(a, set(best.rows), set(best.cols))
    return best, restricted, Fraction(best_count, best.subgroup_order**2)
