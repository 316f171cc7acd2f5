"""Labelled grids, equivalently tripartite 3-uniform triple systems.

Rows, columns and labels are three disjoint vertex classes even when their
indices coincide numerically.  A cell holds at most one label.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, NamedTuple, TextIO

from .errors import BudgetExceeded, OutOfUniverse

if TYPE_CHECKING:
    from .groups import GroupTable

Triple = tuple[int, int, int]

DEFAULT_ISO_BUDGET = 10**7


@dataclass(frozen=True)
class TripleSystem:
    triples: frozenset
    rows: frozenset
    cols: frozenset
    labels: frozenset
    _cells: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        cells = self._cells
        for r, c, l in self.triples:
            if (r, c) in cells:
                raise ValueError(f"cell ({r},{c}) carries two labels")
            if r not in self.rows or c not in self.cols or l not in self.labels:
                raise OutOfUniverse(f"triple {(r, c, l)} outside the universes")
            cells[(r, c)] = l

    @classmethod
    def from_triples(cls, triples: Iterable[Iterable[int]], rows=None, cols=None, labels=None) -> "TripleSystem":
        """Build a system; missing universes default to ``0..max`` per class."""
        ts = frozenset(tuple(int(x) for x in t) for t in triples)

        def universe(given, k):
            if given is not None:
                return frozenset(int(x) for x in given)
            top = max((t[k] for t in ts), default=-1)
            return frozenset(range(top + 1))

        return cls(ts, universe(rows, 0), universe(cols, 1), universe(labels, 2))

    def __len__(self):
        return len(self.triples)

    def __iter__(self):
        return iter(sorted(self.triples))

    def __contains__(self, triple) -> bool:
        return tuple(triple) in self.triples

    def label(self, r: int, c: int) -> int | None:
        return self._cells.get((r, c))

    @property
    def used_rows(self) -> frozenset:
        return frozenset(t[0] for t in self.triples)

    @property
    def used_cols(self) -> frozenset:
        return frozenset(t[1] for t in self.triples)

    @property
    def used_labels(self) -> frozenset:
        return frozenset(t[2] for t in self.triples)


class Span(NamedTuple):
    rows: int
    cols: int
    labels: int
    total: int


@dataclass(frozen=True)
class Configuration:
    parent: TripleSystem
    triples: frozenset

    def __post_init__(self):
        # a frozenset inside the parent already holds exactly the parent's tuples
        if isinstance(self.triples, frozenset) and self.triples <= self.parent.triples:
            return
        if not isinstance(self.triples, frozenset) or not all(type(t) is tuple for t in self.triples):
            object.__setattr__(self, "triples", frozenset(tuple(t) for t in self.triples))
        extra = self.triples - self.parent.triples
        if extra:
            raise ValueError(f"configuration triple {min(extra)} is not in the parent system")

    @property
    def faces(self) -> int:
        return len(self.triples)

    def span(self) -> Span:
        return span(self)

    @cached_property
    def _span(self) -> Span:
        rows = {t[0] for t in self.triples}
        cols = {t[1] for t in self.triples}
        labels = {t[2] for t in self.triples}
        return Span(len(rows), len(cols), len(labels), len(rows) + len(cols) + len(labels))

    def sorted_triples(self) -> list[Triple]:
        return sorted(self.triples)

    def as_system(self) -> TripleSystem:
        return TripleSystem.from_triples(self.triples)


def span(cfg: Configuration) -> Span:
    """Distinct rows, columns and labels used by ``cfg``, and their sum."""
    return cfg._span


def from_group(table: "GroupTable") -> TripleSystem:
    """The ``n^2`` triples ``(a, b, a*b)``."""
    n = table.order
    prod = table.product
    triples = frozenset((a, b, int(prod[a, b])) for a in range(n) for b in range(n))
    universe = frozenset(range(n))
    return TripleSystem(triples, universe, universe, universe)


def interval_grid(k: int, modulus: int | None = None) -> TripleSystem:
    """Addition table of ``{0..k-1}``.

    Without ``modulus`` labels are integer sums ``0..2k-2``, i.e. the table of
    ``[k]`` inside any ``Z_K`` with ``K >= 2k-1``.  With ``modulus`` the sums
    are reduced mod ``modulus`` (wraparound allowed).
    """
    if k < 1:
        raise ValueError("interval_grid needs k >= 1")
    if modulus is not None and modulus < k:
        raise ValueError("modulus must be at least k")
    if modulus is None:
        triples = frozenset((a, b, a + b) for a in range(k) for b in range(k))
        labels = frozenset(range(2 * k - 1))
    else:
        triples = frozenset((a, b, (a + b) % modulus) for a in range(k) for b in range(k))
        labels = frozenset({t[2] for t in triples})
    side = frozenset(range(k))
    return TripleSystem(triples, side, side, labels)


def subgrid(ts: TripleSystem, rows: Iterable[int], cols: Iterable[int]) -> TripleSystem:
    """Triples of ``ts`` in the chosen rows and columns; labels trimmed to those used."""
    rows = frozenset(rows)
    cols = frozenset(cols)
    if not rows <= ts.rows or not cols <= ts.cols:
        raise OutOfUniverse("subgrid rows/cols must lie inside the universes")
    if len(rows) * len(cols) < len(ts.triples):
        picked = frozenset(
            (r, c, ts._cells[(r, c)]) for r in rows for c in cols if (r, c) in ts._cells
        )
    else:
        picked = frozenset(t for t in ts.triples if t[0] in rows and t[1] in cols)
    return TripleSystem(picked, rows, cols, frozenset(t[2] for t in picked))


def check_linear(ts: TripleSystem) -> bool:
    """True iff no two triples share two vertices."""
    row_label = set()
    col_label = set()
    for r, c, l in ts.triples:
        if (r, l) in row_label or (c, l) in col_label:
            return False
        row_label.add((r, l))
        col_label.add((c, l))
    # (row, col) pairs are unique by construction of TripleSystem
    return True


# ---------------------------------------------------------------------------
# isomorphism
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridIsomorphism:
    row_map: dict
    col_map: dict
    label_map: dict

    def image(self, triple: Triple) -> Triple:
        r, c, l = triple
        return (self.row_map[r], self.col_map[c], self.label_map[l])

    def check(self, a: TripleSystem, b: TripleSystem) -> bool:
        """Exhaustively confirm that the maps carry ``a`` exactly onto ``b``."""
        maps = (self.row_map, self.col_map, self.label_map)
        used_a = (a.used_rows, a.used_cols, a.used_labels)
        used_b = (b.used_rows, b.used_cols, b.used_labels)
        for mp, ua, ub in zip(maps, used_a, used_b):
            if set(mp) != set(ua) or set(mp.values()) != set(ub) or len(set(mp.values())) != len(mp):
                return False
        return {self.image(t) for t in a.triples} == set(b.triples)

    def to_json(self) -> dict:
        return {
            "rows": [[k, v] for k, v in sorted(self.row_map.items())],
            "cols": [[k, v] for k, v in sorted(self.col_map.items())],
            "labels": [[k, v] for k, v in sorted(self.label_map.items())],
        }

    @classmethod
    def from_json(cls, data: dict) -> "GridIsomorphism":
        return cls(
            {int(k): int(v) for k, v in data["rows"]},
            {int(k): int(v) for k, v in data["cols"]},
            {int(k): int(v) for k, v in data["labels"]},
        )


class _Index:
    """Incidence lookups for one side of an isomorphism search."""

    def __init__(self, ts: TripleSystem):
        self.by_vertex: dict[tuple[int, int], list[Triple]] = {}
        self.pairs: list[dict] = [{}, {}, {}]  # keyed by the two coordinates other than k
        for t in sorted(ts.triples):
            for k in range(3):
                self.by_vertex.setdefault((k, t[k]), []).append(t)
                other = tuple(t[i] for i in range(3) if i != k)
                self.pairs[k].setdefault(other, []).append(t[k])
        self.vertices = [sorted({t[k] for t in ts.triples}) for k in range(3)]
        deg = {key: len(v) for key, v in self.by_vertex.items()}
        quads = _intercalate_counts(ts, self.pairs[1])
        linear = check_linear(ts)
        self.signature = {}
        for (k, x), trips in self.by_vertex.items():
            nbrs = sorted(deg[(i, t[i])] for t in trips for i in range(3) if i != k)
            pairs = _pair_profile(self, k, x) if linear else ()
            self.signature[(k, x)] = (deg[(k, x)], quads.get((k, x), 0), tuple(nbrs), pairs)
        self.triples = ts.triples


def _cycle_type(mapping: dict) -> tuple:
    """Cycle and path lengths of a partial injection."""
    targets = set(mapping.values())
    seen = set()
    paths, cycles = [], []
    for start in mapping:
        if start in targets or start in seen:
            continue
        length, x = 0, start
        while x in mapping:
            seen.add(x)
            x = mapping[x]
            length += 1
        paths.append(length)
    for start in mapping:
        if start in seen:
            continue
        length, x = 0, start
        while x not in seen:
            seen.add(x)
            x = mapping[x]
            length += 1
        cycles.append(length)
    return tuple(sorted(cycles)), tuple(sorted(paths))


def _pair_profile(index: "_Index", k: int, x: int) -> tuple:
    """Multiset over vertices ``x2`` of class ``k`` of the cycle type of the map
    sending ``t[i]`` to ``u[i]`` whenever ``t[k] = x``, ``u[k] = x2`` and the
    triples agree in the third class.  Relabelling-invariant; for a group table
    it records element orders.  Only meaningful for linear systems."""
    i, j = [c for c in range(3) if c != k]
    mine = {t[j]: t[i] for t in index.by_vertex[(k, x)]}
    out = []
    for x2 in index.vertices[k]:
        if x2 == x:
            continue
        theirs = {t[j]: t[i] for t in index.by_vertex[(k, x2)]}
        mapping = {mine[key]: theirs[key] for key in mine if key in theirs}
        out.append(_cycle_type(mapping))
    return tuple(sorted(out))


def _intercalate_counts(ts: TripleSystem, col_of: dict) -> dict:
    """Per-vertex count of 2x2 subsquares (r,c,l),(r,c2,l2),(r2,c,l2),(r2,c2,l)."""
    counts: dict = {}
    cells = ts._cells
    by_row: dict = {}
    for r, c, l in ts.triples:
        by_row.setdefault(r, []).append((c, l))
    rows = sorted(by_row)
    for i, r in enumerate(rows):
        for r2 in rows[i + 1 :]:
            for c, l in by_row[r]:
                l2 = cells.get((r2, c))
                if l2 is None:
                    continue
                # several columns can carry l2 in row r when the system is not linear
                for c2 in col_of.get((r, l2), ()):
                    if c2 <= c or cells.get((r2, c2)) != l:
                        continue
                    for key in ((0, r), (0, r2), (1, c), (1, c2), (2, l), (2, l2)):
                        counts[key] = counts.get(key, 0) + 1
    return counts


class _State:
    __slots__ = ("fwd", "bwd")

    def __init__(self, fwd=None, bwd=None):
        self.fwd = fwd if fwd is not None else ({}, {}, {})
        self.bwd = bwd if bwd is not None else ({}, {}, {})

    def copy(self) -> "_State":
        return _State(tuple(dict(d) for d in self.fwd), tuple(dict(d) for d in self.bwd))


def _propagate(state: _State, a: _Index, b: _Index, queue: list) -> bool:
    """Apply forced assignments; False on contradiction."""
    sides = ((a, b, state.fwd, state.bwd), (b, a, state.bwd, state.fwd))
    while queue:
        k, x, y = queue.pop()
        fwd, bwd = state.fwd[k], state.bwd[k]
        if x in fwd:
            if fwd[x] != y:
                return False
            continue
        if y in bwd:
            return False
        fwd[x] = y
        bwd[y] = x
        for src_vertex, (src, dst, smap, dmap) in zip((x, y), sides):
            for t in src.by_vertex[(k, src_vertex)]:
                mapped = [smap[i].get(t[i]) for i in range(3)]
                unknown = [i for i in range(3) if mapped[i] is None]
                if not unknown:
                    if tuple(mapped) not in dst.triples:
                        return False
                elif len(unknown) == 1:
                    u = unknown[0]
                    other = tuple(mapped[i] for i in range(3) if i != u)
                    options = dst.pairs[u].get(other)
                    if not options:
                        return False
                    if len(options) == 1:
                        if src is a:
                            queue.append((u, t[u], options[0]))
                        else:
                            queue.append((u, options[0], t[u]))
    return True


def is_isomorphic(a: TripleSystem, b: TripleSystem, max_nodes: int = DEFAULT_ISO_BUDGET) -> GridIsomorphism | None:
    """Find a row/column/label bijection carrying ``a`` onto ``b``.

    Backtracking over vertices of ``a`` in canonical order, restricted to
    candidates with equal degree signature and with forced assignments
    propagated through the triples.  Returns the first isomorphism found, or
    ``None`` when none exists.  Raises :class:`BudgetExceeded` past
    ``max_nodes`` candidate trials.
    """
    if len(a.triples) != len(b.triples):
        return None
    ia, ib = _Index(a), _Index(b)
    for k in range(3):
        if len(ia.vertices[k]) != len(ib.vertices[k]):
            return None
        sig_a = sorted(ia.signature[(k, x)] for x in ia.vertices[k])
        sig_b = sorted(ib.signature[(k, x)] for x in ib.vertices[k])
        if sig_a != sig_b:
            return None
    if not a.triples:
        return GridIsomorphism({}, {}, {})

    order = [(k, x) for k in range(3) for x in ia.vertices[k]]
    nodes = 0

    def pick(state: _State):
        fallback = None
        for k, x in order:
            if x in state.fwd[k]:
                continue
            if fallback is None:
                fallback = (k, x)
            if any(any(state.fwd[i].get(t[i]) is not None for i in range(3)) for t in ia.by_vertex[(k, x)]):
                return k, x
        return fallback

    def search(state: _State):
        nonlocal nodes
        var = pick(state)
        if var is None:
            return state
        k, x = var
        sig = ia.signature[(k, x)]
        for y in ib.vertices[k]:
            if y in state.bwd[k] or ib.signature[(k, y)] != sig:
                continue
            nodes += 1
            if nodes > max_nodes:
                raise BudgetExceeded(f"isomorphism search exceeded {max_nodes} nodes")
            trial = state.copy()
            if _propagate(trial, ia, ib, [(k, x, y)]):
                found = search(trial)
                if found is not None:
                    return found
        return None

    final = search(_State())
    if final is None:
        return None
    iso = GridIsomorphism(*(dict(sorted(m.items())) for m in final.fwd))
    if not iso.check(a, b):
        raise AssertionError("isomorphism search produced an invalid map")
    return iso


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


def _is_range(s: frozenset) -> bool:
    return not s or (min(s) == 0 and max(s) == len(s) - 1)


def format_triples_csv(ts: TripleSystem | Configuration) -> str:
    """Render ``row,col,label`` CSV; emit a universes line only when it carries information."""
    if isinstance(ts, Configuration):
        ts = ts.as_system()
    buf = io.StringIO()
    universes = (ts.rows, ts.cols, ts.labels)
    inferred = [frozenset(range(max((t[k] for t in ts.triples), default=-1) + 1)) for k in range(3)]
    if all(_is_range(u) for u in universes) and list(universes) != inferred:
        buf.write("# universes {} {} {}\n".format(*(len(u) for u in universes)))
    buf.write("row,col,label\n")
    for r, c, l in sorted(ts.triples):
        buf.write(f"{r},{c},{l}\n")
    return buf.getvalue()


def write_triples_csv(ts: TripleSystem | Configuration, path: str | Path) -> None:
    Path(path).write_text(format_triples_csv(ts), encoding="utf-8")


def parse_triples_csv(handle: TextIO) -> TripleSystem:
    universes = None
    triples = []
    header_seen = False
    for raw in handle:
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if parts and parts[0] == "universes":
                if triples:
                    raise ValueError("universes line must precede data")
                if len(parts) != 4:
                    raise ValueError(f"bad universes line: {line!r}")
                universes = [range(int(x)) for x in parts[1:]]
            continue
        if not header_seen:
            if [h.strip() for h in next(csv.reader([line]))] != ["row", "col", "label"]:
                raise ValueError(f"expected header 'row,col,label', got {line!r}")
            header_seen = True
            continue
        fields = next(csv.reader([line]))
        if len(fields) != 3:
            raise ValueError(f"expected 3 fields, got {line!r}")
        triples.append(tuple(int(f) for f in fields))
    if not header_seen:
        raise ValueError("missing 'row,col,label' header")
    if universes is None:
        return TripleSystem.from_triples(triples)
    return TripleSystem.from_triples(triples, *universes)


def read_triples_csv(path: str | Path) -> TripleSystem:
    with open(path, encoding="utf-8") as handle:
        return parse_triples_csv(handle)
