"""Exact brute-force optimisation over small configurations.

For a fixed choice of rows ``R`` and columns ``C`` the best labels to spend
the remaining budget on are simply the most frequent labels inside ``R x C``,
so the search enumerates ``(R, C)`` pairs only and sorts label counts.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .constructions import elementary_system
from .errors import Infeasible
from .grids import Configuration, TripleSystem, check_linear, interval_grid


@dataclass(frozen=True)
class SearchBudget:
    max_vertices: int = 12
    max_nodes: int = 50_000_000
    time_cap: float = 600.0

    def __post_init__(self):
        if self.max_vertices <= 0 or self.max_nodes <= 0 or self.time_cap <= 0:
            raise ValueError("search budget fields must be positive")


@dataclass(frozen=True)
class OracleResult:
    optimum: int
    witness: Configuration
    exhaustive: bool
    stabilized: bool | None = None

    def to_json(self) -> dict:
        out = {
            "optimum": self.optimum,
            "exhaustive": self.exhaustive,
            "witness": [list(t) for t in sorted(self.witness.triples)],
        }
        if self.stabilized is not None:
            out["stabilized"] = self.stabilized
        return out


class _Stop(Exception):
    pass


def _size_bounds(v: int, linear: bool) -> np.ndarray:
    """``ub[a, b]``: most faces possible with ``a`` rows, ``b`` columns and ``v - a - b`` labels."""
    ub = np.zeros((v + 1, v + 1), dtype=np.int64)
    for a in range(1, v + 1):
        for b in range(1, v + 1 - a):
            labels = v - a - b
            if labels < 1:
                continue
            # in a linear system a label occurs at most once per row and per column
            per_label = min(a, b) if linear else a * b
            ub[a, b] = min(a * b, labels * per_label)
    return ub


def max_faces(ts: TripleSystem, v: int, budget: SearchBudget | None = None, anchored: bool = False) -> OracleResult:
    """Maximum number of triples of ``ts`` spanning at most ``v`` vertices.

    Row sets are enumerated in lexicographic order of their sorted tuples and,
    for each, column sets likewise; the witness is the first optimum met in
    that order, with labels chosen by decreasing count (smaller label first).

    ``anchored=True`` only looks at ``(R, C)`` containing the smallest used row
    and column.  That is optimum-preserving, and preserves the witness, for
    tables where rows and columns can be translated down onto the smallest
    index (group tables with identity 0, integer interval grids).

    Hitting ``budget`` returns the best value found with ``exhaustive=False``.
    """
    budget = budget or SearchBudget()
    if v < 0:
        raise ValueError("v must be non-negative")
    empty = Configuration(ts, frozenset())
    if v < 3 or not ts.triples:
        return OracleResult(0, empty, True)

    rows = sorted(ts.used_rows)
    cols = sorted(ts.used_cols)
    labels = sorted(ts.used_labels)
    lab_idx = {lab: i for i, lab in enumerate(labels)}
    nr, nc, nl = len(rows), len(cols), len(labels)
    row_idx = {r: i for i, r in enumerate(rows)}
    col_idx = {c: i for i, c in enumerate(cols)}
    grid = np.full((nr, nc), -1, dtype=np.int64)
    for r, c, lab in ts.triples:
        grid[row_idx[r], col_idx[c]] = lab_idx[lab]
    row_cells = [np.flatnonzero(grid[i] >= 0) for i in range(nr)]

    ub = _size_bounds(v, check_linear(ts))
    # best achievable with at least a rows / at least b columns given a rows
    ub_cols = np.maximum.accumulate(ub[:, ::-1], axis=1)[:, ::-1]
    ub_rows = np.maximum.accumulate(ub.max(axis=1)[::-1])[::-1]

    colcount = np.zeros((nc, nl), dtype=np.int64)
    best_value = 0
    best_rc: tuple[tuple[int, ...], tuple[int, ...]] | None = None
    nodes = 0
    deadline = time.monotonic() + budget.time_cap
    exhaustive = True
    R: list[int] = []
    C: list[int] = []

    def tick():
        nonlocal nodes
        nodes += 1
        if nodes > budget.max_nodes or (nodes & 4095 == 0 and time.monotonic() > deadline):
            raise _Stop

    def visit_cols(start: int, counts: np.ndarray):
        nonlocal best_value, best_rc
        a = len(R)
        stop = 1 if anchored and not C else nc
        for j in range(start, stop):
            b = len(C) + 1
            if b > v - a - 1:
                return
            if ub_cols[a, b] <= best_value:
                return
            tick()
            new_counts = counts + colcount[j]
            C.append(j)
            if ub[a, b] > best_value:
                budget_labels = v - a - b
                if budget_labels >= nl:
                    value = int(new_counts.sum())
                else:
                    value = int(np.partition(new_counts, nl - budget_labels)[nl - budget_labels :].sum())
                if value > best_value:
                    best_value = value
                    best_rc = (tuple(R), tuple(C))
            visit_cols(j + 1, new_counts)
            C.pop()

    def visit_rows(start: int):
        stop = 1 if anchored and not R else nr
        for i in range(start, stop):
            a = len(R) + 1
            if a > v - 2:
                return
            if ub_rows[a] <= best_value:
                return
            cells = row_cells[i]
            colcount[cells, grid[i, cells]] += 1
            R.append(i)
            visit_cols(0, np.zeros(nl, dtype=np.int64))
            visit_rows(i + 1)
            R.pop()
            colcount[cells, grid[i, cells]] -= 1

    try:
        visit_rows(0)
    except _Stop:
        exhaustive = False

    if best_rc is None:
        return OracleResult(0, empty, exhaustive)
    witness = _witness(ts, [rows[i] for i in best_rc[0]], [cols[j] for j in best_rc[1]], v)
    if len(witness) != best_value:
        raise AssertionError("witness recount disagrees with the search value")
    return OracleResult(best_value, Configuration(ts, witness), exhaustive)


def _witness(ts: TripleSystem, rows: list[int], cols: list[int], v: int) -> frozenset:
    cells = [(r, c, ts.label(r, c)) for r in rows for c in cols if ts.label(r, c) is not None]
    counts: dict[int, int] = {}
    for _, _, lab in cells:
        counts[lab] = counts.get(lab, 0) + 1
    keep = set(sorted(counts, key=lambda lab: (-counts[lab], lab))[: v - len(rows) - len(cols)])
    return frozenset(t for t in cells if t[2] in keep)


def span_lower_bound(t: int, linear: bool = True) -> int:
    """Fewest vertices that could possibly carry ``t`` triples."""
    best = None
    for r in range(1, t + 1):
        for c in range(1, t + 1):
            if r * c < t:
                continue
            labels = math.ceil(t / min(r, c)) if linear else 1
            total = r + c + labels
            if best is None or total < best:
                best = total
    return best


def min_span(ts: TripleSystem, t: int, budget: SearchBudget | None = None, anchored: bool = False) -> OracleResult:
    """Fewest vertices spanned by ``t`` triples of ``ts``; ``optimum`` is that vertex count."""
    if t < 1:
        raise ValueError("t must be positive")
    if len(ts) < t:
        raise Infeasible(f"system has only {len(ts)} triples, fewer than {t}")
    exhaustive = True
    v = span_lower_bound(t, check_linear(ts))
    while True:
        res = max_faces(ts, v, budget, anchored)
        exhaustive = exhaustive and res.exhaustive
        if res.optimum >= t:
            kept = frozenset(sorted(res.witness.triples)[:t])
            return OracleResult(v, Configuration(ts, kept), exhaustive)
        v += 1


def f_prime_exact(v: int, budget: SearchBudget | None = None, check_stability: bool = True) -> OracleResult:
    """Maximum faces on ``v`` vertices in the integer interval grid of side ``v``.

    With ``check_stability`` the value is recomputed at side ``v + 1`` and
    ``stabilized`` reports whether the two agree.
    """
    budget = budget or SearchBudget()
    if v > budget.max_vertices:
        raise ValueError(f"v={v} exceeds max_vertices={budget.max_vertices}")
    if v < 3:
        return OracleResult(0, Configuration(interval_grid(1), frozenset()), True, True if check_stability else None)
    res = max_faces(interval_grid(v), v, budget, anchored=True)
    stabilized = None
    if check_stability:
        wider = max_faces(interval_grid(v + 1), v, budget, anchored=True)
        if res.exhaustive and wider.exhaustive:
            stabilized = wider.optimum == res.optimum
    return OracleResult(res.optimum, res.witness, res.exhaustive, stabilized)


def g_prime_exact(
    v: int, p: int, m: int, budget: SearchBudget | None = None, check_stability: bool = True
) -> OracleResult:
    """Maximum faces on ``v`` vertices in the addition table of ``Z_p^m``."""
    budget = budget or SearchBudget()
    if v > budget.max_vertices:
        raise ValueError(f"v={v} exceeds max_vertices={budget.max_vertices}")
    res = max_faces(elementary_system(p, m), v, budget, anchored=True)
    stabilized = None
    if check_stability:
        wider = max_faces(elementary_system(p, m + 1), v, budget, anchored=True)
        if res.exhaustive and wider.exhaustive:
            stabilized = wider.optimum == res.optimum
    return OracleResult(res.optimum, res.witness, res.exhaustive, stabilized)
