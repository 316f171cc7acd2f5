"""Desk-scale structure pipeline for dense subsets of a group table.

abelian subgroup -> densest coset block -> primary decomposition -> either an
AP grid inside a cyclic block or a coset grid inside an elementary abelian
block -> verified isomorphism of the extracted subgrid.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .certificates import PipelineCert, case_target, index_vector, validate_pipeline, vector_index
from .errors import CapExceeded, NotFound, SearchFailed
from .finders import COSET_GRID_ORDER_CAP, find_ap_grid, find_coset_grid_matrix
from .grids import TripleSystem, is_isomorphic, subgrid
from .groups import (
    CosetBlock,
    GroupTable,
    coset_blocks,
    cyclic_powers,
    densest_block,
    find_abelian_subgroup,
    primary_decomposition,
)


@dataclass(frozen=True)
class PipelineParams:
    """Branch thresholds; ``None`` means the default for the given ``k`` and ``m``."""

    t_min: int | None = None
    m_min: int | None = None

    def resolve(self, k: int, m: int) -> tuple[int, int]:
        t_min = self.t_min if self.t_min is not None else max(2 * k, k * k)
        m_min = self.m_min if self.m_min is not None else m
        return t_min, m_min


def sub_blocks(table: GroupTable, block: CosetBlock, ordering: Sequence[int]) -> list[CosetBlock]:
    """Coset blocks of the subgroup listed by ``ordering`` that sit inside ``block``.

    Rows are left cosets ``x*C`` for ``x`` in ``block.rows`` and columns right
    cosets ``C*y`` for ``y`` in ``block.cols``, each taken once, in order of
    first appearance.
    """
    prod = table.product
    h = np.asarray(ordering, dtype=np.int64)
    left, right = [], []
    seen_l: set[int] = set()
    seen_r: set[int] = set()
    for x in block.rows:
        if x not in seen_l:
            coset = tuple(int(v) for v in prod[x, h])
            left.append(coset)
            seen_l.update(coset)
    for y in block.cols:
        if y not in seen_r:
            coset = tuple(int(v) for v in prod[h, y])
            right.append(coset)
            seen_r.update(coset)
    return [CosetBlock(r, c, len(h)) for r in left for c in right]


def _block_matrix(a: TripleSystem, block: CosetBlock) -> np.ndarray:
    n = len(block.rows)
    mat = np.zeros((n, n), dtype=bool)
    for i, r in enumerate(block.rows):
        for j, c in enumerate(block.cols):
            mat[i, j] = a.label(r, c) is not None
    return mat


def _cells(mat: np.ndarray) -> list[tuple[int, int]]:
    return [(int(i), int(j)) for i, j in np.argwhere(mat)]


def _elementary_ordering(table: GroupTable, members: Sequence[int], p: int) -> tuple[list[int], int]:
    """Greedy basis of the elements of order dividing ``p``; returns the element
    for each coordinate vector (lexicographic index) and the dimension."""
    prod = table.product
    basis: list[int] = []
    span = {table.identity}
    for x in members:
        if x in span:
            continue
        basis.append(x)
        powers = cyclic_powers(table, x)
        span = {int(prod[s, g]) for s in span for g in powers}
    dim = len(basis)
    ordering = []
    for idx in range(p**dim):
        elem = table.identity
        for coeff, b in zip(index_vector(idx, p, dim), basis):
            elem = int(prod[elem, table.power(b, coeff)])
        ordering.append(elem)
    return ordering, dim


def _interval_case(table, a, subgroup, block, k, order, group_spec):
    mat = _block_matrix(a, block)
    ap = find_ap_grid(_cells(mat), order, k)
    if ap is None:
        return None
    case = {"kind": "interval", "k": k, "K": ap.difference_order}
    return _assemble(table, a, subgroup, block, ap, case, group_spec)


def _assemble(table, a, subgroup, block, inner, case, group_spec) -> PipelineCert:
    placeholder = PipelineCert(case, group_spec, subgroup, block, inner, None)
    rows, cols = placeholder.grid_rows(), placeholder.grid_cols()
    sub = subgrid(a, rows, cols)
    iso = is_isomorphic(sub, case_target(case))
    if iso is None:
        raise SearchFailed("isomorphism", f"extracted subgrid does not match {case}")
    cert = PipelineCert(case, group_spec, subgroup, block, inner, iso)
    problem = validate_pipeline(cert, a, table)
    if problem:
        raise AssertionError(f"pipeline produced an invalid certificate: {problem}")
    return cert


def structure_pipeline(
    table: GroupTable,
    a: TripleSystem,
    k: int,
    m: int = 1,
    params: PipelineParams | None = None,
    group_spec: str | None = None,
) -> PipelineCert:
    """Find a certified copy of a small addition table inside ``a``.

    The cyclic branch runs when the subgroup's exponent ``T`` reaches
    ``t_min``; the elementary branch runs when it is skipped or fails.  In the
    elementary branch with ``p >= k`` the coset grid is promoted to an AP grid
    along its first basis vector, which yields the interval case with ``K = p``.

    Raises :class:`SearchFailed` naming the stage that came up empty.
    """
    if k < 2 or m < 1:
        raise ValueError("need k >= 2 and m >= 1")
    if a.rows - set(range(table.order)) or a.cols - set(range(table.order)):
        raise ValueError("triple system is not inside the group table")
    for r, c, lab in a.triples:
        if table.product[r, c] != lab:
            raise ValueError(f"triple {(r, c, lab)} is not in the group table")
    t_min, m_min = (params or PipelineParams()).resolve(k, m)

    try:
        subgroup = find_abelian_subgroup(table, min_order=2)
    except NotFound as exc:
        raise SearchFailed("abelian_subgroup", str(exc)) from exc
    block, restricted, _ = densest_block(a, coset_blocks(table, subgroup))
    if not restricted.triples:
        raise SearchFailed("densest_block", "the subset is empty")
    decomposition = primary_decomposition(table, subgroup)
    orders = table.element_orders()
    failed = []

    exponent = max(orders[x] for x in subgroup.members)
    if exponent >= t_min and exponent >= k:
        g = min(x for x in subgroup.members if orders[x] == exponent)
        ordering = cyclic_powers(table, g)
        cblock, _, _ = densest_block(a, sub_blocks(table, block, ordering))
        cert = _interval_case(table, a, subgroup, cblock, k, exponent, group_spec)
        if cert is not None:
            return cert
        failed.append("ap_grid")

    primes = sorted(
        (p for p, _, _ in decomposition.factors if decomposition.multiplicity(p) >= m_min),
        key=lambda p: (-decomposition.multiplicity(p), p),
    )
    if primes:
        p = primes[0]
        members = [x for x in subgroup.members if table.power(x, p) == table.identity]
        ordering, dim = _elementary_ordering(table, members, p)
        if dim < m:
            failed.append("elementary_dimension")
        elif p**dim > COSET_GRID_ORDER_CAP:
            failed.append("coset_grid_cap")
        else:
            eblock, _, _ = densest_block(a, sub_blocks(table, block, ordering))
            try:
                grid = find_coset_grid_matrix(_block_matrix(a, eblock), p, dim, m)
                stage = "coset_grid"
            except CapExceeded:
                grid, stage = None, "coset_grid_cap"
            if grid is None:
                failed.append(stage)
            elif p >= k:
                return _promote(table, a, subgroup, eblock, ordering, grid, k, group_spec)
            else:
                case = {"kind": "elementary", "p": p, "m": m}
                return _assemble(table, a, subgroup, eblock, grid, case, group_spec)
    elif not failed:
        failed.append("branch")
    raise SearchFailed(failed[-1], "stages tried: " + ", ".join(failed))


def _promote(table, a, subgroup, eblock, ordering, grid, k, group_spec) -> PipelineCert:
    """Turn a coset grid over ``Z_p`` with ``p >= k`` into an AP grid in a cyclic block."""
    p = grid.p
    g = ordering[vector_index(grid.basis[0], p)]
    r = eblock.rows[vector_index(grid.a1, p)]
    s = eblock.cols[vector_index(grid.a2, p)]
    powers = cyclic_powers(table, g)
    prod = table.product
    cblock = CosetBlock(
        tuple(int(prod[r, h]) for h in powers),
        tuple(int(prod[h, s]) for h in powers),
        len(powers),
    )
    cert = _interval_case(table, a, subgroup, cblock, k, p, group_spec)
    if cert is None:
        raise AssertionError("a full cyclic block must contain an AP grid")
    return cert


__all__ = ["PipelineParams", "structure_pipeline", "sub_blocks"]
