"""Machine-checkable witnesses and their validators.

Every certificate serialises to JSON with a ``"type"`` tag and integer fields
only.  Validators re-check a certificate against the data it claims to live in
and return the first violation as a string, or ``None`` when it holds.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from .grids import GridIsomorphism, TripleSystem, interval_grid, subgrid
from .groups import CosetBlock, GroupTable, Subgroup, build_group, check_subgroup, is_abelian_subgroup


def vector_index(vec: Iterable[int], p: int) -> int:
    idx = 0
    for x in vec:
        idx = idx * p + int(x)
    return idx


def index_vector(idx: int, p: int, n: int) -> tuple[int, ...]:
    out = []
    for _ in range(n):
        idx, x = divmod(idx, p)
        out.append(x)
    return tuple(reversed(out))


@dataclass(frozen=True)
class ApGridCert:
    a: int
    b: int
    d: int
    k: int
    n: int

    def rows(self) -> list[int]:
        return [(self.a + i * self.d) % self.n for i in range(self.k)]

    def cols(self) -> list[int]:
        return [(self.b + j * self.d) % self.n for j in range(self.k)]

    def cells(self) -> list[tuple[int, int]]:
        return [(x, y) for x in self.rows() for y in self.cols()]

    @property
    def difference_order(self) -> int:
        return self.n // math.gcd(self.n, self.d % self.n) if self.d % self.n else 1

    def to_json(self) -> dict:
        return {"type": "ap_grid", "a": self.a, "b": self.b, "d": self.d, "k": self.k, "n": self.n}

    @classmethod
    def from_json(cls, data: dict) -> "ApGridCert":
        return cls(int(data["a"]), int(data["b"]), int(data["d"]), int(data["k"]), int(data["n"]))


@dataclass(frozen=True)
class SubspaceCert:
    """Combinatorial subspace of words over ``{0..m-1}``; ``z`` is 0 on wildcard positions."""

    z: tuple[int, ...]
    wildcard_sets: tuple[tuple[int, ...], ...]
    m: int

    def points(self) -> list[tuple[int, ...]]:
        out = []
        for values in itertools.product(range(self.m), repeat=len(self.wildcard_sets)):
            word = list(self.z)
            for idx_set, val in zip(self.wildcard_sets, values):
                for q in idx_set:
                    word[q] = val
            out.append(tuple(word))
        return out

    def to_json(self) -> dict:
        return {
            "type": "subspace",
            "m": self.m,
            "z": list(self.z),
            "wildcard_sets": [list(s) for s in self.wildcard_sets],
        }

    @classmethod
    def from_json(cls, data: dict) -> "SubspaceCert":
        return cls(
            tuple(int(x) for x in data["z"]),
            tuple(tuple(int(q) for q in s) for s in data["wildcard_sets"]),
            int(data["m"]),
        )


@dataclass(frozen=True)
class CosetGridCert:
    """``(a1 + span(basis)) x (a2 + span(basis))`` inside ``Z_p^n x Z_p^n``."""

    p: int
    n: int
    basis: tuple[tuple[int, ...], ...]
    a1: tuple[int, ...]
    a2: tuple[int, ...]

    @property
    def k(self) -> int:
        return len(self.basis)

    def span(self) -> list[tuple[int, ...]]:
        out = []
        for coeffs in itertools.product(range(self.p), repeat=self.k):
            vec = [0] * self.n
            for c, b in zip(coeffs, self.basis):
                for q in range(self.n):
                    vec[q] = (vec[q] + c * b[q]) % self.p
            out.append(tuple(vec))
        return out

    def _coset(self, base) -> list[tuple[int, ...]]:
        return [tuple((x + y) % self.p for x, y in zip(base, g)) for g in self.span()]

    def row_vectors(self) -> list[tuple[int, ...]]:
        return self._coset(self.a1)

    def col_vectors(self) -> list[tuple[int, ...]]:
        return self._coset(self.a2)

    def cells(self) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
        return [(x, y) for x in self.row_vectors() for y in self.col_vectors()]

    def index_cells(self) -> list[tuple[int, int]]:
        return [(vector_index(x, self.p), vector_index(y, self.p)) for x, y in self.cells()]

    def to_json(self) -> dict:
        return {
            "type": "coset_grid",
            "p": self.p,
            "n": self.n,
            "basis": [list(b) for b in self.basis],
            "a1": list(self.a1),
            "a2": list(self.a2),
        }

    @classmethod
    def from_json(cls, data: dict) -> "CosetGridCert":
        return cls(
            int(data["p"]),
            int(data["n"]),
            tuple(tuple(int(x) for x in b) for b in data["basis"]),
            tuple(int(x) for x in data["a1"]),
            tuple(int(x) for x in data["a2"]),
        )


def rank_mod_p(vectors: Iterable[Iterable[int]], p: int) -> int:
    rows = [list(v) for v in vectors]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for col in range(ncols):
        pivot = next((i for i in range(rank, len(rows)) if rows[i][col] % p), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        inv = pow(rows[rank][col], -1, p)
        rows[rank] = [(x * inv) % p for x in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][col] % p:
                f = rows[i][col]
                rows[i] = [(x - f * y) % p for x, y in zip(rows[i], rows[rank])]
        rank += 1
    return rank


@dataclass(frozen=True)
class PipelineCert:
    """Outcome of the structure pipeline.

    ``case`` is ``{"kind": "interval", "k": k, "K": K}`` or
    ``{"kind": "elementary", "p": p, "m": m}``.  Inner certificate
    coordinates are positions in ``block.rows`` / ``block.cols``: for the
    interval case position ``i`` is ``r*g^i``; for the elementary case
    position ``i`` is the element whose coordinate vector has index ``i``.
    """

    case: dict
    group: str | None
    subgroup: Subgroup
    block: CosetBlock
    inner: Union[ApGridCert, CosetGridCert]
    subgrid_iso: GridIsomorphism

    def grid_rows(self) -> list[int]:
        if isinstance(self.inner, ApGridCert):
            return [self.block.rows[i] for i in self.inner.rows()]
        return [self.block.rows[vector_index(x, self.inner.p)] for x in self.inner.row_vectors()]

    def grid_cols(self) -> list[int]:
        if isinstance(self.inner, ApGridCert):
            return [self.block.cols[j] for j in self.inner.cols()]
        return [self.block.cols[vector_index(y, self.inner.p)] for y in self.inner.col_vectors()]

    def target(self) -> TripleSystem:
        return case_target(self.case)

    def to_json(self) -> dict:
        return {
            "type": "pipeline",
            "group": self.group,
            "case": dict(self.case),
            "subgroup": list(self.subgroup.members),
            "block": {
                "rows": list(self.block.rows),
                "cols": list(self.block.cols),
                "subgroup_order": self.block.subgroup_order,
            },
            "inner": self.inner.to_json(),
            "subgrid_iso": self.subgrid_iso.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "PipelineCert":
        blk = data["block"]
        members = [int(x) for x in data["subgroup"]]
        parent = 1 + max(members + [int(x) for x in blk["rows"]] + [int(x) for x in blk["cols"]])
        return cls(
            {k: (v if k == "kind" else int(v)) for k, v in data["case"].items()},
            data.get("group"),
            Subgroup(parent, tuple(members)),
            CosetBlock(tuple(int(x) for x in blk["rows"]), tuple(int(x) for x in blk["cols"]), int(blk["subgroup_order"])),
            certificate_from_json(data["inner"]),
            GridIsomorphism.from_json(data["subgrid_iso"]),
        )


Certificate = Union[ApGridCert, SubspaceCert, CosetGridCert, PipelineCert]


def case_target(case: dict) -> TripleSystem:
    """Addition table the pipeline claims its subgrid is isomorphic to."""
    if case["kind"] == "interval":
        k, modulus = case["k"], case["K"]
        return interval_grid(k) if modulus >= 2 * k - 1 else interval_grid(k, modulus)
    if case["kind"] == "elementary":
        from .constructions import elementary_system

        return elementary_system(case["p"], case["m"])
    raise ValueError(f"unknown case kind {case['kind']!r}")


def certificate_from_json(data: dict) -> Certificate:
    kind = data.get("type")
    if kind == "ap_grid":
        return ApGridCert.from_json(data)
    if kind == "subspace":
        return SubspaceCert.from_json(data)
    if kind == "coset_grid":
        return CosetGridCert.from_json(data)
    if kind == "pipeline":
        return PipelineCert.from_json(data)
    raise ValueError(f"unknown certificate type {kind!r}")


def dumps(cert: Certificate) -> str:
    return json.dumps(cert.to_json(), indent=2) + "\n"


# ---------------------------------------------------------------------------
# validators
# ---------------------------------------------------------------------------


def validate_ap_grid(cert: ApGridCert, cells: set) -> str | None:
    if cert.k < 1 or cert.n < 1:
        return "invariant: k and n must be positive"
    if cert.d % cert.n == 0:
        return "invariant: common difference d must be nonzero mod n"
    if cert.difference_order < cert.k:
        return f"invariant: additive order of d={cert.d} in Z_{cert.n} is {cert.difference_order} < k={cert.k}"
    for cell in cert.cells():
        if cell not in cells:
            return f"missing cell {cell}"
    return None


def validate_subspace(cert: SubspaceCert, words: set) -> str | None:
    n = len(cert.z)
    seen: set[int] = set()
    for s in cert.wildcard_sets:
        if not s:
            return "invariant: empty wildcard set"
        for q in s:
            if not 0 <= q < n:
                return f"invariant: wildcard index {q} outside 0..{n - 1}"
            if q in seen:
                return f"invariant: wildcard sets overlap at index {q}"
            seen.add(q)
    if any(not 0 <= x < cert.m for x in cert.z):
        return "invariant: base point outside the alphabet"
    for word in cert.points():
        if word not in words:
            return f"missing word {word}"
    return None


def validate_coset_grid(cert: CosetGridCert, cells: set) -> str | None:
    """``cells`` holds index pairs in ``Z_p^n x Z_p^n`` (lexicographic vector indices)."""
    vecs = list(cert.basis) + [cert.a1, cert.a2]
    if any(len(v) != cert.n for v in vecs):
        return "invariant: vector length differs from n"
    if rank_mod_p(cert.basis, cert.p) != cert.k:
        return "invariant: basis vectors are linearly dependent"
    for x, y in cert.cells():
        cell = (vector_index(x, cert.p), vector_index(y, cert.p))
        if cell not in cells:
            return f"missing cell {cell} = ({x}, {y})"
    return None


def _cells_of(ts: TripleSystem) -> set:
    return {(r, c) for r, c, _ in ts.triples}


def validate_pipeline(cert: PipelineCert, a: TripleSystem, table: GroupTable | None = None) -> str | None:
    """Check a pipeline certificate against the triple set it was found in.

    ``table`` defaults to the group named in the certificate, when present, and
    enables the structural checks (subgroup, cosets, products).
    """
    if table is None and cert.group:
        table = build_group(cert.group)
    inner = cert.inner
    nblock = len(cert.block.rows)
    if len(cert.block.cols) != nblock or cert.block.subgroup_order != nblock:
        return "invariant: block rows/cols sizes disagree with subgroup_order"
    if isinstance(inner, ApGridCert):
        if cert.case.get("kind") != "interval":
            return "invariant: AP grid certificate under a non-interval case"
        if inner.n != nblock:
            return f"invariant: AP grid modulus {inner.n} differs from block size {nblock}"
        if inner.k != cert.case["k"] or inner.difference_order != cert.case["K"]:
            return "invariant: case parameters disagree with the AP grid"
        problem = validate_ap_grid(inner, {(i, j) for i in range(nblock) for j in range(nblock)})
    else:
        if cert.case.get("kind") != "elementary":
            return "invariant: coset grid certificate under a non-elementary case"
        if inner.p**inner.n != nblock:
            return "invariant: coset grid ambient size differs from block size"
        if inner.k != cert.case["m"] or inner.p != cert.case["p"]:
            return "invariant: case parameters disagree with the coset grid"
        problem = validate_coset_grid(inner, {(i, j) for i in range(nblock) for j in range(nblock)})
    if problem:
        return problem
    rows, cols = cert.grid_rows(), cert.grid_cols()
    cells = _cells_of(a)
    for r in rows:
        for c in cols:
            if (r, c) not in cells:
                return f"missing cell ({r},{c})"
    if not set(rows) <= a.rows or not set(cols) <= a.cols:
        return "invariant: certificate rows/cols outside the triple universes"
    sub = subgrid(a, rows, cols)
    if not cert.subgrid_iso.check(sub, cert.target()):
        return "invariant: subgrid isomorphism does not map the subgrid onto the claimed addition table"
    if table is not None:
        problem = _validate_group_structure(cert, a, table)
        if problem:
            return problem
    return None


def _validate_group_structure(cert: PipelineCert, a: TripleSystem, table: GroupTable) -> str | None:
    prod = table.product
    for r, c, lab in a.triples:
        if not (0 <= r < table.order and 0 <= c < table.order) or prod[r, c] != lab:
            return f"triple {(r, c, lab)} is not in the multiplication table of {cert.group or table.name}"
    try:
        check_subgroup(table, cert.subgroup.members)
    except ValueError as exc:
        return f"invariant: subgroup {exc}"
    if not is_abelian_subgroup(table, cert.subgroup):
        return "invariant: subgroup is not abelian"
    rows, cols = np.array(cert.block.rows), np.array(cert.block.cols)
    r_inv = table.inverse(int(rows[0]))
    s_inv = table.inverse(int(cols[0]))
    h_left = prod[r_inv, rows]
    h_right = prod[cols, s_inv]
    if not np.array_equal(h_left, h_right):
        return "invariant: block rows and cols are not cosets of one subgroup in one ordering"
    members = set(h_left.tolist())
    if len(members) != len(h_left):
        return "invariant: block repeats an element"
    try:
        check_subgroup(table, members)
    except ValueError as exc:
        return f"invariant: block subgroup {exc}"
    if not members <= set(cert.subgroup.members):
        return "invariant: block subgroup is not inside the abelian subgroup"
    return None


def validate(cert: Certificate, data) -> str | None:
    """Dispatch on certificate type; ``data`` is a TripleSystem or, for subspaces, a set of words."""
    if isinstance(cert, SubspaceCert):
        return validate_subspace(cert, set(data))
    if isinstance(cert, PipelineCert):
        return validate_pipeline(cert, data)
    cells = _cells_of(data) if isinstance(data, TripleSystem) else set(data)
    if isinstance(cert, ApGridCert):
        return validate_ap_grid(cert, cells)
    return validate_coset_grid(cert, cells)
