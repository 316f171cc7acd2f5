"""Exhaustive desk-scale searches for dense structure.

Each finder returns the lexicographically least certificate in its documented
order, or ``None``; within the stated caps the search is complete, so ``None``
proves absence.
"""

from __future__ import annotations

import itertools
import math
from typing import Iterable

import numpy as np

from .certificates import ApGridCert, CosetGridCert, SubspaceCert, index_vector, vector_index
from .errors import CapExceeded

SUBSPACE_WORD_CAP = 2**14
COSET_GRID_ORDER_CAP = 1024
COSET_GRID_SUBSPACE_CAP = 200_000


def _cell_matrix(cells: Iterable, n: int) -> np.ndarray:
    mat = np.zeros((n, n), dtype=bool)
    for x, y in cells:
        if not (0 <= x < n and 0 <= y < n):
            raise ValueError(f"cell {(x, y)} outside Z_{n} x Z_{n}")
        mat[x, y] = True
    return mat


def find_ap_grid(cells: Iterable[tuple[int, int]], n: int, k: int) -> ApGridCert | None:
    """Least ``(a, b, d)`` with every ``(a + i d, b + j d)``, ``0 <= i, j < k``, in ``cells``.

    ``d`` ranges over nonzero residues of additive order at least ``k``.
    """
    if k < 2 or n < k:
        raise ValueError("need k >= 2 and n >= k")
    mat = _cell_matrix(cells, n)
    best = None
    for d in range(1, n):
        if n // math.gcd(n, d) < k:
            continue
        acc = mat.copy()
        for i in range(k):
            for j in range(k):
                if i or j:
                    acc &= np.roll(mat, (-i * d, -j * d), axis=(0, 1))
        if acc.any():
            a, b = divmod(int(np.argmax(acc)), n)
            if best is None or (a, b) < best[:2]:
                best = (a, b, d)
    if best is None:
        return None
    return ApGridCert(best[0], best[1], best[2], k, n)


def _families(n: int, k: int, size: int):
    """Families of ``k`` disjoint nonempty index sets of total ``size``, sorted."""
    out = []
    for union in itertools.combinations(range(n), size):
        # assign each element a block 0..k-1 with blocks ordered by their minimum
        for labels in itertools.product(range(k), repeat=size):
            seen = []
            for lab in labels:
                if lab not in seen:
                    seen.append(lab)
            if seen != list(range(k)):
                continue
            blocks = tuple(tuple(q for q, lab in zip(union, labels) if lab == b) for b in range(k))
            out.append(blocks)
    out.sort()
    return out


def find_combinatorial_subspace(
    words: Iterable[Iterable[int]], m: int, n: int, k: int, cap: int = SUBSPACE_WORD_CAP
) -> SubspaceCert | None:
    """First ``k``-dimensional combinatorial subspace inside ``words``.

    Wildcard families are tried by total size, then lexicographically; for a
    family the base point is the lexicographically least one that works.
    """
    if m < 2 or k < 1 or n < 1:
        raise ValueError("need m >= 2, n >= 1, k >= 1")
    if m**n > cap:
        raise CapExceeded(f"{m}^{n} words exceeds cap {cap}")
    space = np.zeros((m,) * n, dtype=np.uint8)
    for w in words:
        w = tuple(int(x) for x in w)
        if len(w) != n or any(not 0 <= x < m for x in w):
            raise ValueError(f"word {w} is not in [{m}]^{n}")
        space[w] = 1
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    if n + k > len(letters):
        raise CapExceeded("word length too large for the subspace search")
    for size in range(k, n + 1):
        for family in _families(n, k, size):
            owner = {q: s for s, block in enumerate(family) for q in block}
            fixed = [q for q in range(n) if q not in owner]
            inp = "".join(letters[n + owner[q]] if q in owner else letters[q] for q in range(n))
            out = "".join(letters[q] for q in fixed) + "".join(letters[n + s] for s in range(k))
            diag = np.einsum(f"{inp}->{out}", space)
            good = diag.all(axis=tuple(range(len(fixed), len(fixed) + k))) if fixed else diag.all()
            if np.any(good):
                z = [0] * n
                if fixed:
                    first = np.argwhere(good)[0]
                    for q, val in zip(fixed, first):
                        z[q] = int(val)
                return SubspaceCert(tuple(z), family, m)
    return None


def _gaussian_binomial(n: int, k: int, p: int) -> int:
    num = den = 1
    for i in range(k):
        num *= p ** (n - i) - 1
        den *= p ** (i + 1) - 1
    return num // den


def echelon_bases(p: int, n: int, k: int) -> list[tuple[tuple[int, ...], ...]]:
    """Reduced row-echelon bases of all ``k``-dimensional subspaces of ``Z_p^n``, sorted."""
    bases = []
    for pivots in itertools.combinations(range(n), k):
        free = [(i, c) for i, piv in enumerate(pivots) for c in range(piv + 1, n) if c not in pivots]
        for values in itertools.product(range(p), repeat=len(free)):
            rows = [[0] * n for _ in range(k)]
            for i, piv in enumerate(pivots):
                rows[i][piv] = 1
            for (i, c), val in zip(free, values):
                rows[i][c] = val
            bases.append(tuple(tuple(r) for r in rows))
    bases.sort()
    return bases


def _span_indices(basis, p: int, n: int) -> np.ndarray:
    weights = p ** np.arange(n - 1, -1, -1)
    vecs = []
    for coeffs in itertools.product(range(p), repeat=len(basis)):
        v = np.zeros(n, dtype=np.int64)
        for c, b in zip(coeffs, basis):
            v = (v + c * np.asarray(b)) % p
        vecs.append(v)
    return np.array(vecs, dtype=np.int64).reshape(-1, n), weights


def find_coset_grid_matrix(mat: np.ndarray, p: int, n: int, k: int) -> CosetGridCert | None:
    """Coset-grid search on a boolean ``p^n x p^n`` membership matrix."""
    if k < 1 or k > n:
        raise ValueError("need 1 <= k <= n")
    size = p**n
    if size > COSET_GRID_ORDER_CAP:
        raise CapExceeded(f"{p}^{n} exceeds the coset-grid order cap {COSET_GRID_ORDER_CAP}")
    if _gaussian_binomial(n, k, p) > COSET_GRID_SUBSPACE_CAP:
        raise CapExceeded("too many subspaces to scan")
    if mat.shape != (size, size):
        raise ValueError("membership matrix has the wrong shape")
    all_vecs = np.array(list(itertools.product(range(p), repeat=n)), dtype=np.int64).reshape(size, n)
    weights = p ** np.arange(n - 1, -1, -1)
    for basis in echelon_bases(p, n, k):
        pivots = [row.index(1) for row in basis]
        span, _ = _span_indices(basis, p, n)
        reps = all_vecs[(all_vecs[:, pivots] == 0).all(axis=1)]
        cosets = ((reps[:, None, :] + span[None, :, :]) % p) @ weights
        full = mat[cosets[:, :, None, None], cosets[None, None, :, :]].all(axis=(1, 3))
        if full.any():
            i, j = divmod(int(np.argmax(full)), len(reps))
            return CosetGridCert(p, n, basis, tuple(int(x) for x in reps[i]), tuple(int(x) for x in reps[j]))
    return None


def find_coset_grid(cells: Iterable, p: int, n: int, k: int) -> CosetGridCert | None:
    """Least ``(Gamma, a1, a2)`` with ``(a1 + Gamma) x (a2 + Gamma)`` inside ``cells``.

    ``cells`` holds pairs of vectors in ``Z_p^n`` (tuples) or of their
    lexicographic indices.  Subspaces are visited in order of their reduced
    echelon bases, translates in order of coset representatives that vanish on
    the pivot coordinates.
    """
    size = p**n
    if size > COSET_GRID_ORDER_CAP:
        raise CapExceeded(f"{p}^{n} exceeds the coset-grid order cap {COSET_GRID_ORDER_CAP}")
    mat = np.zeros((size, size), dtype=bool)
    for x, y in cells:
        xi = x if isinstance(x, (int, np.integer)) else vector_index(x, p)
        yi = y if isinstance(y, (int, np.integer)) else vector_index(y, p)
        mat[xi, yi] = True
    return find_coset_grid_matrix(mat, p, n, k)


__all__ = [
    "find_ap_grid",
    "find_combinatorial_subspace",
    "find_coset_grid",
    "find_coset_grid_matrix",
    "echelon_bases",
    "index_vector",
]
