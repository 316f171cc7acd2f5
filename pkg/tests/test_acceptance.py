"""Acceptance suite: ten end-to-end criteria, each printing one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` or directly as a script.
"""

from __future__ import annotations

import itertools
import json
import math
import random
import sys
import time
from pathlib import Path

from besg.certificates import certificate_from_json
from besg.cli import main
from besg.constructions import (
    bes_elementary,
    bes_elementary_min_dimension,
    bes_interval,
    block_construction,
    block_plan,
    bound_F,
    interval_configuration,
    interval_construction,
    interval_face_count,
)
from besg.finders import find_ap_grid, find_coset_grid
from besg.grids import check_linear, from_group, interval_grid, span
from besg.groups import build_group
from besg.oracle import f_prime_exact, g_prime_exact, max_faces, min_span
from besg.constructions import elementary_system


RESULT_LINES: list[str] = []


def report(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})"
    RESULT_LINES.append(line)
    sys.__stdout__.write(line + "\n")
    sys.__stdout__.flush()


def timed(fn):
    start = time.perf_counter()
    ok, detail = fn()
    return ok, detail, time.perf_counter() - start


def vec_add(x: int, y: int, p: int, m: int) -> int:
    """Componentwise addition of lexicographically indexed vectors of Z_p^m."""
    out, weight = 0, 1
    for _ in range(m):
        out += ((x % p + y % p) % p) * weight
        x //= p
        y //= p
        weight *= p
    return out


# --- 1 -------------------------------------------------------------------------------


def criterion_1():
    for t in range(3, 201):
        cfg = bes_interval(t, math.ceil(t / 2) + 2)
        if cfg.faces != t or span(cfg).total > t + 3:
            return False, f"bes_interval t={t}"
        if any(r + c != lab for r, c, lab in cfg.triples):
            return False, f"bes_interval t={t}: triple off the addition table"
        for p in (2, 3, 5):
            m = bes_elementary_min_dimension(t, p)
            cfg = bes_elementary(t, p, m)
            if cfg.faces != t or span(cfg).total > t + 3:
                return False, f"bes_elementary t={t} p={p}"
            if any(vec_add(r, c, p, m) != lab for r, c, lab in cfg.triples):
                return False, f"bes_elementary t={t} p={p}: triple off the group table"
    return True, "t=3..200, interval and Z_p^m chains"


# --- 2 -------------------------------------------------------------------------------


def criterion_2():
    checked = 0
    for r in range(1, 31):
        for s in range(1, 2 * r):
            counted = interval_configuration(r, s, r).faces
            closed = s * r - s * (s - 1) / 4 - (s // 2) / 2
            if counted != closed or counted != interval_face_count(r, s):
                return False, f"r={r} s={s}: counted {counted}, formula {closed}"
            checked += 1
    return True, f"{checked} (r, s) pairs"


# --- 3 -------------------------------------------------------------------------------


def criterion_3():
    checked = 0
    for p in (2, 3, 5, 7):
        for v in range(3, 501):
            m = 1 if 3 * p >= v else block_plan(v, p).l + 1
            cfg = block_construction(v, p, m)
            if cfg.faces * 49 < v * v or span(cfg).total > v:
                return False, f"p={p} v={v}: faces={cfg.faces} span={span(cfg).total}"
            checked += 1
    return True, f"{checked} (p, v) pairs"


# --- 4 -------------------------------------------------------------------------------


def criterion_4():
    for v in range(3, 121, 3):
        faces = interval_construction(v, v).faces
        if 12 * faces < v * v - 12 * v:
            return False, f"v={v}: faces={faces}"
    return True, "v=3,6,...,120"


# --- 5 -------------------------------------------------------------------------------


def criterion_5():
    for v in range(3, 10):
        res = f_prime_exact(v, check_stability=False)
        if not res.exhaustive or res.optimum < interval_construction(v, v).faces:
            return False, f"f' at v={v}: {res.optimum} exhaustive={res.exhaustive}"
        res = g_prime_exact(v, 2, 3, check_stability=False)
        if not res.exhaustive or res.optimum < block_construction(v, 2, 3).faces:
            return False, f"g' at v={v}: {res.optimum} exhaustive={res.exhaustive}"
    return True, "v=3..9"


# --- 6 -------------------------------------------------------------------------------


def criterion_6():
    systems = {f"interval_grid({k})": interval_grid(k) for k in range(1, 7)}
    systems["Z2^3"] = elementary_system(2, 3)
    for name, ts in systems.items():
        results = [max_faces(ts, v) for v in range(10)]
        values = [r.optimum for r in results]
        if values != sorted(values):
            return False, f"{name}: max_faces not monotone"
        for v, res in enumerate(results):
            if res.optimum and res.exhaustive:
                dual = min_span(ts, res.optimum)
                if dual.exhaustive and dual.optimum > v:
                    return False, f"{name}: duality fails at v={v}"
        spans = [min_span(ts, t).optimum for t in range(1, min(9, len(ts)) + 1)]
        if spans != sorted(spans):
            return False, f"{name}: min_span not monotone"
    return True, "interval_grid(1..6) and Z2^3, v<=9, t<=9"


# --- 7 -------------------------------------------------------------------------------

PIPELINE_FIXTURES = [("Z60", 3, 1), ("Z2^6", 3, 2), ("Z3^4", 3, 2), ("D10", 2, 1), ("S4", 2, 1)]


def _target_triples(case: dict) -> set:
    if case["kind"] == "interval":
        k, K = case["k"], case["K"]
        mod = K if K < 2 * k - 1 else None
        return {(i, j, (i + j) % mod if mod else i + j) for i in range(k) for j in range(k)}
    p, m = case["p"], case["m"]
    return {(x, y, vec_add(x, y, p, m)) for x in range(p**m) for y in range(p**m)}


def _recheck_iso(data: dict) -> str | None:
    """Independent check of the embedded isomorphism straight from the JSON."""
    cert = certificate_from_json(data)
    table = build_group(data["group"])
    rows, cols = cert.grid_rows(), cert.grid_cols()
    iso = data["subgrid_iso"]
    maps = [{a: b for a, b in iso[key]} for key in ("rows", "cols", "labels")]
    for mp in maps:
        if len(set(mp.values())) != len(mp):
            return "map is not injective"
    if set(maps[0]) != set(rows) or set(maps[1]) != set(cols):
        return "row/column maps do not cover the subgrid"
    sub = {(r, c, int(table.product[r, c])) for r in rows for c in cols}
    if {lab for _, _, lab in sub} != set(maps[2]):
        return "label map does not cover the subgrid labels"
    image = {(maps[0][r], maps[1][c], maps[2][lab]) for r, c, lab in sub}
    if image != _target_triples(data["case"]):
        return "image differs from the target table"
    return None


def criterion_7(workdir: Path):
    for spec, k, m in PIPELINE_FIXTURES:
        cert_path = workdir / f"{spec}.json"
        csv_path = workdir / f"{spec}.csv"
        argv = ["pipeline", "--group", spec, "--full", "--k", str(k), "--m", str(m)]
        if main(argv + ["--out", str(cert_path), "--triples-out", str(csv_path)]) != 0:
            return False, f"{spec}: pipeline did not certify"
        if main(["verify", str(cert_path), str(csv_path)]) != 0:
            return False, f"{spec}: verify rejected the certificate"
        problem = _recheck_iso(json.loads(cert_path.read_text(encoding="utf-8")))
        if problem:
            return False, f"{spec}: {problem}"
    return True, ", ".join(s for s, _, _ in PIPELINE_FIXTURES)


# --- 8 -------------------------------------------------------------------------------


def naive_ap(cells: set, n: int, k: int):
    for a in range(n):
        for b in range(n):
            for d in range(1, n):
                if n // math.gcd(n, d) < k:
                    continue
                if all(((a + i * d) % n, (b + j * d) % n) in cells for i in range(k) for j in range(k)):
                    return (a, b, d)
    return None


def naive_coset_exists(cells: set) -> bool:
    vecs = list(itertools.product(range(2), repeat=2))
    for g in vecs[1:]:
        line = lambda x: [x, tuple((x[i] + g[i]) % 2 for i in range(2))]
        for a1 in vecs:
            for a2 in vecs:
                if all((x, y) in cells for x in line(a1) for y in line(a2)):
                    return True
    return False


def criterion_8():
    n, k = 7, 3
    found = 0
    for eps in (0.5, 0.8):
        for seed in range(100):
            rng = random.Random(f"ap-{eps}-{seed}")
            cells = {(x, y) for x in range(n) for y in range(n) if rng.random() < eps}
            cert = find_ap_grid(cells, n, k)
            naive = naive_ap(cells, n, k)
            if (cert is None) != (naive is None):
                return False, f"ap eps={eps} seed={seed}: finder {cert}, naive {naive}"
            if cert is not None:
                found += 1
                if not set(cert.cells()) <= cells or (cert.a, cert.b, cert.d) != naive:
                    return False, f"ap eps={eps} seed={seed}: certificate {cert} vs naive {naive}"
    vecs = list(itertools.product(range(2), repeat=2))
    pairs = [(x, y) for x in vecs for y in vecs]
    rng = random.Random("coset")
    hits = 0
    for draw in range(1000):
        mask = rng.getrandbits(16)
        cells = {pair for bit, pair in enumerate(pairs) if mask >> bit & 1}
        cert = find_coset_grid(cells, 2, 2, 1)
        if (cert is not None) != naive_coset_exists(cells):
            return False, f"coset draw={draw} mask={mask:#06x}"
        if cert is not None:
            hits += 1
            if not set(cert.cells()) <= cells:
                return False, f"coset draw={draw}: certificate cells outside the set"
    return True, f"AP found in {found}/200, coset grid found in {hits}/1000"


# --- 9 -------------------------------------------------------------------------------

LINEAR_FIXTURES = [
    "Z1", "Z2", "Z12", "Z60", "Z120", "Z2^2", "Z2^6", "Z3^4", "Z5^2", "Z2^2xZ5", "Z4xZ6",
    "D3", "D5", "D10", "D60", "S3", "S4", "S5", "Q8", "Q8xZ3", "S3xZ4", "D4xZ2^2",
]


def criterion_9():
    for spec in LINEAR_FIXTURES:
        table = build_group(spec)
        if table.order > 120 or not check_linear(from_group(table)):
            return False, spec
    return True, f"{len(LINEAR_FIXTURES)} groups up to order 120"


# --- 10 ------------------------------------------------------------------------------


def criterion_10():
    worst = None
    for t in range(3, 501):
        b = bound_F(t)
        if b > t + 3:
            return False, f"bound_F({t})={b} > t+3"
        # b <= 7 sqrt(t) + 14, compared in integers
        if b > 14 and (b - 14) ** 2 > 49 * t:
            return False, f"bound_F({t})={b} > 7*sqrt(t)+14"
        slack = 7 * math.sqrt(t) + 14 - b
        worst = slack if worst is None else min(worst, slack)
    return True, f"t=3..500, least slack {worst:.2f}"


# --- pytest wrappers -------------------------------------------------------------------


def _run(n, fn, limit):
    ok, detail, elapsed = timed(fn)
    if limit is not None and elapsed >= limit:
        ok, detail = False, f"{detail}; took {elapsed:.2f}s, limit {limit}s"
    else:
        detail = f"{detail}; {elapsed:.2f}s"
    report(n, ok, detail)
    return ok, detail


def test_criterion_1_bes_chains():
    ok, detail = _run(1, criterion_1, 5)
    assert ok, detail


def test_criterion_2_face_count_formula():
    ok, detail = _run(2, criterion_2, 5)
    assert ok, detail


def test_criterion_3_block_bound():
    ok, detail = _run(3, criterion_3, 10)
    assert ok, detail


def test_criterion_4_interval_growth():
    ok, detail = _run(4, criterion_4, 1)
    assert ok, detail


def test_criterion_5_oracle_cross_check():
    ok, detail = _run(5, criterion_5, 60)
    assert ok, detail


def test_criterion_6_oracle_invariants():
    ok, detail = _run(6, criterion_6, None)
    assert ok, detail


def test_criterion_7_pipeline_fixtures(tmp_path, capsys):
    ok, detail = _run(7, lambda: criterion_7(tmp_path), 60)
    assert ok, detail


def test_criterion_8_finder_agreement():
    ok, detail = _run(8, criterion_8, 60)
    assert ok, detail


def test_criterion_9_linearity():
    ok, detail = _run(9, criterion_9, None)
    assert ok, detail


def test_criterion_10_F_bounds():
    ok, detail = _run(10, criterion_10, 10)
    assert ok, detail


if __name__ == "__main__":
    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        checks = [
            (1, criterion_1, 5), (2, criterion_2, 5), (3, criterion_3, 10), (4, criterion_4, 1),
            (5, criterion_5, 60), (6, criterion_6, None), (7, lambda: criterion_7(Path(tmp)), 60),
            (8, criterion_8, 60), (9, criterion_9, None), (10, criterion_10, 10),
        ]
        results = [_run(n, fn, limit)[0] for n, fn, limit in checks]
    sys.exit(0 if all(results) else 1)
