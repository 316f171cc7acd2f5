"""Command-line entry point: ``besg <subcommand> ...``.

Exit codes: 0 success, 2 bad input, 3 oracle budget hit, 4 structure not
found, 5 certificate violation.
"""

from __future__ import annotations

import argparse
import json
import math
import random
import sys
from fractions import Fraction
from pathlib import Path

from . import constructions as cons
from .certificates import SubspaceCert, certificate_from_json, dumps, validate
from .errors import BesgError, CapExceeded, SearchFailed
from .finders import find_ap_grid, find_combinatorial_subspace, find_coset_grid
from .grids import TripleSystem, format_triples_csv, from_group, interval_grid, read_triples_csv, span
from .groups import Cyclic, build_group, parse_group_spec
from .oracle import SearchBudget, f_prime_exact, g_prime_exact, max_faces, min_span
from .pipeline import PipelineParams, structure_pipeline

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CAPPED = 3
EXIT_NOT_FOUND = 4
EXIT_VIOLATION = 5


class UsageError(Exception):
    pass


def _int_range(text: str) -> range:
    try:
        if ".." in text:
            lo, hi = (int(x) for x in text.split("..", 1))
        else:
            lo = hi = int(text)
    except ValueError as exc:
        raise UsageError(f"bad range {text!r}; expected N or A..B") from exc
    if lo > hi:
        raise UsageError(f"empty range {text!r}")
    return range(lo, hi + 1)


def _density(text: str) -> Fraction:
    try:
        eps = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad density {text!r}") from exc
    if not 0 < eps <= 1:
        raise UsageError("density must lie in (0, 1]")
    return eps


def _rational(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# construct
# ---------------------------------------------------------------------------


def cmd_construct(args) -> int:
    kind = args.kind
    if kind == "interval":
        _need(args, "v")
        k = args.k if args.k is not None else cons.interval_plan(args.v).r
        cfg = cons.interval_construction(args.v, k)
    elif kind == "block":
        _need(args, "v", "p")
        m = args.m
        if m is None:
            m = 1 if 3 * args.p >= args.v else cons.block_plan(args.v, args.p).l + 1
        cfg = cons.block_construction(args.v, args.p, m)
    elif kind == "bes-interval":
        _need(args, "t")
        k = args.k if args.k is not None else max(2, math.ceil(args.t / 2))
        cfg = cons.bes_interval(args.t, k)
    else:
        _need(args, "t", "p")
        m = args.m if args.m is not None else cons.bes_elementary_min_dimension(args.t, args.p)
        cfg = cons.bes_elementary(args.t, args.p, m)
    _emit(format_triples_csv(cfg.as_system()), args.out)
    print(f"faces={cfg.faces} span={span(cfg).total}")
    return EXIT_OK


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"{args.kind} needs " + ", ".join("--" + n for n in missing))


# ---------------------------------------------------------------------------
# oracle
# ---------------------------------------------------------------------------


def _oracle_source(args) -> TripleSystem:
    if args.csv:
        return read_triples_csv(args.csv)
    if args.group and args.interval is not None:
        spec = parse_group_spec(args.group)
        if not isinstance(spec, Cyclic):
            raise UsageError("--interval with --group needs a cyclic group Zn")
        if args.interval > spec.n:
            raise UsageError(f"interval {args.interval} does not fit in Z{spec.n}")
        return interval_grid(args.interval, spec.n)
    if args.group:
        return from_group(build_group(args.group))
    if args.interval is not None:
        return interval_grid(args.interval)
    raise UsageError("oracle needs --group, --interval or --csv")


def cmd_oracle(args) -> int:
    ts = _oracle_source(args)
    budget = SearchBudget(max_nodes=args.max_nodes, time_cap=args.time_cap)
    if args.mode == "max-faces":
        res = max_faces(ts, args.v, budget)
    else:
        res = min_span(ts, args.t, budget)
    print(json.dumps(res.to_json()))
    return EXIT_OK if res.exhaustive else EXIT_CAPPED


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------


def sample_subset(full: TripleSystem, density: Fraction, seed: int) -> TripleSystem:
    """Keep each triple, in sorted order, with probability ``density``."""
    rng = random.Random(seed)
    keep = [t for t in sorted(full.triples) if rng.random() < density]
    return TripleSystem(frozenset(keep), full.rows, full.cols, full.labels)


def cmd_pipeline(args) -> int:
    table = build_group(args.group)
    full = from_group(table)
    if args.full:
        subset = full
    else:
        subset = sample_subset(full, _density(args.density), args.seed)
    if args.triples_out:
        Path(args.triples_out).write_text(format_triples_csv(subset), encoding="utf-8")
    params = PipelineParams(args.t_min, args.m_min)
    spec = str(parse_group_spec(args.group))
    try:
        cert = structure_pipeline(table, subset, args.k, args.m, params, group_spec=spec)
    except SearchFailed as exc:
        print(f"SearchFailed stage={exc.stage}" + (f": {exc.detail}" if exc.detail else ""))
        return EXIT_NOT_FOUND
    _emit(dumps(cert), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def read_words_csv(path: str | Path) -> list[tuple[int, ...]]:
    """One word per line, letters separated by commas; a non-numeric header is skipped."""
    words = []
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split(",")]
            try:
                words.append(tuple(int(p) for p in parts))
            except ValueError:
                if words:
                    raise ValueError(f"line {lineno}: bad word {line!r}")
    return words


def cmd_verify(args) -> int:
    try:
        data = json.loads(Path(args.certificate).read_text(encoding="utf-8"))
        cert = certificate_from_json(data)
        target = read_words_csv(args.triples) if isinstance(cert, SubspaceCert) else read_triples_csv(args.triples)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    problem = validate(cert, target)
    if problem:
        print(f"violation: {problem}")
        return EXIT_VIOLATION
    print("ok")
    return EXIT_OK


# ---------------------------------------------------------------------------
# table
# ---------------------------------------------------------------------------


def cmd_table(args) -> int:
    budget = SearchBudget(max_nodes=args.max_nodes, time_cap=args.time_cap)
    out = []
    if args.mode == "f-bounds":
        rng = _int_range(args.v)
        if rng.start < 3:
            raise UsageError("f-bounds needs v >= 3")
        out.append("v,construction,oracle,exhaustive,v2_over_12")
        for v in rng:
            faces = cons.interval_construction(v, v).faces
            oracle, exhaustive = "", ""
            if v <= args.oracle_max:
                res = f_prime_exact(v, budget, check_stability=False)
                oracle, exhaustive = str(res.optimum), str(res.exhaustive).lower()
            out.append(f"{v},{faces},{oracle},{exhaustive},{_rational(Fraction(v * v, 12))}")
    elif args.mode == "g-bounds":
        rng = _int_range(args.v)
        if rng.start < 3 or args.p is None:
            raise UsageError("g-bounds needs --p and v >= 3")
        out.append("v,p,construction,oracle,exhaustive,v2_over_49")
        for v in rng:
            faces = cons.block_face_count(v, args.p)
            oracle, exhaustive = "", ""
            if v <= args.oracle_max:
                res = g_prime_exact(v, args.p, args.m, budget, check_stability=False)
                oracle, exhaustive = str(res.optimum), str(res.exhaustive).lower()
            out.append(f"{v},{args.p},{faces},{oracle},{exhaustive},{_rational(Fraction(v * v, 49))}")
    else:
        rng = _int_range(args.t)
        if rng.start < 1:
            raise UsageError("F-bounds needs t >= 1")
        # 7*sqrt(t) is irrational in general: report its floor and an exact comparison
        out.append("t,bound_F,t_plus_3,floor_7_sqrt_t,bound_F_le_7_sqrt_t")
        for t in rng:
            b = cons.bound_F(t)
            out.append(f"{t},{b},{t + 3},{math.isqrt(49 * t)},{str(b * b <= 49 * t).lower()}")
    _emit("\n".join(out) + "\n", args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# hunt
# ---------------------------------------------------------------------------


def cmd_hunt(args) -> int:
    if args.target == "subspace":
        words = read_words_csv(args.input)
        n = args.n if args.n is not None else (len(words[0]) if words else 0)
        if n < 1:
            raise UsageError("cannot infer word length; pass --n")
        cert = find_combinatorial_subspace(words, args.m, n, args.k)
    else:
        ts = read_triples_csv(args.input)
        cells = [(r, c) for r, c, _ in ts.triples]
        if args.target == "ap":
            n = args.n if args.n is not None else max(len(ts.rows), len(ts.cols))
            cert = find_ap_grid(cells, n, args.k)
        else:
            if args.p is None or args.n is None:
                raise UsageError("hunt coset needs --p and --n")
            cert = find_coset_grid(cells, args.p, args.n, args.k)
    if cert is None:
        print("not found")
        return EXIT_NOT_FOUND
    _emit(dumps(cert), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="besg", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="build an explicit configuration and write its triples")
    c.add_argument("kind", choices=["interval", "block", "bes-interval", "bes-elementary"])
    for flag in ("--v", "--k", "--p", "--m", "--t"):
        c.add_argument(flag, type=int)
    c.add_argument("--out", help="triple CSV path (default: stdout)")
    c.set_defaults(func=cmd_construct)

    o = sub.add_parser("oracle", help="exact maximum faces / minimum span")
    o.add_argument("--group")
    o.add_argument("--interval", type=int, help="use [k]; with a cyclic --group, [k] inside Zn")
    o.add_argument("--csv", help="triple CSV to search in")
    o.add_argument("--max-nodes", type=int, default=SearchBudget.max_nodes)
    o.add_argument("--time-cap", type=float, default=SearchBudget.time_cap)
    osub = o.add_subparsers(dest="mode", required=True)
    mf = osub.add_parser("max-faces")
    mf.add_argument("--v", type=int, required=True)
    ms = osub.add_parser("min-span")
    ms.add_argument("--t", type=int, required=True)
    o.set_defaults(func=cmd_oracle)

    p = sub.add_parser("pipeline", help="run the structure pipeline on a (sampled) group table")
    p.add_argument("--group", required=True)
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--full", action="store_true", help="use the whole table")
    mode.add_argument("--density", help="keep each triple with this probability, e.g. 1/2")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--t-min", type=int, help="cyclic-branch threshold (default max(2k, k^2))")
    p.add_argument("--m-min", type=int, help="elementary-branch multiplicity threshold (default m)")
    p.add_argument("--triples-out", help="write the searched triple set here")
    p.add_argument("--out", help="certificate path (default: stdout)")
    p.set_defaults(func=cmd_pipeline)

    v = sub.add_parser("verify", help="re-check a certificate against a triple (or word) CSV")
    v.add_argument("certificate")
    v.add_argument("triples")
    v.set_defaults(func=cmd_verify)

    t = sub.add_parser("table", help="CSV tables of constructions, oracle values and bounds")
    t.add_argument("mode", choices=["f-bounds", "g-bounds", "F-bounds"])
    t.add_argument("--v", default="3..12")
    t.add_argument("--t", default="3..20")
    t.add_argument("--p", type=int)
    t.add_argument("--m", type=int, default=3)
    t.add_argument("--oracle-max", type=int, default=9, help="largest v given an oracle column entry")
    t.add_argument("--max-nodes", type=int, default=SearchBudget.max_nodes)
    t.add_argument("--time-cap", type=float, default=SearchBudget.time_cap)
    t.add_argument("--out")
    t.set_defaults(func=cmd_table)

    h = sub.add_parser("hunt", help="run one finder on CSV input")
    h.add_argument("target", choices=["ap", "subspace", "coset"])
    h.add_argument("input")
    h.add_argument("--k", type=int, required=True)
    h.add_argument("--n", type=int)
    h.add_argument("--m", type=int, default=2, help="alphabet size for subspace")
    h.add_argument("--p", type=int)
    h.add_argument("--out")
    h.set_defaults(func=cmd_hunt)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, BesgError, ValueError, CapExceeded, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
