from __future__ import annotations

import io
import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from besg.errors import BudgetExceeded, OutOfUniverse
from besg.grids import (
    Configuration,
    GridIsomorphism,
    TripleSystem,
    check_linear,
    format_triples_csv,
    from_group,
    interval_grid,
    is_isomorphic,
    parse_triples_csv,
    span,
    subgrid,
)
from besg.groups import build_group, coset_blocks, find_abelian_subgroup


def brute_isomorphic(a: TripleSystem, b: TripleSystem) -> bool:
    """Try every row and column bijection; the label map is then forced."""
    ra, ca = sorted(a.used_rows), sorted(a.used_cols)
    rb, cb = sorted(b.used_rows), sorted(b.used_cols)
    if len(ra) != len(rb) or len(ca) != len(cb) or len(a) != len(b):
        return False
    for pr in itertools.permutations(rb):
        rmap = dict(zip(ra, pr))
        for pc in itertools.permutations(cb):
            cmap = dict(zip(ca, pc))
            lmap, ok = {}, True
            for r, c, lab in a.triples:
                target = b.label(rmap[r], cmap[c])
                if target is None or lmap.setdefault(lab, target) != target:
                    ok = False
                    break
            if ok and len(set(lmap.values())) == len(lmap):
                return True
    return False


triple_sets = st.sets(
    st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(0, 3)), max_size=9
).map(lambda s: TripleSystem.from_triples({(r, c): (r, c, l) for r, c, l in s}.values(), rows=range(3), cols=range(3), labels=range(4)))


# --- construction ---------------------------------------------------------------


def test_from_group_examples():
    assert from_group(build_group("Z1")).triples == {(0, 0, 0)}
    z3 = from_group(build_group("Z3"))
    assert len(z3) == 9 and (1, 2, 0) in z3
    s3 = from_group(build_group("S3"))
    assert len(s3) == 36 and check_linear(s3)


def test_interval_grid_examples():
    assert interval_grid(1).triples == {(0, 0, 0)}
    assert interval_grid(2).triples == {(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 2)}
    g3 = interval_grid(3)
    assert len(g3) == 9 and sum(1 for t in g3 if t[2] == 2) == 3
    assert g3.labels == frozenset(range(5))
    wrapped = interval_grid(3, modulus=3)
    assert wrapped.used_labels == {0, 1, 2}


def test_functionality_enforced():
    with pytest.raises(ValueError):
        TripleSystem.from_triples([(0, 0, 0), (0, 0, 1)])
    with pytest.raises(ValueError):
        TripleSystem(frozenset({(5, 0, 0)}), frozenset({0}), frozenset({0}), frozenset({0}))


def test_configuration_subset_enforced():
    with pytest.raises(ValueError):
        Configuration(interval_grid(2), frozenset({(0, 0, 1)}))


def test_subgrid_examples():
    z4 = from_group(build_group("Z4"))
    assert subgrid(z4, z4.rows, z4.cols) == z4
    assert subgrid(z4, {0}, {0}).triples == {(0, 0, 0)}
    sub = subgrid(z4, {0, 2}, {0, 2})
    assert len(sub) == 4 and sub.labels == {0, 2}
    assert is_isomorphic(sub, from_group(build_group("Z2"))) is not None
    with pytest.raises(OutOfUniverse):
        subgrid(z4, {7}, {0})


def test_span_examples():
    g2 = interval_grid(2)
    assert tuple(span(Configuration(g2, frozenset()))) == (0, 0, 0, 0)
    three = Configuration(g2, frozenset({(0, 0, 0), (0, 1, 1), (1, 0, 1)}))
    assert tuple(span(three)) == (2, 2, 2, 6)
    assert tuple(span(Configuration(g2, g2.triples))) == (2, 2, 3, 7)


def test_check_linear_examples():
    assert check_linear(from_group(build_group("D4xZ3")))
    assert not check_linear(TripleSystem.from_triples([(0, 0, 0), (0, 1, 0)]))
    assert check_linear(interval_grid(5))


@settings(max_examples=60, deadline=None)
@given(triple_sets)
def test_check_linear_matches_pairwise_definition(ts):
    def shared(t, u):
        return sum(t[i] == u[i] for i in range(3))

    expect = all(shared(t, u) <= 1 for t, u in itertools.combinations(ts.triples, 2))
    assert check_linear(ts) == expect


@settings(max_examples=60, deadline=None)
@given(triple_sets)
def test_span_bounds(ts):
    cfg = Configuration(ts, ts.triples)
    s = span(cfg)
    assert s.total <= 3 * len(ts)
    assert len(ts) <= s.rows * s.cols


# --- isomorphism --------------------------------------------------------------------


def test_isomorphism_examples():
    z4 = from_group(build_group("Z4"))
    ident = is_isomorphic(z4, z4)
    assert ident is not None and ident.check(z4, z4)
    assert ident.row_map == {x: x for x in range(4)}
    assert is_isomorphic(z4, from_group(build_group("Z2^2"))) is None


def test_even_rows_of_cyclic_group_match_interval_grid():
    # in Z16 the sums 0..8 of {0,2,4} do not wrap, so x -> 2x is an isomorphism
    z16 = from_group(build_group("Z16"))
    sub = subgrid(z16, {0, 2, 4}, {0, 2, 4})
    iso = is_isomorphic(sub, interval_grid(3))
    assert iso is not None and iso.check(sub, interval_grid(3))
    # in Z8 the label 8 wraps onto 0, so only the wrapped interval grid matches
    z8 = from_group(build_group("Z8"))
    sub8 = subgrid(z8, {0, 2, 4}, {0, 2, 4})
    assert is_isomorphic(sub8, interval_grid(3)) is None
    assert is_isomorphic(sub8, interval_grid(3, modulus=4)) is not None


@settings(max_examples=80, deadline=None)
@given(triple_sets, triple_sets)
def test_isomorphism_matches_brute_force(a, b):
    iso = is_isomorphic(a, b)
    assert (iso is not None) == brute_isomorphic(a, b)
    if iso is not None:
        assert iso.check(a, b)
        back = is_isomorphic(b, a)
        assert back is not None and back.check(b, a)


@settings(max_examples=40, deadline=None)
@given(triple_sets, st.permutations(range(3)), st.permutations(range(3)), st.permutations(range(4)))
def test_isomorphism_finds_relabelled_copy(a, pr, pc, pl):
    b = TripleSystem.from_triples([(pr[r], pc[c], pl[lab]) for r, c, lab in a.triples], rows=range(3), cols=range(3), labels=range(4))
    iso = is_isomorphic(a, b)
    assert iso is not None and iso.check(a, b)


@pytest.mark.parametrize("spec", ["Z32", "Z2^5", "Z4xZ8", "Z2xZ16", "Q8xZ4", "D16"])
def test_isomorphism_distinguishes_order_32_groups(spec):
    a = from_group(build_group(spec))
    for other in ["Z32", "Z2^5", "Z4xZ8", "Z2xZ16", "Q8xZ4", "D16"]:
        b = from_group(build_group(other))
        iso = is_isomorphic(a, b)
        assert (iso is not None) == (other == spec)
        if iso is not None:
            assert iso.check(a, b)


def test_isomorphism_budget():
    a = from_group(build_group("Z2^4"))
    with pytest.raises(BudgetExceeded):
        is_isomorphic(a, a, max_nodes=1)


def test_coset_blocks_are_copies_of_the_subgroup():
    s4 = build_group("S4")
    h = find_abelian_subgroup(s4)
    full = from_group(s4)
    from besg.groups import GroupTable

    idx = list(h.members)
    pos = {x: i for i, x in enumerate(idx)}
    htab = GroupTable.from_rows([[pos[int(s4.product[x, y])] for y in idx] for x in idx])
    target = from_group(htab)
    for blk in coset_blocks(s4, h)[:10]:
        assert is_isomorphic(subgrid(full, blk.rows, blk.cols), target) is not None


def test_isomorphism_json_round_trip():
    z6 = from_group(build_group("Z6"))
    iso = is_isomorphic(z6, from_group(build_group("Z2xZ3")))
    assert iso is not None
    assert GridIsomorphism.from_json(iso.to_json()) == iso


# --- CSV --------------------------------------------------------------------


def test_csv_format_is_exact():
    text = format_triples_csv(interval_grid(2))
    assert text == "# universes 2 2 3\nrow,col,label\n0,0,0\n0,1,1\n1,0,1\n1,1,2\n" or text == (
        "row,col,label\n0,0,0\n0,1,1\n1,0,1\n1,1,2\n"
    )


@settings(max_examples=50, deadline=None)
@given(triple_sets)
def test_csv_round_trip(ts):
    back = parse_triples_csv(io.StringIO(format_triples_csv(ts)))
    assert back.triples == ts.triples
    assert (back.rows, back.cols, back.labels) == (ts.rows, ts.cols, ts.labels)


def test_csv_universe_line():
    back = parse_triples_csv(io.StringIO("# universes 4 4 4\nrow,col,label\n0,0,0\n"))
    assert back.rows == frozenset(range(4)) and back.triples == {(0, 0, 0)}
    with pytest.raises(ValueError):
        parse_triples_csv(io.StringIO("row,col,label\n0,x,0\n"))
