from __future__ import annotations

import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from besg.certificates import ApGridCert, CosetGridCert, PipelineCert, certificate_from_json, dumps, validate
from besg.constructions import elementary_system
from besg.errors import SearchFailed
from besg.grids import TripleSystem, from_group, interval_grid, subgrid
from besg.groups import build_group, check_subgroup, is_abelian_subgroup
from besg.pipeline import PipelineParams, structure_pipeline


def run(spec, k, m=1, params=None, subset=None):
    table = build_group(spec)
    a = subset if subset is not None else from_group(table)
    return table, a, structure_pipeline(table, a, k, m, params, group_spec=spec)


def independent_check(cert: PipelineCert, a: TripleSystem):
    """Re-derive the subgrid and confirm the isomorphism triple by triple."""
    rows, cols = cert.grid_rows(), cert.grid_cols()
    sub = subgrid(a, rows, cols)
    if cert.case["kind"] == "interval":
        k, modulus = cert.case["k"], cert.case["K"]
        target = interval_grid(k) if modulus >= 2 * k - 1 else interval_grid(k, modulus)
    else:
        target = elementary_system(cert.case["p"], cert.case["m"])
    iso = cert.subgrid_iso
    assert len(sub) == len(target) == len(rows) * len(cols)
    assert sorted(iso.row_map) == sorted(rows) and sorted(iso.col_map) == sorted(cols)
    assert {iso.image(t) for t in sub.triples} == set(target.triples)


def test_z60_interval_case():
    _, a, cert = run("Z60", 3)
    assert cert.case == {"kind": "interval", "k": 3, "K": 60}
    assert isinstance(cert.inner, ApGridCert) and cert.inner.d == 1
    independent_check(cert, a)


def test_z2_4_elementary_case():
    _, a, cert = run("Z2^4", 3, 2)
    assert cert.case == {"kind": "elementary", "p": 2, "m": 2}
    assert isinstance(cert.inner, CosetGridCert) and cert.inner.k == 2
    independent_check(cert, a)


def test_s3_via_rotations():
    table, a, cert = run("S3", 3)
    assert cert.case["kind"] == "interval" and cert.case["K"] == 3
    assert cert.subgroup.order == 3
    assert all(table.element_order(x) in (1, 3) for x in cert.subgroup.members)
    independent_check(cert, a)


@pytest.mark.parametrize("spec,k,m", [("Z60", 3, 1), ("Z2^6", 3, 2), ("Z3^4", 3, 2), ("D10", 2, 1), ("S4", 2, 1), ("Q8", 2, 1), ("S5", 3, 1)])
def test_full_tables_certify(spec, k, m):
    table, a, cert = run(spec, k, m)
    check_subgroup(table, cert.subgroup.members)
    assert is_abelian_subgroup(table, cert.subgroup)
    independent_check(cert, a)
    again = certificate_from_json(json.loads(dumps(cert)))
    assert validate(again, a) is None


def test_pipeline_is_deterministic():
    table = build_group("D6")
    a = from_group(table)
    first = dumps(structure_pipeline(table, a, 2, group_spec="D6"))
    assert first == dumps(structure_pipeline(table, a, 2, group_spec="D6"))


def test_thresholds_change_branch():
    # with a huge cyclic threshold Z2^2 x Z5 falls through to the elementary branch
    # (p = 2 < k = 3, so the coset grid is reported as is)
    _, _, cyclic = run("Z2^2xZ5", 3, 2)
    assert cyclic.case["kind"] == "interval" and cyclic.case["K"] == 10
    _, _, elem = run("Z2^2xZ5", 3, 2, PipelineParams(t_min=100))
    assert elem.case == {"kind": "elementary", "p": 2, "m": 2}


def test_search_failed_stages():
    table = build_group("Z7")
    with pytest.raises(SearchFailed) as exc:
        structure_pipeline(table, from_group(table), 3, 2, PipelineParams(t_min=100))
    assert exc.value.stage == "branch"
    sparse = TripleSystem(frozenset({(0, 0, 0), (1, 1, 2)}), *(frozenset(range(7)),) * 3)
    with pytest.raises(SearchFailed) as exc:
        structure_pipeline(table, sparse, 3)
    assert exc.value.stage == "coset_grid"
    with pytest.raises(SearchFailed) as exc:
        structure_pipeline(table, sparse, 3, 2, PipelineParams(t_min=3))
    assert exc.value.stage == "ap_grid"
    empty = TripleSystem(frozenset(), *(frozenset(range(7)),) * 3)
    with pytest.raises(SearchFailed) as exc:
        structure_pipeline(table, empty, 2)
    assert exc.value.stage == "densest_block"
    with pytest.raises(SearchFailed) as exc:
        structure_pipeline(build_group("Z1"), from_group(build_group("Z1")), 2)
    assert exc.value.stage == "abelian_subgroup"


def test_rejects_foreign_triples():
    table = build_group("Z4")
    bad = TripleSystem.from_triples([(0, 0, 1)], rows=range(4), cols=range(4), labels=range(4))
    with pytest.raises(ValueError):
        structure_pipeline(table, bad, 2)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["Z12", "S3", "Z2^4", "D6", "Z3^2", "Q8", "Z7", "D5"]), st.integers(2, 3), st.integers(0, 2**32 - 1))
def test_random_subsets_sound(spec, k, seed):
    table = build_group(spec)
    rng = random.Random(seed)
    keep = [t for t in sorted(from_group(table).triples) if rng.random() < 0.7]
    a = TripleSystem(frozenset(keep), *(frozenset(range(table.order)),) * 3)
    try:
        cert = structure_pipeline(table, a, k, group_spec=spec)
    except SearchFailed as exc:
        assert exc.stage in {"ap_grid", "coset_grid", "branch", "elementary_dimension", "densest_block"}
        return
    independent_check(cert, a)
    assert validate(cert, a) is None


def test_tampered_certificate_is_rejected():
    table, a, cert = run("Z12", 2)
    data = cert.to_json()
    data["subgrid_iso"]["labels"] = [[k, (v + 1) % 12] for k, v in data["subgrid_iso"]["labels"]]
    assert "isomorphism" in validate(certificate_from_json(data), a)
    data = cert.to_json()
    data["subgroup"] = [0, 1]
    assert "subgroup" in validate(certificate_from_json(data), a)
