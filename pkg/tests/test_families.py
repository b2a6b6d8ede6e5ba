from __future__ import annotations

import json

import pytest

from linklab.errors import InvalidParameter
from linklab.families import (
    FamilySpec,
    all_pass,
    expected_link,
    family_instances,
    format_table,
    reproduce,
    rows_to_json,
)
from linklab.graph import make_cycle, make_torus
from linklab.oracle import link_number, link_upper_bound


@pytest.mark.parametrize(
    "kind, sizes, value",
    [
        ("torus", (3, 3), 2),
        ("torus", (5,), 1),
        ("torus", (3, 4, 5), 3),
        ("hypercube", (5,), 3),
        ("hypercube", (3,), 1),
        ("hypercube", (4,), 2),
        ("hypercube", (1,), 1),
        ("grid", (2, 2, 2), 1),
        ("grid", (3, 2, 3), 2),
        ("grid", (3, 3, 4), 2),
        ("grid", (2, 2, 5), 1),
        ("grid", (2, 2, 2, 2), 2),
        ("grid", (2, 2, 2, 2, 2), 3),
        ("grid", (4,), 1),
    ],
)
def test_expected_link(kind, sizes, value):
    assert expected_link(FamilySpec(kind, sizes)) == value


@pytest.mark.parametrize("kind, sizes", [("grid", (1, 3)), ("torus", (2, 3)), ("hypercube", (0,)),
                                         ("hypercube", (2, 2)), ("mesh", (3,)), ("grid", ())])
def test_invalid_family(kind, sizes):
    with pytest.raises(InvalidParameter):
        FamilySpec(kind, sizes)


def test_family_instances_are_sorted_and_bounded():
    specs = family_instances(16)
    assert all(s.vertices() <= 16 for s in specs)
    assert all(list(s.sizes) == sorted(s.sizes) for s in specs if s.kind != "hypercube")
    labels = {s.label for s in specs}
    assert {"C3xC3", "C3xC4", "C4xC4", "Q3", "Q4", "P2xP2xP2"} <= labels


def test_expected_never_exceeds_connectivity_bound():
    for spec in family_instances(16) + [FamilySpec("hypercube", (6,)), FamilySpec("torus", (3, 3, 3))]:
        assert expected_link(spec) <= link_upper_bound(spec.build())


def test_cycle_products_constant_over_small_lengths():
    values = {link_number(make_torus([m, n]), symmetry=True) for m in (3, 4, 5) for n in (m, 5)}
    assert values == {2}
    assert link_number(make_cycle(5)) == 1


@pytest.mark.parametrize("limit", [4, 8])
def test_reproduce_small(limit):
    rows = reproduce(limit, samples=5)
    assert all_pass(rows)
    if limit == 8:
        q3 = next(r for r in rows if r.family == "hypercube" and r.sizes == [3])
        assert q3.oracle == 1 and q3.expected == 1
    else:
        assert {(r.family, tuple(r.sizes)) for r in rows if r.method == "oracle"} >= {("torus", (4,)), ("grid", (2, 2))}


def test_reproduce_sixteen_with_solver_rows():
    rows = reproduce(16, samples=20)
    assert all_pass(rows)
    methods = {(r.family, tuple(r.sizes)): r.method for r in rows}
    assert methods[("torus", (4, 4))] == "oracle" and methods[("hypercube", (6,))] == "solver"
    data = json.loads(rows_to_json(rows))
    assert {"family", "expected", "oracle", "status"} <= set(data[0])
    assert "status" in format_table(rows)


def test_reproduce_rows_are_deterministically_ordered():
    a = [(r.family, r.sizes) for r in reproduce(9, samples=2)]
    b = [(r.family, r.sizes) for r in reproduce(9, samples=2, workers=2)]
    assert a == b
