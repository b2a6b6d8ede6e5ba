from __future__ import annotations

import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linklab.errors import InvalidParameter, Undecided
from linklab.graph import (
    Graph,
    cartesian_product,
    make_complete,
    make_cycle,
    make_grid,
    make_hypercube,
    make_path,
    make_sharpness_graph,
    make_torus,
    vertex_connectivity,
)
from linklab.oracle import (
    LinkageInstance,
    canonical,
    canonical_configs,
    count_canonical_configs,
    default_budget,
    factor_automorphisms,
    find_linkage,
    is_automorphism,
    is_k_linked,
    link_number,
    link_upper_bound,
    orbit_representatives,
    product_automorphisms,
    solve_config,
)
from linklab.paths import validate_path_system

from brute import brute_k_linked, brute_linkage_exists
from strategies import graphs


def test_solve_config_examples():
    report = solve_config(LinkageInstance.of(make_complete(4), [(0, 1), (2, 3)]))
    assert report.linked and report.certificate.paths == [[0, 1], [2, 3]]
    report = solve_config(LinkageInstance.of(make_cycle(4), [(0, 2), (1, 3)]))
    assert report.outcome == "not-linked" and report.witness == ((0, 2), (1, 3))
    # frozen from the networkx brute-force enumerator
    report = solve_config(LinkageInstance.of(make_hypercube(3), [(0b000, 0b111), (0b001, 0b110)]))
    assert report.linked
    assert validate_path_system(make_hypercube(3), [(0, 7), (1, 6)], report.certificate)[0]


def test_duplicate_terminals_rejected():
    with pytest.raises(InvalidParameter):
        LinkageInstance.of(make_complete(4), [(0, 1), (1, 2)])
    with pytest.raises(InvalidParameter):
        LinkageInstance.of(make_complete(4), [(0, 9)])


def test_budget_exhaustion_is_undecided(monkeypatch):
    report = solve_config(LinkageInstance.of(make_grid([4, 4]), [(0, 15), (3, 12)]), budget=1)
    assert report.outcome == "undecided" and not report.linked
    with pytest.raises(Undecided):
        find_linkage(make_grid([4, 4]), [(0, 15), (3, 12)], budget=1)
    monkeypatch.setenv("LINKLAB_BUDGET", "123")
    assert default_budget() == 123
    monkeypatch.setenv("LINKLAB_BUDGET", "lots")
    with pytest.raises(InvalidParameter):
        default_budget()


@pytest.mark.parametrize(
    "G, k, expected",
    [
        (make_hypercube(3), 2, False),
        (make_hypercube(4), 2, True),
        (make_cycle(5), 1, True),
        (make_complete(6), 3, True),
        (make_cycle(6), 2, False),
    ],
)
def test_is_k_linked_examples(G, k, expected):
    assert is_k_linked(G, k)[0] is expected
    assert is_k_linked(G, k, symmetry=True)[0] is expected


def test_witness_is_lowest_failing_configuration():
    ok, witness = is_k_linked(make_hypercube(3), 2)
    assert not ok and witness == ((0, 3), (1, 2))
    ok, witness_sym = is_k_linked(make_hypercube(3), 2, symmetry=True)
    assert witness_sym == witness
    for config in canonical_configs(8, 2):
        if config == witness:
            break
        assert solve_config(LinkageInstance.of(make_hypercube(3), config)).linked


def test_is_k_linked_rejects_too_many_pairs():
    with pytest.raises(InvalidParameter):
        is_k_linked(make_complete(3), 2)
    with pytest.raises(InvalidParameter):
        is_k_linked(make_complete(3), 0)


@pytest.mark.parametrize(
    "G, value",
    [
        (cartesian_product(make_cycle(3), make_cycle(3)), 2),
        (make_complete(6), 3),
        (make_sharpness_graph(5, 2), 2),
        (Graph.from_edges(4, [(0, 1), (2, 3)]), 0),
        (make_path(1), 0),
        (make_path(2), 1),
    ],
)
def test_link_number_examples(G, value):
    assert link_number(G) == value


def test_parallel_workers_match_sequential():
    G = make_hypercube(3)
    assert is_k_linked(G, 2, workers=2) == is_k_linked(G, 2)
    assert is_k_linked(make_hypercube(4), 2, symmetry=True, workers=2) == (True, None)


def test_canonical_enumeration():
    assert canonical([(3, 1), (2, 0)]) == ((0, 2), (1, 3))
    for n, k in [(4, 1), (5, 2), (6, 2), (7, 3)]:
        configs = list(canonical_configs(n, k))
        assert configs == sorted(configs) and len(set(configs)) == len(configs)
        assert len(configs) == count_canonical_configs(n, k) == math.perm(n, 2 * k) // (2**k * math.factorial(k))
        assert all(canonical(c) == c for c in configs)
    assert count_canonical_configs(16, 2) * 8 == 43680
    assert count_canonical_configs(3, 2) == 0


def test_automorphism_groups():
    assert len(product_automorphisms(make_hypercube(5))) == 3840
    assert len(product_automorphisms(make_hypercube(3))) == 48
    assert len(product_automorphisms(make_torus([4, 4]))) == 8 * 8 * 2
    assert len(product_automorphisms(make_torus([3, 4]))) == 6 * 8
    assert len(factor_automorphisms(make_path(4))) == 2
    assert len(factor_automorphisms(make_complete(4))) == 24
    odd = Graph.from_edges(4, [(0, 1), (1, 2), (1, 3)])
    assert factor_automorphisms(odd) == [(0, 1, 2, 3)]
    for P in (make_hypercube(3), make_torus([3, 4]), make_grid([2, 3, 3])):
        assert all(is_automorphism(P.graph, g) for g in product_automorphisms(P))
    assert not is_automorphism(make_path(3), (1, 0, 2))


def test_orbit_representatives_partition():
    P = make_torus([3, 3])
    group = product_automorphisms(P)
    reps = list(orbit_representatives(P.n, 2, group))
    covered = set()
    for r in reps:
        orbit = {canonical((g[a], g[b]) for a, b in r) for g in group}
        assert r == min(orbit) and not covered & orbit
        covered |= orbit
    assert covered == set(canonical_configs(P.n, 2))


@pytest.mark.parametrize(
    "P",
    [make_hypercube(3), make_torus([3, 3]), make_torus([3, 4]), make_grid([2, 3]), make_grid([2, 2, 2]),
     cartesian_product(make_complete(3), make_path(3)), make_grid([2, 5])],
)
def test_symmetry_on_equals_off(P):
    for k in range(1, P.n // 2 + 1):
        if k > 3:
            break
        assert is_k_linked(P, k, symmetry=True) == is_k_linked(P, k)


@settings(max_examples=120, deadline=None)
@given(graphs(2, 7), st.data())
def test_find_linkage_agrees_with_bruteforce(G, data):
    k = data.draw(st.integers(1, G.n // 2))
    vs = data.draw(st.permutations(range(G.n)))[: 2 * k]
    pairs = [(vs[2 * i], vs[2 * i + 1]) for i in range(k)]
    routes = find_linkage(G, pairs)
    assert (routes is not None) == brute_linkage_exists(G, pairs)
    if routes is not None:
        assert validate_path_system(G, pairs, routes)[0]


@settings(max_examples=60, deadline=None)
@given(graphs(2, 6))
def test_is_k_linked_agrees_with_bruteforce(G):
    for k in range(1, G.n // 2 + 1):
        assert is_k_linked(G, k)[0] == brute_k_linked(G, k)


def test_blocked_vertices_are_avoided():
    C = make_cycle(6)
    assert find_linkage(C, [(0, 2)], blocked=[1]) == [[0, 5, 4, 3, 2]]
    assert find_linkage(C, [(0, 2)], blocked=[1, 4]) is None


@settings(max_examples=80, deadline=None)
@given(graphs(4, 7), st.data())
def test_edge_monotonicity(G, data):
    missing = [e for e in itertools.combinations(range(G.n), 2) if not G.has_edge(*e)]
    if not missing:
        return
    e = data.draw(st.sampled_from(missing))
    bigger = Graph.from_edges(G.n, G.edges() + [e])
    for k in (1, 2):
        if is_k_linked(G, k)[0]:
            assert is_k_linked(bigger, k)[0]


def test_link_upper_bound():
    assert link_upper_bound(make_hypercube(4)) == 2
    assert link_upper_bound(make_complete(7)) == 3
    assert link_upper_bound(make_grid([3, 3])) == 1
    assert link_number(make_hypercube(4)) <= (vertex_connectivity(make_hypercube(4)) + 1) // 2
