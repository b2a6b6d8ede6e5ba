from __future__ import annotations

import json

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linklab.errors import InvalidParameter
from linklab.graph import (
    Graph,
    LayerRef,
    cartesian_product,
    distance,
    dumps,
    layer,
    layer_through,
    load_graph_data,
    make_complete,
    make_cycle,
    make_grid,
    make_hypercube,
    make_path,
    make_sharpness_graph,
    make_torus,
    parse_edgelist,
    product_of,
    projection,
    shortest_path,
    spacapan_connectivity,
    vertex_connectivity,
)

from brute import brute_connectivity, to_nx
from strategies import graphs


def test_graph_rejects_loops_and_asymmetry():
    with pytest.raises(InvalidParameter):
        Graph.from_edges(2, [(0, 0)])
    with pytest.raises(InvalidParameter):
        Graph.from_edges(2, [(0, 2)])
    with pytest.raises(InvalidParameter):
        Graph(2, ((1,), ()))


def test_duplicate_edges_collapse():
    G = Graph.from_edges(3, [(0, 1), (1, 0), (1, 2)])
    assert G.num_edges == 2
    assert G.adj == ((1,), (0, 2), (1,))


@pytest.mark.parametrize("m, edges, leaves", [(1, 0, 0), (2, 1, 2), (5, 4, 2)])
def test_make_path(m, edges, leaves):
    P = make_path(m)
    assert P.n == m and P.num_edges == edges
    assert sum(1 for v in range(m) if P.degree(v) == 1) == leaves


def test_family_errors():
    for bad in (lambda: make_path(0), lambda: make_cycle(2), lambda: make_complete(0), lambda: make_hypercube(0)):
        with pytest.raises(InvalidParameter):
            bad()
    with pytest.raises(InvalidParameter):
        make_sharpness_graph(2, 2)


def test_cycles():
    assert make_cycle(3).is_complete()
    C6 = make_cycle(6)
    assert all(C6.degree(v) == 2 for v in range(6)) and C6.num_edges == 6
    assert nx.is_bipartite(to_nx(C6))
    assert nx.is_isomorphic(to_nx(make_cycle(4)), to_nx(cartesian_product(make_path(2), make_path(2))))


@pytest.mark.parametrize("n, edges", [(1, 0), (4, 6), (6, 15)])
def test_complete(n, edges):
    assert make_complete(n).num_edges == edges


def test_hypercube():
    Q3 = make_hypercube(3)
    assert Q3.n == 8 and Q3.graph.num_edges == 12 and len(Q3.factors) == 3
    assert vertex_connectivity(make_hypercube(4)) == 4
    assert nx.is_isomorphic(to_nx(make_hypercube(2)), to_nx(make_cycle(4)))
    assert all(make_hypercube(5).graph.degree(v) == 5 for v in range(32))


def test_sharpness_graph():
    S = make_sharpness_graph(5, 2)
    assert S.n == 6 and S.degree(5) == 3 and S.adj[5] == (0, 1, 2)
    assert make_sharpness_graph(3, 2).is_complete()
    assert make_sharpness_graph(4, 1).degree(4) == 1


def test_product_examples():
    K3 = make_complete(3)
    P = cartesian_product(K3, K3)
    assert P.n == 9 and P.graph.num_edges == 18 and all(P.graph.degree(v) == 4 for v in range(9))
    assert cartesian_product(make_path(3), make_cycle(4)).graph.min_degree() == 3
    with pytest.raises(InvalidParameter):
        cartesian_product(Graph(0, ()), K3)


def test_product_flattens_and_is_associative():
    A, B, C = make_path(2), make_cycle(3), make_path(3)
    left = cartesian_product(cartesian_product(A, B), C)
    right = cartesian_product(A, cartesian_product(B, C))
    assert left.factors == right.factors == (A, B, C)
    assert left.graph == right.graph


@settings(max_examples=60, deadline=None)
@given(graphs(1, 4), graphs(1, 4))
def test_product_adjacency_rule(G, H):
    P = cartesian_product(G, H)
    assert P.n == G.n * H.n
    for v in range(P.n):
        assert P.id_of(P.coord_of(v)) == v
        g, h = P.coord_of(v)
        assert P.graph.degree(v) == G.degree(g) + H.degree(h)
    for u in range(P.n):
        for v in range(P.n):
            (a, b), (c, d) = P.coord_of(u), P.coord_of(v)
            expected = (a == c and H.has_edge(b, d)) or (b == d and G.has_edge(a, c))
            assert P.graph.has_edge(u, v) == expected
    if G.n and H.n:
        assert P.graph.min_degree() == G.min_degree() + H.min_degree()
        assert P.graph.max_degree() == G.max_degree() + H.max_degree()


def test_layers():
    P = cartesian_product(make_path(3), make_path(4))
    L, ids = layer(P, LayerRef(0, (0,)))
    assert L == make_path(3) and ids == [0, 4, 8]
    Q3 = make_hypercube(3)
    L, ids = layer(Q3, LayerRef(0, (1, 0)))
    assert L.num_edges == 1 and ids == [2, 6]
    with pytest.raises(InvalidParameter):
        layer(P, LayerRef(0, (4,)))
    with pytest.raises(InvalidParameter):
        layer(P, LayerRef(2, (0,)))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(2, 4), min_size=2, max_size=3), st.data())
def test_layer_isomorphic_to_factor(sizes, data):
    P = make_torus([max(3, s) for s in sizes])
    v = data.draw(st.integers(0, P.n - 1))
    i = data.draw(st.integers(0, len(P.factors) - 1))
    ref = layer_through(P, v, i)
    L, ids = layer(P, ref)
    assert v in ids and L == P.factors[i]
    w = data.draw(st.integers(0, P.n - 1))
    pw = projection(P, w, ref)
    assert pw in ids and P.coord_of(pw)[i] == P.coord_of(w)[i]
    if w in ids:
        assert pw == w


def test_projection_example():
    P = cartesian_product(make_path(2), make_path(2))
    assert projection(P, P.id_of((0, 1)), LayerRef(0, (0,))) == P.id_of((0, 0))


@pytest.mark.parametrize(
    "G, kappa",
    [
        (make_complete(5), 4),
        (make_hypercube(4), 4),
        (Graph.from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]), 0),
        (make_path(1), 0),
        (make_cycle(7), 2),
        (make_grid([3, 3]), 2),
    ],
)
def test_vertex_connectivity_examples(G, kappa):
    assert vertex_connectivity(G) == kappa


@settings(max_examples=150, deadline=None)
@given(graphs(1, 7))
def test_vertex_connectivity_matches_bruteforce(G):
    assert vertex_connectivity(G) == brute_connectivity(G)


def test_spacapan_examples():
    K3 = make_complete(3)
    assert spacapan_connectivity(K3, K3) == 4 == vertex_connectivity(cartesian_product(K3, K3))
    P2 = make_path(2)
    assert spacapan_connectivity(P2, P2) == 2 == vertex_connectivity(make_cycle(4))
    S = make_sharpness_graph(5, 2)
    assert spacapan_connectivity(S, S) == 6 == vertex_connectivity(cartesian_product(S, S))


def test_spacapan_formula_degenerates_on_single_vertex_factor():
    # K1 has kappa 0 by convention, so the closed form says 0 while K1 x H is just H
    K1, C5 = make_path(1), make_cycle(5)
    assert spacapan_connectivity(K1, C5) == 0
    assert vertex_connectivity(cartesian_product(K1, C5)) == 2


def test_shortest_path_and_distance():
    C = make_cycle(6)
    assert shortest_path(C, 0, 3, removed={1}) == [0, 5, 4, 3]
    assert distance(C, 0, 3) == 3
    assert shortest_path(C, 0, 3, removed={1, 5}) is None
    assert distance(C, 0, 3, removed={1, 5}) == float("inf")


def test_json_roundtrip_and_edgelist():
    P = make_torus([3, 4])
    data = json.loads(dumps(P))
    assert load_graph_data(data).graph == P.graph
    G = make_cycle(5)
    assert load_graph_data(json.loads(dumps(G))) == G
    assert parse_edgelist("0 1\n1 2  # comment\n\n2 0\n") == make_cycle(3)
    with pytest.raises(InvalidParameter):
        parse_edgelist("0 1 2\n")


def test_product_of_and_grid():
    assert product_of([make_path(2)] * 3).graph == make_hypercube(3).graph
    assert make_grid([2, 3]).n == 6
    with pytest.raises(InvalidParameter):
        product_of([])
