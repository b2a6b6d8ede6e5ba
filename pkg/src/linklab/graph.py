"""Graphs, standard families, Cartesian products, layers and connectivity."""

from __future__ import annotations

import itertools
import json
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence, Union

from ._flow import VertexFlow
from .errors import InvalidParameter


@dataclass(frozen=True)
class Graph:
    """Finite simple undirected graph on vertices ``0..n-1``.

    ``adj[v]`` is the sorted tuple of neighbours of ``v``.  Instances are
    immutable and hashable, so they can be cached and shared freely.
    """

    n: int
    adj: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.n < 0 or len(self.adj) != self.n:
            raise InvalidParameter("adjacency length must equal n")
        for v, nbrs in enumerate(self.adj):
            for w in nbrs:
                if not 0 <= w < self.n:
                    raise InvalidParameter(f"vertex {w} out of range")
                if w == v:
                    raise InvalidParameter(f"self-loop at {v}")
            if len(set(nbrs)) != len(nbrs) or list(nbrs) != sorted(nbrs):
                raise InvalidParameter(f"neighbours of {v} must be sorted and unique")
        for v, nbrs in enumerate(self.adj):
            for w in nbrs:
                if v not in self.nbr_sets[w]:
                    raise InvalidParameter(f"adjacency not symmetric at {v}-{w}")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> "Graph":
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if not (0 <= u < n and 0 <= v < n):
                raise InvalidParameter(f"edge {u}-{v} out of range for n={n}")
            if u == v:
                raise InvalidParameter(f"self-loop at {u}")
            nbrs[u].add(v)
            nbrs[v].add(u)
        return cls(n, tuple(tuple(sorted(s)) for s in nbrs))

    @cached_property
    def nbr_sets(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(a) for a in self.adj)

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.nbr_sets[u]

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in self.adj[u] if u < v]

    @property
    def num_edges(self) -> int:
        return sum(len(a) for a in self.adj) // 2

    def min_degree(self) -> int:
        return min((len(a) for a in self.adj), default=0)

    def max_degree(self) -> int:
        return max((len(a) for a in self.adj), default=0)

    def is_complete(self) -> bool:
        return all(len(a) == self.n - 1 for a in self.adj)

    def is_connected(self, removed: Iterable[int] = ()) -> bool:
        removed = set(removed)
        alive = [v for v in range(self.n) if v not in removed]
        if not alive:
            return True
        return len(self.component(alive[0], removed)) == len(alive)

    def component(self, start: int, removed: Iterable[int] = ()) -> set[int]:
        blocked = set(removed)
        seen = {start}
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for w in self.adj[v]:
                if w not in seen and w not in blocked:
                    seen.add(w)
                    queue.append(w)
        return seen

    def induced(self, vertices: Sequence[int]) -> "Graph":
        """Induced subgraph; vertex ``vertices[i]`` becomes ``i``."""
        index = {v: i for i, v in enumerate(vertices)}
        edges = [
            (index[u], index[w])
            for u in vertices
            for w in self.adj[u]
            if w in index and index[u] < index[w]
        ]
        return Graph.from_edges(len(vertices), edges)

    def to_json(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.edges()]}

    @classmethod
    def from_json(cls, data: dict) -> "Graph":
        if not isinstance(data, dict) or "n" not in data:
            raise InvalidParameter("graph JSON needs an 'n' field")
        return cls.from_edges(int(data["n"]), data.get("edges", []))


@dataclass(frozen=True)
class LayerRef:
    """A layer of a product: ``factor_index`` varies, the rest is frozen.

    ``fixed_coords`` lists the coordinates of all other factors in factor
    order (the varying position is skipped).
    """

    factor_index: int
    fixed_coords: tuple[int, ...]


@dataclass(frozen=True)
class ProductGraph:
    """Flattened Cartesian product with row-major coordinates.

    The last factor varies fastest: for factors of sizes n_0..n_{t-1} the
    vertex with coordinates (c_0, ..., c_{t-1}) has id
    ``((c_0 * n_1 + c_1) * n_2 + ...) * n_{t-1} + c_{t-1}``.
    """

    graph: Graph
    factors: tuple[Graph, ...]
    sizes: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(f.n for f in self.factors))

    @cached_property
    def strides(self) -> tuple[int, ...]:
        strides = [1] * len(self.sizes)
        for i in range(len(self.sizes) - 2, -1, -1):
            strides[i] = strides[i + 1] * self.sizes[i + 1]
        return tuple(strides)

    @property
    def n(self) -> int:
        return self.graph.n

    def coord_of(self, v: int) -> tuple[int, ...]:
        if not 0 <= v < self.graph.n:
            raise InvalidParameter(f"vertex {v} out of range")
        coords = []
        for size in reversed(self.sizes):
            v, c = divmod(v, size)
            coords.append(c)
        return tuple(reversed(coords))

    def id_of(self, coords: Sequence[int]) -> int:
        if len(coords) != len(self.sizes):
            raise InvalidParameter("coordinate tuple has wrong length")
        v = 0
        for c, size in zip(coords, self.sizes):
            if not 0 <= c < size:
                raise InvalidParameter(f"coordinate {c} out of range")
            v = v * size + c
        return v

    def split(self) -> "ProductGraph":
        """View as a two-factor product (all but the last factor) x (last factor).

        Vertex ids are unchanged by construction of the row-major order.
        """
        if len(self.factors) < 2:
            raise InvalidParameter("need at least two factors")
        if len(self.factors) == 2:
            return self
        head = self.factors[0]
        for f in self.factors[1:-1]:
            head = _product_graph(head, f)
        return ProductGraph(self.graph, (head, self.factors[-1]))

    def to_json(self) -> dict:
        return {"factors": [f.to_json() for f in self.factors]}


GraphLike = Union[Graph, ProductGraph]


def _as_graph(g: GraphLike) -> Graph:
    return g.graph if isinstance(g, ProductGraph) else g


def _factors_of(g: GraphLike) -> tuple[Graph, ...]:
    return g.factors if isinstance(g, ProductGraph) else (g,)


def _product_graph(G: Graph, H: Graph) -> Graph:
    m = H.n
    edges = []
    for u in range(G.n):
        for x in range(m):
            v = u * m + x
            for y in H.adj[x]:
                if x < y:
                    edges.append((v, u * m + y))
            for w in G.adj[u]:
                if u < w:
                    edges.append((v, w * m + x))
    return Graph.from_edges(G.n * m, edges)


def cartesian_product(G: GraphLike, H: GraphLike) -> ProductGraph:
    """G □ H; product operands contribute their factor lists (flattened)."""
    g, h = _as_graph(G), _as_graph(H)
    if g.n == 0 or h.n == 0:
        raise InvalidParameter("factors must be nonempty")
    return ProductGraph(_product_graph(g, h), _factors_of(G) + _factors_of(H))


def product_of(factors: Sequence[Graph]) -> ProductGraph:
    if not factors:
        raise InvalidParameter("need at least one factor")
    if any(f.n == 0 for f in factors):
        raise InvalidParameter("factors must be nonempty")
    if len(factors) == 1:
        return ProductGraph(factors[0], (factors[0],))
    result: GraphLike = factors[0]
    for f in factors[1:]:
        result = cartesian_product(result, f)
    return result


# --- families -----------------------------------------------------------


def make_path(m: int) -> Graph:
    if m < 1:
        raise InvalidParameter("path needs m >= 1")
    return Graph.from_edges(m, [(i, i + 1) for i in range(m - 1)])


def make_cycle(m: int) -> Graph:
    if m < 3:
        raise InvalidParameter("cycle needs m >= 3")
    return Graph.from_edges(m, [(i, (i + 1) % m) for i in range(m)])


def make_complete(n: int) -> Graph:
    if n < 1:
        raise InvalidParameter("complete graph needs n >= 1")
    return Graph.from_edges(n, itertools.combinations(range(n), 2))


def make_hypercube(n: int) -> ProductGraph:
    if n < 1:
        raise InvalidParameter("hypercube needs n >= 1")
    return product_of([make_path(2)] * n)


def make_torus(sizes: Sequence[int]) -> ProductGraph:
    return product_of([make_cycle(m) for m in sizes])


def make_grid(sizes: Sequence[int]) -> ProductGraph:
    return product_of([make_path(m) for m in sizes])


def make_sharpness_graph(n: int, k: int) -> Graph:
    """K_n plus one vertex (id n) joined to the 2k-1 lowest-id clique vertices."""
    if k < 1 or n < 2 * k - 1:
        raise InvalidParameter("need k >= 1 and n >= 2k-1")
    edges = list(itertools.combinations(range(n), 2))
    edges += [(i, n) for i in range(2 * k - 1)]
    return Graph.from_edges(n + 1, edges)


# --- layers -------------------------------------------------------------


def _check_ref(P: ProductGraph, ref: LayerRef) -> None:
    t = len(P.factors)
    if not 0 <= ref.factor_index < t:
        raise InvalidParameter("factor_index out of range")
    if len(ref.fixed_coords) != t - 1:
        raise InvalidParameter("fixed_coords must cover every other factor")
    others = [s for i, s in enumerate(P.sizes) if i != ref.factor_index]
    for c, size in zip(ref.fixed_coords, others):
        if not 0 <= c < size:
            raise InvalidParameter(f"fixed coordinate {c} out of range")


def layer_vertices(P: ProductGraph, ref: LayerRef) -> list[int]:
    _check_ref(P, ref)
    i = ref.factor_index
    coords = list(ref.fixed_coords[:i]) + [0] + list(ref.fixed_coords[i:])
    base = P.id_of(coords)
    stride = P.strides[i]
    return [base + c * stride for c in range(P.sizes[i])]


def layer(P: ProductGraph, ref: LayerRef) -> tuple[Graph, list[int]]:
    """Induced layer subgraph and its product vertex ids in factor order."""
    ids = layer_vertices(P, ref)
    return P.graph.induced(ids), ids


def layer_through(P: ProductGraph, v: int, factor_index: int) -> LayerRef:
    coords = P.coord_of(v)
    return LayerRef(factor_index, coords[:factor_index] + coords[factor_index + 1 :])


def projection(P: ProductGraph, v: int, ref: LayerRef) -> int:
    """The vertex of layer ``ref`` sharing ``v``'s varying coordinate."""
    _check_ref(P, ref)
    c = P.coord_of(v)[ref.factor_index]
    i = ref.factor_index
    return P.id_of(list(ref.fixed_coords[:i]) + [c] + list(ref.fixed_coords[i:]))


# --- connectivity -------------------------------------------------------


def local_connectivity(G: Graph, s: int, t: int, limit: int | None = None) -> int:
    """Maximum number of internally disjoint s-t paths for non-adjacent s, t."""
    if s == t or G.has_edge(s, t):
        raise InvalidParameter("local connectivity needs distinct non-adjacent vertices")
    flow = VertexFlow(G.adj, [s], [t], uncapped=(s, t))
    return flow.run(limit)


def vertex_connectivity(G: GraphLike) -> int:
    """kappa(G): fewest vertices whose removal disconnects G or leaves one vertex.

    Uses the dominating-pair scheme around a minimum-degree vertex v: every
    minimum separator either misses v (and then splits v from some
    non-neighbour) or contains v (and then splits two neighbours of v).
    """
    G = _as_graph(G)
    n = G.n
    if n <= 1:
        return 0
    if not G.is_connected():
        return 0
    if G.is_complete():
        return n - 1
    v = min(range(n), key=lambda x: (G.degree(x), x))
    best = G.degree(v)
    for w in range(n):
        if w != v and not G.has_edge(v, w):
            best = min(best, local_connectivity(G, v, w, limit=best))
    nbrs = G.adj[v]
    for x, y in itertools.combinations(nbrs, 2):
        if not G.has_edge(x, y):
            best = min(best, local_connectivity(G, x, y, limit=best))
    return best


def spacapan_connectivity(G: GraphLike, H: GraphLike) -> int:
    """Closed-form kappa(G □ H) = min(δG + δH, κG·|H|, κH·|G|)."""
    g, h = _as_graph(G), _as_graph(H)
    if g.n == 0 or h.n == 0:
        raise InvalidParameter("factors must be nonempty")
    return min(
        g.min_degree() + h.min_degree(),
        vertex_connectivity(g) * h.n,
        vertex_connectivity(h) * g.n,
    )


def distance(G: Graph, s: int, t: int, removed: Iterable[int] = ()) -> float:
    blocked = set(removed)
    dist = {s: 0}
    queue = deque([s])
    while queue:
        v = queue.popleft()
        if v == t:
            return dist[v]
        for w in G.adj[v]:
            if w not in dist and w not in blocked:
                dist[w] = dist[v] + 1
                queue.append(w)
    return math.inf


def shortest_path(G: Graph, s: int, t: int, removed: Iterable[int] = ()) -> list[int] | None:
    """BFS path from s to t avoiding ``removed`` (s and t are always allowed)."""
    blocked = set(removed) - {s, t}
    parent = {s: None}
    queue = deque([s])
    while queue:
        v = queue.popleft()
        if v == t:
            path = []
            while v is not None:
                path.append(v)
                v = parent[v]
            return path[::-1]
        for w in G.adj[v]:
            if w not in parent and w not in blocked:
                parent[w] = v
                queue.append(w)
    return None


# --- serialization ------------------------------------------------------


def load_graph_data(data: dict) -> GraphLike:
    """Accept either ``{"n", "edges"}`` or ``{"factors": [...]}`` (flattened)."""
    if isinstance(data, dict) and "factors" in data:
        factors = [Graph.from_json(f) for f in data["factors"]]
        return product_of(factors)
    return Graph.from_json(data)


def parse_edgelist(text: str) -> Graph:
    edges = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InvalidParameter(f"bad edge line: {line!r}")
        edges.append((int(parts[0]), int(parts[1])))
    n = max((max(e) for e in edges), default=-1) + 1
    return Graph.from_edges(n, edges)


def dumps(obj: GraphLike) -> str:
    return json.dumps(obj.to_json())
