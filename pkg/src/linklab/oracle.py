"""Exact linkedness oracle: backtracking search over disjoint path systems.

The search routes pairs one at a time (shortest pair first).  Only induced
paths are enumerated: a chord of a routed path could be used as a
shortcut, so a minimum-size solution never needs one.  After every
completed path the remaining pairs must still be individually connected
and jointly routable as an unpaired Menger instance, otherwise the branch
is abandoned.
"""

from __future__ import annotations

import itertools
import math
import os
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .errors import InvalidParameter, Undecided
from .graph import Graph, GraphLike, ProductGraph, _as_graph, distance, vertex_connectivity
from .paths import PathSystem, max_disjoint

DEFAULT_BUDGET = 10**7

Pair = tuple[int, int]
Config = tuple[Pair, ...]


def default_budget() -> int:
    raw = os.environ.get("LINKLAB_BUDGET")
    if raw:
        try:
            return int(raw)
        except ValueError:
            raise InvalidParameter(f"LINKLAB_BUDGET must be an integer, got {raw!r}") from None
    return DEFAULT_BUDGET


@dataclass(frozen=True)
class LinkageInstance:
    graph: Graph
    pairs: tuple[Pair, ...]

    @classmethod
    def of(cls, graph: GraphLike, pairs: Iterable[Sequence[int]]) -> "LinkageInstance":
        inst = cls(_as_graph(graph), tuple((int(s), int(t)) for s, t in pairs))
        inst.check()
        return inst

    def check(self) -> None:
        flat = [v for p in self.pairs for v in p]
        if len(set(flat)) != len(flat):
            raise InvalidParameter("terminals must be pairwise distinct")
        for v in flat:
            if not 0 <= v < self.graph.n:
                raise InvalidParameter(f"terminal {v} out of range")


@dataclass
class LinkReport:
    outcome: str  # "linked" | "not-linked" | "undecided"
    certificate: PathSystem | None = None
    witness: Config | None = None
    expansions: int = 0

    @property
    def linked(self) -> bool:
        return self.outcome == "linked"


class _Search:
    def __init__(self, G: Graph, pairs: Sequence[Pair], blocked: Iterable[int], budget: int):
        self.G = G
        self.adj = G.adj
        self.pairs = list(pairs)
        self.budget = budget
        self.expansions = 0
        n = G.n
        self.used = bytearray(n)
        for v in blocked:
            self.used[v] = 1
        self.term = bytearray(n)
        for s, t in self.pairs:
            self.term[s] = self.term[t] = 1
        blocked_set = set(blocked)
        self.order = sorted(
            range(len(self.pairs)),
            key=lambda i: (distance(G, *self.pairs[i], removed=blocked_set), i),
        )
        self.routes: list[list[int] | None] = [None] * len(self.pairs)

    def _tick(self) -> None:
        self.expansions += 1
        if self.expansions > self.budget:
            raise Undecided(f"search exceeded {self.budget} node expansions", self.expansions)

    def _bfs(self, s: int, t: int, extra: bytearray | None = None) -> list[int] | None:
        used, term, adj = self.used, self.term, self.adj
        parent = {s: -1}
        queue = deque([s])
        while queue:
            v = queue.popleft()
            for w in adj[v]:
                if w in parent:
                    continue
                if w == t:
                    parent[w] = v
                    path = [w]
                    while v != -1:
                        path.append(v)
                        v = parent[v]
                    return path[::-1]
                if used[w] or term[w] or (extra is not None and extra[w]):
                    continue
                parent[w] = v
                queue.append(w)
        return None

    def _feasible(self, rest: Sequence[int]) -> bool:
        for i in rest:
            if self._bfs(*self.pairs[i]) is None:
                return False
        if len(rest) >= 2:
            removed = [v for v in range(self.G.n) if self.used[v]]
            sources = [self.pairs[i][0] for i in rest]
            sinks = [self.pairs[i][1] for i in rest]
            if max_disjoint(self.G, sources, sinks, removed) < len(rest):
                return False
        return True

    def _mark(self, path: Sequence[int], value: int) -> None:
        for v in path:
            self.used[v] = value

    def run(self) -> list[list[int]] | None:
        if not self._feasible(self.order):
            return None
        if self._route(0):
            return [list(r) for r in self.routes]
        return None

    def _route(self, depth: int) -> bool:
        if depth == len(self.order):
            return True
        idx = self.order[depth]
        s, t = self.pairs[idx]
        self.term[s] = self.term[t] = 0
        try:
            if depth == len(self.order) - 1:
                self._tick()
                path = self._bfs(s, t)
                if path is None:
                    return False
                self.routes[idx] = path
                self._mark(path, 1)
                return True
            return self._enumerate(depth, idx, s, t)
        finally:
            self.term[s] = self.term[t] = 1

    def _enumerate(self, depth: int, idx: int, s: int, t: int) -> bool:
        adj = self.adj
        n = self.G.n
        used, term = self.used, self.term
        chord = [0] * n
        on_path = bytearray(n)
        path = [s]
        on_path[s] = 1
        rest = self.order[depth + 1 :]

        def reachable(head: int) -> bool:
            if chord[t]:
                return False
            seen = {head}
            queue = deque([head])
            while queue:
                v = queue.popleft()
                for w in adj[v]:
                    if w == t and (v == head or not chord[t]):
                        return True
                    if w in seen or used[w] or term[w] or on_path[w] or chord[w]:
                        continue
                    seen.add(w)
                    queue.append(w)
            return False

        def dfs() -> bool:
            self._tick()
            head = path[-1]
            for w in adj[head]:
                if w == t:
                    if chord[t]:
                        continue
                    path.append(t)
                    self._mark(path, 1)
                    if self._feasible(rest):
                        self.routes[idx] = list(path)
                        if self._route(depth + 1):
                            return True
                    self._mark(path, 0)
                    path.pop()
                    continue
                if used[w] or term[w] or on_path[w] or chord[w]:
                    continue
                for x in adj[head]:
                    chord[x] += 1
                path.append(w)
                on_path[w] = 1
                if reachable(w) and dfs():
                    return True
                on_path[w] = 0
                path.pop()
                for x in adj[head]:
                    chord[x] -= 1
            return False

        if not reachable(s):
            return False
        return dfs()


def find_linkage(
    G: GraphLike,
    pairs: Sequence[Sequence[int]],
    blocked: Iterable[int] = (),
    budget: int | None = None,
) -> list[list[int]] | None:
    """Disjoint paths joining each pair exactly, avoiding ``blocked``; None if impossible.

    Raises Undecided when the node-expansion budget runs out.
    """
    G = _as_graph(G)
    pairs = [(int(s), int(t)) for s, t in pairs]
    search = _Search(G, pairs, blocked, default_budget() if budget is None else budget)
    return search.run()


def solve_config(inst: LinkageInstance, budget: int | None = None) -> LinkReport:
    inst.check()
    budget = default_budget() if budget is None else budget
    search = _Search(inst.graph, inst.pairs, (), budget)
    try:
        routes = search.run()
    except Undecided:
        return LinkReport("undecided", witness=tuple(inst.pairs), expansions=search.expansions)
    if routes is None:
        return LinkReport("not-linked", witness=tuple(inst.pairs), expansions=search.expansions)
    return LinkReport("linked", certificate=PathSystem(routes), expansions=search.expansions)


# --- configuration enumeration -----------------------------------------


def canonical(config: Iterable[Sequence[int]]) -> Config:
    """Sort each pair and order pairs by their smaller endpoint."""
    return tuple(sorted((min(a, b), max(a, b)) for a, b in config))


def canonical_configs(n: int, k: int) -> Iterator[Config]:
    """All canonical k-pair configurations on n vertices, in lexicographic order."""
    used = [False] * n
    current: list[Pair] = []

    def rec(i: int, last: int) -> Iterator[Config]:
        if i == k:
            yield tuple(current)
            return
        for a in range(last + 1, n):
            if used[a]:
                continue
            used[a] = True
            for b in range(a + 1, n):
                if used[b]:
                    continue
                used[b] = True
                current.append((a, b))
                yield from rec(i + 1, a)
                current.pop()
                used[b] = False
            used[a] = False

    yield from rec(0, -1)


def count_canonical_configs(n: int, k: int) -> int:
    if 2 * k > n:
        return 0
    return math.perm(n, 2 * k) // (2**k * math.factorial(k))


class _Marks:
    def __init__(self, n: int, k: int):
        self.n = n
        size = n ** (2 * k)
        self.bits = bytearray(size // 8 + 1) if size <= 2**31 else None
        self.codes: set[int] = set()

    def code(self, config: Config) -> int:
        c = 0
        for a, b in config:
            c = (c * self.n + a) * self.n + b
        return c

    def add(self, config: Config) -> None:
        c = self.code(config)
        if self.bits is None:
            self.codes.add(c)
        else:
            self.bits[c >> 3] |= 1 << (c & 7)

    def __contains__(self, config: Config) -> bool:
        c = self.code(config)
        if self.bits is None:
            return c in self.codes
        return bool(self.bits[c >> 3] & (1 << (c & 7)))


def orbit_representatives(n: int, k: int, group: Sequence[Sequence[int]]) -> Iterator[Config]:
    """The lexicographically least canonical configuration of every orbit."""
    marks = _Marks(n, k)
    for config in canonical_configs(n, k):
        if config in marks:
            continue
        yield config
        for g in group:
            marks.add(canonical((g[a], g[b]) for a, b in config))


# --- automorphisms of products of standard factors ---------------------


def factor_automorphisms(F: Graph) -> list[tuple[int, ...]]:
    """Automorphisms of a recognised path, cycle or small clique; identity otherwise."""
    m = F.n
    ident = tuple(range(m))
    edges = set(F.edges())
    path_edges = {(i, i + 1) for i in range(m - 1)}
    if edges == path_edges:
        return sorted({ident, tuple(reversed(ident))})
    if m >= 3 and edges == path_edges | {(0, m - 1)}:
        rots = [tuple((i + r) % m for i in range(m)) for r in range(m)]
        refl = [tuple((r - i) % m for i in range(m)) for r in range(m)]
        return sorted(set(rots + refl))
    if F.is_complete() and m <= 6:
        return list(itertools.permutations(range(m)))
    return [ident]


def product_automorphisms(P: ProductGraph) -> list[tuple[int, ...]]:
    """Factor automorphisms combined with permutations of identical factors."""
    t = len(P.factors)
    autos = [factor_automorphisms(f) for f in P.factors]
    swaps = [
        sigma
        for sigma in itertools.permutations(range(t))
        if all(P.factors[sigma[i]] == P.factors[i] for i in range(t))
    ]
    coords = [P.coord_of(v) for v in range(P.n)]
    group = set()
    for sigma in swaps:
        for phis in itertools.product(*autos):
            perm = []
            for c in coords:
                image = [0] * t
                for i in range(t):
                    image[sigma[i]] = phis[i][c[i]]
                perm.append(P.id_of(image))
            group.add(tuple(perm))
    return sorted(group)


def is_automorphism(G: Graph, perm: Sequence[int]) -> bool:
    if sorted(perm) != list(range(G.n)):
        return False
    return all(G.has_edge(perm[u], perm[v]) for u, v in G.edges())


# --- k-linkedness -------------------------------------------------------


def _check_chunk(args) -> tuple[Config | None, int]:
    G, configs, budget = args
    checked = 0
    for config in configs:
        report = solve_config(LinkageInstance(G, config), budget)
        checked += 1
        if report.outcome == "undecided":
            raise Undecided(f"configuration {config} undecided under budget {budget}")
        if not report.linked:
            return config, checked
    return None, checked


def is_k_linked(
    G: GraphLike,
    k: int,
    symmetry: bool = False,
    group: Sequence[Sequence[int]] | None = None,
    budget: int | None = None,
    workers: int = 1,
) -> tuple[bool, Config | None]:
    """Decide k-linkedness exhaustively; on failure return the least failing configuration.

    With ``symmetry`` one representative per automorphism orbit is checked.
    The group defaults to the analytic product group for a ProductGraph and
    to the trivial group otherwise; a caller-supplied group must be correct.
    """
    graph = _as_graph(G)
    if k < 1:
        raise InvalidParameter("k must be >= 1")
    if 2 * k > graph.n:
        raise InvalidParameter(f"2k = {2 * k} exceeds |V| = {graph.n}")
    budget = default_budget() if budget is None else budget
    if symmetry:
        if group is None:
            group = product_automorphisms(G) if isinstance(G, ProductGraph) else [tuple(range(graph.n))]
        configs: Iterable[Config] = orbit_representatives(graph.n, k, group)
    else:
        configs = canonical_configs(graph.n, k)
    if workers <= 1:
        failing, _ = _check_chunk((graph, configs, budget))
        return failing is None, failing
    reps = list(configs)
    size = max(1, len(reps) // (workers * 8))
    chunks = [(graph, reps[i : i + size], budget) for i in range(0, len(reps), size)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for failing, _ in pool.map(_check_chunk, chunks):
            if failing is not None:
                return False, failing
    return True, None


def link_upper_bound(G: GraphLike) -> int:
    """k-linked graphs are (2k-1)-connected, so link(G) <= floor((kappa+1)/2)."""
    return (vertex_connectivity(G) + 1) // 2


def link_number(
    G: GraphLike,
    symmetry: bool = False,
    group: Sequence[Sequence[int]] | None = None,
    budget: int | None = None,
    workers: int = 1,
) -> int:
    graph = _as_graph(G)
    if graph.n == 0 or not graph.is_connected():
        return 0
    upper = link_upper_bound(graph)
    for k in range(upper, 1, -1):
        ok, _ = is_k_linked(G, k, symmetry=symmetry, group=group, budget=budget, workers=workers)
        if ok:
            return k
    return min(upper, 1)
