"""Menger engine, path truncation and certificate validation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from ._flow import VertexFlow
from .errors import InvalidParameter, NotFound
from .graph import Graph, GraphLike, _as_graph


@dataclass(frozen=True)
class MengerRequest:
    sources: tuple[int, ...]
    sinks: tuple[int, ...]
    forbidden: frozenset[int] = frozenset()

    @classmethod
    def of(cls, sources: Iterable[int], sinks: Iterable[int], forbidden: Iterable[int] = ()):
        return cls(tuple(sources), tuple(sinks), frozenset(forbidden))

    def check(self, n: int) -> None:
        S, T, D = set(self.sources), set(self.sinks), set(self.forbidden)
        if len(S) != len(self.sources) or len(T) != len(self.sinks):
            raise InvalidParameter("sources and sinks must not repeat")
        if len(S) != len(T):
            raise InvalidParameter("|S| must equal |T|")
        if S & T or S & D or T & D:
            raise InvalidParameter("S, T and D must be pairwise disjoint")
        for v in S | T | D:
            if not 0 <= v < n:
                raise InvalidParameter(f"vertex {v} out of range")


@dataclass
class PathSystem:
    """One vertex path per pair; ``pairing[i]`` is the sink index path i reaches."""

    paths: list[list[int]]
    pairing: list[int] = field(default_factory=list)
    trace: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.pairing:
            self.pairing = list(range(len(self.paths)))

    def to_json(self) -> dict:
        data = {"paths": [list(p) for p in self.paths], "pairing": list(self.pairing)}
        if self.trace:
            data["trace"] = list(self.trace)
        return data

    @classmethod
    def from_json(cls, data: dict) -> "PathSystem":
        if not isinstance(data, dict) or not isinstance(data.get("paths"), list):
            raise InvalidParameter("path system JSON needs a 'paths' list")
        paths = [[int(v) for v in p] for p in data["paths"]]
        return cls(paths, [int(i) for i in data.get("pairing", [])], list(data.get("trace", [])))


@dataclass(frozen=True)
class Separator:
    """Vertex set of G - D meeting every S-T path; smaller than |S|."""

    vertices: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.vertices)


def menger_link(G: GraphLike, req: MengerRequest) -> PathSystem | Separator:
    """|S| vertex-disjoint S-T paths in G - D, or a separator proving there are none.

    The returned paths are listed by ascending source id; ``pairing[i]`` is
    the index into ``req.sinks`` reached by path i.
    """
    G = _as_graph(G)
    req.check(G.n)
    flow = VertexFlow(G.adj, req.sources, req.sinks, removed=req.forbidden)
    if flow.run() < len(req.sources):
        return Separator(tuple(flow.cut()))
    paths = flow.paths()
    sink_index = {t: i for i, t in enumerate(req.sinks)}
    return PathSystem(paths, [sink_index[p[-1]] for p in paths])


def max_disjoint(G: Graph, sources: Iterable[int], sinks: Iterable[int], removed: Iterable[int] = ()) -> int:
    return VertexFlow(G.adj, sources, sinks, removed=removed).run()


def truncate_path(path: Sequence[int], accept: Callable[[int], bool]) -> list[int]:
    """Prefix of ``path`` ending at the first vertex satisfying ``accept``."""
    if not path:
        raise InvalidParameter("path must be nonempty")
    for i, v in enumerate(path):
        if accept(v):
            return list(path[: i + 1])
    raise NotFound("no vertex of the path satisfies the predicate")


def validate_path_system(
    G: GraphLike, pairs: Sequence[Sequence[int]], system: PathSystem | Sequence[Sequence[int]]
) -> tuple[bool, str]:
    """Check exact pairing, edge membership and pairwise vertex-disjointness."""
    G = _as_graph(G)
    paths = system.paths if isinstance(system, PathSystem) else list(system)
    if len(paths) != len(pairs):
        return False, f"expected {len(pairs)} paths, got {len(paths)}"
    owner: dict[int, int] = {}
    for i, (path, (s, t)) in enumerate(zip(paths, pairs)):
        if not path:
            return False, f"path {i} is empty"
        if path[0] != s or path[-1] != t:
            return False, f"path {i} endpoint mismatch: expected {s}->{t}, got {path[0]}->{path[-1]}"
        for v in path:
            if not isinstance(v, int) or not 0 <= v < G.n:
                return False, f"path {i} has invalid vertex {v!r}"
        for a, b in zip(path, path[1:]):
            if not G.has_edge(a, b):
                return False, f"path {i} uses non-edge {a}-{b}"
        for v in path:
            if v in owner:
                j = owner[v]
                where = "twice in path" if j == i else f"by paths {j} and"
                return False, f"vertex {v} reused {where} {i}"
            owner[v] = i
    return True, "ok"
