"""Unit vertex-capacity max-flow on the vertex-split digraph.

Every vertex v becomes ``v_in = 2v`` and ``v_out = 2v + 1`` joined by an arc
of capacity 1.  Graph edges and the super source/sink arcs get a capacity
larger than any possible flow, so every finite cut is a set of vertices.
Paths never pass through a sink or re-enter a source, so decomposed paths
meet S and T only at their ends.
"""

from __future__ import annotations

from collections import deque
from typing import Iterable, Sequence


class VertexFlow:
    def __init__(
        self,
        adj: Sequence[Sequence[int]],
        sources: Iterable[int],
        sinks: Iterable[int],
        removed: Iterable[int] = (),
        uncapped: Iterable[int] = (),
    ):
        n = len(adj)
        self.n = n
        self.sources = sorted(set(sources))
        self.sinks = set(sinks)
        removed = set(removed)
        uncapped = set(uncapped)
        source_set = set(self.sources)
        big = n + 2
        self.src = 2 * n
        self.dst = 2 * n + 1
        self.head: list[int] = []
        self.cap: list[int] = []
        self.out: list[list[int]] = [[] for _ in range(2 * n + 2)]
        for v in range(n):
            if v in removed:
                continue
            self._arc(2 * v, 2 * v + 1, big if v in uncapped else 1)
            if v in self.sinks:
                continue
            for w in adj[v]:
                if w not in removed and w not in source_set:
                    self._arc(2 * v + 1, 2 * w, big)
        for s in self.sources:
            if s not in removed:
                self._arc(self.src, 2 * s, big)
        for t in sorted(self.sinks):
            if t not in removed:
                self._arc(2 * t + 1, self.dst, big)
        self.orig = list(self.cap)
        self.value = 0

    def _arc(self, u: int, v: int, c: int) -> None:
        self.out[u].append(len(self.head))
        self.head.append(v)
        self.cap.append(c)
        self.out[v].append(len(self.head))
        self.head.append(u)
        self.cap.append(0)

    def _bfs(self) -> list[int] | None:
        parent = [-1] * len(self.out)
        parent[self.src] = -2
        queue = deque([self.src])
        head, cap, out = self.head, self.cap, self.out
        while queue:
            u = queue.popleft()
            for e in out[u]:
                if cap[e] > 0:
                    v = head[e]
                    if parent[v] == -1:
                        parent[v] = e
                        if v == self.dst:
                            return parent
                        queue.append(v)
        return None

    def run(self, limit: int | None = None) -> int:
        """Augment along shortest paths until no path remains or ``limit`` is hit."""
        while limit is None or self.value < limit:
            parent = self._bfs()
            if parent is None:
                break
            v = self.dst
            while v != self.src:
                e = parent[v]
                self.cap[e] -= 1
                self.cap[e ^ 1] += 1
                v = self.head[e ^ 1]
            self.value += 1
        return self.value

    def paths(self) -> list[list[int]]:
        """Decompose the flow into vertex paths, scanning sources in ascending order."""
        flow = [o - c for o, c in zip(self.orig, self.cap)]
        result = []
        for s in self.sources:
            node = 2 * s
            if not any(flow[e] > 0 and self.head[e] == node for e in self.out[self.src]):
                continue
            path = [s]
            node = 2 * s + 1
            while True:
                nxt = None
                for e in self.out[node]:
                    if e % 2 == 0 and flow[e] > 0:
                        nxt = e
                        break
                if nxt is None:
                    break
                flow[nxt] -= 1
                target = self.head[nxt]
                if target == self.dst:
                    break
                path.append(target // 2)
                node = target + 1
            result.append(path)
        return result

    def cut(self) -> list[int]:
        """Vertices whose split arc crosses the residual-reachability frontier."""
        seen = [False] * len(self.out)
        seen[self.src] = True
        queue = deque([self.src])
        while queue:
            u = queue.popleft()
            for e in self.out[u]:
                if self.cap[e] > 0 and not seen[self.head[e]]:
                    seen[self.head[e]] = True
                    queue.append(self.head[e])
        return [v for v in range(self.n) if seen[2 * v] and not seen[2 * v + 1]]
