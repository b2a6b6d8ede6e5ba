"""Constructive linkage in Cartesian products G □ H.

A product vertex is written (g, h) with g in G and h in H; its id is
``g * |H| + h``.  The G-layer at h is the copy of G with H-coordinate h;
moves inside a G-layer are *horizontal*, moves inside an H-layer (fixed g)
are *vertical*.

Three constructions are provided:

* :func:`link_connected_factor` -- k-linked G times connected H stays
  k-linked: route every outside terminal into one G-layer and link there.
* :func:`solve_product_linkage` -- a-linked G (|G| >= 8a) times a
  (2b-1)-connected H is (a+b-1)-linked: crowded-layer induction, global
  horizontal shift, global vertical shift into two reserved G-layers and
  final linking inside them.
* :func:`solve_k_plus_1` -- k-linked G (|G| >= max(9, 4k)) times a
  2-connected H is (k+1)-linked, by an eight-way case split on how the
  terminals are spread over G-layers.

Every result is checked with :func:`validate_path_system` before it is
returned.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

from .errors import InternalError, InvalidParameter, NotLinked, Undecided, UnsupportedInstance
from .graph import Graph, ProductGraph, shortest_path, vertex_connectivity
from .oracle import find_linkage, is_k_linked
from .paths import MengerRequest, PathSystem, Separator, menger_link, truncate_path, validate_path_system

Pair = tuple[int, int]

ORACLE_FACTOR_LIMIT = 12
MAX_ASSIGNMENTS = 200


@dataclass
class SolverParams:
    depth_limit: int = 32
    fallback: bool = False
    assume_linked: bool = False
    budget: int | None = None


@dataclass
class ShiftAssignment:
    """Record of one horizontal + vertical shift phase (used for invariant checks)."""

    reserved: tuple[int, int]
    target: dict[int, int] = field(default_factory=dict)  # pair index -> reserved h
    horizontal: dict[int, list[int]] = field(default_factory=dict)  # terminal -> u..u'
    vertical: dict[int, list[int]] = field(default_factory=dict)  # terminal -> u'..u''
    late_rounds: int = 0


class _Fail(Exception):
    """A construction step did not apply; the caller may try another route."""


class _Retry(Exception):
    def __init__(self, pair_index: int):
        super().__init__(pair_index)
        self.pair_index = pair_index


class _Prod:
    def __init__(self, P: ProductGraph):
        P = P.split()
        self.P = P
        self.graph = P.graph
        self.G, self.H = P.factors
        self.nG, self.nH = self.G.n, self.H.n

    def vid(self, g: int, h: int) -> int:
        return g * self.nH + h

    def g_of(self, v: int) -> int:
        return v // self.nH

    def h_of(self, v: int) -> int:
        return v % self.nH

    def sub(self, keep: Sequence[int]) -> "_Prod":
        """G □ H[keep]; H-vertex keep[i] becomes i."""
        Hs = self.H.induced(keep)
        from .graph import cartesian_product

        return _Prod(cartesian_product(self.G, Hs))


class _Run:
    """Per-solve state: context, params, trace and optional shift log."""

    def __init__(self, params: SolverParams, trace: list[str], log: list | None):
        self.params = params
        self.trace = trace
        self.log = log


# --- factor preconditions ----------------------------------------------


@lru_cache(maxsize=256)
def _factor_linked(G: Graph, k: int) -> bool | None:
    """True/False when decidable cheaply, None when G is too big for the oracle."""
    if k <= 0:
        return True
    if G.n < 2 * k:
        return False
    if k == 1:
        return G.is_connected()
    if G.is_complete():
        return True
    if vertex_connectivity(G) < 2 * k - 1:
        return False
    if G.n <= ORACLE_FACTOR_LIMIT:
        return is_k_linked(G, k)[0]
    return None


def _require_linked(G: Graph, k: int, params: SolverParams, what: str) -> None:
    if params.assume_linked:
        return
    if _factor_linked(G, k) is False:
        raise UnsupportedInstance(f"{what} is not {k}-linked")


def _check_pairs(ctx: _Prod, pairs: Sequence[Pair]) -> list[Pair]:
    pairs = [(int(s), int(t)) for s, t in pairs]
    flat = [v for p in pairs for v in p]
    if len(set(flat)) != len(flat):
        raise InvalidParameter("terminals must be pairwise distinct")
    for v in flat:
        if not 0 <= v < ctx.graph.n:
            raise InvalidParameter(f"terminal {v} out of range")
    return pairs


# --- layer-level helpers -----------------------------------------------


def _link_g_layer(ctx: _Prod, h: int, pairs: Sequence[Pair], blocked, run: _Run) -> list[list[int]]:
    """Disjoint paths inside the G-layer at h joining each pair exactly."""
    if not pairs:
        return []
    gpairs = [(ctx.g_of(s), ctx.g_of(t)) for s, t in pairs]
    if ctx.G.is_complete():
        return [[s, t] for s, t in pairs]
    gblocked = {ctx.g_of(v) for v in blocked if ctx.h_of(v) == h}
    if any(g in gblocked for p in gpairs for g in p):
        raise _Fail("layer endpoint is blocked")
    try:
        routes = find_linkage(ctx.G, gpairs, gblocked, run.params.budget)
    except Undecided:
        raise _Fail("in-layer linkage undecided") from None
    if routes is None:
        raise _Fail("in-layer linkage impossible")
    return [[ctx.vid(g, h) for g in r] for r in routes]


def _g_layer_path(ctx: _Prod, h: int, s: int, t: int, blocked) -> list[int]:
    gblocked = {ctx.g_of(v) for v in blocked if ctx.h_of(v) == h}
    path = shortest_path(ctx.G, ctx.g_of(s), ctx.g_of(t), gblocked)
    if path is None:
        raise _Fail("no horizontal path")
    return [ctx.vid(g, h) for g in path]


def _h_layer_path(ctx: _Prod, g: int, h_from: int, h_to: int, blocked_h) -> list[int]:
    if h_to in blocked_h:
        raise _Fail("vertical landing is occupied")
    path = shortest_path(ctx.H, h_from, h_to, blocked_h)
    if path is None:
        raise _Fail("no vertical path")
    return [ctx.vid(g, h) for h in path]


def _join(leg_s: Sequence[int], middle: Sequence[int], leg_t: Sequence[int]) -> list[int]:
    """leg_s ends where middle starts; leg_t runs from t to middle's end."""
    return list(leg_s[:-1]) + list(middle) + list(reversed(leg_t))[1:]


def _layer_counts(ctx: _Prod, pairs: Sequence[Pair]) -> Counter:
    return Counter(ctx.h_of(v) for p in pairs for v in p)


def _round_split(counts: Sequence[int], cap: int) -> int:
    """Index t (1-based) of the first round whose prefix sum exceeds cap; n+1 if none."""
    total = 0
    for i, s in enumerate(counts, start=1):
        total += s
        if total > cap:
            return i
    return len(counts) + 1


# --- Lemma: k-linked G times connected H --------------------------------


def _lemma_b1(ctx: _Prod, pairs: Sequence[Pair], run: _Run) -> list[list[int]]:
    k = len(pairs)
    if k == 0:
        return []
    terms = [v for p in pairs for v in p]
    counts = _layer_counts(ctx, pairs)
    x = max(counts, key=lambda h: (counts[h], -h))
    inside = [v for v in terms if ctx.h_of(v) == x]
    if len(inside) == 2 * k:
        run.trace.append("lemma-b1:in-layer")
        return _link_g_layer(ctx, x, pairs, (), run)
    run.trace.append("lemma-b1:routed")
    outside = sorted(v for v in terms if ctx.h_of(v) != x)
    term_set = set(terms)
    sinks = [ctx.vid(g, x) for g in range(ctx.nG) if ctx.vid(g, x) not in term_set][: len(outside)]
    if len(sinks) < len(outside):
        raise _Fail("layer too small for routing")
    res = menger_link(ctx.graph, MengerRequest.of(outside, sinks, inside))
    if isinstance(res, Separator):
        raise _Fail(f"routing into layer blocked by separator {res.vertices}")
    legs = {v: [v] for v in inside}
    for path in res.paths:
        legs[path[0]] = truncate_path(path, lambda v: ctx.h_of(v) == x)
    layer_pairs = [(legs[s][-1], legs[t][-1]) for s, t in pairs]
    middles = _link_g_layer(ctx, x, layer_pairs, (), run)
    return [_join(legs[s], m, legs[t]) for (s, t), m in zip(pairs, middles)]


# --- crowded layer: join one pair through a neighbour layer and reduce ----


def _join_and_reduce(
    ctx: _Prod,
    pairs: Sequence[Pair],
    x: int,
    w: int,
    first: int,
    sub_solve: Callable[[_Prod, list[Pair]], list[list[int]]],
    run: _Run,
) -> list[list[int]]:
    """Join pair ``first`` (inside G_x) via G_w, push the other terminals of
    G_x and G_w one vertical step into H - x - w, and solve the rest there.

    Returns paths, or raises _Retry(pair) when some terminal has no free
    vertical neighbour, naming the pair to join instead.
    """
    terms = {v: (i, j) for i, p in enumerate(pairs) for j, v in enumerate(p)}
    u1, v1 = pairs[first]
    a1, b1 = ctx.vid(ctx.g_of(u1), w), ctx.vid(ctx.g_of(v1), w)
    if a1 in terms or b1 in terms:
        raise _Fail("joining layer endpoint is a terminal")
    in_w = {v for v in terms if ctx.h_of(v) == w}
    join_path = [u1] + _g_layer_path(ctx, w, a1, b1, in_w) + [v1]

    keep = [h for h in range(ctx.nH) if h not in (x, w)]
    keep_set = set(keep)
    if not keep:
        raise _Fail("nothing left after removing two layers")
    movers = sorted(v for v in terms if ctx.h_of(v) in (x, w) and v not in (u1, v1))
    landing: dict[int, int] = {}
    direct: dict[int, list[int]] = {}
    taken: set[int] = set()
    for m in movers:
        i, j = terms[m]
        partner = pairs[i][1 - j]
        if i in direct:
            continue
        cands = [ctx.vid(ctx.g_of(m), h2) for h2 in ctx.H.adj[ctx.h_of(m)] if h2 in keep_set]
        if partner in cands:
            direct[i] = [m, partner] if j == 0 else [partner, m]
            continue
        free = [c for c in cands if c not in terms and c not in taken]
        if not free:
            raise _Retry(i)
        landing[m] = free[0]
        taken.add(free[0])

    sub = ctx.sub(keep)
    index = {h: i for i, h in enumerate(keep)}

    def down(v: int) -> int:
        return sub.vid(ctx.g_of(v), index[ctx.h_of(v)])

    def up(v: int) -> int:
        return ctx.vid(sub.g_of(v), keep[sub.h_of(v)])

    sub_pairs: list[Pair] = []
    owners: list[int] = []
    for i, (s, t) in enumerate(pairs):
        if i == first or i in direct:
            continue
        sub_pairs.append((down(landing.get(s, s)), down(landing.get(t, t))))
        owners.append(i)
    occupied = {v for p in sub_pairs for v in p}
    for i, path in direct.items():
        anchor = down(path[-1] if ctx.h_of(path[-1]) in keep_set else path[0])
        occupied.add(anchor)
        dummy = next((y for y in sub.graph.adj[anchor] if y not in occupied), None)
        if dummy is None:
            dummy = next((y for y in range(sub.graph.n) if y not in occupied), None)
        if dummy is None:
            raise _Fail("no room for a placeholder pair")
        occupied.add(dummy)
        sub_pairs.append((anchor, dummy))
        owners.append(-1)

    sub_paths = sub_solve(sub, sub_pairs)
    result: list[list[int] | None] = [None] * len(pairs)
    result[first] = join_path
    for i, path in direct.items():
        result[i] = path
    for owner, (s_sub, _), path in zip(owners, sub_pairs, sub_paths):
        if owner < 0:
            continue
        s, t = pairs[owner]
        mid = [up(v) for v in path]
        leg_s = [s, landing[s]] if s in landing else [s]
        leg_t = [t, landing[t]] if t in landing else [t]
        result[owner] = _join(leg_s, mid, leg_t)
    return result


def _crowded_with_retry(ctx, pairs, x, w, first, sub_solve, run, label, widen: bool = False) -> list[list[int]]:
    """Join ``first``; if a terminal is left without a free vertical neighbour,
    switch once to that terminal's pair and start again.

    With ``widen`` every other pair lying wholly inside G_x is tried as well
    before giving up.
    """
    inside = [i for i, (s, t) in enumerate(pairs) if ctx.h_of(s) == x and ctx.h_of(t) == x]
    order = [first] + ([i for i in inside if i != first] if widen else [])
    tried: set[int] = set()
    switched = False
    last = "no pair inside the crowded layer"
    while order:
        i = order.pop(0)
        if i in tried:
            continue
        tried.add(i)
        try:
            return _join_and_reduce(ctx, pairs, x, w, i, sub_solve, run)
        except _Retry as r:
            run.trace.append(f"{label}:retry(pair={r.pair_index})")
            last = "second round blocked as well" if switched else "blocked terminal's partner is outside the layer"
            if r.pair_index in inside and r.pair_index not in tried and (widen or not switched):
                order.insert(0, r.pair_index)
                switched = True
        except _Fail as exc:
            last = str(exc)
    raise _Fail(last)


# --- global horizontal + vertical shift into two reserved layers ---------


def _shift_route(
    ctx: _Prod,
    pairs: Sequence[Pair],
    alpha: int,
    beta: int,
    cap: int,
    capacity: int,
    run: _Run,
) -> list[list[int]]:
    """Route every pair through G_alpha or G_beta.

    Terminals already lying in their pair's reserved layer stay put.  All
    other terminals are shifted horizontally (within their G-layer) to a
    vertex u' whose H-layer holds no terminal and no earlier shift path,
    then vertically (within H_{u'}) into the reserved layer of their pair,
    avoiding the other reserved layer.  Finally each reserved layer links
    its pairs.  ``cap`` bounds the terminals handled by forbidden-set
    rounds (Menger in G - D); later rounds may cross foreign H-layers once
    per round.
    """
    reserved = (alpha, beta)
    terms = {v: (i, j) for i, p in enumerate(pairs) for j, v in enumerate(p)}
    term_g = {ctx.g_of(v) for v in terms}
    g_count = Counter(ctx.g_of(v) for v in terms)

    target: dict[int, int] = {}
    load = {alpha: 0, beta: 0}
    free_pairs = []
    for i, (s, t) in enumerate(pairs):
        hs, ht = ctx.h_of(s), ctx.h_of(t)
        if hs in reserved or ht in reserved:
            target[i] = alpha if alpha in (hs, ht) else beta
            load[target[i]] += 1
        else:
            free_pairs.append(i)
    for i in free_pairs:
        r = alpha if load[alpha] <= load[beta] else beta
        target[i] = r
        load[r] += 1
    if max(load.values()) > capacity:
        raise _Fail("a reserved layer would receive too many pairs")

    movers_by_layer: dict[int, list[int]] = {}
    for v, (i, _) in terms.items():
        if ctx.h_of(v) != target[i]:
            movers_by_layer.setdefault(ctx.h_of(v), []).append(v)
    rounds = sorted(movers_by_layer, key=lambda h: (len(movers_by_layer[h]), h))
    t_index = _round_split([len(movers_by_layer[h]) for h in rounds], cap)
    record = ShiftAssignment(reserved, dict(target), late_rounds=max(0, len(rounds) - t_index + 1))

    used: set[int] = set(terms)
    endpoint_g: set[int] = set()
    touched_g: set[int] = set()
    legs: dict[int, list[int]] = {}

    def accept(v: int) -> bool:
        g = ctx.g_of(v)
        return g not in term_g and g not in endpoint_g and g not in touched_g

    for r, h in enumerate(rounds, start=1):
        early = r < t_index
        movers = sorted(movers_by_layer[h])
        stay = [
            m
            for m in movers
            if g_count[ctx.g_of(m)] == 1 and ctx.g_of(m) not in endpoint_g and ctx.g_of(m) not in touched_g
        ]
        shift = [m for m in movers if m not in stay]
        for m in stay:
            legs[m] = [m]
        endpoint_g.update(ctx.g_of(m) for m in stay)
        round_paths = [[m] for m in stay]
        if shift:
            in_layer_used = {ctx.g_of(v) for v in used if ctx.h_of(v) == h and v not in shift}
            forbidden = set(in_layer_used)
            if early:
                forbidden |= endpoint_g
            sinks = [g for g in range(ctx.nG) if g not in forbidden and accept(ctx.vid(g, h))][: len(shift)]
            if len(sinks) < len(shift):
                raise _Fail("no room for the horizontal shift")
            req = MengerRequest.of([ctx.g_of(m) for m in shift], sinks, forbidden - {ctx.g_of(m) for m in shift})
            res = menger_link(ctx.G, req)
            if isinstance(res, Separator):
                raise _Fail(f"horizontal shift blocked by separator {res.vertices}")
            for gpath in res.paths:
                path = [ctx.vid(g, h) for g in gpath]
                leg = truncate_path(path, lambda v, start=path[0]: v != start and accept(v))
                legs[path[0]] = leg
                round_paths.append(leg)
        for leg in round_paths:
            endpoint_g.add(ctx.g_of(leg[-1]))
        for leg in round_paths:
            touched_g.update(ctx.g_of(v) for v in leg[:-1])
            used.update(leg)

    for m, leg in legs.items():
        record.horizontal[m] = leg
        g = ctx.g_of(leg[-1])
        foreign = sum(1 for v in used if ctx.g_of(v) == g and v not in leg)
        if foreign > record.late_rounds:
            raise InternalError(f"shift endpoint layer of {m} meets {foreign} foreign vertices")

    ends: dict[int, int] = {}
    full_legs: dict[int, list[int]] = {}
    for v, (i, _) in sorted(terms.items()):
        if v not in legs:
            ends[v] = v
            full_legs[v] = [v]
    for m in sorted(legs):
        leg = legs[m]
        u1 = leg[-1]
        g = ctx.g_of(u1)
        r = target[terms[m][0]]
        other = beta if r == alpha else alpha
        blocked_h = {ctx.h_of(v) for v in used if ctx.g_of(v) == g and v != u1} | {other}
        vertical = _h_layer_path(ctx, g, ctx.h_of(u1), r, blocked_h - {ctx.h_of(u1)})
        record.vertical[m] = vertical
        used.update(vertical)
        ends[m] = vertical[-1]
        full_legs[m] = leg + vertical[1:]

    middles: dict[int, list[int]] = {}
    for r in reserved:
        idx = [i for i in range(len(pairs)) if target[i] == r]
        layer_pairs = [(ends[pairs[i][0]], ends[pairs[i][1]]) for i in idx]
        endpoints = {v for p in layer_pairs for v in p}
        blocked = {v for v in used if ctx.h_of(v) == r and v not in endpoints}
        for i, path in zip(idx, _link_g_layer(ctx, r, layer_pairs, blocked, run)):
            middles[i] = path
    if run.log is not None:
        run.log.append(record)
    return [_join(full_legs[s], middles[i], full_legs[t]) for i, (s, t) in enumerate(pairs)]


# --- one empty H-layer per pair ----------------------------------------


def _via_empty_h_layers(ctx: _Prod, pairs: Sequence[Pair], run: _Run) -> list[list[int]]:
    """Give each pair with ends in different G-layers its own terminal-free
    H-layer H_g; each end walks horizontally to (g, its layer) without
    touching the other pairs' H-layers, and the two landings are joined
    inside H_g.  Pairs inside a single G-layer are linked there directly.
    Assignments of H-layers to pairs are tried in order until one fits.
    """
    term_g = {ctx.g_of(v) for p in pairs for v in p}
    empty = [g for g in range(ctx.nG) if g not in term_g]
    cross = [i for i, (s, t) in enumerate(pairs) if ctx.h_of(s) != ctx.h_of(t)]
    if len(empty) < len(cross):
        raise _Fail("not enough terminal-free H-layers")
    layers = sorted({ctx.h_of(v) for p in pairs for v in p})
    for attempt, choice in enumerate(itertools.permutations(empty, len(cross))):
        if attempt >= MAX_ASSIGNMENTS:
            break
        assign = dict(zip(cross, choice))
        legs: dict[int, list[int]] = {}
        inner: dict[int, list[int]] = {}
        try:
            for h in layers:
                jobs: list[tuple[int, int]] = []
                owners: list[tuple[str, int]] = []
                mine = set()
                for i, (s, t) in enumerate(pairs):
                    if i not in assign:
                        if ctx.h_of(s) == h:
                            jobs.append((s, t))
                            owners.append(("pair", i))
                        continue
                    for v in (s, t):
                        if ctx.h_of(v) == h:
                            jobs.append((v, ctx.vid(assign[i], h)))
                            owners.append(("leg", v))
                            mine.add(assign[i])
                blocked = {ctx.vid(g, h) for g in choice if g not in mine}
                for (kind, key), path in zip(owners, _link_g_layer(ctx, h, jobs, blocked, run)):
                    if kind == "pair":
                        inner[key] = path
                    else:
                        legs[key] = path
            result = []
            for i, (s, t) in enumerate(pairs):
                if i in inner:
                    result.append(inner[i])
                    continue
                g = assign[i]
                vertical = _h_layer_path(ctx, g, ctx.h_of(s), ctx.h_of(t), set())
                result.append(_join(legs[s], vertical, legs[t]))
            return result
        except _Fail:
            continue
    raise _Fail("no H-layer assignment worked")


# --- finishing --------------------------------------------------------------


def _finish(ctx: _Prod, pairs: Sequence[Pair], paths, trace: list[str]) -> PathSystem:
    ok, why = validate_path_system(ctx.graph, pairs, paths)
    if not ok:
        raise InternalError(f"construction produced an invalid path system: {why}")
    return PathSystem([list(p) for p in paths], trace=list(trace))


def _oracle(ctx: _Prod, pairs: Sequence[Pair], run: _Run) -> list[list[int]]:
    run.trace.append("fallback:oracle")
    try:
        routes = find_linkage(ctx.graph, pairs, (), run.params.budget)
    except Undecided as exc:
        raise Undecided(f"oracle fallback undecided: {exc}", exc.expansions) from None
    if routes is None:
        raise NotLinked("oracle search proves the configuration is not linkable", tuple(pairs))
    return routes


def _with_fallbacks(ctx, pairs, run: _Run, primary: Callable[[], list[list[int]]], label: str):
    try:
        return primary()
    except _Fail as exc:
        run.trace.append(f"{label}:failed({exc})")
    try:
        run.trace.append("secondary:empty-h-layers")
        return _via_empty_h_layers(ctx, pairs, run)
    except _Fail as exc:
        run.trace.append(f"secondary:failed({exc})")
    if run.params.fallback:
        return _oracle(ctx, pairs, run)
    raise InternalError(f"{label}: every construction route failed; see trace {run.trace}")


# --- public entry points ----------------------------------------------------


def link_connected_factor(
    P: ProductGraph, pairs: Sequence[Sequence[int]], params: SolverParams | None = None
) -> PathSystem:
    """Linkage in G □ H for k-linked G and connected H, k = number of pairs."""
    params = params or SolverParams()
    ctx = _Prod(P)
    pairs = _check_pairs(ctx, pairs)
    run = _Run(params, ["lemma-b1"], None)
    k = len(pairs)
    try:
        if not ctx.H.is_connected():
            raise UnsupportedInstance("H is not connected")
        if not ctx.G.is_connected():
            raise UnsupportedInstance("G is not connected")
        _require_linked(ctx.G, k, params, "G")
    except UnsupportedInstance:
        if not params.fallback:
            raise
        return _finish(ctx, pairs, _oracle(ctx, pairs, run), run.trace)
    try:
        paths = _lemma_b1(ctx, pairs, run)
    except _Fail as exc:
        run.trace.append(f"lemma-b1:failed({exc})")
        if not params.fallback:
            raise InternalError(f"Lemma construction failed: {exc}") from None
        paths = _oracle(ctx, pairs, run)
    return _finish(ctx, pairs, paths, run.trace)


def _strong(ctx: _Prod, pairs: list[Pair], a: int, b: int, run: _Run, depth: int) -> list[list[int]]:
    if depth > run.params.depth_limit:
        raise InternalError("recursion depth limit exceeded")
    if b == 1:
        return _lemma_b1(ctx, pairs, run)
    counts = _layer_counts(ctx, pairs)
    crowded = sorted(h for h, c in counts.items() if c > 2 * a - 1)
    if crowded:
        x = crowded[0]
        y = next((h for h in ctx.H.adj[x] if counts.get(h, 0) == 0), None)
        if y is None:
            raise InternalError("crowded layer has no terminal-free neighbour layer")
        first = next(i for i, (s, t) in enumerate(pairs) if ctx.h_of(s) == x and ctx.h_of(t) == x)
        run.trace.append(f"strong:crowded(x={x},y={y})")

        def sub_solve(sub: _Prod, sub_pairs: list[Pair]) -> list[list[int]]:
            return _strong(sub, sub_pairs, a, b - 1, run, depth + 1)

        try:
            return _crowded_with_retry(ctx, pairs, x, y, first, sub_solve, run, "strong:crowded")
        except _Fail as exc:
            raise InternalError(f"crowded-layer step failed: {exc}") from None

    ordered = sorted(counts, key=lambda h: (counts[h], h))
    s = [counts[h] for h in ordered]
    n = len(s)
    t = _round_split(s, 2 * a - 1)
    if n - t + 2 > 2 * b - 2:
        run.trace.append("strong:small-case")
        return _via_empty_h_layers(ctx, pairs, run)

    free = [h for h in range(ctx.nH) if counts.get(h, 0) == 0]
    if len(free) >= 2:
        options = [(free[0], free[1])]
    else:
        run.trace.append("strong:static-reserved")
        options = [(ordered[0], ordered[1])] if n >= 2 else []
        if len(free) == 1:
            options += [(free[0], h) for h in ordered]
        options += [p for p in itertools.combinations(ordered, 2) if p not in options]
    last = "no reserved layers available"
    for alpha, beta in options[:8]:
        try:
            paths = _shift_route(ctx, pairs, alpha, beta, 2 * a - 1, a, run)
            run.trace.append(f"strong:shift(alpha={alpha},beta={beta})")
            return paths
        except _Fail as exc:
            last = str(exc)
    raise _Fail(last)


def solve_product_linkage(
    P: ProductGraph,
    pairs: Sequence[Sequence[int]],
    a: int,
    b: int,
    params: SolverParams | None = None,
    log: list | None = None,
) -> PathSystem:
    """(a+b-1)-linkage in G □ H for a-linked G (|G| >= 8a) and (2b-1)-connected H."""
    params = params or SolverParams()
    ctx = _Prod(P)
    pairs = _check_pairs(ctx, pairs)
    run = _Run(params, ["strong"], log)
    try:
        if a < b or b < 2:
            raise UnsupportedInstance("need a >= b >= 2")
        if len(pairs) > a + b - 1:
            raise UnsupportedInstance(f"at most a+b-1 = {a + b - 1} pairs supported")
        if ctx.nG < 8 * a:
            raise UnsupportedInstance(f"|V(G)| = {ctx.nG} < 8a = {8 * a}")
        if vertex_connectivity(ctx.H) < 2 * b - 1:
            raise UnsupportedInstance(f"H is not {2 * b - 1}-connected")
        _require_linked(ctx.G, a, params, "G")
    except UnsupportedInstance:
        if not params.fallback:
            raise
        return _finish(ctx, pairs, _oracle(ctx, pairs, run), run.trace)
    paths = _with_fallbacks(ctx, pairs, run, lambda: _strong(ctx, pairs, a, b, run, 0), "strong")
    return _finish(ctx, pairs, paths, run.trace)


def classify_k_plus_1(counts: Sequence[int], k: int) -> int:
    """Case number (1-8) for the sorted per-layer terminal counts of 2k+2 terminals."""
    s = sorted(counts)
    if sum(s) != 2 * k + 2:
        raise InvalidParameter("counts must sum to 2k+2")
    if any(3 <= c <= k for c in s):
        return 1
    c = Counter(s)
    if (c[1] >= 1 and c[2] >= 1) or c[2] >= 2:
        return 2
    if all(v == 1 for v in s):
        return 3
    if all(v == 1 for v in s[:-1]) and k + 1 <= s[-1] <= 2 * k - 1:
        return 4
    if s == [1, 1, 2 * k]:
        return 5
    if s == [2, 2 * k]:
        return 6
    if s[-1] >= 2 * k + 1:
        return 7
    if s == [k + 1, k + 1]:
        return 8
    raise InternalError(f"unclassified layer profile {s}")


def _case7(ctx: _Prod, pairs: Sequence[Pair], k: int, x: int, run: _Run) -> list[list[int]]:
    """All terminals (but at most one) on G_x: hand pairs to two neighbour layers."""
    terms = {v: (i, j) for i, p in enumerate(pairs) for j, v in enumerate(p)}
    outside = [v for v in terms if ctx.h_of(v) != x]
    term_g = {ctx.g_of(v) for v in terms}
    nbrs = sorted(ctx.H.adj[x], key=lambda h: (h not in {ctx.h_of(v) for v in outside}, h))
    for y, z in itertools.combinations(nbrs, 2):
        for choice in itertools.product((y, z), repeat=len(pairs)):
            if max(choice.count(y), choice.count(z)) > k:
                continue
            try:
                used = set(terms)
                full: dict[int, list[int]] = {}
                for v, (i, _) in sorted(terms.items()):
                    if ctx.h_of(v) != x:
                        continue
                    land = ctx.vid(ctx.g_of(v), choice[i])
                    if land in used:
                        raise _Fail("landing occupied")
                    used.add(land)
                    full[v] = [v, land]
                for w in outside:
                    r = choice[terms[w][0]]
                    hw = ctx.h_of(w)
                    if hw == r:
                        full[w] = [w]
                        continue
                    other = z if r == y else y
                    cands = [ctx.g_of(w)] if list(Counter(ctx.g_of(v) for v in terms).values()).count(1) else []
                    cands += [g for g in range(ctx.nG) if g not in term_g]
                    leg = None
                    for g in cands:
                        if g != ctx.g_of(w) and g in term_g:
                            continue
                        if any(ctx.g_of(v) == g for v in used if v != w):
                            continue
                        try:
                            horiz = _g_layer_path(ctx, hw, w, ctx.vid(g, hw), used - {w})
                            vert = _h_layer_path(ctx, g, hw, r, {x, other})
                        except _Fail:
                            continue
                        leg = horiz + vert[1:]
                        break
                    if leg is None:
                        raise _Fail("outside terminal cannot reach its layer")
                    used.update(leg)
                    full[w] = leg
                middles = {}
                for r in (y, z):
                    idx = [i for i in range(len(pairs)) if choice[i] == r]
                    lp = [(full[pairs[i][0]][-1], full[pairs[i][1]][-1]) for i in idx]
                    ends = {v for p in lp for v in p}
                    blocked = {v for v in used if ctx.h_of(v) == r and v not in ends}
                    for i, path in zip(idx, _link_g_layer(ctx, r, lp, blocked, run)):
                        middles[i] = path
                run.trace.append(f"kplus1:case-7(y={y},z={z})")
                return [_join(full[s], middles[i], full[t]) for i, (s, t) in enumerate(pairs)]
            except _Fail:
                continue
    raise _Fail("no distribution over two neighbour layers worked")


def _case8(ctx: _Prod, pairs: Sequence[Pair], k: int, x: int, y: int, run: _Run) -> list[list[int]]:
    """k+1 terminals on each of G_x and G_y, every pair split between them."""
    terms = {v: (i, j) for i, p in enumerate(pairs) for j, v in enumerate(p)}
    term_g = {ctx.g_of(v) for v in terms}
    in_x = sorted(v for v in terms if ctx.h_of(v) == x)
    in_y = sorted(v for v in terms if ctx.h_of(v) == y)
    g_y = {ctx.g_of(v) for v in in_y}
    partner = {v: pairs[i][1 - j] for v, (i, j) in terms.items()}
    for z in sorted(h for h in ctx.H.adj[x] if h != y):
        try:
            shift = [u for u in in_x if ctx.g_of(u) in g_y]
            stay = [u for u in in_x if u not in shift]
            legs = {u: [u] for u in stay}
            if shift:
                sinks = [g for g in range(ctx.nG) if g not in term_g][: len(shift)]
                if len(sinks) < len(shift):
                    raise _Fail("no room to shift")
                req = MengerRequest.of([ctx.g_of(u) for u in shift], sinks, [ctx.g_of(u) for u in stay])
                res = menger_link(ctx.G, req)
                if isinstance(res, Separator):
                    raise _Fail("shift inside G_x blocked")
                for gpath in res.paths:
                    path = [ctx.vid(g, x) for g in gpath]
                    legs[path[0]] = truncate_path(path, lambda v: ctx.g_of(v) not in term_g)
            used = set(terms)
            for leg in legs.values():
                used.update(leg)
            u0 = in_x[0]
            g0 = ctx.g_of(legs[u0][-1])
            vert0 = _h_layer_path(ctx, g0, x, y, {z})
            used.update(vert0)
            v0 = partner[u0]
            others_y = set(in_y) - {v0}
            link0 = _g_layer_path(ctx, y, vert0[-1], v0, (used - {vert0[-1], v0}) | others_y)
            used.update(link0)
            full: dict[int, list[int]] = {}
            full[u0] = legs[u0] + vert0[1:] + link0[1:]
            ends: dict[int, int] = {}
            for u in in_x[1:]:
                g = ctx.g_of(legs[u][-1])
                blocked_h = {ctx.h_of(v) for v in used if ctx.g_of(v) == g and v != legs[u][-1]} | {y}
                vert = _h_layer_path(ctx, g, x, z, blocked_h - {x})
                used.update(vert)
                full[u] = legs[u] + vert[1:]
                ends[u] = vert[-1]
            for v in in_y:
                if v == v0:
                    continue
                g = ctx.g_of(v)
                blocked_h = {ctx.h_of(w) for w in used if ctx.g_of(w) == g and w != v} | {x}
                vert = _h_layer_path(ctx, g, y, z, blocked_h - {y})
                used.update(vert)
                full[v] = vert
                ends[v] = vert[-1]
            rest = [i for i, (s, t) in enumerate(pairs) if u0 not in (s, t)]
            lp = [(ends[pairs[i][0]], ends[pairs[i][1]]) for i in rest]
            endpoints = {v for p in lp for v in p}
            blocked = {v for v in used if ctx.h_of(v) == z and v not in endpoints}
            middles = dict(zip(rest, _link_g_layer(ctx, z, lp, blocked, run)))
            result = []
            for i, (s, t) in enumerate(pairs):
                if i not in middles:
                    path = full[u0]
                    result.append(path if path[0] == s else path[::-1])
                else:
                    result.append(_join(full[s], middles[i], full[t]))
            run.trace.append(f"kplus1:case-8(z={z})")
            return result
        except _Fail:
            continue
    raise _Fail("no third layer worked")


def _kplus1(ctx: _Prod, pairs: list[Pair], k: int, run: _Run) -> list[list[int]]:
    counts = _layer_counts(ctx, pairs)
    ordered = sorted(counts, key=lambda h: (counts[h], h))
    s = [counts[h] for h in ordered]
    case = classify_k_plus_1(s, k)
    run.trace.append(f"kplus1:case-{case}")
    cap = 2 * k - 1
    free = [h for h in range(ctx.nH) if counts.get(h, 0) == 0]

    def lemma_on(sub: _Prod, sub_pairs: list[Pair]) -> list[list[int]]:
        if not sub.H.is_connected():
            raise _Fail("remaining H is disconnected")
        return _lemma_b1(sub, sub_pairs, run)

    def shift_over(options) -> list[list[int]]:
        last = "no reserved layer pair"
        for alpha, beta in options:
            try:
                paths = _shift_route(ctx, pairs, alpha, beta, cap, k, run)
                run.trace.append(f"kplus1:shift(alpha={alpha},beta={beta})")
                return paths
            except _Fail as exc:
                last = str(exc)
        raise _Fail(last)

    if case == 1:
        alphas = [h for h in ordered if 3 <= counts[h] <= k]
        options = [(al, be) for al in alphas for be in free]
        options += [(al, be) for al in alphas for be in ordered if be != al]
        return shift_over(options)
    if case == 2:
        options = []
        for hi, hj in itertools.permutations(ordered, 2):
            if (counts[hi], counts[hj]) in ((1, 2), (2, 2)):
                options.append((hi, hj))
        return shift_over(options)
    if case == 3:
        return _via_empty_h_layers(ctx, pairs, run)
    if case == 4:
        singles = [h for h in ordered if counts[h] == 1]
        return shift_over(list(itertools.permutations(singles, 2)))
    if case in (5, 6, 8):
        if case == 8:
            hx, hy = ordered
            inner = [
                (h, i)
                for h in (hx, hy)
                for i, (s_, t_) in enumerate(pairs)
                if ctx.h_of(s_) == h and ctx.h_of(t_) == h
            ]
            if not inner:
                try:
                    return _case8(ctx, pairs, k, hx, hy, run)
                except _Fail:
                    return _case8(ctx, pairs, k, hy, hx, run)
            run.trace.append("kplus1:case-8:pair-in-layer")
            x, first = inner[0]
        else:
            x = ordered[-1]
            first = next(i for i, (s_, t_) in enumerate(pairs) if ctx.h_of(s_) == x and ctx.h_of(t_) == x)
        nbrs = sorted(ctx.H.adj[x], key=lambda h: (counts.get(h, 0) > 0, h))
        last = "no neighbour layer"
        for w in nbrs:
            try:
                return _crowded_with_retry(ctx, pairs, x, w, first, lemma_on, run, f"kplus1:case-{case}", widen=True)
            except _Fail as exc:
                last = str(exc)
        raise _Fail(last)
    return _case7(ctx, pairs, k, ordered[-1], run)


def solve_k_plus_1(
    P: ProductGraph,
    pairs: Sequence[Sequence[int]],
    k: int,
    params: SolverParams | None = None,
    log: list | None = None,
) -> PathSystem:
    """(k+1)-linkage in G □ H for k-linked G (k >= 2, |G| >= max(9, 4k)) and 2-connected H."""
    params = params or SolverParams()
    ctx = _Prod(P)
    pairs = _check_pairs(ctx, pairs)
    run = _Run(params, ["kplus1"], log)
    try:
        if k < 2:
            raise UnsupportedInstance("need k >= 2")
        if len(pairs) != k + 1:
            raise UnsupportedInstance(f"expected exactly k+1 = {k + 1} pairs")
        if ctx.nG < max(9, 4 * k):
            raise UnsupportedInstance(f"|V(G)| = {ctx.nG} < max(9, 4k)")
        if vertex_connectivity(ctx.H) < 2:
            raise UnsupportedInstance("H is not 2-connected")
        _require_linked(ctx.G, k, params, "G")
    except UnsupportedInstance:
        if not params.fallback:
            raise
        return _finish(ctx, pairs, _oracle(ctx, pairs, run), run.trace)
    paths = _with_fallbacks(ctx, pairs, run, lambda: _kplus1(ctx, pairs, k, run), "kplus1")
    return _finish(ctx, pairs, paths, run.trace)


def theorem_bounds(a: int, kappa_g: int, h: int) -> Fraction:
    """Guaranteed linkedness a(k+h)/(2a+1) for a-linked, k-connected G and h-connected H."""
    if a < 1 or h < 1 or kappa_g < h:
        raise InvalidParameter("need a >= 1 and kappa_G >= h >= 1")
    return Fraction(a * (kappa_g + h), 2 * a + 1)
