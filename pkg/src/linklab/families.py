"""Closed-form linkedness of grids, tori and hypercubes, plus a reproduction harness."""

from __future__ import annotations

import json
import math
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Sequence

from .errors import InvalidParameter, LinkLabError
from .graph import (
    ProductGraph,
    make_cycle,
    make_grid,
    make_hypercube,
    make_torus,
    product_of,
)
from .linker import SolverParams, solve_k_plus_1
from .oracle import link_number, link_upper_bound
from .paths import validate_path_system

KINDS = ("grid", "torus", "hypercube")


@dataclass(frozen=True)
class FamilySpec:
    kind: str
    sizes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        if self.kind not in KINDS:
            raise InvalidParameter(f"unknown family {self.kind!r}")
        if not self.sizes:
            raise InvalidParameter("sizes must be nonempty")
        if self.kind == "hypercube":
            if len(self.sizes) != 1 or self.sizes[0] < 1:
                raise InvalidParameter("hypercube takes one dimension >= 1")
        elif self.kind == "grid" and min(self.sizes) < 2:
            raise InvalidParameter("grid factor sizes must be >= 2")
        elif self.kind == "torus" and min(self.sizes) < 3:
            raise InvalidParameter("torus factor sizes must be >= 3")

    @property
    def label(self) -> str:
        if self.kind == "hypercube":
            return f"Q{self.sizes[0]}"
        sym = "P" if self.kind == "grid" else "C"
        return "x".join(f"{sym}{m}" for m in self.sizes)

    def vertices(self) -> int:
        if self.kind == "hypercube":
            return 2 ** self.sizes[0]
        return math.prod(self.sizes)

    def build(self) -> ProductGraph:
        if self.kind == "hypercube":
            return make_hypercube(self.sizes[0])
        if self.kind == "torus":
            return make_torus(self.sizes)
        return make_grid(self.sizes)


def expected_link(spec: FamilySpec) -> int:
    if spec.kind == "torus":
        return len(spec.sizes) if len(spec.sizes) >= 2 else 1
    if spec.kind == "hypercube":
        n = spec.sizes[0]
        return 1 if n == 3 else -(-n // 2)
    m = sorted(spec.sizes)
    t = len(m)
    if t != 3:
        return -(-t // 2)
    if m[0] == m[1] == 2:
        return 1
    # (2, m2, m3) with m2 >= 3 behaves like P2xP3xP3; (m1, m2, m3) all >= 3 is clause ii
    return 2


def family_instances(max_vertices: int) -> list[FamilySpec]:
    """Every grid/torus/hypercube with 2..max_vertices vertices, sizes ascending."""
    out: list[FamilySpec] = []
    n = 1
    while 2**n <= max_vertices:
        out.append(FamilySpec("hypercube", (n,)))
        n += 1

    def sized(lo: int, prefix: tuple[int, ...], budget: int):
        for m in range(lo, budget + 1):
            yield prefix + (m,)
            yield from sized(m, prefix + (m,), budget // m)

    for sizes in sized(3, (), max_vertices):
        out.append(FamilySpec("torus", sizes))
    for sizes in sized(2, (), max_vertices):
        out.append(FamilySpec("grid", sizes))
    return out


@dataclass
class ReproRow:
    family: str
    sizes: list[int]
    vertices: int
    expected: int
    oracle: int | None
    method: str
    status: str
    seconds: float
    detail: str = ""
    upper: int | None = None

    def to_json(self) -> dict:
        return asdict(self)


def _oracle_row(spec: FamilySpec) -> ReproRow:
    start = time.perf_counter()
    P = spec.build()
    expected = expected_link(spec)
    try:
        got = link_number(P, symmetry=True)
        status = "pass" if got == expected else "FAIL"
        detail = ""
    except LinkLabError as exc:
        got, status, detail = None, "undecided", str(exc)
    return ReproRow(spec.kind, list(spec.sizes), spec.vertices(), expected, got, "oracle", status,
                    round(time.perf_counter() - start, 3), detail)


@dataclass
class SolverCase:
    """A family member reached by one (k -> k+1) step over a cycle factor."""

    spec: FamilySpec
    base: FamilySpec
    cycle: int


SOLVER_CASES = (
    SolverCase(FamilySpec("hypercube", (6,)), FamilySpec("hypercube", (4,)), 4),
    SolverCase(FamilySpec("torus", (3, 3, 3)), FamilySpec("torus", (3, 3)), 3),
    SolverCase(FamilySpec("torus", (4, 4, 4)), FamilySpec("torus", (4, 4)), 4),
)


def _solver_row(case: SolverCase, samples: int, seed: int) -> ReproRow:
    """Upper bound from connectivity plus sampled certificates from the constructive solver."""
    start = time.perf_counter()
    base = case.base.build()
    P = product_of([base.graph, make_cycle(case.cycle)])
    expected = expected_link(case.spec)
    k = expected - 1
    upper = link_upper_bound(P)
    rng = random.Random(seed)
    bad = 0
    fallback = 0
    for _ in range(samples):
        vs = rng.sample(range(P.n), 2 * expected)
        pairs = [(vs[2 * i], vs[2 * i + 1]) for i in range(expected)]
        try:
            cert = solve_k_plus_1(P, pairs, k, SolverParams(assume_linked=True))
        except LinkLabError:
            bad += 1
            continue
        if any(t.startswith("fallback") for t in cert.trace):
            fallback += 1
        if not validate_path_system(P, pairs, cert)[0]:
            bad += 1
    ok = bad == 0 and upper == expected
    detail = f"{samples} sampled configurations, {bad} failures, {fallback} oracle fallbacks"
    return ReproRow(case.spec.kind, list(case.spec.sizes), case.spec.vertices(), expected, None, "solver",
                    "pass" if ok else "FAIL", round(time.perf_counter() - start, 3), detail, upper)


def reproduce(
    max_vertices: int = 16,
    long: bool = False,
    samples: int = 50,
    workers: int = 1,
    seed: int = 0,
) -> list[ReproRow]:
    """Oracle check of every family member up to ``max_vertices``; solver sampling beyond.

    With ``long`` the 32-vertex hypercube is also settled by the symmetry-reduced oracle.
    """
    specs = sorted(family_instances(max_vertices), key=lambda s: (s.kind, s.vertices(), s.sizes))
    if long and all(s.label != "Q5" for s in specs):
        specs.append(FamilySpec("hypercube", (5,)))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_oracle_row, specs))
    else:
        rows = [_oracle_row(s) for s in specs]
    for i, case in enumerate(SOLVER_CASES):
        if case.spec.vertices() > max_vertices:
            rows.append(_solver_row(case, samples, seed + i))
    return rows


def format_table(rows: Sequence[ReproRow]) -> str:
    head = f"{'family':<10} {'sizes':<14} {'|V|':>4} {'exp':>4} {'got':>4} {'method':<7} {'status':<9} {'sec':>8}"
    lines = [head, "-" * len(head)]
    for r in rows:
        got = r.oracle if r.oracle is not None else (f"<={r.upper}" if r.upper is not None else "-")
        sizes = ",".join(map(str, r.sizes))
        lines.append(
            f"{r.family:<10} {sizes:<14} {r.vertices:>4} {r.expected:>4} {str(got):>4} {r.method:<7} "
            f"{r.status:<9} {r.seconds:>8.3f}"
        )
        if r.detail:
            lines.append(f"{'':<10} {r.detail}")
    return "\n".join(lines)


def rows_to_json(rows: Sequence[ReproRow]) -> str:
    return json.dumps([r.to_json() for r in rows], indent=2)


def all_pass(rows: Sequence[ReproRow]) -> bool:
    return all(r.status == "pass" for r in rows)
