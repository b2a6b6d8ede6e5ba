"""Command-line driver: ``linklab <command> ...`` (also ``python3 -m linklab``).

Exit codes: 0 success, 1 verification/repro failure, 2 instance outside the
construction's preconditions, 3 proven not linked, 4 undecided under the
search budget, 64 malformed input, 70 internal construction error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import families
from .errors import InternalError, InvalidParameter, LinkLabError, NotLinked, Undecided, UnsupportedInstance
from .graph import (
    GraphLike,
    ProductGraph,
    _as_graph,
    cartesian_product,
    load_graph_data,
    make_complete,
    make_cycle,
    make_grid,
    make_hypercube,
    make_path,
    make_sharpness_graph,
    make_torus,
    parse_edgelist,
    spacapan_connectivity,
    vertex_connectivity,
)
from .linker import SolverParams, link_connected_factor, solve_k_plus_1, solve_product_linkage
from .oracle import find_linkage, is_k_linked, link_number
from .paths import PathSystem, validate_path_system

EXIT_OK, EXIT_INVALID, EXIT_UNSUPPORTED, EXIT_NOT_LINKED, EXIT_UNDECIDED, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3, 4, 64, 70


class InputError(Exception):
    """Malformed user input (bad JSON, missing keys)."""


def _read_text(src: str) -> str:
    if src == "-":
        return sys.stdin.read()
    try:
        return Path(src).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {src}: {exc}") from None


def _parse_json(text: str, what: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {what}: {exc}") from None


def _load_json_arg(src: str, what: str):
    """A file path, '-' for stdin, or an inline JSON literal."""
    stripped = src.lstrip()
    if stripped[:1] in "[{" and not Path(src).exists():
        return _parse_json(src, what)
    return _parse_json(_read_text(src), what)


def _load_graph(src: str, fmt: str = "json") -> tuple[GraphLike, dict]:
    text = _read_text(src)
    if fmt == "edgelist":
        try:
            return parse_edgelist(text), {}
        except (InvalidParameter, ValueError) as exc:
            raise InputError(f"malformed edge list in {src}: {exc}") from None
    data = _parse_json(text, src)
    if not isinstance(data, dict):
        raise InputError(f"{src}: expected a JSON object")
    try:
        return load_graph_data(data), data
    except (InvalidParameter, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{src}: {exc}") from None


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _vertex(G: GraphLike, v) -> int:
    if isinstance(v, list):
        if not isinstance(G, ProductGraph):
            raise InputError("coordinate terminals need a product graph")
        return G.id_of(v)
    return int(v)


def _pairs(G: GraphLike, raw) -> list[tuple[int, int]]:
    if not isinstance(raw, list) or not all(isinstance(p, list) and len(p) == 2 for p in raw):
        raise InputError("pairs must be a list of [s, t] entries")
    return [(_vertex(G, s), _vertex(G, t)) for s, t in raw]


# --- commands -------------------------------------------------------------


def cmd_gen(args) -> int:
    fam, nums = args.family, args.sizes
    single = {"path": make_path, "cycle": make_cycle, "complete": make_complete}
    if fam in single:
        if len(nums) != 1:
            raise InvalidParameter(f"{fam} takes one size")
        G: GraphLike = single[fam](nums[0])
    elif fam == "hypercube":
        if len(nums) != 1:
            raise InvalidParameter("hypercube takes one dimension")
        G = make_hypercube(nums[0])
    elif fam == "torus":
        G = make_torus(nums)
    elif fam == "grid":
        G = make_grid(nums)
    else:
        if len(nums) != 2:
            raise InvalidParameter("sharpness takes n and k")
        G = make_sharpness_graph(nums[0], nums[1])
    data = _as_graph(G).to_json() if args.flat else G.to_json()
    _emit(json.dumps(data), args.out)
    return EXIT_OK


def cmd_product(args) -> int:
    A, _ = _load_graph(args.a, args.format)
    B, _ = _load_graph(args.b, args.format)
    P = cartesian_product(A, B)
    _emit(json.dumps(_as_graph(P).to_json() if args.flat else P.to_json()), args.out)
    return EXIT_OK


def _pick_mode(data: dict) -> str:
    if "k" in data:
        return "kplus1"
    if data.get("b", 1) >= 2:
        return "strong"
    return "lemma1"


def cmd_solve(args) -> int:
    G, data = _load_graph(args.instance)
    if "pairs" not in data:
        raise InputError("instance needs a 'pairs' list")
    pairs = _pairs(G, data["pairs"])
    mode = args.mode if args.mode != "auto" else _pick_mode(data)
    params = SolverParams(fallback=args.fallback, assume_linked=args.assume_linked, budget=args.budget)
    if mode == "oracle":
        routes = find_linkage(G, pairs, budget=args.budget)
        if routes is None:
            raise NotLinked("no linkage exists", pairs)
        cert = PathSystem(routes, trace=["oracle"])
    else:
        if not isinstance(G, ProductGraph) or len(G.factors) < 2:
            raise UnsupportedInstance("constructive modes need a product instance ({'factors': [...]})")
        if mode == "lemma1":
            cert = link_connected_factor(G, pairs, params)
        elif mode == "strong":
            if "a" not in data or "b" not in data:
                raise InputError("strong mode needs 'a' and 'b'")
            cert = solve_product_linkage(G, pairs, int(data["a"]), int(data["b"]), params)
        else:
            k = int(data.get("k", len(pairs) - 1))
            cert = solve_k_plus_1(G, pairs, k, params)
    out = cert.to_json()
    out["pairs"] = [list(p) for p in pairs]
    _emit(json.dumps(out), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    G, gdata = _load_graph(args.graph, args.format)
    cdata = _load_json_arg(args.cert, args.cert)
    if not isinstance(cdata, dict):
        raise InputError("certificate must be a JSON object")
    try:
        cert = PathSystem.from_json(cdata)
    except (InvalidParameter, TypeError, ValueError) as exc:
        raise InputError(f"bad certificate: {exc}") from None
    if args.pairs is not None:
        raw = _load_json_arg(args.pairs, "pairs")
        if isinstance(raw, dict):
            raw = raw.get("pairs")
    else:
        raw = cdata.get("pairs", gdata.get("pairs"))
        if raw is None:
            raise InputError("no pairs given (argument, certificate or graph file)")
    ok, why = validate_path_system(G, _pairs(G, raw), cert)
    print("valid" if ok else f"invalid: {why}")
    return EXIT_OK if ok else EXIT_INVALID


def cmd_link_number(args) -> int:
    G, _ = _load_graph(args.graph, args.format)
    if args.k is not None:
        ok, witness = is_k_linked(G, args.k, symmetry=args.symmetry, budget=args.budget, workers=args.threads)
        print(json.dumps({"k_linked": ok, "witness": [list(p) for p in witness] if witness else []}))
        return EXIT_OK
    value = link_number(G, symmetry=args.symmetry, budget=args.budget, workers=args.threads)
    print(json.dumps({"link_number": value}) if args.json else value)
    return EXIT_OK


def cmd_conn(args) -> int:
    G, _ = _load_graph(args.graph, args.format)
    result = {"kappa": vertex_connectivity(G), "n": _as_graph(G).n, "min_degree": _as_graph(G).min_degree()}
    if args.product:
        H, _ = _load_graph(args.product, args.format)
        direct = vertex_connectivity(cartesian_product(G, H))
        formula = spacapan_connectivity(G, H)
        result.update({"kappa_product": direct, "spacapan": formula, "agree": direct == formula})
    print(json.dumps(result))
    return EXIT_OK if result.get("agree", True) else EXIT_INVALID


def cmd_repro(args) -> int:
    rows = families.reproduce(args.max_vertices, long=args.long, samples=args.samples, workers=args.threads)
    print(families.rows_to_json(rows) if args.json else families.format_table(rows))
    return EXIT_OK if families.all_pass(rows) else EXIT_INVALID


# --- parser ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="linklab", description="Linkedness of graphs and Cartesian products.")
    p.add_argument("--threads", type=int, default=1, help="worker processes for oracle/repro")
    p.add_argument("--budget", type=int, default=None, help="oracle node-expansion budget (default LINKLAB_BUDGET or 10^7)")
    sub = p.add_subparsers(dest="command", required=True)

    def graph_opts(sp):
        sp.add_argument("--format", choices=("json", "edgelist"), default="json")

    g = sub.add_parser("gen", help="generate a graph family")
    g.add_argument("family", choices=("path", "cycle", "complete", "hypercube", "torus", "grid", "sharpness"))
    g.add_argument("sizes", type=int, nargs="+")
    g.add_argument("--flat", action="store_true", help="emit {n, edges} even for products")
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    pr = sub.add_parser("product", help="Cartesian product of two graph files")
    pr.add_argument("a")
    pr.add_argument("b")
    pr.add_argument("--flat", action="store_true")
    pr.add_argument("--out")
    graph_opts(pr)
    pr.set_defaults(func=cmd_product)

    s = sub.add_parser("solve", help="link the pairs of a product instance")
    s.add_argument("instance")
    s.add_argument("--mode", choices=("auto", "lemma1", "strong", "kplus1", "oracle"), default="auto")
    s.add_argument("--assume-linked", action="store_true", help="skip the factor linkedness check")
    s.add_argument("--fallback", action="store_true", help="use exhaustive search when the construction does not apply")
    s.add_argument("--out")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="check a path-system certificate")
    v.add_argument("graph")
    v.add_argument("cert")
    v.add_argument("pairs", nargs="?", help="file or inline JSON; defaults to the certificate's pairs")
    graph_opts(v)
    v.set_defaults(func=cmd_verify)

    ln = sub.add_parser("link-number", help="exact linkedness by exhaustive search")
    ln.add_argument("graph", nargs="?", default="-")
    ln.add_argument("--symmetry", action="store_true", help="check one configuration per automorphism orbit")
    ln.add_argument("-k", type=int, default=None, help="only decide k-linkedness")
    ln.add_argument("--json", action="store_true")
    graph_opts(ln)
    ln.set_defaults(func=cmd_link_number)

    c = sub.add_parser("conn", help="vertex connectivity, optionally against the product formula")
    c.add_argument("graph")
    c.add_argument("--product", metavar="B")
    graph_opts(c)
    c.set_defaults(func=cmd_conn)

    r = sub.add_parser("repro", help="compare closed-form family values with the oracle and solver")
    r.add_argument("--max-vertices", type=int, default=16)
    r.add_argument("--long", action="store_true", help="also settle Q5 by the oracle (slow)")
    r.add_argument("--samples", type=int, default=50)
    r.add_argument("--json", action="store_true")
    r.set_defaults(func=cmd_repro)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UnsupportedInstance as exc:
        print(f"unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except NotLinked as exc:
        print(f"not linked: {exc}", file=sys.stderr)
        return EXIT_NOT_LINKED
    except Undecided as exc:
        print(f"undecided: {exc}", file=sys.stderr)
        return EXIT_UNDECIDED
    except InternalError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except LinkLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
