"""linklab: linkedness of graphs and of their Cartesian products."""

from .errors import (
    InternalError,
    InvalidParameter,
    LinkLabError,
    NotFound,
    NotLinked,
    Undecided,
    UnsupportedInstance,
)
from .graph import (
    Graph,
    LayerRef,
    ProductGraph,
    cartesian_product,
    layer,
    make_complete,
    make_cycle,
    make_grid,
    make_hypercube,
    make_path,
    make_sharpness_graph,
    make_torus,
    product_of,
    projection,
    spacapan_connectivity,
    vertex_connectivity,
)
from .linker import SolverParams, link_connected_factor, solve_k_plus_1, solve_product_linkage, theorem_bounds
from .oracle import LinkageInstance, find_linkage, is_k_linked, link_number, solve_config
from .paths import MengerRequest, PathSystem, Separator, menger_link, truncate_path, validate_path_system

__version__ = "0.1.0"

__all__ = [
    "Graph",
    "InternalError",
    "InvalidParameter",
    "LayerRef",
    "LinkLabError",
    "LinkageInstance",
    "MengerRequest",
    "NotFound",
    "NotLinked",
    "PathSystem",
    "ProductGraph",
    "Separator",
    "SolverParams",
    "Undecided",
    "UnsupportedInstance",
    "cartesian_product",
    "find_linkage",
    "is_k_linked",
    "layer",
    "link_connected_factor",
    "link_number",
    "make_complete",
    "make_cycle",
    "make_grid",
    "make_hypercube",
    "make_path",
    "make_sharpness_graph",
    "make_torus",
    "menger_link",
    "product_of",
    "projection",
    "solve_config",
    "solve_k_plus_1",
    "solve_product_linkage",
    "spacapan_connectivity",
    "theorem_bounds",
    "truncate_path",
    "validate_path_system",
    "vertex_connectivity",
]
