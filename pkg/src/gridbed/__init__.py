"""Grid embedding of graphs: exact solvers, hardness reductions and rendering."""

from .dispatch import solve_dispatch
from .distance import solve_distance_fpt
from .embedding import GridEmbedding, distance_approximation, glue, validate
from .graph import Graph, cycle_graph, grid_graph, path_graph, star_graph
from .oracle import DEFAULT_BUDGET, Answer, SolveResult, brute_force_embed, min_distance_approximation
from .snapshot import solve_mcc_k
from .tree import FULL_CONSTANTS, REDUCED_CONSTANTS, TreeConstants, solve_tree

__version__ = "0.1.0"

__all__ = [
    "Answer",
    "DEFAULT_BUDGET",
    "Graph",
    "GridEmbedding",
    "FULL_CONSTANTS",
    "REDUCED_CONSTANTS",
    "SolveResult",
    "TreeConstants",
    "brute_force_embed",
    "cycle_graph",
    "distance_approximation",
    "glue",
    "grid_graph",
    "min_distance_approximation",
    "path_graph",
    "solve_dispatch",
    "solve_distance_fpt",
    "solve_mcc_k",
    "solve_tree",
    "star_graph",
    "validate",
]
