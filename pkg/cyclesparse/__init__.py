"""Top-level package for cyclesparse."""
from pkg_resources import DistributionNotFound, get_distribution

from .biclique import (
    Biclique,
    BicliqueCollection,
    FractionalGraph,
    WeightedBiclique,
    WeightedClique,
    biclique_split_by_partition,
    biclique_to_unit,
    clique_to_bicliques,
    dd_subset,
    implicit_partition_and_sample,
    implicit_sketch_bicliques,
    make_balanced,
    sample_bicliques,
    sample_matchings,
    schur_squared_matrix,
    schur_step_cliques,
    sketch_schur_step,
)
from .core import (
    BicliqueConfig,
    CycleConfig,
    ReduceConfig,
    SketchConfig,
    SparsifyConfig,
    rng_stream,
    split_rng,
)
from .cycles import (
    CycleDecomposition,
    decompose,
    extract_bounded_degree,
    move_edges,
    move_edges_expander,
    naive_cycle_decomposition,
    short_cycle_decomposition,
)
from .exceptions import (
    ComponentMismatchError,
    ConvergenceError,
    GraphParseError,
    InternalConsistencyError,
    InvalidInputRange,
    InvalidInputType,
    InvalidInputValue,
    MissingItems,
    NotEulerianError,
    PreconditionError,
    RetryBudgetExhausted,
)
from .expander import conductance, expander_decompose, lazy_random_walk, ns_style_decompose
from .graph import (
    DirectedGraph,
    LaplacianView,
    WeightedMultigraph,
    binary_split,
    combine_parallel_edges,
    load_graph,
    read_graph,
    save_graph,
    weighted_degrees,
)
from .linalg import (
    asym_error_norm,
    certify_spectral_approx,
    lambda2_normalized,
    pseudo_quadratic,
    solve_laplacian,
)
from .reduce import decompose_bipartite_dir, local_move, reduce_powers_of_two, reduce_to_unit
from .report import ApproxReport
from .resistance import (
    approx_effective_resistances,
    exact_effective_resistances,
    foster_residual,
)
from .sketch import decompose_and_sample, inverse_form_check, spectral_sketch
from .sparsify import (
    degree_preserving_sparsify,
    directed_sparsify_once,
    eulerian_sparsify,
    sparsify_once,
)
from .validate import validate_decomposition, validate_partial

try:
    __version__ = get_distribution(__name__).version
except DistributionNotFound:
    __version__ = "999"

__all__ = [
    "WeightedMultigraph",
    "DirectedGraph",
    "LaplacianView",
    "load_graph",
    "read_graph",
    "save_graph",
    "weighted_degrees",
    "binary_split",
    "combine_parallel_edges",
    "solve_laplacian",
    "pseudo_quadratic",
    "certify_spectral_approx",
    "asym_error_norm",
    "lambda2_normalized",
    "conductance",
    "expander_decompose",
    "ns_style_decompose",
    "lazy_random_walk",
    "CycleDecomposition",
    "naive_cycle_decomposition",
    "extract_bounded_degree",
    "move_edges_expander",
    "move_edges",
    "short_cycle_decomposition",
    "decompose",
    "validate_decomposition",
    "validate_partial",
    "exact_effective_resistances",
    "approx_effective_resistances",
    "foster_residual",
    "sparsify_once",
    "directed_sparsify_once",
    "degree_preserving_sparsify",
    "eulerian_sparsify",
    "decompose_and_sample",
    "spectral_sketch",
    "inverse_form_check",
    "Biclique",
    "WeightedBiclique",
    "WeightedClique",
    "BicliqueCollection",
    "FractionalGraph",
    "make_balanced",
    "sample_matchings",
    "sample_bicliques",
    "biclique_split_by_partition",
    "implicit_partition_and_sample",
    "implicit_sketch_bicliques",
    "schur_step_cliques",
    "schur_squared_matrix",
    "sketch_schur_step",
    "dd_subset",
    "clique_to_bicliques",
    "biclique_to_unit",
    "decompose_bipartite_dir",
    "local_move",
    "reduce_powers_of_two",
    "reduce_to_unit",
    "ApproxReport",
    "CycleConfig",
    "SparsifyConfig",
    "SketchConfig",
    "BicliqueConfig",
    "ReduceConfig",
    "rng_stream",
    "split_rng",
    "ComponentMismatchError",
    "ConvergenceError",
    "GraphParseError",
    "InternalConsistencyError",
    "InvalidInputRange",
    "InvalidInputType",
    "InvalidInputValue",
    "MissingItems",
    "NotEulerianError",
    "PreconditionError",
    "RetryBudgetExhausted",
]
