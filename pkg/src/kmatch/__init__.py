"""Perfect matchings in dense k-complexes, at desk scale.

Barrier certificates, exact fractional matchings by rational LP, weight-
disjoint extraction, randomized rounding, and lattice-based absorbing, with
brute-force oracles for every stage.
"""

from .core import (
    Allocation,
    CompleteComplex,
    KComplex,
    KSystem,
    Matching,
    VertexUniverse,
    allocation_from_index_multiset,
    allocation_properties,
    build_complex,
    degree_sequences,
    index_vector,
    is_pf_partite,
    matching_stats,
    plain_allocation,
    validate_matching,
)
from .lattice import (
    IndexLattice,
    RobustVectorSet,
    bounded_decompose,
    find_transferral,
    generate_lattice,
    is_complete,
    lattice_contains,
    robust_edge_vectors,
    transfer_constant,
)
from .absorbing import (
    AbsorberConfig,
    AbsorberState,
    ClosedPartition,
    ReachabilityParams,
    absorb,
    build_absorber,
    closed_partition,
    reachable_neighborhood,
)
from .barriers import (
    DivBarrierCert,
    SpaceBarrierCert,
    divisibility_barrier_search,
    space_barrier_search,
    verify_divisibility_barrier,
    verify_space_barrier,
)
from .fractional import (
    FractionalMatching,
    build_lp,
    dump_lp,
    extract_weight_disjoint,
    solve_feasible,
    verify_fractional,
)
from .khg import dump_khg, load_khg, load_khg_system, save_khg
from .oracle import (
    GenSpec,
    brute_force_fractional,
    brute_force_pm,
    complete_complex,
    gen_divisibility_barrier,
    gen_random_dense,
    gen_space_barrier,
)
from .pipeline import (
    Certificate,
    PipelineConfig,
    decide,
    run_general,
    run_matching_pipeline,
)
from .rounding import (
    NibbleParams,
    NibbleResult,
    SampledGraph,
    check_regularity,
    color_classes,
    combine_weights,
    nibble_match,
    sample_subgraph,
)

__version__ = "0.1.0"

__all__ = [
    "Allocation",
    "CompleteComplex",
    "KComplex",
    "KSystem",
    "Matching",
    "VertexUniverse",
    "allocation_from_index_multiset",
    "allocation_properties",
    "build_complex",
    "degree_sequences",
    "index_vector",
    "is_pf_partite",
    "matching_stats",
    "plain_allocation",
    "validate_matching",
    "IndexLattice",
    "RobustVectorSet",
    "bounded_decompose",
    "find_transferral",
    "generate_lattice",
    "is_complete",
    "lattice_contains",
    "robust_edge_vectors",
    "transfer_constant",
    "AbsorberConfig",
    "AbsorberState",
    "ClosedPartition",
    "ReachabilityParams",
    "absorb",
    "build_absorber",
    "closed_partition",
    "reachable_neighborhood",
    "DivBarrierCert",
    "SpaceBarrierCert",
    "divisibility_barrier_search",
    "space_barrier_search",
    "verify_divisibility_barrier",
    "verify_space_barrier",
    "FractionalMatching",
    "build_lp",
    "dump_lp",
    "extract_weight_disjoint",
    "solve_feasible",
    "verify_fractional",
    "dump_khg",
    "load_khg",
    "load_khg_system",
    "save_khg",
    "GenSpec",
    "brute_force_fractional",
    "brute_force_pm",
    "complete_complex",
    "gen_divisibility_barrier",
    "gen_random_dense",
    "gen_space_barrier",
    "Certificate",
    "PipelineConfig",
    "decide",
    "run_general",
    "run_matching_pipeline",
    "NibbleParams",
    "NibbleResult",
    "SampledGraph",
    "check_regularity",
    "color_classes",
    "combine_weights",
    "nibble_match",
    "sample_subgraph",
]
