"""Spectral hypergraph sparsification by balanced effective resistances.

Pipeline: split each hyperedge's weight over its internal vertex pairs and
balance the resulting clique-expansion resistances through a log-determinant
program (`balance`), build the resistance-weighted importance distribution
(`build_plan`), draw a reweighted sub-hypergraph (`draw`), and certify its
approximation quality empirically (`empirical_epsilon`).
"""

from .balancer import (
    BalanceReport,
    ConductanceSplit,
    balance,
    gradient,
    initialize_split,
    kkt_residual,
    objective,
)
from .bench import BenchConfig, RunRecord, min_passing_samples, run_bench
from .errors import (
    DisconnectedError,
    DisconnectedPairError,
    DuplicateVertexError,
    HsparseError,
    InvalidHypergraphError,
    NonpositiveWeightError,
    SingletonEdgeError,
    SingularMatrixError,
    TooLargeError,
    VertexOutOfRangeError,
    ZeroEnergyDirectionError,
)
from .hypergraph import (
    Hyperedge,
    Hypergraph,
    PairSet,
    clique_expansion,
    edge_energy,
    edge_energy_matrix,
    energy_batch,
    random_hypergraph,
    total_energy,
    validate,
)
from .laplacian import Conductances, LaplacianOperator, build_laplacian, foster_sum
from .sampler import (
    DEFAULT_SAMPLE_CONSTANT,
    SamplingPlan,
    Sparsifier,
    build_plan,
    draw,
    sample_count,
)
from .verifier import (
    ChainingDiagnostics,
    ErrorReport,
    chaining_diagnostics,
    cut_error_exhaustive,
    empirical_epsilon,
    norm_domination_check,
    relative_error,
    unbiasedness_check,
)

__version__ = "0.1.0"
