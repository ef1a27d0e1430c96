"""Edit-distance tooling and edit-path crossover for small attributed digraphs."""

from .graphs import (
    AttributedGraph,
    GraphInputError,
    MatrixDistance,
    dump_graph,
    extend_with_nulls,
    from_aa_matrix,
    graph_from_json,
    graph_to_json,
    load_graph,
    matrix_distances,
    permute,
    random_graph,
    strip_nulls,
    to_aa_matrix,
)
from .ged import (
    CapacityError,
    EditOp,
    GedResult,
    apply_edits,
    edits_from_alignment,
    ged_distance,
    ged_exact,
)
from .evolve import (
    SCHEDULES,
    BatchReport,
    EvalRecord,
    FitnessSpec,
    Individual,
    ParentStats,
    RunConfig,
    RunLog,
    ValiditySpec,
    collect_parent_stats,
    regularized_evolution,
    run_batch,
    summary_dict,
    write_runs_csv,
    write_stats_csv,
)
from .lbei import (
    DEFAULT_TRIALS,
    NSE_MODES,
    SPACES,
    LbeiGrid,
    SpaceParams,
    default_d_max,
    lbei_grid,
    lbei_muta,
    lbei_sepx,
    lbei_stdx,
    mean_random_disagreement,
)
from .operators import (
    OperatorConfig,
    SepEditPath,
    always_valid,
    dag_io_validity,
    mutate,
    random_valid_graph,
    sep_bernoulli_crossover,
    sep_crossover,
    standard_crossover,
    vary_with_retry,
)
from .rng import DEFAULT_SEED, substream

__version__ = "0.1.0"

__all__ = [
    "AttributedGraph",
    "GraphInputError",
    "MatrixDistance",
    "CapacityError",
    "EditOp",
    "GedResult",
    "apply_edits",
    "edits_from_alignment",
    "ged_distance",
    "ged_exact",
    "dump_graph",
    "extend_with_nulls",
    "from_aa_matrix",
    "graph_from_json",
    "graph_to_json",
    "load_graph",
    "matrix_distances",
    "permute",
    "random_graph",
    "strip_nulls",
    "to_aa_matrix",
    "SCHEDULES",
    "BatchReport",
    "EvalRecord",
    "FitnessSpec",
    "Individual",
    "ParentStats",
    "RunConfig",
    "RunLog",
    "ValiditySpec",
    "collect_parent_stats",
    "regularized_evolution",
    "run_batch",
    "summary_dict",
    "write_runs_csv",
    "write_stats_csv",
    "DEFAULT_TRIALS",
    "NSE_MODES",
    "SPACES",
    "LbeiGrid",
    "SpaceParams",
    "default_d_max",
    "lbei_grid",
    "lbei_muta",
    "lbei_sepx",
    "lbei_stdx",
    "mean_random_disagreement",
    "OperatorConfig",
    "SepEditPath",
    "always_valid",
    "dag_io_validity",
    "mutate",
    "random_valid_graph",
    "sep_bernoulli_crossover",
    "sep_crossover",
    "standard_crossover",
    "vary_with_retry",
    "substream",
    "DEFAULT_SEED",
    "__version__",
]
