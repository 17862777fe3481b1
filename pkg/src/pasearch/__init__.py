"""Preferential attachment graphs and local-information root search.

The package samples preferential attachment graphs two equivalent ways
(the sequential urn process and an interval model built from exponential
block sums), exposes them behind a label-hiding local oracle, and
implements a degree-climbing search for vertex 1 next to ball-growing and
random-walk baselines, plus the statistical checks and experiment harness
used to validate the model predictions.
"""
from __future__ import annotations

from ._kernels import BACKEND
from .analysis import (
    ConcentrationReport,
    ContractionReport,
    EdgeProbabilityReport,
    IntervalReport,
    MaxDegreeReport,
    SmallEtaReport,
    TailBoundReport,
    bound_eta_lower,
    bound_sum_deviation,
    bound_sum_upper,
    check_degree_concentration,
    check_edge_probability,
    check_interval_concentration,
    check_small_eta_mass,
    check_tail_bounds,
    contraction_statistic,
    degree_relative_errors,
    in_band_ratios,
    max_degree_scaling,
    required_trials,
    small_eta_mass,
)
from .errors import (
    ConfigError,
    ConsistencyError,
    HandleError,
    ParameterError,
    PrecisionError,
)
from .generator import (
    ContinuousRealization,
    PAGraph,
    generate_continuous,
    generate_sequential,
    generate_uniform_attachment,
    interval_lookup,
    read_graph,
    read_realization,
    sample_exponential_sum,
    validate_graph,
    write_edgelist,
    write_graph,
    write_realization,
)
from .harness import (
    ExperimentConfig,
    ExperimentResult,
    FitResult,
    GeneratorComparison,
    RungAggregate,
    TrialRow,
    compare_generators,
    fit_scaling,
    result_digest,
    run_experiment,
    rung_band,
    verify_result,
)
from .oracle import (
    AuditRecord,
    LocalOracle,
    OracleSession,
    read_transcript,
    verify_locality,
    write_transcript,
)
from .params import (
    climb_stop_threshold,
    default_omega,
    lambda0,
    n0,
    n1,
    start_degree_threshold,
    walk_restrict_threshold,
)
from .rng import derive_trial_seed, stream_rng
from .search import (
    DcaConfig,
    SearchTrace,
    TraceEvent,
    bbckl_search,
    climb_ratios,
    dca_search,
    random_walk_search,
    trace_summary,
    write_trace_events,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "__version__",
    "AuditRecord",
    "ConcentrationReport",
    "ConfigError",
    "ConsistencyError",
    "ContinuousRealization",
    "ContractionReport",
    "DcaConfig",
    "EdgeProbabilityReport",
    "ExperimentConfig",
    "ExperimentResult",
    "FitResult",
    "GeneratorComparison",
    "HandleError",
    "IntervalReport",
    "LocalOracle",
    "MaxDegreeReport",
    "OracleSession",
    "PAGraph",
    "ParameterError",
    "PrecisionError",
    "RungAggregate",
    "SearchTrace",
    "SmallEtaReport",
    "TailBoundReport",
    "TraceEvent",
    "TrialRow",
    "bbckl_search",
    "bound_eta_lower",
    "bound_sum_deviation",
    "bound_sum_upper",
    "check_degree_concentration",
    "check_edge_probability",
    "check_interval_concentration",
    "check_small_eta_mass",
    "check_tail_bounds",
    "climb_ratios",
    "climb_stop_threshold",
    "compare_generators",
    "contraction_statistic",
    "dca_search",
    "default_omega",
    "degree_relative_errors",
    "derive_trial_seed",
    "fit_scaling",
    "generate_continuous",
    "generate_sequential",
    "generate_uniform_attachment",
    "in_band_ratios",
    "interval_lookup",
    "lambda0",
    "max_degree_scaling",
    "n0",
    "n1",
    "random_walk_search",
    "read_graph",
    "read_realization",
    "read_transcript",
    "required_trials",
    "result_digest",
    "run_experiment",
    "rung_band",
    "sample_exponential_sum",
    "small_eta_mass",
    "start_degree_threshold",
    "stream_rng",
    "trace_summary",
    "validate_graph",
    "verify_locality",
    "verify_result",
    "walk_restrict_threshold",
    "write_edgelist",
    "write_graph",
    "write_realization",
    "write_trace_events",
    "write_transcript",
]
