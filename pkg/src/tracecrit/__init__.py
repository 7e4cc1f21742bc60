"""Numerical toolkit for the trace-distance security criterion of
quantum-generated keys: criterion evaluation on classical-quantum
ensembles, optimal-measurement success probabilities, coupling
constructions, GF(2) side-channel analysis, and guarantee arithmetic,
all exposed through deterministic reporting experiments."""

__version__ = "0.1.0"

from .bounds import (
    ComparisonRow,
    GuaranteeBudget,
    GuaranteeScenario,
    average_for_individual_guarantee,
    hypothesis_ii_cap,
    hypothesis_ii_exact,
    markov_bound,
    uniform_comparison_table,
)
from .coupling import (
    Coupling,
    independent_coupling,
    maximal_coupling,
    mismatch_probability,
)
from .criteria import (
    CriterionReport,
    DeltaEVariants,
    classical_dbar,
    criterion_d_averaged,
    criterion_d_entangled,
    criterion_report,
    d_k_per_key,
    decomposition_fallacy_check,
    delta_E_variants,
    event_deviation_bound,
    pairwise_distance_bound,
    variational_distance,
)
from .discrimination import (
    JointDistribution,
    Povm,
    helstrom_binary,
    measure_ensemble,
    pgm,
    post_leak_discrimination,
    posterior,
    success_probability,
)
from .ensembles import (
    CqEnsemble,
    LeakSpec,
    ProbDist,
    SpikedDist,
    average_probe,
    condition_on_leak,
    ensemble_from_json,
    ensemble_to_json,
    single_bit_pure_example,
    spiked_distribution,
    two_bit_pkl_example,
    uniform_key_state,
)
from .experiments import ExperimentReport, Verdict, run_experiment, run_sweep
from .qmath import (
    DensityOperator,
    PureState,
    hermitian_eigen,
    partial_trace,
    tensor,
    trace_distance,
    trace_norm,
    validate_density,
)
from .sidechannel import (
    CensusResult,
    Gf2Matrix,
    LinearCode,
    code_from_text,
    decision_region_census,
    gf2_rank,
    is_perfect_code,
    pac_leakage,
    singular_fraction,
    toeplitz_from_seed,
)
