"""Coupled homophily appraisal and signed opinion dynamics."""

from .analysis import (
    BalanceVerdict,
    ConsensusKind,
    ConsensusVerdict,
    EquilibriumDescription,
    NotAnEquilibrium,
    classify_equilibrium,
    is_socially_balanced,
    is_socially_balanced_rows,
    is_socially_balanced_triads,
    limit_verdicts,
    local_stability_probe,
    modulus_consensus,
    modulus_sign_consensus,
    nonvanishing_check,
)
from .core import (
    DomainViolation,
    NonFiniteError,
    Snapshot,
    Status,
    Termination,
    Trajectory,
    sign_of,
    validate_opinion_matrix,
)
from .dynamics import (
    SimulationConfig,
    StepResult,
    appraisal_update,
    composite_map,
    influence_from_appraisal,
    opinion_update,
    predicted_limit_appraisal,
    simulate,
    single_issue_closed_form,
    step,
)
from .montecarlo import (
    ExperimentParams,
    MonteCarloReport,
    chernoff_sample_size,
    generic_initial,
    run_experiment,
)

__version__ = "0.1.0"
