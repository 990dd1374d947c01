"""Self-confidence adaptation in French-DeGroot opinion pooling.

Exact limit matrices and estimation variances, best-response sets, Pareto
and Nash characterisation of self-confidence profiles, and the randomized
asynchronous best-response learning dynamics.
"""
from .dynamics import (
    Branch,
    LimitMatrix,
    NoiseModel,
    OpinionState,
    common_cost,
    estimation_variances,
    interaction_matrix,
    limit_matrix,
    simulate_opinions,
    social_power,
    step,
    stubborn_set,
)
from .equilibrium import (
    BestResponseSet,
    BRKind,
    NashReport,
    ParetoSegment,
    Verdict,
    aggregates,
    best_response,
    classify_profile,
    pareto_segment,
    zstar_membership,
)
from .errors import (
    ConfigError,
    DiagnosticViolation,
    NotAperiodic,
    NotStochastic,
    NotStronglyConnected,
    SolverFailure,
    StubbornPresent,
    TooSmall,
    ValidationError,
)
from .learning import RunConfig, RunSummary, TrajectoryRecord, br_step, diagnostics, run
from .network import (
    Digraph,
    InfluenceNetwork,
    is_directed_ring,
    restricted_graph,
    stationary_distribution,
    validate_network,
)

__version__ = "0.1.0"
