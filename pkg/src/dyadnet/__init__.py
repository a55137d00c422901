"""Dynamic dyadic network formation: simulation, moment-inequality
verification, identified sets, and exact conditional logit estimation."""

from .model import (
    NetworkPanel,
    NodeCovariatePanel,
    Theta,
    UnrestrictedDyad,
    AdditiveNode,
    LatentDistance,
    UnrestrictedDyadDraw,
    AdditiveNodeDraw,
    LatentDistanceDraw,
    IidLogistic,
    IidKnownMarginal,
    Ar1GaussianCopula,
    CovariateSpec,
    EmptyInitial,
    ErdosRenyiInitial,
    GivenInitial,
    LaggedLink,
    CommonFriends,
    FriendsOfFriends,
    StatisticRegistry,
    default_registry,
    ModelSpec,
    SimulationResult,
    dyadic_covariates,
    lagged_stats,
    index_W,
    simulate_panel,
    save_panel,
    load_panel,
)
from .configurations import (
    EdgeTimeCell,
    make_cell,
    SignedConfiguration,
    WeightedConfiguration,
    residual_load,
    node_incidence,
    delta_W,
    contrast_vector,
    outcome_indicators,
    enumerate_configurations,
    family_total,
    FAMILIES,
    format_configuration,
    parse_configuration,
)
from .inequalities import (
    PanelData,
    ConditioningCell,
    BoundEvaluation,
    Violation,
    BoundsResult,
    CompositeCDF,
    ThetaVerdict,
    IdentifiedSetReport,
    default_c_grid,
    dyad_panel_bounds,
    signed_subgraph_bounds,
    partial_envelope,
    composite_cdf,
    known_cdf_bounds,
    weighted_node_bounds,
    identified_set,
)
from .clogit import (
    PointIdentificationFailure,
    SeparationError,
    EtaRecord,
    ClogitSample,
    FitResult,
    RankReport,
    exact_log_odds,
    build_sample,
    fit,
    rank_check,
    latent_distance_diagnostic,
    collect_node_balanced,
    default_config_budget,
)

__version__ = "0.1.0"
