"""Joint-entropy measurement selection for two collaborating measurement agents."""

from .collab import (
    EpisodeLog,
    Policy,
    RoundRecord,
    StopRule,
    compare_policies,
    initial_posterior,
    run_episode,
    run_round,
)
from .config import RunConfig, load_config, parse_config
from .design import (
    EntropyMap,
    JointEntropySelector,
    MapGrid,
    PredictionMode,
    entropy_at,
    entropy_map,
    hill_climb_pair_search,
    joint_entropy_at,
    joint_entropy_map,
    joint_outcome_distribution,
    mutual_information_at,
    mutual_information_map,
    outcome_distribution,
    select_independent,
    select_joint_exhaustive,
    select_sequential_greedy,
)
from .exceptions import (
    ConfigError,
    ContradictionError,
    JointInquiryError,
    UndefinedRelevanceError,
    ValidationError,
)
from .inference import (
    GridBayesEstimator,
    GridPosterior,
    StateGrid,
    bayes_update,
    draw_samples,
    init_prior,
    map_estimate,
    posterior_entropy,
)
from .inquiry import coarsen, partition_count, relevance, shannon_entropy
from .world import (
    CircleState,
    FieldBounds,
    MeasurementLocation,
    SensorModel,
    contains,
    predict,
    simulate_measurement,
)

__version__ = "0.1.0"
