"""opinionlab: opinion-dynamics simulation and micro-level shift analysis
on large friendship graphs."""

from .core import (
    GROUP_LABELS,
    IdeologicalGroup,
    IsolatedAgentError,
    NeighborhoodStats,
    OpinionRangeError,
    OpinionSnapshot,
    SocialGraph,
    Trajectory,
    assign_group,
    group_of,
    neighborhood_stats,
    pearson_correlation,
)
from .kernels import (
    AbsKernelProportional,
    ActivationModel,
    AlwaysActive,
    BoundedConfidence,
    CombinedPositiveNegative,
    ConfidenceWeighted,
    InfluenceKernel,
    LinearNegative,
    LinearPositive,
    ModeratedNegative,
    ModeratedPositive,
    Prejudice,
    RelaxedBoundedConfidence,
    activation_probability,
    fj_update,
    kernel_value,
)
from .dynamics import Schedule, run, spread, step
from .generator import (
    HomophilySpec,
    NULL_MODEL_FRACTIONS,
    PopulationSpec,
    assortativity,
    calibrate_homophily,
    generate,
)
from .analysis import (
    EpocDecomposition,
    MetricTable,
    ShiftRecord,
    ShiftTable,
    classify_shifts,
    epoc_curves,
    epoc_decomposition,
    eq3_inequalities,
    homophily_table,
    magnitude_curves,
    movement_map,
    movement_probability_curves,
    pos_neg_ratio,
    radicalization_curves,
)
from .observer import (
    LatentDrive,
    ObserverExperimentConfig,
    ObserverSpec,
    SubscriptionParams,
    SubscriptionState,
    default_source_grid,
    observe,
    run_observed_experiment,
    subscription_step,
)
from .dataio import Dataset, IngestError, export_dataset, ingest
from .cli import run_command

__version__ = "0.1.0"
