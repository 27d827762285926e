"""Meta-evaluation of automatic summarization metrics at the system level.

Computes Kendall tau-b system-level correlations between metric scores and
human judgments, either with the metric averaged over only the judged
documents or over the full test set, correlations restricted to system pairs
that are close in metric score, and seeded bootstrap analyses (confidence
intervals, score variance, ranking stability).
"""

__version__ = "0.1.0"

from .correlation import (
    FULL_TEST,
    JUDGED_ONLY,
    CorrelationResult,
    TauComponents,
    classical_tau_b,
    count_pair_components,
    kendall_tau_b,
    pearson,
    system_aggregates,
    system_level_correlation,
    tau_from_components,
)
from .deltacorr import (
    DeltaGrid,
    DeltaWindow,
    delta_correlation,
    delta_grid,
    gap_threshold_for_fraction,
    pairwise_score_gaps,
)
from .errors import EmptySelectionError, InputError, MetacorrError, UndefinedCorrelationError
from .resample import (
    BootstrapConfig,
    ConfidenceInterval,
    StabilityPoint,
    VarianceReport,
    bootstrap_correlation_ci,
    derive_iteration_seed,
    percentile_interval,
    ranking_stability_curve,
    system_score_variance,
)
from .scoredata import (
    ScoreMatrix,
    SystemAggregate,
    align_systems,
    dump_score_table,
    parse_score_table,
    read_score_table,
    restrict_to_common_docs,
    select_docs,
    select_systems,
    system_means,
    write_score_table,
)
from .synth import SynthConfig, brute_force_tau, generate_dataset
