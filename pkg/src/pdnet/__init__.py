"""Four-strategy prisoner's dilemma on networks.

Self-interested agents on a fixed interaction network repeatedly pick the
strategy (cooperate, defect, stay out, punish) that maximizes their payoff
against the current neighborhood, with tunable participation and mutation
rates. Includes stylized network generators, a seeded batch-experiment
harness, Welch t-test summaries, and grid snapshot rendering.
"""

from .dynamics import (
    SimConfig,
    SimState,
    SimStreams,
    UpdateMode,
    census_neighbors,
    init_uniform,
    run,
    step,
)
from .experiment import (
    ConditionSummary,
    ExperimentPlan,
    replication_seed,
    run_condition,
    run_plan,
    summarize_plan,
    write_raw_csv,
    write_summary_csv,
)
from .graphs import (
    EdgeListParseError,
    Graph,
    InfeasibleNetworkError,
    Neighborhood,
    NetworkSpec,
    NetworkVariant,
    generate_network,
    grid_torus,
    load_edge_list,
    save_edge_list,
)
from .metrics import (
    CountsSnapshot,
    STRATEGY_COLORS,
    census,
    coexistence_value,
    render_grid_ppm,
    snapshots_to_csv,
)
from .payoffs import (
    DEFAULT_PARAMS,
    PRESETS,
    SOFT_PUNISHMENT_PARAMS,
    NeighborCounts,
    PayoffParams,
    Strategy,
    aggregate_payoffs,
    best_response,
    pairwise_payoff,
)
from .stats import (
    SampleSummary,
    WelchResult,
    significance_flag,
    student_t_two_tailed_p,
    summarize,
    welch_t,
)

__version__ = "0.1.0"
