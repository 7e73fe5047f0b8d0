"""Query-log-driven edge suggestions for interactive graph query building."""

from .graph import (
    CandidateEdge,
    DataGraph,
    GraphError,
    GraphLoadError,
    QueryNodeLabel,
    load_data_graph,
)
from .query import (
    QueryGraph,
    QueryModelError,
    QuerySession,
    SignedEdge,
    conversion_rate,
    load_query_graph,
    neg,
    pos,
    save_query_graph,
    similarity,
)
from .log import (
    LogError,
    QueryLog,
    SimulationConfig,
    apriori_frequent_itemsets,
    cooccurrence_ingest,
    datapos_simulate,
    import_positive_sets,
    inject_negatives,
    load_entity_windows,
    load_log,
    save_log,
)
from .rankers import (
    AlphabeticalRanker,
    CarRanker,
    CarRule,
    CarRuleSet,
    FrequencyRanker,
    NaiveBayesRanker,
    NbModel,
    RankedSuggestion,
    Ranker,
    RdpConfig,
    RdpRanker,
    alphabetical_rank,
    car_rank,
    car_train,
    frequency_rank,
    make_ranker,
    nb_rank,
    nb_train,
    rdp_expected_score,
    rdp_rank,
)
from .harness import (
    CompletionInstance,
    CompletionResult,
    expand_target_to_instances,
    report,
    run_completion,
    run_experiment,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
