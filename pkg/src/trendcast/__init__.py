"""trendcast: predict the future most-popular objects of a timestamped
bipartite user-object network, and evaluate the predictions."""

__version__ = "0.1.0"

from trendcast.ingest import (  # noqa: F401
    EdgeList,
    IdMaps,
    IngestConfig,
    TemporalEdge,
    dataset_stats,
    parse,
)
from trendcast.tempgraph import Snapshot, TemporalBipartiteGraph  # noqa: F401
from trendcast.predictors import (  # noqa: F401
    PredictorSpec,
    RankedList,
    ScoreTable,
    rank,
    score,
    score_cumulative,
    score_pbp,
    score_recent,
    score_tbp,
)
from trendcast.metrics import (  # noqa: F401
    MetricReport,
    TrueFutureRanking,
    auc,
    novelty,
    past_degree_ranking,
    precision,
    rank_shift,
    true_future_ranking,
)
from trendcast.experiment import (  # noqa: F401
    ExperimentConfig,
    evaluate_cell,
    sample_test_dates,
    sweep,
    sweep_tf,
)
from trendcast.synth import GrowthModel, brute_force_auc, brute_force_scores, generate  # noqa: F401
