"""Ranking-quality metrics against the true future popularity ranking.

The true ranking orders candidates by their link gain in the future window
(t, t+T_F], descending, ties by ascending id. A predictor is judged by:

* AUC       -- over pairs (benchmark object, other object), the fraction
               ranked correctly by score, ties counting one half.
* precision -- overlap of the predicted and true top-n, divided by n.
* novelty   -- among true top-n objects absent from the past top-n ("new
               entries"), the fraction the predictor put in its top-n;
               undefined when there are no new entries.
* rank shift -- per object, true future rank minus predicted rank; negative
               means the predictor underestimated the object.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from trendcast.predictors import RankedList, ScoreTable, rank, score_cumulative
from trendcast.tempgraph import TemporalBipartiteGraph

CSV_HEADER = "predictor,params,t,T_F,n,AUC,Pn,Qn,Dn,En,Cn"


@dataclass(frozen=True)
class TrueFutureRanking:
    """Candidates ranked by future popularity increase over (t, t+t_f]."""

    ranking: RankedList
    delta_k: np.ndarray  # aligned with ranking.objects (descending)
    t: int
    t_f: int

    def candidate_ids(self) -> np.ndarray:
        """The candidate set in ascending-id order."""
        return np.sort(self.ranking.objects)


def true_future_ranking(graph: TemporalBipartiteGraph, t: int, t_f: int) -> TrueFutureRanking:
    """Rank the candidates at t by their link gain in (t, t+t_f]."""
    if t_f < 1:
        raise ValueError("future window length must be >= 1")
    cand = graph.candidates(t)
    gains = graph.window_vector(t, t_f)[cand]
    order = np.lexsort((cand, -gains))
    return TrueFutureRanking(
        ranking=RankedList(cand[order]), delta_k=gains[order], t=int(t), t_f=int(t_f)
    )


def past_degree_ranking(graph: TemporalBipartiteGraph, t: int) -> RankedList:
    """Candidates ranked by cumulative degree at t; the "past top-n" against
    which new entries are defined. Identical to ranking the cumulative
    predictor, so a pure-degree predictor can never find a new entry."""
    return rank(score_cumulative(graph, t))


def _check_domain(scores: ScoreTable, truth: TrueFutureRanking) -> None:
    if len(scores) != len(truth.ranking) or not np.array_equal(
        scores.objects, truth.candidate_ids()
    ):
        raise ValueError("score table and true ranking cover different candidate sets")


def auc(scores: ScoreTable, truth: TrueFutureRanking, n: int) -> float:
    """Probability that a benchmark object (true top-n) outscores a
    non-benchmark object, ties counting 0.5.

    Computed by midrank rank-sum, which equals the pairwise definition
    exactly (both numerators are sums of halves, exactly representable).
    """
    _check_domain(scores, truth)
    n_all = len(scores)
    if not 1 <= n < n_all:
        raise ValueError(f"benchmark size n must be in [1, {n_all - 1}], got {n}")
    bench = truth.ranking.top(n)
    pos = np.searchsorted(scores.objects, bench)
    rank_sum = float(scores.midranks()[pos].sum())
    return (rank_sum - n * (n + 1) / 2.0) / (n * (n_all - n))


def _top_sets(predicted: RankedList, truth: TrueFutureRanking, n: int):
    if not 1 <= n <= len(truth.ranking):
        raise ValueError(f"n must be in [1, {len(truth.ranking)}], got {n}")
    return predicted.top(n), truth.ranking.top(n)


def precision(predicted: RankedList, truth: TrueFutureRanking, n: int) -> float:
    """Fraction of the predicted top-n present in the true top-n."""
    pred_top, true_top = _top_sets(predicted, truth, n)
    return np.intersect1d(pred_top, true_top).size / n


def new_entries(truth: TrueFutureRanking, past: RankedList, n: int) -> np.ndarray:
    """True top-n objects missing from the past top-n, ascending ids."""
    _, true_top = _top_sets(past, truth, n)  # also validates n against past
    return np.setdiff1d(true_top, past.top(n))


def novelty(
    predicted: RankedList, truth: TrueFutureRanking, past: RankedList, n: int
) -> float | None:
    """Fraction of the new entries the predictor caught in its top-n;
    None when there are no new entries (undefined, not zero)."""
    fresh = new_entries(truth, past, n)
    if fresh.size == 0:
        return None
    caught = np.intersect1d(predicted.top(n), fresh)
    return caught.size / fresh.size


class RankShift(NamedTuple):
    obj: int
    degree_rank: int  # rank by cumulative degree at t
    shift: int  # true future rank minus predicted rank; < 0: underestimated


def rank_shift(
    predicted: RankedList, truth: TrueFutureRanking, past: RankedList, top: int
) -> list[RankShift]:
    """Per-object rank shift for the top `top` objects of the true future
    ranking, in true-rank order."""
    if not 1 <= top <= len(truth.ranking):
        raise ValueError(f"top must be in [1, {len(truth.ranking)}], got {top}")
    out = []
    for true_rank, obj in enumerate(truth.ranking.objects[:top], start=1):
        obj = int(obj)
        out.append(
            RankShift(
                obj=obj,
                degree_rank=past.rank_of(obj),
                shift=true_rank - predicted.rank_of(obj),
            )
        )
    return out


@dataclass(frozen=True)
class MetricReport:
    """All metrics for one (predictor, t, T_F, n) evaluation cell."""

    predictor: str
    params: str
    t: int
    t_f: int
    n: int
    auc: float
    precision: float
    novelty: float | None  # None when no new entries exist
    d_n: int  # predicted top-n objects that are truly top-n
    e_n: int  # new entries: true top-n absent from past top-n
    c_n: int  # new entries the predictor caught

    def __post_init__(self):
        if not (0 <= self.c_n <= self.e_n <= self.n and 0 <= self.d_n <= self.n):
            raise ValueError("inconsistent top-n overlap counts")

    def csv_row(self) -> str:
        """One row matching CSV_HEADER; Qn is empty when undefined."""
        qn = "" if self.novelty is None else f"{self.novelty:.12g}"
        return (
            f"{self.predictor},{self.params.replace(' ', ';')},{self.t},{self.t_f},{self.n},"
            f"{self.auc:.12g},{self.precision:.12g},{qn},{self.d_n},{self.e_n},{self.c_n}"
        )


def write_rank_shift_csv(shifts: list[RankShift], f, extra_header: tuple[str, ...] = ()) -> None:
    """CSV dump ``object_id,r_k,dr`` in true-rank order."""
    for line in extra_header:
        f.write(f"# {line}\n")
    f.write("object_id,r_k,dr\n")
    for s in shifts:
        f.write(f"{s.obj},{s.degree_rank},{s.shift}\n")
