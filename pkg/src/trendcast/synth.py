"""Synthetic temporal bipartite networks plus brute-force reference oracles.

The growth model attaches links preferentially: at each day, a target
object is drawn with probability proportional to
(degree + 1) * fitness * exp(-theta * age), where age counts days since
the object's birth. theta > 0 makes old objects lose attractiveness, the
regime where aging-aware predictors should beat pure degree; theta = 0 is
plain preferential attachment with fitness.

The brute-force functions re-derive scores and AUC from first principles
(per-edge loops, pairwise comparisons) without any of the indexed fast
paths, and exist solely as test oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from trendcast.ingest import EdgeList
from trendcast.metrics import TrueFutureRanking
from trendcast.predictors import PredictorSpec, ScoreTable


@dataclass(frozen=True)
class GrowthModel:
    """Parameters of the preferential-attachment-with-aging generator."""

    num_users: int
    num_objects: int
    links_per_day: int
    total_days: int
    theta: float = 0.0
    fitness: tuple[float, ...] | None = None  # None: all ones
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("num_users", "num_objects", "links_per_day", "total_days"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.theta < 0.0:
            raise ValueError("theta must be >= 0")
        if self.fitness is not None:
            if len(self.fitness) != self.num_objects:
                raise ValueError("fitness must have one entry per object")
            if min(self.fitness) <= 0.0:
                raise ValueError("fitness values must be positive")


def generate(model: GrowthModel) -> EdgeList:
    """Grow a network day by day; deterministic for a fixed seed.

    Object birth days are spread evenly over the period so new objects keep
    appearing; only born objects can receive links. Users are drawn
    uniformly. Edges come out in non-decreasing day order.
    """
    rng = np.random.default_rng(model.rng_seed)
    birth = (np.arange(model.num_objects, dtype=np.int64) * model.total_days) // model.num_objects
    fitness = (
        np.ones(model.num_objects)
        if model.fitness is None
        else np.asarray(model.fitness, dtype=np.float64)
    )
    degree = np.zeros(model.num_objects, dtype=np.int64)

    users = np.empty(model.links_per_day * model.total_days, dtype=np.int32)
    objs = np.empty_like(users)
    days = np.empty_like(users)

    at = 0
    for day in range(model.total_days):
        alive = np.flatnonzero(birth <= day)
        weights = (degree[alive] + 1.0) * fitness[alive] * np.exp(-model.theta * (day - birth[alive]))
        p = weights / weights.sum()
        chosen = rng.choice(alive, size=model.links_per_day, replace=True, p=p)
        np.add.at(degree, chosen, 1)
        stop = at + model.links_per_day
        users[at:stop] = rng.integers(0, model.num_users, size=model.links_per_day)
        objs[at:stop] = chosen
        days[at:stop] = day
        at = stop
    return EdgeList(users=users, objs=objs, days=days)


def brute_force_scores(edges: EdgeList, t: int, spec: PredictorSpec) -> ScoreTable:
    """Naive per-edge scoring with no indexing; oracle for the predictors.

    Candidates are the objects with at least one edge on or before t; edges
    are visited in input order.
    """
    if len(edges) > 100_000:
        raise ValueError("brute-force scorer is for test-sized edge lists")
    k_t: dict[int, int] = {}
    k_p: dict[int, int] = {}
    decay: dict[int, float] = {}
    t_past = t - spec.t_p if spec.t_p is not None else None
    for user, obj, day in edges:
        if day > t:
            continue
        k_t[obj] = k_t.get(obj, 0) + 1
        if t_past is not None and day <= t_past:
            k_p[obj] = k_p.get(obj, 0) + 1
        if spec.kind == "tbp":
            decay[obj] = decay.get(obj, 0.0) + math.exp(spec.gamma * (day - t))
    cand = sorted(k_t)
    if spec.kind == "cumulative":
        scores = [float(k_t[o]) for o in cand]
    elif spec.kind == "recent":
        scores = [float(k_t[o] - k_p.get(o, 0)) for o in cand]
    elif spec.kind == "pbp":
        scores = [float(k_t[o]) - spec.lam * float(k_p.get(o, 0)) for o in cand]
    else:
        scores = [decay[o] for o in cand]
    return ScoreTable(
        np.asarray(cand, dtype=np.int64), np.asarray(scores, dtype=np.float64), t, spec
    )


def brute_force_auc(scores: ScoreTable, truth: TrueFutureRanking, n: int) -> float:
    """Literal pairwise AUC over (benchmark, complement) pairs; oracle for
    the rank-sum implementation."""
    if len(scores) > 5000:
        raise ValueError("brute-force AUC is for test-sized candidate sets")
    if not 1 <= n < len(scores):
        raise ValueError(f"benchmark size n must be in [1, {len(scores) - 1}], got {n}")
    bench = {int(o) for o in truth.ranking.top(n)}
    lookup = scores.as_dict()
    bench_scores = [lookup[o] for o in sorted(bench)]
    other_scores = [lookup[o] for o in sorted(set(lookup) - bench)]
    total = 0.0
    for sa in bench_scores:
        for sb in other_scores:
            if sa > sb:
                total += 1.0
            elif sa == sb:
                total += 0.5
    return total / (len(bench_scores) * len(other_scores))
