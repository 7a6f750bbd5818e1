"""Evaluation protocol: seeded test dates, predictor grids, averaged reports.

A run samples test dates uniformly from the eligible range (enough history
behind, a full future window ahead), evaluates every (predictor, parameter,
date, n) cell, and averages metrics per grid point across dates. The best
parameter of a family is the grid value with the highest mean precision
(ties toward the smaller value). Novelty averages skip dates where it is
undefined; the number of contributing dates is reported alongside.

Dates are sampled once per (dataset, T_F) and shared by every grid point,
so parameter comparisons are paired. All evaluation is deterministic given
the seed; parallel execution never changes output bytes.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from trendcast import metrics as _metrics
from trendcast.metrics import MetricReport, TrueFutureRanking, true_future_ranking
from trendcast.predictors import PredictorSpec, RankedList, ScoreTable, rank, score, score_cumulative
from trendcast.tempgraph import Snapshot, TemporalBipartiteGraph

DEFAULT_GAMMA_GRID = tuple(i / 100 for i in range(101))
DEFAULT_LAMBDA_GRID = tuple(i / 100 for i in range(101))
DEFAULT_N_VALUES = (50, 100, 200)


@dataclass(frozen=True)
class ExperimentConfig:
    """Protocol parameters; defaults follow the standard evaluation setup."""

    rng_seed: int
    n_values: tuple[int, ...] = DEFAULT_N_VALUES
    t_f: int = 30
    t_p: int | None = None  # None: same length as t_f
    num_test_dates: int = 10
    min_history: int = 365
    gamma_grid: tuple[float, ...] = DEFAULT_GAMMA_GRID
    lambda_grid: tuple[float, ...] = DEFAULT_LAMBDA_GRID

    def __post_init__(self):
        if not self.n_values or any(n < 1 for n in self.n_values):
            raise ValueError("n_values must be a nonempty tuple of positive ints")
        if self.t_f < 1:
            raise ValueError("t_f must be >= 1")
        if self.t_p is not None and self.t_p < 1:
            raise ValueError("t_p must be >= 1")
        if self.num_test_dates < 1:
            raise ValueError("num_test_dates must be >= 1")
        if self.min_history < 1:
            raise ValueError("min_history must be >= 1")
        if not self.gamma_grid or not self.lambda_grid:
            raise ValueError("parameter grids must be nonempty")

    @property
    def effective_t_p(self) -> int:
        return self.t_f if self.t_p is None else self.t_p


def resolve_threads(threads: int | None = None) -> int:
    """Worker count: explicit argument, else TRENDCAST_THREADS (0 = one per
    CPU), else 1."""
    if threads is None:
        env = os.environ.get("TRENDCAST_THREADS")
        if env is None:
            return 1
        threads = int(env)
    if threads == 0:
        return os.cpu_count() or 1
    if threads < 0:
        raise ValueError("thread count must be >= 0")
    return threads


def eligible_date_range(
    graph: TemporalBipartiteGraph, min_history: int, t_f: int
) -> tuple[int, int]:
    """Inclusive day range where a test date has min_history days behind it
    and a full future window ahead."""
    return graph.day_min + min_history, graph.day_max - t_f


def sample_test_dates(
    graph: TemporalBipartiteGraph, config: ExperimentConfig, t_f: int | None = None
) -> np.ndarray:
    """Draw num_test_dates days uniformly without replacement from the
    eligible range, deterministically from the seed. Returned sorted."""
    lo, hi = eligible_date_range(graph, config.min_history, config.t_f if t_f is None else t_f)
    width = hi - lo + 1
    if width < config.num_test_dates:
        raise ValueError(
            f"eligible date range [{lo}, {hi}] holds {max(width, 0)} days; "
            f"cannot sample {config.num_test_dates}"
        )
    rng = np.random.default_rng(config.rng_seed)
    days = rng.choice(np.arange(lo, hi + 1, dtype=np.int64), size=config.num_test_dates, replace=False)
    return np.sort(days)


class EvalContext:
    """Shared per-test-date state: snapshot, true future ranking, past
    (degree) ranking. Building it once lets a whole parameter grid reuse
    the expensive parts."""

    def __init__(self, graph: TemporalBipartiteGraph, t: int, t_f: int):
        self.graph = graph
        self.t = int(t)
        self.t_f = int(t_f)
        self.snap: Snapshot = graph.snapshot(t)
        self.truth: TrueFutureRanking = true_future_ranking(graph, t, t_f)
        self.past: RankedList = rank(score_cumulative(self.snap))

    def warm(self, t_p: int | None) -> None:
        """Precompute the trailing-window degree vector so parallel scoring
        never recomputes it."""
        if t_p is not None:
            self.snap.past_degree_vector(t_p)


def _report_for_table(
    ctx: EvalContext, table: ScoreTable, predicted: RankedList, n: int
) -> MetricReport:
    auc_val = _metrics.auc(table, ctx.truth, n)
    pred_top = predicted.top(n)
    true_top = ctx.truth.ranking.top(n)
    d_n = int(np.intersect1d(pred_top, true_top).size)
    fresh = np.setdiff1d(true_top, ctx.past.top(n))
    e_n = int(fresh.size)
    c_n = int(np.intersect1d(pred_top, fresh).size)
    return MetricReport(
        predictor=table.spec.kind,
        params=table.spec.params_str(),
        t=ctx.t,
        t_f=ctx.t_f,
        n=n,
        auc=auc_val,
        precision=d_n / n,
        novelty=None if e_n == 0 else c_n / e_n,
        d_n=d_n,
        e_n=e_n,
        c_n=c_n,
    )


def evaluate_cell(
    graph: TemporalBipartiteGraph, spec: PredictorSpec, t: int, t_f: int, n: int
) -> MetricReport:
    """Evaluate one predictor at one test date: candidate set and scores are
    built from the snapshot at t only, the truth from the window (t, t+t_f]."""
    ctx = EvalContext(graph, t, t_f)
    table = score(ctx.snap, spec)
    return _report_for_table(ctx, table, rank(table), n)


@dataclass(frozen=True)
class SweepRow:
    """Averages across test dates for one grid point and one n."""

    param: float | None
    n: int
    mean_auc: float
    mean_precision: float
    mean_novelty: float | None  # None when undefined at every date
    novelty_dates: int  # number of dates where novelty was defined

    def csv_row(self) -> str:
        param = "" if self.param is None else f"{self.param:.12g}"
        qn = "" if self.mean_novelty is None else f"{self.mean_novelty:.12g}"
        return (
            f"{param},{self.n},{self.mean_auc:.12g},{self.mean_precision:.12g},"
            f"{qn},{self.novelty_dates}"
        )


@dataclass(frozen=True)
class SweepResult:
    """Per-grid-point averaged metrics for one predictor family."""

    kind: str
    t_f: int
    t_p: int | None
    dates: tuple[int, ...]
    grid: tuple[float | None, ...]
    n_values: tuple[int, ...]
    rows: tuple[SweepRow, ...]

    def row(self, param: float | None, n: int) -> SweepRow:
        for r in self.rows:
            if r.param == param and r.n == n:
                return r
        raise KeyError(f"no sweep row for param={param}, n={n}")

    def rows_for_n(self, n: int) -> list[SweepRow]:
        return [r for r in self.rows if r.n == n]

    def best_param(self, n: int) -> float | None:
        """Grid value with the highest mean precision at this n; ties go to
        the smaller value (ascending scan, strict improvement)."""
        best = None
        best_p = -1.0
        for r in self.rows_for_n(n):
            if r.mean_precision > best_p:
                best_p = r.mean_precision
                best = r.param
        return best

    def best_row(self, n: int) -> SweepRow:
        return self.row(self.best_param(n), n)


def _grid_specs(
    kind: str, grid: Sequence[float] | None, t_p: int | None
) -> tuple[list[float | None], list[PredictorSpec]]:
    if kind == "cumulative":
        return [None], [PredictorSpec.cumulative()]
    if kind == "recent":
        if t_p is None:
            raise ValueError("recent predictor needs t_p")
        return [None], [PredictorSpec.recent(t_p)]
    if grid is None or len(grid) == 0:
        raise ValueError(f"predictor {kind!r} needs a nonempty parameter grid")
    # ascending grid order makes "ties go to the smaller parameter" the
    # natural first-strict-improvement scan
    params = sorted(float(g) for g in grid)
    if kind == "tbp":
        return params, [PredictorSpec.tbp(g) for g in params]
    if kind == "pbp":
        if t_p is None:
            raise ValueError("pbp predictor needs t_p")
        return params, [PredictorSpec.pbp(g, t_p) for g in params]
    raise ValueError(f"unknown predictor kind {kind!r}")


def sweep(
    graph: TemporalBipartiteGraph,
    kind: str,
    grid: Sequence[float] | None,
    dates: Sequence[int],
    t_f: int,
    n_values: Sequence[int] = DEFAULT_N_VALUES,
    t_p: int | None = None,
    threads: int | None = None,
) -> SweepResult:
    """Evaluate a predictor family over a parameter grid, averaging each
    grid point's metrics over the given test dates.

    All dates share one set of per-date contexts, and every grid point sees
    the same dates, so grid points are directly comparable.
    """
    if len(dates) == 0:
        raise ValueError("need at least one test date")
    params, specs = _grid_specs(kind, grid, t_p)
    n_values = tuple(int(n) for n in n_values)

    contexts = [EvalContext(graph, int(t), t_f) for t in dates]
    for ctx in contexts:
        ctx.warm(t_p if kind in ("recent", "pbp") else None)

    # reports[gi][di] -> tuple of MetricReport per n
    reports = [[None] * len(contexts) for _ in specs]

    def run_cell(gi: int, di: int) -> None:
        ctx = contexts[di]
        table = score(ctx.snap, specs[gi])
        predicted = rank(table)
        reports[gi][di] = tuple(_report_for_table(ctx, table, predicted, n) for n in n_values)

    workers = resolve_threads(threads)
    tasks = [(gi, di) for gi in range(len(specs)) for di in range(len(contexts))]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda gd: run_cell(*gd), tasks))
    else:
        for gi, di in tasks:
            run_cell(gi, di)

    rows = []
    for gi, param in enumerate(params):
        for ni, n in enumerate(n_values):
            cells = [reports[gi][di][ni] for di in range(len(contexts))]
            q_vals = [c.novelty for c in cells if c.novelty is not None]
            rows.append(
                SweepRow(
                    param=param,
                    n=n,
                    mean_auc=float(np.mean([c.auc for c in cells])),
                    mean_precision=float(np.mean([c.precision for c in cells])),
                    mean_novelty=float(np.mean(q_vals)) if q_vals else None,
                    novelty_dates=len(q_vals),
                )
            )
    return SweepResult(
        kind=kind,
        t_f=int(t_f),
        t_p=t_p,
        dates=tuple(int(t) for t in dates),
        grid=tuple(params),
        n_values=n_values,
        rows=tuple(rows),
    )


@dataclass(frozen=True)
class TfSweepRow:
    """Best-parameter metrics of one family at one future-window length."""

    t_f: int
    kind: str
    best_param: float | None
    mean_auc: float
    mean_precision: float
    mean_novelty: float | None
    novelty_dates: int


@dataclass(frozen=True)
class TfSweepResult:
    rows: tuple[TfSweepRow, ...]
    n: int

    def best_param_series(self, kind: str) -> list[tuple[int, float | None]]:
        """The (T_F, best parameter) series of one family, in T_F order."""
        return [(r.t_f, r.best_param) for r in self.rows if r.kind == kind]


def sweep_tf(
    graph: TemporalBipartiteGraph,
    kinds: Sequence[str],
    t_f_list: Sequence[int],
    dates_by_tf: dict[int, Sequence[int]],
    n: int,
    gamma_grid: Sequence[float] = DEFAULT_GAMMA_GRID,
    lambda_grid: Sequence[float] = DEFAULT_LAMBDA_GRID,
    threads: int | None = None,
) -> TfSweepResult:
    """Sweep each family's grid at every future-window length, keeping the
    best-precision parameter per (T_F, family). The trailing window T_P is
    set equal to T_F."""
    rows = []
    for t_f in t_f_list:
        dates = dates_by_tf[int(t_f)]
        for kind in kinds:
            grid = {"tbp": gamma_grid, "pbp": lambda_grid}.get(kind)
            res = sweep(graph, kind, grid, dates, int(t_f), (n,), t_p=int(t_f), threads=threads)
            best = res.best_param(n)
            row = res.row(best, n)
            rows.append(
                TfSweepRow(
                    t_f=int(t_f),
                    kind=kind,
                    best_param=best,
                    mean_auc=row.mean_auc,
                    mean_precision=row.mean_precision,
                    mean_novelty=row.mean_novelty,
                    novelty_dates=row.novelty_dates,
                )
            )
    return TfSweepResult(rows=tuple(rows), n=int(n))


SWEEP_CSV_HEADER = "param,n,mean_AUC,mean_Pn,mean_Qn,Qn_dates"
TF_CSV_HEADER = "T_F,predictor,best_param,mean_AUC,mean_Pn,mean_Qn,Qn_dates"


def write_sweep_csv(result: SweepResult, f, extra_header: tuple[str, ...] = ()) -> None:
    """One row per grid point per n; mean_Qn empty when undefined at every
    date, Qn_dates counting the dates that contributed."""
    t_p = "-" if result.t_p is None else result.t_p
    f.write(
        f"# predictor={result.kind} T_F={result.t_f} T_P={t_p} "
        f"dates={','.join(str(t) for t in result.dates)}\n"
    )
    for line in extra_header:
        f.write(f"# {line}\n")
    f.write(SWEEP_CSV_HEADER + "\n")
    for row in result.rows:
        f.write(row.csv_row() + "\n")


def write_tf_csv(result: TfSweepResult, f, extra_header: tuple[str, ...] = ()) -> None:
    for line in extra_header:
        f.write(f"# {line}\n")
    f.write(TF_CSV_HEADER + "\n")
    for r in result.rows:
        param = "" if r.best_param is None else f"{r.best_param:.12g}"
        qn = "" if r.mean_novelty is None else f"{r.mean_novelty:.12g}"
        f.write(
            f"{r.t_f},{r.kind},{param},{r.mean_auc:.12g},{r.mean_precision:.12g},"
            f"{qn},{r.novelty_dates}\n"
        )


def summary_table(results: Sequence[SweepResult], n: int) -> str:
    """Plain-text summary of each family at its best parameter: one line per
    predictor with parameter, AUC, Pn and Qn columns."""
    lines = [f"{'Predictor':<12}{'Parameter':<12}{'AUC':<10}{'Pn':<10}{'Qn':<10}"]
    for res in results:
        row = res.best_row(n)
        param = "-" if row.param is None else f"{row.param:g}"
        qn = "-" if row.mean_novelty is None else f"{row.mean_novelty:.3f}"
        lines.append(
            f"{res.kind:<12}{param:<12}{row.mean_auc:<10.3f}{row.mean_precision:<10.3f}{qn:<10}"
        )
    return "\n".join(lines)
