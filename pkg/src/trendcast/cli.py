"""Command-line surface for batch experimentation and report emission.

Subcommands: ingest, stats, score, evaluate, sweep-gamma, sweep-lambda,
sweep-tf, rankshift, synth. Every output CSV starts with comment lines
recording the tool version, the subcommand and the resolved configuration,
so identical invocations produce byte-identical files.

Exit codes: 0 success, 2 missing input file, 3 invalid parameters or
malformed input data, 4 internal invariant violation. Failures print one
machine-parsable line to stderr: ``error: <kind>: <message>`` with kind in
{missing-file, invalid-parameters, internal}.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import trendcast
from trendcast import experiment, ingest, metrics, predictors, synth
from trendcast.experiment import ExperimentConfig, resolve_threads
from trendcast.predictors import PredictorSpec
from trendcast.tempgraph import TemporalBipartiteGraph


class CliError(Exception):
    def __init__(self, kind: str, message: str, code: int):
        super().__init__(message)
        self.kind = kind
        self.code = code


class _Parser(argparse.ArgumentParser):
    """argparse that reports bad flags as exit-code-3 errors instead of
    exiting with argparse's own status."""

    def error(self, message):
        raise CliError("invalid-parameters", message, 3)


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.split(",") if tok != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _str_list(text: str) -> tuple[str, ...]:
    return tuple(tok for tok in text.split(",") if tok != "")


def _grid(text: str) -> tuple[float, ...]:
    """Parameter grid: either 'start:stop:step' (inclusive) or a comma list."""
    try:
        if ":" in text:
            start_s, stop_s, step_s = text.split(":")
            start, stop, step = float(start_s), float(stop_s), float(step_s)
            if step <= 0 or stop < start:
                raise ValueError
            count = int(round((stop - start) / step)) + 1
            return tuple(round(start + i * step, 10) for i in range(count))
        values = tuple(float(tok) for tok in text.split(",") if tok != "")
        if not values:
            raise ValueError
        return values
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected 'start:stop:step' or comma-separated floats, got {text!r}"
        ) from None


def build_parser() -> _Parser:
    parser = _Parser(prog="trendcast", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"trendcast {trendcast.__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="flat key=value config file; flags override it")
        p.add_argument("--threads", type=int, help="worker threads (0 = one per CPU)")
        p.add_argument("--output", "-o", help="output file (default: stdout)")

    p = sub.add_parser("ingest", help="parse a raw dataset into canonical edges + id maps")
    common(p)
    p.add_argument("--input", required=True, help="raw dataset file")
    p.add_argument("--format", required=True, choices=ingest.FORMATS)
    p.add_argument("--rating-threshold", type=int, default=2)
    p.add_argument("--dedup", choices=ingest.DEDUP_POLICIES, default="earliest")
    p.add_argument(
        "--self-loops",
        choices=("remove", "keep"),
        help="drop rows whose user and object labels match (default: remove for facebook-wall)",
    )
    p.add_argument("--subsample-users", type=int, help="seeded user subsample size")
    p.add_argument("--subsample-floor", type=int, default=20, help="minimum links per sampled user")
    p.add_argument("--seed", type=int, help="RNG seed (required when subsampling)")
    p.add_argument("--map-prefix", help="sidecar id-map prefix (default: the output path)")
    p.add_argument("--binary-output", help="also save the built graph in binary form")

    p = sub.add_parser("stats", help="summarize a canonical edge file")
    common(p)
    p.add_argument("--data", required=True)

    p = sub.add_parser("score", help="dump one predictor's score table at a test day")
    common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--t", type=int, required=True)
    _predictor_flags(p)

    p = sub.add_parser("evaluate", help="evaluate one predictor at one test day")
    common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--tf", type=int, required=True, help="future window length (days)")
    p.add_argument("--n", type=_int_list, default=(100,), help="benchmark sizes, comma-separated")
    p.add_argument("--seed", type=int, help="recorded in the report header")
    _predictor_flags(p)

    for name, param_flag in (("sweep-gamma", "tbp"), ("sweep-lambda", "pbp")):
        p = sub.add_parser(name, help=f"grid sweep of the {param_flag} predictor")
        common(p)
        p.add_argument("--data", required=True)
        p.add_argument("--tf", type=int, default=30)
        p.add_argument("--tp", type=int, help="trailing window (default: same as --tf)")
        p.add_argument("--n", type=_int_list, default=experiment.DEFAULT_N_VALUES)
        p.add_argument("--num-dates", type=int, default=10)
        p.add_argument("--min-history", type=int, default=365)
        p.add_argument("--seed", type=int, required=True)
        p.add_argument("--grid", type=_grid, default="0:1:0.01")
        p.add_argument("--summary", help="also write a plain-text best-parameter summary")

    p = sub.add_parser("sweep-tf", help="best-parameter metrics across future-window lengths")
    common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--tf-list", type=_int_list, required=True)
    p.add_argument("--predictors", type=_str_list, default=("tbp", "pbp"))
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--num-dates", type=int, default=10)
    p.add_argument("--min-history", type=int, default=365)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--gamma-grid", type=_grid, default="0:1:0.01")
    p.add_argument("--lambda-grid", type=_grid, default="0:1:0.01")

    p = sub.add_parser("rankshift", help="rank shifts of the true future top objects")
    common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--tf", type=int, required=True)
    p.add_argument("--top", type=int, default=100)
    _predictor_flags(p)

    p = sub.add_parser("synth", help="generate a synthetic aging network as canonical edges")
    common(p)
    p.add_argument("--users", type=int, required=True)
    p.add_argument("--objects", type=int, required=True)
    p.add_argument("--links-per-day", type=int, required=True)
    p.add_argument("--days", type=int, required=True)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--seed", type=int, required=True)

    return parser


def _predictor_flags(p) -> None:
    p.add_argument("--predictor", required=True, choices=predictors.KINDS)
    p.add_argument("--gamma", type=float, help="decay rate (tbp)")
    p.add_argument("--lambda", dest="lam", type=float, help="blend weight (pbp)")
    p.add_argument("--tp", type=int, help="trailing window length (recent, pbp)")


def _spec_from_args(args, default_tp: int | None = None) -> PredictorSpec:
    t_p = args.tp
    if t_p is None and args.predictor in ("recent", "pbp"):
        t_p = default_tp
    return PredictorSpec(kind=args.predictor, lam=args.lam, t_p=t_p, gamma=args.gamma)


def _load_config_file(path: str) -> dict[str, str]:
    values = {}
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise CliError(
                    "invalid-parameters", f"{path}:{line_no}: expected key=value", 3
                )
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    return values


def _apply_config_file(parser, sub_argv: list[str]) -> list[str]:
    """Merge a --config file into the subcommand parser as defaults; command
    line flags override. Unknown keys are rejected."""
    path = None
    for i, tok in enumerate(sub_argv):
        if tok == "--config" and i + 1 < len(sub_argv):
            path = sub_argv[i + 1]
        elif tok.startswith("--config="):
            path = tok.split("=", 1)[1]
    if path is None:
        return sub_argv
    if not Path(path).exists():
        raise CliError("missing-file", path, 2)
    values = _load_config_file(path)
    by_flag = {}
    for action in parser._actions:
        for opt in action.option_strings:
            if opt.startswith("--"):
                by_flag[opt[2:]] = action
    defaults = {}
    for key, raw in values.items():
        action = by_flag.get(key)
        if action is None or key in ("config", "help", "version"):
            raise CliError("invalid-parameters", f"unknown config key {key!r}", 3)
        defaults[action.dest] = action.type(raw) if action.type else raw
        action.required = False
    parser.set_defaults(**defaults)
    return sub_argv


def _require_file(path: str) -> Path:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(path)
    return p


def _load_graph(path: str) -> TemporalBipartiteGraph:
    p = _require_file(path)
    with open(p, "rb") as f:
        magic = f.read(4)
    if magic == b"TBG1":
        return TemporalBipartiteGraph.load(p)
    return TemporalBipartiteGraph(ingest.read_edges_tsv(p))


def _header_lines(args, command: str, skip=("output", "config")) -> tuple[str, ...]:
    pairs = []
    for key in sorted(vars(args)):
        if key in ("command", "func") or key in skip:
            continue
        value = getattr(args, key)
        if value is None:
            continue
        if isinstance(value, tuple):
            value = ",".join(f"{v:g}" if isinstance(v, float) else str(v) for v in value)
        pairs.append(f"{key.replace('_', '-')}={value}")
    return (f"trendcast {trendcast.__version__}", f"command: {command}", " ".join(pairs))


class _Out:
    """Write to --output, or stdout when no path was given."""

    def __init__(self, path: str | None):
        self.path = path

    def __enter__(self):
        self.f = open(self.path, "w", encoding="utf-8", newline="\n") if self.path else sys.stdout
        return self.f

    def __exit__(self, *exc):
        if self.path:
            self.f.close()
        return False


def _cmd_ingest(args) -> int:
    config = ingest.IngestConfig(
        format=args.format,
        rating_threshold=args.rating_threshold,
        dedup_policy=args.dedup,
        remove_self_loops=None if args.self_loops is None else args.self_loops == "remove",
    )
    edges, maps = ingest.parse(_require_file(args.input), config)
    if args.subsample_users is not None:
        if args.seed is None:
            raise CliError("invalid-parameters", "--subsample-users requires --seed", 3)
        edges, maps = ingest.subsample_users(
            edges,
            maps,
            min_links=args.subsample_floor,
            target_users=args.subsample_users,
            rng_seed=args.seed,
        )
    if not args.output:
        raise CliError("invalid-parameters", "ingest requires --output", 3)
    ingest.write_edges_tsv(edges, args.output, header_lines=_header_lines(args, "ingest"))
    map_prefix = args.map_prefix or args.output
    ingest.write_idmaps(maps, map_prefix)
    if args.binary_output:
        TemporalBipartiteGraph(edges).save(args.binary_output)
    stats = ingest.dataset_stats(edges)
    print(
        f"wrote {len(edges)} edges ({stats.num_users} users, {stats.num_objects} objects, "
        f"days {stats.first_day}..{stats.last_day}) to {args.output}"
    )
    return 0


def _cmd_stats(args) -> int:
    graph = _load_graph(args.data)
    stats = ingest.dataset_stats(graph.edges)
    with _Out(args.output) as f:
        f.write("users\tobjects\tlinks\tfirst_day\tlast_day\n")
        f.write(
            f"{stats.num_users}\t{stats.num_objects}\t{stats.num_links}\t"
            f"{stats.first_day}\t{stats.last_day}\n"
        )
    return 0


def _cmd_score(args) -> int:
    graph = _load_graph(args.data)
    spec = _spec_from_args(args)
    table = predictors.score(graph, spec, args.t)
    with _Out(args.output) as f:
        predictors.write_scores_csv(table, f, extra_header=_header_lines(args, "score"))
    return 0


def _cmd_evaluate(args) -> int:
    graph = _load_graph(args.data)
    spec = _spec_from_args(args, default_tp=args.tf)
    reports = [experiment.evaluate_cell(graph, spec, args.t, args.tf, n) for n in args.n]
    with _Out(args.output) as f:
        for line in _header_lines(args, "evaluate"):
            f.write(f"# {line}\n")
        f.write(metrics.CSV_HEADER + "\n")
        for report in reports:
            f.write(report.csv_row() + "\n")
    return 0


def _cmd_sweep(args, kind: str) -> int:
    graph = _load_graph(args.data)
    config = ExperimentConfig(
        rng_seed=args.seed,
        n_values=args.n,
        t_f=args.tf,
        t_p=args.tp,
        num_test_dates=args.num_dates,
        min_history=args.min_history,
        gamma_grid=args.grid if kind == "tbp" else experiment.DEFAULT_GAMMA_GRID,
        lambda_grid=args.grid if kind == "pbp" else experiment.DEFAULT_LAMBDA_GRID,
    )
    dates = experiment.sample_test_dates(graph, config)
    result = experiment.sweep(
        graph,
        kind,
        args.grid,
        dates,
        config.t_f,
        config.n_values,
        t_p=config.effective_t_p if kind == "pbp" else None,
        threads=resolve_threads(args.threads),
    )
    command = "sweep-gamma" if kind == "tbp" else "sweep-lambda"
    with _Out(args.output) as f:
        experiment.write_sweep_csv(result, f, extra_header=_header_lines(args, command))
    if args.summary:
        with open(args.summary, "w", encoding="utf-8", newline="\n") as f:
            for line in _header_lines(args, command):
                f.write(f"# {line}\n")
            for n in config.n_values:
                f.write(f"n={n}\n{experiment.summary_table([result], n)}\n")
    for n in config.n_values:
        row = result.best_row(n)
        qn = "-" if row.mean_novelty is None else f"{row.mean_novelty:.4f}"
        print(
            f"n={n}: best {'gamma' if kind == 'tbp' else 'lambda'}={row.param:g} "
            f"Pn={row.mean_precision:.4f} AUC={row.mean_auc:.4f} Qn={qn}"
        )
    return 0


def _cmd_sweep_tf(args) -> int:
    graph = _load_graph(args.data)
    for kind in args.predictors:
        if kind not in predictors.KINDS:
            raise CliError("invalid-parameters", f"unknown predictor {kind!r}", 3)
    dates_by_tf = {}
    for t_f in args.tf_list:
        config = ExperimentConfig(
            rng_seed=args.seed,
            n_values=(args.n,),
            t_f=t_f,
            num_test_dates=args.num_dates,
            min_history=args.min_history,
        )
        dates_by_tf[t_f] = experiment.sample_test_dates(graph, config)
    result = experiment.sweep_tf(
        graph,
        args.predictors,
        args.tf_list,
        dates_by_tf,
        args.n,
        gamma_grid=args.gamma_grid,
        lambda_grid=args.lambda_grid,
        threads=resolve_threads(args.threads),
    )
    with _Out(args.output) as f:
        experiment.write_tf_csv(result, f, extra_header=_header_lines(args, "sweep-tf"))
    return 0


def _cmd_rankshift(args) -> int:
    graph = _load_graph(args.data)
    spec = _spec_from_args(args, default_tp=args.tf)
    ctx = experiment.EvalContext(graph, args.t, args.tf)
    table = predictors.score(ctx.snap, spec)
    predicted = predictors.rank(table)
    shifts = metrics.rank_shift(predicted, ctx.truth, ctx.past, args.top)
    with _Out(args.output) as f:
        metrics.write_rank_shift_csv(shifts, f, extra_header=_header_lines(args, "rankshift"))
    return 0


def _cmd_synth(args) -> int:
    model = synth.GrowthModel(
        num_users=args.users,
        num_objects=args.objects,
        links_per_day=args.links_per_day,
        total_days=args.days,
        theta=args.theta,
        rng_seed=args.seed,
    )
    edges = synth.generate(model)
    if not args.output:
        raise CliError("invalid-parameters", "synth requires --output", 3)
    ingest.write_edges_tsv(edges, args.output, header_lines=_header_lines(args, "synth"))
    print(f"wrote {len(edges)} synthetic edges to {args.output}")
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "stats": _cmd_stats,
    "score": _cmd_score,
    "evaluate": _cmd_evaluate,
    "sweep-gamma": lambda args: _cmd_sweep(args, "tbp"),
    "sweep-lambda": lambda args: _cmd_sweep(args, "pbp"),
    "sweep-tf": _cmd_sweep_tf,
    "rankshift": _cmd_rankshift,
    "synth": _cmd_synth,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        if argv and not argv[0].startswith("-") and argv[0] in _COMMANDS:
            subparser = parser._subparsers._group_actions[0].choices[argv[0]]
            argv = [argv[0]] + _apply_config_file(subparser, argv[1:])
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except CliError as exc:
        print(f"error: {exc.kind}: {exc}", file=sys.stderr)
        return exc.code
    except FileNotFoundError as exc:
        print(f"error: missing-file: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, ingest.IngestError) as exc:
        print(f"error: invalid-parameters: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # noqa: BLE001 - the CLI boundary reports and exits
        print(f"error: internal: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
