"""End-to-end CLI behavior: pipelines, determinism, exit codes, headers."""

import numpy as np
import pytest

from trendcast import cli, ingest, metrics
from trendcast.experiment import evaluate_cell
from trendcast.predictors import PredictorSpec
from trendcast.tempgraph import TemporalBipartiteGraph


def run(argv, capsys=None):
    code = cli.main(argv)
    return code


@pytest.fixture
def data_dir(tmp_path):
    """Synthetic edges written once per test via the CLI itself."""
    edges = tmp_path / "edges.tsv"
    code = cli.main(
        [
            "synth",
            "--users", "40", "--objects", "60", "--links-per-day", "15",
            "--days", "80", "--theta", "0.05", "--seed", "3",
            "--output", str(edges),
        ]
    )
    assert code == 0
    return tmp_path


class TestExitCodes:
    def test_missing_file_is_2(self, tmp_path, capsys):
        code = cli.main(["stats", "--data", str(tmp_path / "nope.tsv")])
        assert code == 2
        err = capsys.readouterr().err
        assert err.startswith("error: missing-file:")
        assert err.count("\n") == 1

    def test_invalid_parameter_is_3(self, data_dir, capsys):
        code = cli.main(
            ["score", "--data", str(data_dir / "edges.tsv"), "--t", "50",
             "--predictor", "tbp", "--gamma", "-1"]
        )
        assert code == 3
        assert capsys.readouterr().err.startswith("error: invalid-parameters:")

    def test_unknown_flag_is_3(self, data_dir, capsys):
        code = cli.main(["stats", "--data", str(data_dir / "edges.tsv"), "--bogus"])
        assert code == 3

    def test_unknown_subcommand_is_3(self, capsys):
        assert cli.main(["frobnicate"]) == 3

    def test_window_overflow_is_3(self, data_dir, capsys):
        code = cli.main(
            ["evaluate", "--data", str(data_dir / "edges.tsv"), "--t", "79", "--tf", "30",
             "--predictor", "cumulative", "--n", "5"]
        )
        assert code == 3


class TestStats:
    def test_stats_output(self, data_dir, capsys):
        assert cli.main(["stats", "--data", str(data_dir / "edges.tsv")]) == 0
        out = capsys.readouterr().out.splitlines()
        assert out[0] == "users\tobjects\tlinks\tfirst_day\tlast_day"
        users, objects, links, first, last = map(int, out[1].split("\t"))
        assert links == 15 * 80
        assert (first, last) == (0, 79)


class TestIngestCommand:
    def test_generic_tsv_with_dedup_and_maps(self, tmp_path, capsys):
        raw = tmp_path / "raw.tsv"
        raw.write_text("alice\tx\t3\nbob\ty\t1\nalice\tx\t2\n")
        out = tmp_path / "canon.tsv"
        code = cli.main(
            ["ingest", "--input", str(raw), "--format", "generic-tsv", "--output", str(out)]
        )
        assert code == 0
        edges = ingest.read_edges_tsv(out)
        assert len(edges) == 2  # alice/x deduped to day 2
        maps = ingest.read_idmaps(out)
        assert maps.user_labels == ["alice", "bob"]
        graph_out = capsys.readouterr().out
        assert "2 edges" in graph_out

    def test_binary_output_round_trips(self, tmp_path):
        raw = tmp_path / "raw.tsv"
        raw.write_text("a\tx\t1\nb\ty\t5\n")
        out = tmp_path / "canon.tsv"
        binary = tmp_path / "graph.tbg"
        code = cli.main(
            ["ingest", "--input", str(raw), "--format", "generic-tsv",
             "--output", str(out), "--binary-output", str(binary)]
        )
        assert code == 0
        graph = TemporalBipartiteGraph.load(binary)
        assert graph.n_links == 2
        # analysis commands accept the binary file directly
        assert cli.main(["stats", "--data", str(binary)]) == 0

    def test_subsample_requires_seed(self, tmp_path, capsys):
        raw = tmp_path / "raw.tsv"
        raw.write_text("a\tx\t1\na\ty\t2\nb\tz\t3\n")
        code = cli.main(
            ["ingest", "--input", str(raw), "--format", "generic-tsv",
             "--output", str(tmp_path / "o.tsv"), "--subsample-users", "1",
             "--subsample-floor", "2"]
        )
        assert code == 3


class TestEvaluateCommand:
    def test_single_row_matches_library(self, data_dir, tmp_path):
        out = tmp_path / "report.csv"
        code = cli.main(
            ["evaluate", "--data", str(data_dir / "edges.tsv"), "--t", "40", "--tf", "20",
             "--predictor", "tbp", "--gamma", "0.06", "--n", "10", "--seed", "7",
             "--output", str(out)]
        )
        assert code == 0
        lines = out.read_text().splitlines()
        data_rows = [l for l in lines if not l.startswith("#")]
        assert data_rows[0] == metrics.CSV_HEADER
        graph = TemporalBipartiteGraph(ingest.read_edges_tsv(data_dir / "edges.tsv"))
        want = evaluate_cell(graph, PredictorSpec.tbp(0.06), 40, 20, 10)
        assert data_rows[1] == want.csv_row()
        assert any(line.startswith("# trendcast ") for line in lines)
        assert any("seed=7" in line for line in lines)

    def test_multiple_n_values(self, data_dir, capsys):
        code = cli.main(
            ["evaluate", "--data", str(data_dir / "edges.tsv"), "--t", "40", "--tf", "20",
             "--predictor", "cumulative", "--n", "5,10"]
        )
        assert code == 0
        rows = [l for l in capsys.readouterr().out.splitlines() if not l.startswith("#")]
        assert len(rows) == 3  # header + two n values


class TestSweepCommands:
    def test_rerun_is_byte_identical(self, data_dir, tmp_path):
        args = [
            "sweep-gamma", "--data", str(data_dir / "edges.tsv"), "--tf", "15",
            "--n", "5,10", "--num-dates", "4", "--min-history", "30",
            "--seed", "11", "--grid", "0:0.2:0.05",
        ]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert cli.main(args + ["--output", str(a)]) == 0
        assert cli.main(args + ["--output", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_gamma_zero_equals_cumulative_evaluate(self, data_dir, tmp_path):
        out = tmp_path / "sweep.csv"
        code = cli.main(
            ["sweep-gamma", "--data", str(data_dir / "edges.tsv"), "--tf", "15",
             "--n", "10", "--num-dates", "3", "--min-history", "30",
             "--seed", "5", "--grid", "0", "--output", str(out)]
        )
        assert code == 0
        rows = [l for l in out.read_text().splitlines() if not l.startswith(("#", "param"))]
        assert len(rows) == 1
        param, n, mean_auc, mean_pn, mean_qn, q_dates = rows[0].split(",")
        graph = TemporalBipartiteGraph(ingest.read_edges_tsv(data_dir / "edges.tsv"))
        from trendcast.experiment import ExperimentConfig, sample_test_dates

        config = ExperimentConfig(rng_seed=5, num_test_dates=3, min_history=30, t_f=15)
        dates = sample_test_dates(graph, config)
        cells = [
            evaluate_cell(graph, PredictorSpec.cumulative(), int(t), 15, 10) for t in dates
        ]
        assert float(mean_auc) == pytest.approx(float(np.mean([c.auc for c in cells])), abs=1e-12)
        assert float(mean_pn) == pytest.approx(
            float(np.mean([c.precision for c in cells])), abs=1e-12
        )

    def test_summary_report(self, data_dir, tmp_path):
        out = tmp_path / "sweep.csv"
        summary = tmp_path / "summary.txt"
        code = cli.main(
            ["sweep-gamma", "--data", str(data_dir / "edges.tsv"), "--tf", "15",
             "--n", "10", "--num-dates", "3", "--min-history", "30",
             "--seed", "5", "--grid", "0,0.1", "--output", str(out),
             "--summary", str(summary)]
        )
        assert code == 0
        text = summary.read_text()
        assert "n=10" in text
        assert "Predictor" in text and "tbp" in text

    def test_sweep_tf_runs(self, data_dir, tmp_path):
        out = tmp_path / "tf.csv"
        code = cli.main(
            ["sweep-tf", "--data", str(data_dir / "edges.tsv"), "--tf-list", "10,20",
             "--predictors", "tbp,pbp", "--n", "10", "--num-dates", "3",
             "--min-history", "30", "--seed", "2", "--gamma-grid", "0,0.1",
             "--lambda-grid", "0,1", "--output", str(out)]
        )
        assert code == 0
        rows = [l for l in out.read_text().splitlines() if not l.startswith("#")]
        assert rows[0].startswith("T_F,predictor")
        assert len(rows) == 5  # header + 2 T_F x 2 predictors


class TestRankshiftCommand:
    def test_matches_library(self, data_dir, tmp_path):
        out = tmp_path / "shift.csv"
        code = cli.main(
            ["rankshift", "--data", str(data_dir / "edges.tsv"), "--t", "40", "--tf", "20",
             "--predictor", "tbp", "--gamma", "0.1", "--top", "5", "--output", str(out)]
        )
        assert code == 0
        rows = [l for l in out.read_text().splitlines() if not l.startswith("#")]
        assert rows[0] == "object_id,r_k,dr"
        assert len(rows) == 6
        shifts = [tuple(map(int, r.split(","))) for r in rows[1:]]
        from trendcast.experiment import EvalContext
        from trendcast.predictors import rank, score

        graph = TemporalBipartiteGraph(ingest.read_edges_tsv(data_dir / "edges.tsv"))
        ctx = EvalContext(graph, 40, 20)
        predicted = rank(score(ctx.snap, PredictorSpec.tbp(0.1)))
        want = metrics.rank_shift(predicted, ctx.truth, ctx.past, 5)
        assert shifts == [(s.obj, s.degree_rank, s.shift) for s in want]


class TestConfigFile:
    def test_flags_override_file(self, data_dir, tmp_path, capsys):
        cfg = tmp_path / "run.conf"
        cfg.write_text("# defaults\ndata=%s\nt=40\ntf=20\npredictor=tbp\ngamma=0.5\nn=10\n"
                       % (data_dir / "edges.tsv"))
        code = cli.main(["evaluate", "--config", str(cfg), "--gamma", "0.06"])
        assert code == 0
        out = capsys.readouterr().out
        assert "gamma=0.06" in out  # flag wins
        assert "tf=20" in out

    def test_unknown_key_rejected(self, data_dir, tmp_path, capsys):
        cfg = tmp_path / "run.conf"
        cfg.write_text("bogus=1\n")
        code = cli.main(["stats", "--config", str(cfg), "--data", str(data_dir / "edges.tsv")])
        assert code == 3
        assert "bogus" in capsys.readouterr().err

    def test_missing_config_file_is_2(self, data_dir):
        code = cli.main(
            ["stats", "--config", str(data_dir / "none.conf"), "--data",
             str(data_dir / "edges.tsv")]
        )
        assert code == 2


class TestScoreCommand:
    def test_header_and_rank_order(self, data_dir, capsys):
        code = cli.main(
            ["score", "--data", str(data_dir / "edges.tsv"), "--t", "40",
             "--predictor", "pbp", "--lambda", "0.5", "--tp", "10"]
        )
        assert code == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0].startswith("# predictor=pbp lambda=0.5 T_P=10 t=40")
        body = [l for l in lines if not l.startswith("#")]
        assert body[0] == "object_id,score"
        scores = [float(r.split(",")[1]) for r in body[1:]]
        assert scores == sorted(scores, reverse=True)
