"""Parsing, preprocessing and round-trip checks for the ingest module."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trendcast import ingest
from trendcast.ingest import (
    EdgeList,
    EmptyDatasetError,
    IngestConfig,
    MalformedRowError,
    TemporalEdge,
    dataset_stats,
    parse,
    subsample_users,
)

DAY = 86400


def movielens_bytes(rows):
    return "".join(f"{u}::{m}::{r}::{ts}\n" for u, m, r, ts in rows).encode()


def generic_bytes(rows):
    return "".join("\t".join(str(x) for x in row) + "\n" for row in rows).encode()


class TestMovielens:
    def test_rating_at_threshold_dropped(self):
        # rating 2 is not higher than the default threshold 2
        raw = movielens_bytes([("u1", "m9", 2, 40 * DAY), ("u2", "m9", 5, 41 * DAY)])
        edges, maps = parse(raw, IngestConfig(format="movielens"))
        assert len(edges) == 1
        assert maps.user_labels == ["u2"]
        # epoch anchors at the dataset's first record even though it was filtered
        assert edges[0].day == 1

    def test_day_index_floors_epoch_seconds(self):
        raw = movielens_bytes(
            [("a", "x", 5, 1000), ("b", "x", 5, 1000 + DAY - 1), ("c", "x", 5, 1000 + DAY)]
        )
        edges, _ = parse(raw, IngestConfig(format="movielens"))
        assert [e.day for e in edges] == [0, 0, 1]

    def test_malformed_row_carries_line_number(self):
        raw = b"u1::m1::5::100\nu2::m2::5\n"
        with pytest.raises(MalformedRowError) as err:
            parse(raw, IngestConfig(format="movielens"))
        assert err.value.line_no == 2

    def test_rating_out_of_scale_rejected(self):
        raw = movielens_bytes([("u1", "m1", 6, 100)])
        with pytest.raises(MalformedRowError):
            parse(raw, IngestConfig(format="movielens"))

    def test_empty_after_filtering(self):
        raw = movielens_bytes([("u1", "m1", 1, 100), ("u2", "m2", 2, 200)])
        with pytest.raises(EmptyDatasetError):
            parse(raw, IngestConfig(format="movielens"))


class TestNetflix:
    def test_blocks_and_dates(self):
        raw = b"7:\nu1,4,2004-01-01\nu2,3,2004-01-03\n9:\nu1,5,2004-01-02\n"
        edges, maps = parse(raw, IngestConfig(format="netflix"))
        assert len(edges) == 3
        by_pair = {(maps.user_labels[e.user], maps.object_labels[e.obj]): e.day for e in edges}
        assert by_pair == {("u1", "7"): 0, ("u2", "7"): 2, ("u1", "9"): 1}

    def test_row_before_header_is_malformed(self):
        with pytest.raises(MalformedRowError) as err:
            parse(b"u1,4,2004-01-01\n", IngestConfig(format="netflix"))
        assert err.value.line_no == 1

    def test_bad_date(self):
        with pytest.raises(MalformedRowError):
            parse(b"7:\nu1,4,2004-13-01\n", IngestConfig(format="netflix"))


class TestFacebookWall:
    def test_self_post_dropped(self):
        raw = b"% comment\nu7 u7 1 1036800\nu1 u2 1 1036800\n"
        edges, maps = parse(raw, IngestConfig(format="facebook-wall"))
        assert len(edges) == 1
        assert maps.user_labels == ["u1"]
        assert maps.object_labels == ["u2"]

    def test_self_posts_kept_when_disabled(self):
        raw = b"u7 u7 1 100\nu1 u2 1 200\n"
        config = IngestConfig(format="facebook-wall", remove_self_loops=False)
        edges, maps = parse(raw, config)
        assert len(edges) == 2
        # one raw label in both id spaces: bipartite by construction
        assert maps.user_id("u7") == 0 and maps.object_id("u7") == 0
        assert maps.user_id("u1") == 1 and maps.object_id("u2") == 1

    def test_three_or_four_columns(self):
        raw = b"u1 u2 100\nu2 u3 1 100\n"
        edges, _ = parse(raw, IngestConfig(format="facebook-wall"))
        assert len(edges) == 2

    def test_wrong_arity_is_malformed(self):
        with pytest.raises(MalformedRowError) as err:
            parse(b"u1 u2\n", IngestConfig(format="facebook-wall"))
        assert err.value.line_no == 1


class TestGenericTsv:
    def test_dedup_earliest_keeps_min_day(self):
        raw = generic_bytes([("a", "x", 3), ("a", "x", 1)])
        edges, maps = parse(raw, IngestConfig(format="generic-tsv"))
        assert len(edges) == 1
        assert edges[0] == TemporalEdge(user=0, obj=0, day=1)

    def test_keep_all_preserves_duplicates(self):
        raw = generic_bytes([("a", "x", 3), ("a", "x", 1)])
        config = IngestConfig(format="generic-tsv", dedup_policy="keep-all")
        edges, _ = parse(raw, config)
        assert [e.day for e in edges] == [1, 3]

    def test_comments_and_blank_lines_ignored(self):
        raw = b"# header\n\na\tx\t5\n"
        edges, _ = parse(raw, IngestConfig(format="generic-tsv"))
        assert len(edges) == 1

    def test_output_sorted_by_day_stable(self):
        raw = generic_bytes([("a", "x", 9), ("b", "y", 1), ("c", "z", 9), ("d", "w", 0)])
        edges, maps = parse(raw, IngestConfig(format="generic-tsv"))
        assert [e.day for e in edges] == [0, 1, 9, 9]
        # day-9 rows keep input order: a before c
        assert maps.user_labels[edges[2].user] == "a"
        assert maps.user_labels[edges[3].user] == "c"

    def test_optional_rating_column_filtered(self):
        raw = generic_bytes([("a", "x", 1, 2), ("b", "x", 2, 3)])
        edges, maps = parse(raw, IngestConfig(format="generic-tsv"))
        assert len(edges) == 1 and maps.user_labels == ["b"]

    def test_negative_day_is_malformed(self):
        with pytest.raises(MalformedRowError):
            parse(b"a\tx\t-1\n", IngestConfig(format="generic-tsv"))


def test_parse_is_deterministic():
    raw = generic_bytes([("a", "x", 3), ("b", "y", 1), ("a", "y", 3), ("c", "x", 2)])
    config = IngestConfig(format="generic-tsv")
    edges1, maps1 = parse(raw, config)
    edges2, maps2 = parse(raw, config)
    assert np.array_equal(edges1.users, edges2.users)
    assert np.array_equal(edges1.objs, edges2.objs)
    assert np.array_equal(edges1.days, edges2.days)
    assert maps1.user_labels == maps2.user_labels
    assert maps1.object_labels == maps2.object_labels


@settings(max_examples=50, deadline=None)
@given(
    rows=st.lists(
        st.tuples(
            st.integers(0, 5),  # user label index
            st.integers(0, 5),  # object label index
            st.integers(0, 30),  # day
        ),
        min_size=1,
        max_size=40,
    )
)
def test_dedup_property(rows):
    raw = generic_bytes([(f"u{u}", f"o{o}", d) for u, o, d in rows])
    edges, maps = parse(raw, IngestConfig(format="generic-tsv"))
    seen = {}
    for u, o, d in rows:
        key = (f"u{u}", f"o{o}")
        seen[key] = min(seen.get(key, d), d)
    got = {
        (maps.user_labels[e.user], maps.object_labels[e.obj]): e.day for e in edges
    }
    assert got == seen
    assert len(edges) == len(seen)


@settings(max_examples=40, deadline=None)
@given(
    rows=st.lists(
        st.tuples(st.integers(0, 9), st.integers(1, 5)),  # (record idx, rating)
        min_size=1,
        max_size=25,
    ),
    threshold=st.integers(0, 5),
)
def test_rating_threshold_property(rows, threshold):
    raw = generic_bytes([(f"u{i}", f"o{k}", k, r) for k, (i, r) in enumerate(rows)])
    config = IngestConfig(format="generic-tsv", rating_threshold=threshold)
    expected = {k for k, (_, r) in enumerate(rows) if r > threshold}
    if not expected:
        with pytest.raises(EmptyDatasetError):
            parse(raw, config)
        return
    edges, maps = parse(raw, config)
    survived = {int(maps.object_labels[e.obj][1:]) for e in edges}
    assert survived == expected


def test_unknown_format_rejected():
    with pytest.raises(ValueError):
        IngestConfig(format="edgelist")
    with pytest.raises(ValueError):
        IngestConfig(format="generic-tsv", rating_threshold=6)
    with pytest.raises(ValueError):
        IngestConfig(format="generic-tsv", dedup_policy="latest")


class TestStats:
    def test_hand_counted_fixture(self):
        # 3 edges over 2 users and 2 objects, days 0..5
        edges = EdgeList.from_tuples([(0, 0, 0), (0, 1, 2), (1, 1, 5)])
        stats = dataset_stats(edges)
        assert stats.num_users == 2
        assert stats.num_objects == 2
        assert stats.num_links == 3
        assert (stats.first_day, stats.last_day) == (0, 5)

    def test_single_edge(self):
        stats = dataset_stats(EdgeList.from_tuples([(0, 0, 0)]))
        assert stats == ingest.StatsSummary(1, 1, 1, 0, 0)

    def test_empty_rejected(self):
        with pytest.raises(EmptyDatasetError):
            dataset_stats(EdgeList.from_tuples([]))


class TestSubsample:
    def make_edges(self):
        triples = []
        for u in range(6):
            for j in range(u + 1):  # user u has u+1 links
                triples.append((u, j, j))
        return EdgeList.from_tuples(triples)

    def test_floor_and_target(self):
        edges = self.make_edges()
        out, _ = subsample_users(edges, min_links=3, target_users=2, rng_seed=0)
        assert np.unique(out.users).size == 2
        # ids re-densified
        assert out.users.max() == 1

    def test_deterministic(self):
        edges = self.make_edges()
        a, _ = subsample_users(edges, min_links=2, target_users=3, rng_seed=9)
        b, _ = subsample_users(edges, min_links=2, target_users=3, rng_seed=9)
        assert np.array_equal(a.users, b.users)
        assert np.array_equal(a.objs, b.objs)

    def test_too_few_eligible(self):
        edges = self.make_edges()
        with pytest.raises(ValueError):
            subsample_users(edges, min_links=6, target_users=2, rng_seed=0)

    def test_maps_recut(self):
        raw = generic_bytes([("alice", "x", 1), ("alice", "y", 2), ("bob", "x", 3)])
        edges, maps = parse(raw, IngestConfig(format="generic-tsv"))
        out, out_maps = subsample_users(edges, maps, min_links=2, target_users=1, rng_seed=0)
        assert out_maps.user_labels == ["alice"]
        assert sorted(out_maps.object_labels) == ["x", "y"]


def test_edges_tsv_round_trip(tmp_path):
    edges = EdgeList.from_tuples([(0, 0, 1), (1, 2, 3), (0, 1, 3)])
    path = tmp_path / "edges.tsv"
    ingest.write_edges_tsv(edges, path, header_lines=("demo",))
    back = ingest.read_edges_tsv(path)
    assert np.array_equal(back.users, edges.users)
    assert np.array_equal(back.objs, edges.objs)
    assert np.array_equal(back.days, edges.days)


def test_idmaps_round_trip(tmp_path):
    maps = ingest.IdMaps(user_labels=["a", "b"], object_labels=["x"])
    ingest.write_idmaps(maps, tmp_path / "edges.tsv")
    back = ingest.read_idmaps(tmp_path / "edges.tsv")
    assert back.user_labels == maps.user_labels
    assert back.object_labels == maps.object_labels


def test_read_edges_tsv_rejects_labels(tmp_path):
    path = tmp_path / "raw.tsv"
    path.write_text("alice\tx\t3\n")
    with pytest.raises(MalformedRowError):
        ingest.read_edges_tsv(path)
