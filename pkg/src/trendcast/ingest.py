"""Parse raw interaction datasets into a canonical timestamped edge list.

Supported input formats:

* ``movielens``     -- ``UserID::MovieID::Rating::Timestamp`` (epoch seconds)
* ``netflix``       -- per-movie blocks: ``MovieID:`` header line, then
                       ``UserID,Rating,YYYY-MM-DD`` rows
* ``facebook-wall`` -- whitespace-separated ``poster owner [weight] timestamp``
                       (epoch seconds), ``%``-prefixed comment lines ignored;
                       each post becomes (user=poster, object=owner's wall)
* ``generic-tsv``   -- ``user<TAB>object<TAB>day[<TAB>rating]``, UTF-8,
                       ``#``-prefixed comment lines ignored

Preprocessing rules applied here: ratings must exceed the configured
threshold to count as a link, wall self-posts are dropped, repeated
user-object interactions collapse to the earliest day (configurable), and
time is reduced to integer day indices counted from the dataset's first
record.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple

import numpy as np

from trendcast.kernels import MAX_DAY

FORMATS = ("movielens", "netflix", "facebook-wall", "generic-tsv")
DEDUP_POLICIES = ("earliest", "keep-all")
SECONDS_PER_DAY = 86400


class IngestError(Exception):
    """Base error for dataset parsing and preprocessing."""


class MalformedRowError(IngestError):
    """A row that does not match the declared format. Carries the 1-based
    line number of the offending row."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class EmptyDatasetError(IngestError):
    """No edges survived parsing and filtering."""


class TemporalEdge(NamedTuple):
    """One user->object interaction at day granularity."""

    user: int
    obj: int
    day: int


@dataclass(frozen=True, eq=False)
class EdgeList:
    """Columnar list of temporal edges (dense integer ids, day indices)."""

    users: np.ndarray
    objs: np.ndarray
    days: np.ndarray

    def __post_init__(self):
        if not (len(self.users) == len(self.objs) == len(self.days)):
            raise ValueError("users/objs/days arrays must have equal length")
        for arr in (self.users, self.objs, self.days):
            if len(arr) and arr.min() < 0:
                raise ValueError("edge fields must be non-negative")

    @classmethod
    def from_tuples(cls, edges: Iterable[tuple]) -> "EdgeList":
        rows = [TemporalEdge(*e) for e in edges]
        return cls(
            users=np.array([e.user for e in rows], dtype=np.int32),
            objs=np.array([e.obj for e in rows], dtype=np.int32),
            days=np.array([e.day for e in rows], dtype=np.int32),
        )

    def __len__(self) -> int:
        return len(self.days)

    def __getitem__(self, i: int) -> TemporalEdge:
        return TemporalEdge(int(self.users[i]), int(self.objs[i]), int(self.days[i]))

    def __iter__(self) -> Iterator[TemporalEdge]:
        for u, o, d in zip(self.users, self.objs, self.days):
            yield TemporalEdge(int(u), int(o), int(d))


@dataclass
class IdMaps:
    """Dense-id <-> raw-label maps for users and objects.

    User and object id spaces are separate; for wall-post data the same raw
    label can appear in both (a person and their wall) with unrelated ids.
    """

    user_labels: list[str]
    object_labels: list[str]

    def user_id(self, label: str) -> int:
        return self._user_index()[label]

    def object_id(self, label: str) -> int:
        return self._object_index()[label]

    def _user_index(self) -> dict:
        if not hasattr(self, "_u_idx"):
            self._u_idx = {lab: i for i, lab in enumerate(self.user_labels)}
        return self._u_idx

    def _object_index(self) -> dict:
        if not hasattr(self, "_o_idx"):
            self._o_idx = {lab: i for i, lab in enumerate(self.object_labels)}
        return self._o_idx


@dataclass(frozen=True)
class IngestConfig:
    """Parsing options. rating_threshold keeps ratings strictly above it."""

    format: str
    rating_threshold: int = 2
    dedup_policy: str = "earliest"
    remove_self_loops: bool | None = None  # None: true for facebook-wall

    def __post_init__(self):
        if self.format not in FORMATS:
            raise ValueError(f"unknown format {self.format!r}; expected one of {FORMATS}")
        if not 0 <= self.rating_threshold <= 5:
            raise ValueError("rating_threshold must be in [0, 5]")
        if self.dedup_policy not in DEDUP_POLICIES:
            raise ValueError(f"dedup_policy must be one of {DEDUP_POLICIES}")

    @property
    def drop_self_loops(self) -> bool:
        if self.remove_self_loops is None:
            return self.format == "facebook-wall"
        return self.remove_self_loops


@dataclass(frozen=True)
class StatsSummary:
    """Distinct user/object counts, link count and covered day range."""

    num_users: int
    num_objects: int
    num_links: int
    first_day: int
    last_day: int


def _open_text(source) -> io.TextIOBase:
    if isinstance(source, (str, Path)):
        return open(source, "r", encoding="utf-8", newline="")
    if isinstance(source, bytes):
        return io.TextIOWrapper(io.BytesIO(source), encoding="utf-8", newline="")
    if hasattr(source, "read"):
        data = source.read()
        if isinstance(data, bytes):
            return io.TextIOWrapper(io.BytesIO(data), encoding="utf-8", newline="")
        return io.StringIO(data)
    raise TypeError(f"cannot read edge source of type {type(source).__name__}")


def _parse_rating(tok: str, line_no: int) -> float:
    try:
        r = float(tok)
    except ValueError:
        raise MalformedRowError(line_no, f"bad rating {tok!r}") from None
    if not 1.0 <= r <= 5.0:
        raise MalformedRowError(line_no, f"rating {r} outside [1, 5]")
    return r


def _parse_int(tok: str, line_no: int, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise MalformedRowError(line_no, f"bad {what} {tok!r}") from None


# Each row iterator yields (line_no, user_label, object_label, time_value, rating);
# time_value semantics depend on the format's time mode below.


def _iter_movielens(text):
    for line_no, line in enumerate(text, start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split("::")
        if len(parts) != 4:
            raise MalformedRowError(line_no, "expected UserID::MovieID::Rating::Timestamp")
        user, movie, rating_tok, ts_tok = parts
        yield line_no, user, movie, _parse_int(ts_tok, line_no, "timestamp"), _parse_rating(
            rating_tok, line_no
        )


def _iter_netflix(text):
    movie = None
    for line_no, line in enumerate(text, start=1):
        line = line.strip()
        if not line:
            continue
        if line.endswith(":"):
            movie = line[:-1]
            if not movie:
                raise MalformedRowError(line_no, "empty movie id header")
            continue
        if movie is None:
            raise MalformedRowError(line_no, "rating row before any 'MovieID:' header")
        parts = line.split(",")
        if len(parts) != 3:
            raise MalformedRowError(line_no, "expected UserID,Rating,YYYY-MM-DD")
        user, rating_tok, date_tok = parts
        try:
            ordinal = date.fromisoformat(date_tok.strip()).toordinal()
        except ValueError:
            raise MalformedRowError(line_no, f"bad date {date_tok!r}") from None
        yield line_no, user, movie, ordinal, _parse_rating(rating_tok, line_no)


def _iter_facebook_wall(text):
    for line_no, line in enumerate(text, start=1):
        line = line.strip()
        if not line or line.startswith("%"):
            continue
        parts = line.split()
        if len(parts) == 3:
            poster, owner, ts_tok = parts
        elif len(parts) == 4:
            poster, owner, _weight, ts_tok = parts
        else:
            raise MalformedRowError(line_no, "expected 'poster owner [weight] timestamp'")
        yield line_no, poster, owner, _parse_int(ts_tok, line_no, "timestamp"), None


def _iter_generic_tsv(text):
    for line_no, line in enumerate(text, start=1):
        line = line.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) not in (3, 4):
            raise MalformedRowError(line_no, "expected user<TAB>object<TAB>day[<TAB>rating]")
        user, obj, day_tok = parts[0], parts[1], parts[2]
        day = _parse_int(day_tok, line_no, "day")
        if day < 0:
            raise MalformedRowError(line_no, f"negative day {day}")
        rating = _parse_rating(parts[3], line_no) if len(parts) == 4 else None
        yield line_no, user, obj, day, rating


# time mode: how the yielded time_value becomes a day index
_ROW_ITERS = {
    "movielens": (_iter_movielens, "epoch"),
    "netflix": (_iter_netflix, "ordinal"),
    "facebook-wall": (_iter_facebook_wall, "epoch"),
    "generic-tsv": (_iter_generic_tsv, "day"),
}


def parse(source, config: IngestConfig) -> tuple[EdgeList, IdMaps]:
    """Parse a raw dataset into a canonical edge list plus id maps.

    Rules: ratings must be strictly greater than config.rating_threshold;
    self-posts are dropped when configured; time collapses to day indices
    counted from the dataset's first well-formed record; duplicate
    (user, object) pairs keep their earliest day under the default policy.
    The returned edges are sorted by day (stable by input order within a
    day) and ids are dense, assigned in order of first appearance.
    """
    row_iter, time_mode = _ROW_ITERS[config.format]

    users: dict[str, int] = {}
    objects: dict[str, int] = {}
    u_col: list[int] = []
    o_col: list[int] = []
    t_col: list[int] = []
    min_time = None

    with _open_text(source) as text:
        for line_no, u_lab, o_lab, tval, rating in row_iter(text):
            # the dataset epoch anchors at the first record, filtered or not
            if min_time is None or tval < min_time:
                min_time = tval
            if rating is not None and rating <= config.rating_threshold:
                continue
            if config.drop_self_loops and u_lab == o_lab:
                continue
            uid = users.setdefault(u_lab, len(users))
            oid = objects.setdefault(o_lab, len(objects))
            u_col.append(uid)
            o_col.append(oid)
            t_col.append(tval)

    if not u_col:
        raise EmptyDatasetError("no edges left after parsing and filtering")

    tvals = np.asarray(t_col, dtype=np.int64)
    if time_mode == "epoch":
        days = (tvals - min_time) // SECONDS_PER_DAY
    elif time_mode == "ordinal":
        days = tvals - min_time
    else:
        days = tvals
    if days.max() > MAX_DAY:
        raise IngestError(
            f"dataset spans {int(days.max())} days, above the supported maximum {MAX_DAY}"
        )

    u_arr = np.asarray(u_col, dtype=np.int32)
    o_arr = np.asarray(o_col, dtype=np.int32)
    d_arr = days.astype(np.int32)

    if config.dedup_policy == "earliest":
        # keep, per (user, object) pair, the record with the minimum day
        # (first such record if several share it)
        pair = u_arr.astype(np.int64) * (o_arr.max() + 1) + o_arr
        order = np.lexsort((np.arange(len(pair)), d_arr, pair))
        sorted_pair = pair[order]
        first = np.ones(len(pair), dtype=bool)
        first[1:] = sorted_pair[1:] != sorted_pair[:-1]
        keep = np.sort(order[first])
        u_arr, o_arr, d_arr = u_arr[keep], o_arr[keep], d_arr[keep]

    final = np.lexsort((np.arange(len(d_arr)), d_arr))
    edges = EdgeList(users=u_arr[final], objs=o_arr[final], days=d_arr[final])
    maps = IdMaps(user_labels=list(users), object_labels=list(objects))
    return edges, maps


def dataset_stats(edges: EdgeList) -> StatsSummary:
    """Distinct user/object counts, link count and day range of an edge list."""
    if len(edges) == 0:
        raise EmptyDatasetError("cannot summarize an empty edge list")
    return StatsSummary(
        num_users=int(np.unique(edges.users).size),
        num_objects=int(np.unique(edges.objs).size),
        num_links=len(edges),
        first_day=int(edges.days.min()),
        last_day=int(edges.days.max()),
    )


def subsample_users(
    edges: EdgeList,
    maps: IdMaps | None = None,
    *,
    min_links: int = 20,
    target_users: int,
    rng_seed: int,
) -> tuple[EdgeList, IdMaps | None]:
    """Seeded random subsample of users with at least min_links links,
    keeping all their edges. Ids are re-densified (ascending old-id order);
    maps, when given, are re-cut to match.
    """
    counts = np.bincount(edges.users)
    eligible = np.flatnonzero(counts >= min_links)
    if eligible.size < target_users:
        raise ValueError(
            f"only {eligible.size} users have >= {min_links} links; "
            f"cannot sample {target_users}"
        )
    rng = np.random.default_rng(rng_seed)
    chosen = np.sort(rng.choice(eligible, size=target_users, replace=False))

    keep = np.isin(edges.users, chosen)
    users_old = edges.users[keep]
    objs_old = edges.objs[keep]
    days = edges.days[keep]

    new_user = np.full(int(edges.users.max()) + 1, -1, dtype=np.int64)
    new_user[chosen] = np.arange(chosen.size)
    kept_objs = np.unique(objs_old)
    new_obj = np.full(int(edges.objs.max()) + 1, -1, dtype=np.int64)
    new_obj[kept_objs] = np.arange(kept_objs.size)

    out = EdgeList(
        users=new_user[users_old].astype(np.int32),
        objs=new_obj[objs_old].astype(np.int32),
        days=days.copy(),
    )
    if maps is None:
        return out, None
    new_maps = IdMaps(
        user_labels=[maps.user_labels[i] for i in chosen],
        object_labels=[maps.object_labels[i] for i in kept_objs],
    )
    return out, new_maps


def write_edges_tsv(edges: EdgeList, path, header_lines: Iterable[str] = ()) -> None:
    """Write the canonical edge TSV: ``user_id<TAB>object_id<TAB>day``."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for line in header_lines:
            f.write(f"# {line}\n")
        for u, o, d in zip(edges.users, edges.objs, edges.days):
            f.write(f"{u}\t{o}\t{d}\n")


def read_edges_tsv(path) -> EdgeList:
    """Read a canonical edge TSV (dense integer ids). Raw datasets with
    string labels must go through parse() first."""
    u_col: list[int] = []
    o_col: list[int] = []
    d_col: list[int] = []
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise MalformedRowError(line_no, "expected user_id<TAB>object_id<TAB>day")
            u = _parse_int(parts[0], line_no, "user id")
            o = _parse_int(parts[1], line_no, "object id")
            d = _parse_int(parts[2], line_no, "day")
            if min(u, o, d) < 0:
                raise MalformedRowError(line_no, "ids and days must be non-negative")
            u_col.append(u)
            o_col.append(o)
            d_col.append(d)
    if not u_col:
        raise EmptyDatasetError(f"no edges in {path}")
    return EdgeList(
        users=np.asarray(u_col, dtype=np.int32),
        objs=np.asarray(o_col, dtype=np.int32),
        days=np.asarray(d_col, dtype=np.int32),
    )


def write_idmaps(maps: IdMaps, prefix) -> tuple[Path, Path]:
    """Write sidecar id maps as ``<prefix>.users.tsv`` / ``<prefix>.objects.tsv``
    with rows ``dense_id<TAB>raw_label``."""
    prefix = Path(prefix)
    paths = (
        prefix.with_name(prefix.name + ".users.tsv"),
        prefix.with_name(prefix.name + ".objects.tsv"),
    )
    for path, labels in zip(paths, (maps.user_labels, maps.object_labels)):
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for i, lab in enumerate(labels):
                f.write(f"{i}\t{lab}\n")
    return paths


def read_idmaps(prefix) -> IdMaps:
    prefix = Path(prefix)
    out = []
    for suffix in (".users.tsv", ".objects.tsv"):
        labels = []
        with open(prefix.with_name(prefix.name + suffix), "r", encoding="utf-8") as f:
            for line_no, line in enumerate(f, start=1):
                line = line.rstrip("\r\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 2 or int(parts[0]) != len(labels):
                    raise MalformedRowError(line_no, "id map rows must be 'dense_id<TAB>label'")
                labels.append(parts[1])
        out.append(labels)
    return IdMaps(user_labels=out[0], object_labels=out[1])
