"""Immutable temporal bipartite graph with snapshot and window queries.

Links are stored twice, CSR-style: per object and per user, each segment
holding that node's link days in ascending order. Every query reduces to a
prefix count or a prefix sum over these segments, O(log links) per node via
the compiled kernels (or one vectorized pass in the numpy fallback).

Snapshot semantics: the graph at day t contains links with day <= t; a
future window of length T counts links with day in (t, t+T]. The two
conventions partition time with no gap or double count.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from trendcast import kernels
from trendcast.ingest import EdgeList

_MAGIC = b"TBG1"
_VERSION = 1


class TemporalBipartiteGraph:
    """Time-indexed edge store over dense user and object ids.

    Immutable after construction; all queries are pure and safe for
    concurrent readers.
    """

    def __init__(self, edges: EdgeList, n_users: int | None = None, n_objects: int | None = None):
        if len(edges) == 0:
            raise ValueError("graph needs at least one edge")
        users = np.ascontiguousarray(edges.users, dtype=np.int32)
        objs = np.ascontiguousarray(edges.objs, dtype=np.int32)
        days = np.ascontiguousarray(edges.days, dtype=np.int32)
        if days.max() > kernels.MAX_DAY:
            raise ValueError(f"day indices above supported maximum {kernels.MAX_DAY}")

        self.n_users = int(n_users) if n_users is not None else int(users.max()) + 1
        self.n_objects = int(n_objects) if n_objects is not None else int(objs.max()) + 1
        if users.max() >= self.n_users or objs.max() >= self.n_objects:
            raise ValueError("edge ids exceed declared node counts")
        self.n_links = len(days)
        self.day_min = int(days.min())
        self.day_max = int(days.max())

        # canonical edge order: by day, stable — used for serialization
        order = np.lexsort((np.arange(self.n_links), days))
        self._users = users[order]
        self._objs = objs[order]
        self._days = days[order]

        # per-object CSR (construction is edge-order invariant: sorted by (obj, day))
        o_order = np.lexsort((self._days, self._objs))
        self._obj_link = self._objs[o_order]
        self._obj_days = self._days[o_order]
        self._obj_indptr = np.zeros(self.n_objects + 1, dtype=np.int64)
        np.cumsum(np.bincount(self._obj_link, minlength=self.n_objects), out=self._obj_indptr[1:])

        # per-user CSR
        u_order = np.lexsort((self._days, self._users))
        self._user_link = self._users[u_order]
        self._user_days = self._days[u_order]
        self._user_indptr = np.zeros(self.n_users + 1, dtype=np.int64)
        np.cumsum(np.bincount(self._user_link, minlength=self.n_users), out=self._user_indptr[1:])

        # first link day per object (MAX_DAY+1 for objects with no links)
        self._first_day = np.full(self.n_objects, kernels.MAX_DAY + 1, dtype=np.int64)
        nonempty = self._obj_indptr[1:] > self._obj_indptr[:-1]
        starts = self._obj_indptr[:-1][nonempty]
        self._first_day[nonempty] = self._obj_days[starts]

    # -- scalar queries -------------------------------------------------

    def _check_object(self, obj: int) -> int:
        obj = int(obj)
        if not 0 <= obj < self.n_objects:
            raise KeyError(f"unknown object id {obj}")
        return obj

    def _check_user(self, user: int) -> int:
        user = int(user)
        if not 0 <= user < self.n_users:
            raise KeyError(f"unknown user id {user}")
        return user

    def degree_object(self, obj: int, t: int) -> int:
        """Number of link events of object obj with day <= t (binary
        adjacency when the edges were deduplicated at ingest)."""
        obj = self._check_object(obj)
        lo, hi = self._obj_indptr[obj], self._obj_indptr[obj + 1]
        return int(np.searchsorted(self._obj_days[lo:hi], t, side="right"))

    def degree_user(self, user: int, t: int) -> int:
        """Number of link events of user with day <= t."""
        user = self._check_user(user)
        lo, hi = self._user_indptr[user], self._user_indptr[user + 1]
        return int(np.searchsorted(self._user_days[lo:hi], t, side="right"))

    def popularity_increase(self, obj: int, t: int, t_f: int) -> int:
        """Links gained by obj in the future window (t, t+t_f]."""
        if t_f < 0:
            raise ValueError("window length must be non-negative")
        if t + t_f > self.day_max:
            raise ValueError(
                f"future window (t={t}, t+{t_f}] exceeds the data range (last day {self.day_max})"
            )
        return self.degree_object(obj, t + t_f) - self.degree_object(obj, t)

    def link_days(self, obj: int, t: int) -> np.ndarray:
        """All link days of obj with day <= t, ascending."""
        obj = self._check_object(obj)
        lo, hi = self._obj_indptr[obj], self._obj_indptr[obj + 1]
        seg = self._obj_days[lo:hi]
        return seg[: np.searchsorted(seg, t, side="right")].copy()

    def candidates(self, t: int) -> np.ndarray:
        """Ascending ids of objects with at least one link on or before day t."""
        self._check_day(t)
        return np.flatnonzero(self._first_day <= t)

    def _check_day(self, t: int) -> None:
        if not self.day_min <= t <= self.day_max:
            raise ValueError(f"day {t} outside data range [{self.day_min}, {self.day_max}]")

    # -- vector queries (kernel-backed) ----------------------------------

    def degree_vector(self, t: int) -> np.ndarray:
        """k(t) for every object id, as int64[n_objects]."""
        return kernels.prefix_counts(self._obj_indptr, self._obj_days, self._obj_link, t)

    def user_degree_vector(self, t: int) -> np.ndarray:
        return kernels.prefix_counts(self._user_indptr, self._user_days, self._user_link, t)

    def window_vector(self, t: int, t_f: int) -> np.ndarray:
        """Per-object link counts in the window (t, t+t_f]."""
        if t + t_f > self.day_max:
            raise ValueError(
                f"future window (t={t}, t+{t_f}] exceeds the data range (last day {self.day_max})"
            )
        return self.degree_vector(t + t_f) - self.degree_vector(t)

    def decay_vector(self, t: int, gamma: float, grouped: bool = False) -> np.ndarray:
        """Per-object sum of exp(gamma * (day - t)) over link days <= t."""
        fn = kernels.decay_scores_grouped if grouped else kernels.decay_scores
        return fn(self._obj_indptr, self._obj_days, self._obj_link, t, float(gamma))

    def snapshot(self, t: int) -> "Snapshot":
        return Snapshot(self, t)

    # -- serialization ----------------------------------------------------

    @property
    def edges(self) -> EdgeList:
        """The stored edges in canonical (day-sorted) order."""
        return EdgeList(users=self._users, objs=self._objs, days=self._days)

    def save(self, path) -> None:
        """Binary dump: magic 'TBG1', u32 version, five i64 fields (n_users,
        n_objects, n_links, day_min, day_max), then users/objs/days as
        little-endian i32 arrays of length n_links, in canonical order."""
        with open(path, "wb") as f:
            f.write(_MAGIC)
            f.write(struct.pack("<I", _VERSION))
            f.write(
                struct.pack(
                    "<5q", self.n_users, self.n_objects, self.n_links, self.day_min, self.day_max
                )
            )
            for arr in (self._users, self._objs, self._days):
                f.write(np.ascontiguousarray(arr, dtype="<i4").tobytes())

    @classmethod
    def load(cls, path) -> "TemporalBipartiteGraph":
        raw = Path(path).read_bytes()
        if raw[:4] != _MAGIC:
            raise ValueError(f"{path}: not a graph file (bad magic)")
        (version,) = struct.unpack_from("<I", raw, 4)
        if version != _VERSION:
            raise ValueError(f"{path}: unsupported graph format version {version}")
        n_users, n_objects, n_links, day_min, day_max = struct.unpack_from("<5q", raw, 8)
        offset = 8 + 40
        expected = offset + 3 * 4 * n_links
        if len(raw) != expected:
            raise ValueError(f"{path}: truncated graph file ({len(raw)} != {expected} bytes)")
        cols = []
        for i in range(3):
            start = offset + i * 4 * n_links
            cols.append(np.frombuffer(raw, dtype="<i4", count=n_links, offset=start).astype(np.int32))
        graph = cls(EdgeList(users=cols[0], objs=cols[1], days=cols[2]), n_users, n_objects)
        if (graph.day_min, graph.day_max) != (day_min, day_max):
            raise ValueError(f"{path}: header day range does not match edge data")
        return graph


class Snapshot:
    """Read-only view of the graph restricted to links with day <= t.

    Predictors work exclusively through a snapshot, so information past t
    cannot reach a score by construction. Caches the candidate set and
    degree vectors, which every predictor shares at a fixed t.
    """

    def __init__(self, graph: TemporalBipartiteGraph, t: int):
        graph._check_day(t)
        self.graph = graph
        self.t = int(t)
        self._cands: np.ndarray | None = None
        self._deg: np.ndarray | None = None
        self._past_deg: dict[int, np.ndarray] = {}

    def candidates(self) -> np.ndarray:
        if self._cands is None:
            self._cands = self.graph.candidates(self.t)
        return self._cands

    def degree(self, obj: int) -> int:
        return self.graph.degree_object(obj, self.t)

    def link_days(self, obj: int) -> np.ndarray:
        return self.graph.link_days(obj, self.t)

    def degree_vector(self) -> np.ndarray:
        if self._deg is None:
            self._deg = self.graph.degree_vector(self.t)
        return self._deg

    def past_degree_vector(self, t_p: int) -> np.ndarray:
        """k(t - t_p) per object. t_p >= 1; the trailing window (t-t_p, t]
        may reach back at most to the first day (t - t_p = day_min - 1
        covers all history), anything earlier is an underflow."""
        if t_p < 1:
            raise ValueError("history window length must be >= 1")
        if self.t - t_p < self.graph.day_min - 1:
            raise ValueError(
                f"history window (t-{t_p}, t] underflows the data range "
                f"(first day {self.graph.day_min})"
            )
        if t_p not in self._past_deg:
            self._past_deg[t_p] = self.graph.degree_vector(self.t - t_p)
        return self._past_deg[t_p]

    def decay_vector(self, gamma: float, grouped: bool = False) -> np.ndarray:
        return self.graph.decay_vector(self.t, gamma, grouped=grouped)
