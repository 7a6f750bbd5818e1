import numpy as np
import pytest

from trendcast.ingest import EdgeList
from trendcast.synth import GrowthModel, generate
from trendcast.tempgraph import TemporalBipartiteGraph


def edge_list(*triples) -> EdgeList:
    """Build an EdgeList from (user, obj, day) tuples."""
    return EdgeList.from_tuples(triples)


@pytest.fixture
def toy_graph() -> TemporalBipartiteGraph:
    """Four objects over days 3..25.

    object 0: link days {3, 7, 20}   object 1: {5}
    object 2: {7, 7}                 object 3: {25}
    """
    return TemporalBipartiteGraph(
        edge_list(
            (0, 0, 3),
            (1, 0, 7),
            (2, 0, 20),
            (0, 1, 5),
            (1, 2, 7),
            (2, 2, 7),
            (3, 3, 25),
        )
    )


@pytest.fixture
def cell_graph() -> TemporalBipartiteGraph:
    """Seven objects built for full hand evaluation at t=10, T_F=5.

    link days:   0: [1,2,3,4]      1: [6,8,9,10, 11,12,13]
                 2: [1,9, 14]      3: [10, 11,15]
                 4: [2,4,6,8,10, 12]   5: [5]   6: [12,13]  (future-only)
    """
    days_by_obj = {
        0: [1, 2, 3, 4],
        1: [6, 8, 9, 10, 11, 12, 13],
        2: [1, 9, 14],
        3: [10, 11, 15],
        4: [2, 4, 6, 8, 10, 12],
        5: [5],
        6: [12, 13],
    }
    triples = []
    user = 0
    for obj, days in days_by_obj.items():
        for day in days:
            triples.append((user % 10, obj, day))
            user += 1
    return TemporalBipartiteGraph(edge_list(*triples), n_users=10)


@pytest.fixture(scope="session")
def synth_graph() -> TemporalBipartiteGraph:
    """Medium seeded aging network shared by randomized equivalence tests."""
    edges = generate(
        GrowthModel(
            num_users=60,
            num_objects=90,
            links_per_day=25,
            total_days=120,
            theta=0.03,
            rng_seed=42,
        )
    )
    return TemporalBipartiteGraph(edges, n_users=60, n_objects=90)
