from __future__ import annotations

import pytest
from support import (
    PRUNING_VERTICES,
    RUNNING_VERTICES,
    RUNNING_WINDOW,
    pruning_query,
    pruning_stream,
    running_query,
    running_stream,
)

from tcmatch.engine import StreamEngine
from tcmatch.graph import TemporalGraph


@pytest.fixture
def running_q():
    return running_query()


@pytest.fixture
def running_engine(running_q):
    """Engine for the running example, fed up to and including time 13."""
    eng = StreamEngine(running_q, RUNNING_WINDOW, RUNNING_VERTICES)
    for src, dst, label, ts in running_stream(13):
        eng.push(src, dst, ts, label)
    return eng


@pytest.fixture
def pruning_graph():
    """Pruning example graph with all fifteen edges active; returns ``(graph, edges)``."""
    g = TemporalGraph()
    for v, lab in PRUNING_VERTICES.items():
        g.add_vertex(v, lab)
    edges = [g.insert_edge(a, b, t, lab) for a, b, lab, t in pruning_stream()]
    return g, edges


@pytest.fixture
def pruning_q():
    return pruning_query()
