from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tcmatch.graph import Snapshot
from tcmatch.io import parse_stream_text
from tcmatch.oracle import embedding_key, enumerate_all
from tcmatch.workload import (
    WalkError,
    eligible_pairs,
    generate_query,
    impose_order,
    parallel_multiplicity,
    random_walk_query,
    synth_edges,
    synth_stream,
)


def snapshot(seed=0, n_vertices=10, n_edges=40, labels=3, rate=1.0) -> Snapshot:
    vlabels, edges = synth_edges(n_vertices, n_edges, labels, rate, seed)
    return Snapshot(tuple(sorted(vlabels.items())),
                    tuple((a, b, None, t, i) for i, (a, b, t) in enumerate(edges)))


def witness_key(q, witness):
    vmap = {}
    for eid, rec in witness.items():
        qe = q.edges[eid]
        vmap[qe.src], vmap[qe.dst] = rec[0], rec[1]
    return embedding_key(vmap, {eid: rec[4] for eid, rec in witness.items()})


def test_single_edge_walk():
    snap = snapshot()
    q, witness = random_walk_query(snap, 1, rng_seed=4)
    assert q.num_edges == 1 and q.num_vertices == 2
    rec = witness[0]
    assert rec in snap.edges
    labels = dict(snap.labels)
    assert q.labels[q.edges[0].src] == labels[rec[0]]


def test_walk_is_deterministic():
    snap = snapshot()
    a = random_walk_query(snap, 5, rng_seed=11)
    b = random_walk_query(snap, 5, rng_seed=11)
    assert a[0].edges == b[0].edges and a[0].labels == b[0].labels and a[1] == b[1]


def test_walk_fails_when_too_long():
    snap = snapshot(n_edges=3)
    with pytest.raises(WalkError):
        random_walk_query(snap, 10, rng_seed=0, max_tries=5)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 6), st.sampled_from([0.0, 0.25, 0.5, 0.75, 1.0]))
def test_witness_survives_the_order(seed, size, density):
    snap = snapshot(seed % 50)
    q, witness = generate_query(snap, size, density, seed)
    assert q.is_connected()
    assert witness_key(q, witness) in enumerate_all(snap, q)


def test_density_zero_and_one():
    snap = snapshot(3)
    q, witness = random_walk_query(snap, 4, 2)
    ts = {e: r[3] for e, r in witness.items()}
    assert impose_order(q, ts, 0.0).pairs() == []
    ts = {0: 3, 1: 1, 2: 7, 3: 5}
    chain = impose_order(q, ts, 1.0)
    assert chain.related_count() == 6
    assert chain.precedes(1, 0) and chain.precedes(0, 3) and chain.precedes(3, 2)
    with pytest.raises(WalkError):
        impose_order(q, {0: 1, 1: 1, 2: 2, 3: 3}, 1.0)
    with pytest.raises(ValueError):
        impose_order(q, ts, 1.5)


def test_permutation_rule():
    assert eligible_pairs([1, 2], {1: 5, 2: 3}) == set()
    assert eligible_pairs([2, 1], {1: 5, 2: 3}) == {(2, 1)}


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(5, 8), st.sampled_from([0.25, 0.5, 0.75]))
def test_realized_density_near_target(seed, size, density):
    # distinct witness timestamps so every density is reachable
    snap = snapshot(seed % 20, n_vertices=12, n_edges=80, labels=2, rate=0.0)
    q, witness = random_walk_query(snap, size, seed)
    ts = {e: 10 * i for i, e in enumerate(sorted(witness, key=lambda e: (witness[e][3], e)))}
    order = impose_order(q, ts, density, seed)
    realized = order.related_count() / (size * (size - 1) / 2)
    assert abs(realized - density) <= 0.1


def test_stream_text():
    empty = synth_stream(4, 0, 2, 0.0, 1)
    assert empty.splitlines() == ["v 0 A", "v 1 B", "v 2 A", "v 3 A"] or all(
        line.startswith("v ") for line in empty.splitlines())
    assert len(empty.splitlines()) == 4
    assert synth_stream(20, 100, 3, 1.0, 7) == synth_stream(20, 100, 3, 1.0, 7)
    data = parse_stream_text(synth_stream(20, 100, 3, 1.0, 7))
    assert len(data.edges) == 100


def test_parallel_rate_raises_multiplicity():
    _, low = synth_edges(200, 2000, 3, 0.0, 1)
    _, high = synth_edges(200, 2000, 3, 3.0, 1)
    assert parallel_multiplicity(high) > 1.5
    assert parallel_multiplicity(high) > parallel_multiplicity(low)
