import numpy as np
import pytest

from graphsynth.conversion import dress_graph_tableau
from graphsynth.graphs import Graph
from graphsynth.lcopt import (
    AnnealSchedule,
    OrbitCapExceeded,
    anneal,
    lc_orbit_bfs,
    objective,
    orbit_min_edges,
    replay_frame,
)
from graphsynth.local_clifford import LocalCliffordFrame
from graphsynth.tableau import StabilizerTableau

from .conftest import random_graph


def test_schedule_validation():
    with pytest.raises(ValueError):
        AnnealSchedule(cooling_factor=1.5)
    with pytest.raises(ValueError):
        AnnealSchedule(initial_temperature=-1.0)
    with pytest.raises(ValueError):
        AnnealSchedule(objective_weights=(0.0, 0.0))
    with pytest.raises(ValueError):
        AnnealSchedule(move_set="bogus")


def test_anneal_complete_graph_finds_star():
    g = Graph.complete(6)
    best = anneal(g, AnnealSchedule(steps=500, seed=0))
    assert best.edge_count() == 5  # star


def test_anneal_never_worse_than_input():
    rng = np.random.default_rng(1)
    for seed in range(5):
        g = random_graph(7, rng, p=0.6)
        best = anneal(g, AnnealSchedule(steps=300, seed=seed))
        w = (1.0, 0.0)
        assert objective(best, w) <= objective(g, w)


def test_anneal_tree_already_minimal():
    # a tree's edge count (n-1) is the orbit minimum for a connected graph
    tree = Graph.from_edges(5, [(0, 1), (1, 2), (1, 3), (3, 4)])
    orbit = lc_orbit_bfs(tree)
    assert orbit_min_edges(orbit) == 4
    best = anneal(tree, AnnealSchedule(steps=300, seed=2))
    assert best.edge_count() == 4


def test_anneal_pivot_moves_preserve_bipartiteness():
    rng = np.random.default_rng(3)
    for seed in range(5):
        color = rng.integers(2, size=6)
        adj = np.zeros((6, 6), bool)
        for i in range(6):
            for j in range(i + 1, 6):
                if color[i] != color[j] and rng.random() < 0.6:
                    adj[i, j] = adj[j, i] = True
        g = Graph(adj)
        best = anneal(g, AnnealSchedule(steps=200, seed=seed, move_set="pivot"))
        assert best.is_bipartite()


def test_replay_frame_is_tableau_exact():
    rng = np.random.default_rng(4)
    for _ in range(15):
        g0 = random_graph(5, rng)
        nodes = [int(rng.integers(5)) for _ in range(int(rng.integers(1, 6)))]
        g1, frame = replay_frame(g0, nodes)
        expect = g0
        for i in nodes:
            expect = expect.local_complement(i)
        assert g1 == expect
        # |G1> = frame |G0> with exact signs
        dressed = dress_graph_tableau(g0, frame)
        assert dressed.same_group(StabilizerTableau.graph_state(g1))


def test_replay_frame_empty_moves():
    g = Graph.cycle(4)
    g1, frame = replay_frame(g, [])
    assert g1 == g and frame.is_identity()


def test_anneal_moves_replay_to_best():
    rng = np.random.default_rng(5)
    g = random_graph(7, rng, p=0.7)
    best, moves = anneal(g, AnnealSchedule(steps=400, seed=6), return_moves=True)
    replayed, _ = replay_frame(g, moves)
    assert replayed == best


def test_orbit_of_star_is_star_and_complete():
    for n in (3, 4, 5, 6):
        orbit = lc_orbit_bfs(Graph.star(n))
        counts = sorted(g.edge_count() for g in orbit)
        # star from any center (n graphs) plus the complete graph; as
        # labeled graphs: LC at a leaf of the star fixes it
        assert set(counts) == {n - 1, n * (n - 1) // 2}
        assert Graph.complete(n) in orbit


def test_orbit_single_edge_is_fixed():
    g = Graph.from_edges(2, [(0, 1)])
    assert lc_orbit_bfs(g) == {g}


def test_orbit_cap():
    with pytest.raises(OrbitCapExceeded) as exc:
        lc_orbit_bfs(Graph.cycle(8), node_cap=10)
    assert len(exc.value.partial) > 10


def test_orbit_members_are_lc_equivalent_states():
    # every orbit member, dressed with its replay frame, is the same state
    g0 = Graph.cycle(5)
    seen = {g0: []}
    frontier = [g0]
    while frontier:
        nxt = []
        for g in frontier:
            for i in range(g.n):
                h = g.local_complement(i)
                if h not in seen:
                    seen[h] = seen[g] + [i]
                    nxt.append(h)
        frontier = nxt
    t0 = StabilizerTableau.graph_state(g0)
    for h, moves in seen.items():
        _, frame = replay_frame(g0, moves)
        assert dress_graph_tableau(g0, frame).same_group(
            StabilizerTableau.graph_state(h)
        )
