import numpy as np
import pytest

from graphsynth import env
from graphsynth.env import EnvState, ScoreParams, TerminalStateError
from graphsynth.graphs import Action, Graph, total_action_count

from .conftest import random_graph


def test_initial_state_and_terminal():
    g = Graph.cycle(4)
    s = EnvState.initial(g)
    assert s.step_index == 0 and s.action_log == ()
    assert not env.is_terminal(s)
    assert env.is_terminal(EnvState.initial(Graph.empty(3)))


def test_step_applies_action_and_logs():
    s = EnvState.initial(Graph.from_edges(2, [(0, 1)]))
    s2 = env.step(s, Action("CZ", 0, 1))
    assert env.is_terminal(s2)
    assert s2.step_index == 1
    assert s2.action_log == (Action("CZ", 0, 1),)


def test_masked_step_rejects_non_removing_action():
    s = EnvState.initial(Graph.from_edges(3, [(0, 1)]))
    with pytest.raises(ValueError):
        env.step(s, Action("CZ", 1, 2), masked=True)
    # the same action is legal unmasked
    env.step(s, Action("CZ", 1, 2), masked=False)


def test_masked_step_rejects_terminal():
    s = EnvState.initial(Graph.empty(2))
    with pytest.raises(TerminalStateError):
        env.step(s, Action("CZ", 0, 1), masked=True)


def test_layer_occupancy_tracking():
    s = EnvState.initial(Graph.complete(4))
    s = env.step(s, Action("CZ", 0, 1))
    assert not env.opens_new_layer(s, Action("CZ", 2, 3))
    assert env.opens_new_layer(s, Action("CZ", 0, 2))
    s = env.step(s, Action("CZ", 0, 2))  # opens a new layer
    assert s.layer_occupancy == (True, False, True, False)


def test_enumerate_actions_unmasked_count():
    for n in (2, 3, 5, 8):
        g = Graph.cycle(n) if n > 2 else Graph.empty(n)
        assert len(env.enumerate_actions(g)) == 5 * n * (n - 1) // 2


def test_enumerate_actions_masked_subset():
    rng = np.random.default_rng(7)
    for _ in range(20):
        g = random_graph(6, rng)
        masked = env.enumerate_actions(g, masked=True)
        unmasked = env.enumerate_actions(g)
        assert set(masked) <= set(unmasked)
        for a in masked:
            assert g.edge_delta(a) >= 1


def test_bipartite_actions_preserve_bipartiteness():
    rng = np.random.default_rng(8)
    for _ in range(20):
        color = rng.integers(2, size=6)
        adj = np.zeros((6, 6), bool)
        for i in range(6):
            for j in range(i + 1, 6):
                if color[i] != color[j] and rng.random() < 0.5:
                    adj[i, j] = adj[j, i] = True
        g = Graph(adj)
        part = (list(np.flatnonzero(color == 0)), list(np.flatnonzero(color == 1)))
        for a in env.enumerate_actions(g, bipartition=part):
            h = g.apply_action(a)
            assert h.is_bipartite()


def test_action_deltas_shape():
    g = Graph.cycle(5)
    assert env.action_deltas(g).shape == (total_action_count(5),)


def test_score_action_layer_penalty():
    params = ScoreParams(layer_penalty=0.3)
    s = EnvState.initial(Graph.complete(4))
    s = env.step(s, Action("CZ", 0, 1))
    free = env.score_action(s, Action("CZ", 2, 3), params)
    busy = env.score_action(s, Action("CZ", 0, 2), params)
    assert free == pytest.approx(busy + 0.3)
    with pytest.raises(ValueError):
        ScoreParams(layer_penalty=1.0)


def test_observe_roundtrips_adjacency():
    rng = np.random.default_rng(9)
    g = random_graph(5, rng)
    bits = env.observe(EnvState.initial(g))
    iu, ju = np.triu_indices(5, k=1)
    assert np.array_equal(bits.astype(bool), g.adj[iu, ju])
    with_layer = env.observe(EnvState.initial(g), include_layer=True)
    assert len(with_layer) == len(bits) + 5


def test_replay():
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    log = [Action("CZ", 0, 1), Action("CZ", 1, 2)]
    assert env.replay(g, log) == Graph.empty(3)
