import numpy as np
import pytest

from graphsynth.conversion import EXACT, verify_circuit
from graphsynth.env import ScoreParams
from graphsynth.graphs import Graph
from graphsynth.search import (
    SearchConfig,
    SearchFailure,
    beam_run,
    befs_run,
    run_search,
)
from graphsynth.tableau import StabilizerTableau

from .conftest import random_graph


def test_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(tie_breaker="bogus")
    with pytest.raises(ValueError):
        SearchConfig(restarts=0)
    with pytest.raises(ValueError):
        SearchConfig(sampled_actions=0)


def test_befs_decimates_and_verifies():
    rng = np.random.default_rng(0)
    for _ in range(10):
        g = random_graph(6, rng)
        if g.edge_count() == 0:
            continue
        res = befs_run(g, SearchConfig(restarts=200, seed=int(rng.integers(1000))))
        assert res.trajectory_edge_profile[0] == g.edge_count()
        assert res.trajectory_edge_profile[-1] == 0
        assert res.tq_gate_count <= g.edge_count()
        target = StabilizerTableau.graph_state(g)
        assert verify_circuit(res.circuit, target)[0] == EXACT


def test_befs_star_needs_fewer_gates_than_edges():
    # the 6-node star decimates with a single CX sweep far below |E|... at
    # least one gate is saved vs. plain CZ removal on the complete graph
    g = Graph.complete(5)
    res = befs_run(g, SearchConfig(restarts=500, seed=1))
    assert res.tq_gate_count < g.edge_count()


def test_tie_breakers_both_work():
    g = Graph.cycle(6)
    for tb in ("random", "min_degree"):
        res = befs_run(g, SearchConfig(restarts=100, seed=3, tie_breaker=tb))
        assert res.trajectory_edge_profile[-1] == 0


def test_layer_penalty_accepted():
    g = Graph.cycle(6)
    res = befs_run(
        g,
        SearchConfig(restarts=100, seed=3, score_params=ScoreParams(layer_penalty=0.3)),
    )
    assert res.trajectory_edge_profile[-1] == 0


def test_target_tqg_early_stop():
    g = Graph.cycle(8)
    cfg = SearchConfig(restarts=10_000, seed=0, target_tqg=g.edge_count())
    res = befs_run(g, cfg)
    assert res.iterations_used < 10_000


def test_bipartite_only_on_non_bipartite_graph_fails():
    with pytest.raises(SearchFailure):
        befs_run(Graph.cycle(5), SearchConfig(restarts=10, bipartite_only=True))


def test_bipartite_only_yields_cz_cx_circuit():
    g = Graph.cycle(6)
    res = befs_run(g, SearchConfig(restarts=200, seed=2, bipartite_only=True))
    kinds = {a.kind for a in res.actions}
    assert "CY" not in kinds
    assert verify_circuit(res.circuit, StabilizerTableau.graph_state(g))[0] == EXACT


def test_beam_decimates_and_verifies():
    rng = np.random.default_rng(4)
    g = random_graph(7, rng, p=0.6)
    cfg = SearchConfig(
        method="beam", restarts=20, beam_width=30, sampled_actions=0.2, seed=5
    )
    res = beam_run(g, cfg)
    assert res.trajectory_edge_profile[-1] == 0
    assert verify_circuit(res.circuit, StabilizerTableau.graph_state(g))[0] == EXACT


def test_run_search_dispatch_and_determinism():
    g = Graph.cycle(7)
    for method in ("befs", "beam"):
        cfg = SearchConfig(method=method, restarts=30, beam_width=10, seed=9)
        a = run_search(g, cfg)
        b = run_search(g, cfg)
        assert a.actions == b.actions
        assert a.tq_gate_count == b.tq_gate_count


def test_results_report_iteration_metadata():
    g = Graph.cycle(6)
    res = befs_run(g, SearchConfig(restarts=50, seed=6))
    assert 1 <= res.iterations_used <= 50
    assert 0 <= res.best_found_at <= res.iterations_used
