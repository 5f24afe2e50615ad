"""The graph-decimation environment: states are graphs, actions are
two-qubit Clifford gates, the terminal state is the edgeless graph.

Masking is defined on the NET edge delta (>= 1 edge removed overall),
which guarantees every masked episode terminates within |E| steps.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .graphs import (
    Action,
    Graph,
    action_from_index,
    batch_action_deltas,
    total_action_count,
)


@dataclass(frozen=True)
class ScoreParams:
    layer_penalty: float = 0.0
    normalize_by_edges: bool = False

    def __post_init__(self):
        if not 0.0 <= self.layer_penalty < 1.0:
            raise ValueError("layer_penalty must be in [0, 1)")


@dataclass(frozen=True)
class EnvState:
    graph: Graph
    step_index: int = 0
    action_log: tuple[Action, ...] = ()
    layer_occupancy: tuple[bool, ...] = None

    def __post_init__(self):
        if self.layer_occupancy is None:
            object.__setattr__(
                self, "layer_occupancy", tuple([False] * self.graph.n)
            )

    @staticmethod
    def initial(graph: Graph) -> "EnvState":
        return EnvState(graph=graph)


class TerminalStateError(RuntimeError):
    pass


def is_terminal(state: EnvState) -> bool:
    return state.graph.edge_count() == 0


def opens_new_layer(state: EnvState, action: Action) -> bool:
    occ = state.layer_occupancy
    return occ[action.a] or occ[action.b]


def step(state: EnvState, action: Action, masked: bool = False) -> EnvState:
    """Apply one action; in masked mode only net edge-removing moves are legal."""
    if masked:
        if is_terminal(state):
            raise TerminalStateError("environment is terminal")
        if state.graph.edge_delta(action) < 1:
            raise ValueError(f"action {action} does not remove edges (masked mode)")
    new_graph = state.graph.apply_action(action)
    if opens_new_layer(state, action):
        occ = [False] * state.graph.n
    else:
        occ = list(state.layer_occupancy)
    occ[action.a] = occ[action.b] = True
    return EnvState(
        graph=new_graph,
        step_index=state.step_index + 1,
        action_log=state.action_log + (action,),
        layer_occupancy=tuple(occ),
    )


def action_deltas(graph: Graph) -> np.ndarray:
    """Edge deltas for all canonical actions of one graph."""
    return batch_action_deltas(graph.adj[None])[0]


def enumerate_actions(
    graph: Graph, masked: bool = False, bipartition=None
) -> list[Action]:
    """All actions in canonical order; masked keeps net delta >= 1.

    With a bipartition (A, B) given, only bipartiteness-preserving
    actions are kept: CZ across parts, CX within a part.
    """
    n = graph.n
    deltas = action_deltas(graph)
    keep = np.ones(total_action_count(n), dtype=bool)
    if masked:
        keep &= deltas >= 1.0
    if bipartition is not None:
        keep &= bipartite_action_mask(n, bipartition)
    return [action_from_index(n, int(i)) for i in np.flatnonzero(keep)]


def bipartite_action_mask(n: int, bipartition) -> np.ndarray:
    """Canonical-order mask of actions that preserve a 2-coloring."""
    part_a, part_b = bipartition
    color = np.zeros(n, dtype=np.int8)
    color[list(part_b)] = 1
    same = color[:, None] == color[None, :]
    iu, ju = np.triu_indices(n, k=1)
    off = ~np.eye(n, dtype=bool)
    n_cz = n * (n - 1) // 2
    n_ord = n * (n - 1)
    mask = np.empty(total_action_count(n), dtype=bool)
    mask[:n_cz] = ~same[iu, ju]  # CZ only across parts
    mask[n_cz : n_cz + n_ord] = same[off]  # CX only within a part
    mask[n_cz + n_ord :] = False  # CY either adds a same-part edge or adds only
    return mask


def score_action(state: EnvState, action: Action, params: ScoreParams) -> float:
    """Edges removed, optionally normalized, minus the new-layer penalty."""
    base = float(state.graph.edge_delta(action))
    if params.normalize_by_edges:
        edges = state.graph.edge_count()
        if edges > 0:
            base /= edges
    if params.layer_penalty and opens_new_layer(state, action):
        base -= params.layer_penalty
    return base


def observe(state: EnvState, include_layer: bool = False) -> np.ndarray:
    """Upper-triangle adjacency bits, row-major; optionally the current
    layer occupancy appended."""
    n = state.graph.n
    iu, ju = np.triu_indices(n, k=1)
    bits = state.graph.adj[iu, ju].astype(np.uint8)
    if include_layer:
        bits = np.concatenate([bits, np.array(state.layer_occupancy, np.uint8)])
    return bits


def replay(initial: Graph, log) -> Graph:
    g = initial
    for action in log:
        g = g.apply_action(action)
    return g
