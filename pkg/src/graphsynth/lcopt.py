"""Local-complementation orbit tools: simulated annealing over the LC
orbit to shrink edge count (and optionally max degree) before
decimation, plus exact orbit enumeration for small graphs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graphs import Graph
from .local_clifford import LocalCliffordFrame, SingleClifford

SINGLE_LC = "single_lc"
PIVOT = "pivot"


@dataclass(frozen=True)
class AnnealSchedule:
    initial_temperature: float | None = None  # None: calibrate from probe moves
    cooling_factor: float = 0.995
    steps: int = 2000
    objective_weights: tuple[float, float] = (1.0, 0.0)  # (w_edges, w_maxdeg)
    move_set: str = SINGLE_LC
    seed: int = 0

    def __post_init__(self):
        if self.initial_temperature is not None and self.initial_temperature <= 0:
            raise ValueError("initial_temperature must be positive")
        if not 0.0 < self.cooling_factor < 1.0:
            raise ValueError("cooling_factor must be in (0, 1)")
        if self.steps < 0:
            raise ValueError("steps must be non-negative")
        w_e, w_d = self.objective_weights
        if w_e < 0 or w_d < 0 or w_e + w_d <= 0:
            raise ValueError("objective weights must be non-negative, sum positive")
        if self.move_set not in (SINGLE_LC, PIVOT):
            raise ValueError(f"unknown move_set {self.move_set!r}")


def objective(g: Graph, weights) -> float:
    w_e, w_d = weights
    return w_e * g.edge_count() + w_d * g.max_degree()


def _propose(g: Graph, move_set: str, rng):
    """(new graph, LC node sequence) or None."""
    if move_set == SINGLE_LC:
        i = int(rng.integers(g.n))
        return g.local_complement(i), [i]
    edges = g.edges()
    if not edges:
        return None
    i, j = edges[int(rng.integers(len(edges)))]
    return g.pivot(i, j), [i, j, i]


def anneal(g0: Graph, s: AnnealSchedule, return_moves: bool = False):
    """Metropolis annealing over the LC orbit; returns the best graph
    visited (optionally with the LC node sequence that reaches it)."""
    rng = np.random.default_rng(np.random.SeedSequence([s.seed]))
    obj = lambda g: objective(g, s.objective_weights)

    temp = s.initial_temperature
    if temp is None:
        # calibrate: standard deviation of objective deltas over probe moves
        cur_obj = obj(g0)
        deltas = []
        for _ in range(100):
            p = _propose(g0, s.move_set, rng)
            if p is not None:
                deltas.append(obj(p[0]) - cur_obj)
        temp = float(np.std(deltas)) if deltas else 1.0
        temp = max(temp, 1e-6)

    current = g0
    cur_obj = obj(g0)
    moves: list[int] = []
    best, best_obj, best_moves = current, cur_obj, []
    for _ in range(s.steps):
        proposal = _propose(current, s.move_set, rng)
        if proposal is not None:
            candidate, nodes = proposal
            delta = obj(candidate) - cur_obj
            if delta <= 0 or rng.random() < math.exp(-delta / temp):
                current, cur_obj = candidate, cur_obj + delta
                moves.extend(nodes)
                if cur_obj < best_obj:
                    best, best_obj, best_moves = current, cur_obj, list(moves)
        temp *= s.cooling_factor
    return (best, best_moves) if return_moves else best


def replay_frame(g0: Graph, nodes) -> tuple[Graph, LocalCliffordFrame]:
    """Apply LC moves, returning the final graph and the exact frame D
    with |G_final> = D |G_0>  (each LC_i contributes SXDG_i, S on n(i))."""
    g = g0
    frame = LocalCliffordFrame.identity(g0.n)
    for i in nodes:
        step = [SingleClifford.identity() for _ in range(g0.n)]
        step[i] = SingleClifford.from_gates(["SXDG"])
        s_gate = SingleClifford.from_gates(["S"])
        for j in g.neighborhood(i):
            step[j] = s_gate
        frame = LocalCliffordFrame(step).compose(frame)
        g = g.local_complement(i)
    return g, frame


class OrbitCapExceeded(RuntimeError):
    def __init__(self, cap: int, partial: set):
        super().__init__(f"LC orbit exceeds node cap {cap}")
        self.partial = partial


def lc_orbit_bfs(g0: Graph, node_cap: int = 100_000) -> set[Graph]:
    """Breadth-first closure of g0 under all single-node LCs (exact
    labeled graphs, no isomorphism reduction)."""
    seen = {g0}
    frontier = [g0]
    while frontier:
        nxt = []
        for g in frontier:
            for i in range(g.n):
                h = g.local_complement(i)
                if h not in seen:
                    seen.add(h)
                    nxt.append(h)
                    if len(seen) > node_cap:
                        raise OrbitCapExceeded(node_cap, seen)
        frontier = nxt
    return seen


def orbit_min_edges(orbit) -> int:
    return min(g.edge_count() for g in orbit)
