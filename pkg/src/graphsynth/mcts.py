"""Monte Carlo tree search over the decimation environment.

Selection uses UCT(s') = Qbar(s') + c * P(s,a) * N(s) / (1 + N(s')) —
note the visit ratio carries no square root; this variant is implemented
verbatim.  Expansion is batched: each round expands the k best
expandable nodes by m prior-sampled actions and evaluates all new
children in one guidance batch (no random rollouts).

Guidance is pluggable: the default provider scores a state by the sum
of edges removed by all available actions and uses max(edge_delta, 0)
as an (unnormalized) policy weight; a learned provider can be attached
through the same interface (see the bridge protocol).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import env
from .env import EnvState
from .graphs import Graph, action_from_index, total_action_count
from .search import SearchConfig, SynthesisResult, _finish, _greedy_tq_depth


@dataclass(frozen=True)
class MctsConfig:
    budget: int = 512  # child evaluations per search_move
    k: int = 8  # nodes expanded per round
    m: int = 16  # actions sampled per expanded node
    c: float = 1.0  # exploration constant
    max_depth: int = 8
    seed: int = 0
    masked: bool = True

    def __post_init__(self):
        if self.budget < 1:
            raise ValueError("budget must be positive")
        if self.k < 1 or self.m < 1:
            raise ValueError("k and m must be positive")
        if self.c < 0:
            raise ValueError("c must be non-negative")
        if self.max_depth < 1:
            raise ValueError("max_depth must be positive")


class GuidanceProvider:
    """Heuristic guidance.  value_batch returns remaining-cost scores
    (lower is better, 0 at terminal): the total removable-edge mass of a
    state.  The policy weight of an action is max(edge_delta, 0), with a
    uniform fallback."""

    def value_batch(self, graphs) -> np.ndarray:
        return np.array(
            [float(np.maximum(env.action_deltas(g), 0).sum()) for g in graphs]
        )

    def policy(self, graph: Graph, action_indices: np.ndarray) -> np.ndarray:
        deltas = env.action_deltas(graph)[action_indices]
        w = np.maximum(deltas, 0.0).astype(np.float64)
        total = w.sum()
        if total <= 0:
            return np.full(len(action_indices), 1.0 / len(action_indices))
        return w / total


class _TreeStats:
    __slots__ = ("v_min", "v_max")

    def __init__(self):
        self.v_min = np.inf
        self.v_max = -np.inf

    def update(self, v: float):
        self.v_min = min(self.v_min, v)
        self.v_max = max(self.v_max, v)

    def normalize(self, v: float) -> float:
        if self.v_max <= self.v_min:
            return 0.5
        return (v - self.v_min) / (self.v_max - self.v_min)


class TreeNode:
    __slots__ = (
        "graph", "depth", "visit_count", "quality_sum", "prior",
        "children", "parent", "action_index", "untried", "policy_weights",
        "terminal", "stats",
    )

    def __init__(self, graph, depth, prior, parent, action_index, stats, masked=True):
        self.graph = graph
        self.depth = depth
        self.prior = prior
        self.parent = parent
        self.action_index = action_index
        self.stats = stats
        self.visit_count = 0
        self.quality_sum = 0.0
        self.children: dict[int, TreeNode] = {}
        self.terminal = graph.edge_count() == 0
        self.untried = None
        self.policy_weights = None

    def q_bar(self) -> float:
        """Min-max normalized mean quality; terminal nodes pin to 1."""
        if self.terminal:
            return 1.0
        if self.visit_count == 0:
            return 0.0
        return self.stats.normalize(self.quality_sum / self.visit_count)

    def ensure_expansion_data(self, gp: GuidanceProvider, masked: bool):
        if self.untried is not None:
            return
        deltas = env.action_deltas(self.graph)
        if masked:
            idxs = np.flatnonzero(deltas >= 1)
        else:
            idxs = np.arange(total_action_count(self.graph.n))
        self.untried = idxs.tolist()
        probs = gp.policy(self.graph, idxs)
        self.policy_weights = dict(zip(idxs.tolist(), probs.tolist()))

    def expandable(self, max_depth: int) -> bool:
        return (
            not self.terminal
            and self.depth < max_depth
            and (self.untried is None or len(self.untried) > 0)
        )


def uct_score(parent: TreeNode, child: TreeNode, action_index: int, c: float) -> float:
    """The selection score, with a linear (not square-root) visit ratio."""
    p = parent.policy_weights.get(action_index, 0.0) if parent.policy_weights else 0.0
    return child.q_bar() + c * p * parent.visit_count / (1 + child.visit_count)


def _collect_candidates(root: TreeNode, max_depth: int) -> list[TreeNode]:
    """Expandable nodes plus terminal leaves (re-selectable for backup)."""
    out = []
    stack = [root]
    while stack:
        node = stack.pop()
        if node.expandable(max_depth) or node.terminal:
            out.append(node)
        stack.extend(node.children.values())
    return out


def search_move(
    root_state: EnvState,
    cfg: MctsConfig,
    gp: GuidanceProvider | None = None,
    rng=None,
    return_visits: bool = False,
):
    """One tree search from the current state; returns the most visited
    root action (optionally with the root visit-count distribution)."""
    if env.is_terminal(root_state):
        raise ValueError("cannot search from a terminal state")
    gp = gp or GuidanceProvider()
    if rng is None:
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed]))

    stats = _TreeStats()
    root = TreeNode(root_state.graph, 0, 1.0, None, None, stats)
    root.ensure_expansion_data(gp, cfg.masked)

    evaluations = 0
    while evaluations < cfg.budget:
        nodes = _collect_candidates(root, cfg.max_depth)
        if not nodes:
            break

        def node_key(nd: TreeNode):
            if nd.parent is None:
                return np.inf
            return uct_score(nd.parent, nd, nd.action_index, cfg.c)

        nodes.sort(key=lambda nd: (-node_key(nd), nd.depth))
        batch_children = []
        terminal_backups = 0
        for node in nodes[: cfg.k]:
            if evaluations + len(batch_children) >= cfg.budget:
                break
            if node.terminal:
                # re-visit a solved leaf: back its (best-possible) value up
                stats.update(0.0)
                evaluations += 1
                terminal_backups += 1
                walker = node
                while walker is not None:
                    walker.visit_count += 1
                    walker.quality_sum += 0.0
                    walker = walker.parent
                continue
            node.ensure_expansion_data(gp, cfg.masked)
            pool = np.array(node.untried, dtype=np.int64)
            weights = np.array([node.policy_weights[i] for i in node.untried])
            total = weights.sum()
            probs = weights / total if total > 0 else None
            take = min(cfg.m, len(pool))
            chosen = rng.choice(pool, size=take, replace=False, p=probs)
            for idx in sorted(int(i) for i in chosen):
                node.untried.remove(idx)
                child_graph = node.graph.apply_action(
                    action_from_index(node.graph.n, idx)
                )
                child = TreeNode(
                    child_graph, node.depth + 1,
                    node.policy_weights.get(idx, 0.0), node, idx, stats,
                )
                node.children[idx] = child
                batch_children.append(child)
        if not batch_children:
            if terminal_backups == 0:
                break
            continue

        costs = gp.value_batch([ch.graph for ch in batch_children])
        evaluations += len(batch_children)
        for child, cost in zip(batch_children, costs):
            v = -float(cost)  # costs are lower-better; qualities higher-better
            stats.update(v)
            node = child
            while node is not None:
                node.visit_count += 1
                node.quality_sum += v
                node = node.parent

    if not root.children:
        raise RuntimeError("budget too small: no root child expanded")
    best_idx = min(root.children, key=lambda i: (-root.children[i].visit_count, i))
    action = action_from_index(root_state.graph.n, best_idx)
    if return_visits:
        visits = np.zeros(total_action_count(root_state.graph.n))
        for i, ch in root.children.items():
            visits[i] = ch.visit_count
        return action, visits
    return action


def self_play(
    g0: Graph,
    cfg: MctsConfig,
    gp: GuidanceProvider | None = None,
    step_cap: int | None = None,
):
    """Play one episode with search_move at every step.

    Returns (SynthesisResult, records) where each record is
    (observation bits, root visit distribution, remaining-action count).
    """
    gp = gp or GuidanceProvider()
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed]))
    state = EnvState.initial(g0)
    cap = step_cap if step_cap is not None else (
        g0.edge_count() if cfg.masked else 4 * g0.edge_count()
    )
    raw: list[tuple[np.ndarray, np.ndarray]] = []
    while not env.is_terminal(state):
        if state.step_index >= cap:
            raise RuntimeError("self-play exceeded the step cap")
        action, visits = search_move(state, cfg, gp, rng, return_visits=True)
        total = visits.sum()
        pi = visits / total if total > 0 else visits
        raw.append((env.observe(state), pi))
        state = env.step(state, action, masked=cfg.masked)

    log = list(state.action_log)
    records = [
        (obs, pi, len(log) - i) for i, (obs, pi) in enumerate(raw)
    ]
    search_cfg = SearchConfig(seed=cfg.seed, masked=cfg.masked)
    result = _finish(g0, search_cfg, log, 1, 0)
    return result, records
