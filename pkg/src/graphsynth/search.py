"""Fast synthesis engines: batched greedy best-first restarts and
randomized beam search over the graph-decimation environment.

Both engines are deterministic for a fixed seed: restart/iteration RNG
streams are derived from (seed, stream_index), so results do not depend
on batching or worker counts.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .compile_passes import relayer, reconstruct
from .env import ScoreParams
from .graphs import (
    Action,
    Graph,
    action_from_index,
    action_tables,
    batch_action_deltas,
    batch_apply_action_indices,
    total_action_count,
)
from .tableau import StabilizerTableau

BEFS = "befs"
BEAM = "beam"

RANDOM = "random"
MIN_DEGREE = "min_degree"


@dataclass(frozen=True)
class SearchConfig:
    method: str = BEFS
    restarts: int = 1  # befs restarts / full beam iterations
    beam_width: int = 1  # N_S
    sampled_actions: float = 1.0  # N_A: count if >= 1, else fraction of total
    tie_breaker: str = RANDOM
    score_params: ScoreParams = field(default_factory=ScoreParams)
    seed: int = 0
    masked: bool = True
    time_budget: float | None = None
    target_tqg: int | None = None  # early stop once this gate count is reached
    chunk_size: int = 4096  # befs restarts batched together
    bipartite_only: bool = False

    def __post_init__(self):
        if self.method not in (BEFS, BEAM):
            raise ValueError(f"unknown method {self.method!r}")
        if self.tie_breaker not in (RANDOM, MIN_DEGREE):
            raise ValueError(f"unknown tie_breaker {self.tie_breaker!r}")
        if self.restarts < 1 or self.beam_width < 1:
            raise ValueError("restarts and beam_width must be positive")
        if self.sampled_actions <= 0:
            raise ValueError("sampled_actions must be positive")

    def resolve_sampled(self, n: int) -> int:
        total = total_action_count(n)
        if self.sampled_actions < 1:
            return max(1, round(self.sampled_actions * total))
        return min(int(self.sampled_actions), total)


@dataclass
class SynthesisResult:
    circuit: object  # Circuit
    tq_gate_count: int
    tq_depth: int
    iterations_used: int
    best_found_at: int
    trajectory_edge_profile: list[int]
    actions: tuple[Action, ...]


class SearchFailure(RuntimeError):
    pass


def _bipartite_mask(g0: Graph) -> np.ndarray | None:
    from .env import bipartite_action_mask

    bp = g0.bipartition()
    if bp is None:
        raise SearchFailure("bipartite_only requested on a non-bipartite graph")
    return bipartite_action_mask(g0.n, bp)


def _edge_profile(g0: Graph, log) -> list[int]:
    profile = [g0.edge_count()]
    g = g0
    for a in log:
        g = g.apply_action(a)
        profile.append(g.edge_count())
    return profile


def _finish(g0: Graph, cfg: SearchConfig, log, iterations, found_at) -> SynthesisResult:
    circuit = relayer(reconstruct(g0, log, StabilizerTableau.graph_state(g0)))
    return SynthesisResult(
        circuit=circuit,
        tq_gate_count=circuit.tq_gate_count,
        tq_depth=circuit.tq_depth,
        iterations_used=iterations,
        best_found_at=found_at,
        trajectory_edge_profile=_edge_profile(g0, log),
        actions=tuple(log),
    )


def _greedy_tq_depth(log, n: int) -> int:
    occ = [False] * n
    depth = 0
    for a in log:
        if depth == 0 or occ[a.a] or occ[a.b]:
            depth += 1
            occ = [False] * n
        occ[a.a] = occ[a.b] = True
    return depth


# -- best-first search -------------------------------------------------


def befs_run(g0: Graph, cfg: SearchConfig) -> SynthesisResult:
    """Repeated greedy rollouts: all actions scored, argmax with ties
    broken at random or toward low-degree endpoints."""
    if cfg.method != BEFS:
        raise ValueError("config method is not befs")
    if g0.edge_count() == 0:
        return _finish(g0, cfg, [], 0, 0)

    n = g0.n
    e0 = g0.edge_count()
    step_cap = e0 if cfg.masked else 4 * e0
    _, act_a, act_b = action_tables(n)
    params = cfg.score_params
    extra_mask = _bipartite_mask(g0) if cfg.bipartite_only else None

    best: tuple[int, int, list[Action], int] | None = None  # tqg, depth, log, at
    start = time.monotonic()
    done = 0
    chunk_idx = 0
    while done < cfg.restarts:
        b = min(cfg.chunk_size, cfg.restarts - done)
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, chunk_idx]))
        adjs = np.broadcast_to(g0.adj, (b, n, n)).copy()
        edges = np.full(b, e0, dtype=np.int64)
        occ = np.zeros((b, n), dtype=bool)
        depth = np.zeros(b, dtype=np.int64)
        steps_done = np.full(b, -1, dtype=np.int64)
        logs = np.full((step_cap, b), -1, dtype=np.int64)
        active = np.ones(b, dtype=bool)

        for step in range(step_cap):
            rows = np.flatnonzero(active)
            if rows.size == 0:
                break
            sub = adjs[rows]
            deltas = batch_action_deltas(sub)
            score = deltas.copy()
            if params.normalize_by_edges:
                score /= edges[rows, None]
            if params.layer_penalty:
                qa_occ = occ[rows][:, act_a] | occ[rows][:, act_b]
                score -= params.layer_penalty * qa_occ
            invalid = np.zeros_like(score, dtype=bool)
            if cfg.masked:
                invalid |= deltas < 1
            if extra_mask is not None:
                invalid |= ~extra_mask
            score[invalid] = -np.inf
            top = score.max(axis=1, keepdims=True)
            tie = score >= top - 1e-9
            r = rng.random(score.shape, dtype=np.float32)
            if cfg.tie_breaker == MIN_DEGREE:
                degs = sub.sum(axis=2)
                maxdeg = np.maximum(degs[:, act_a], degs[:, act_b])
                key = tie * (n + 1 - maxdeg + r)
            else:
                key = tie * (1.0 + r)
            choice = key.argmax(axis=1)

            adjs[rows] = batch_apply_action_indices(sub, choice)
            picked = deltas[np.arange(rows.size), choice].astype(np.int64)
            edges[rows] -= picked
            logs[step, rows] = choice

            qa, qb = act_a[choice], act_b[choice]
            new_layer = (
                occ[rows, qa] | occ[rows, qb] | (depth[rows] == 0)
            )
            depth[rows] += new_layer
            reset = rows[occ[rows, qa] | occ[rows, qb]]
            occ[reset] = False
            occ[rows, qa] = True
            occ[rows, qb] = True

            finished = rows[edges[rows] == 0]
            steps_done[finished] = step + 1
            active[finished] = False

        for row in np.argsort(steps_done, kind="stable"):
            if steps_done[row] < 0:
                continue
            tqg = int(steps_done[row])
            gdepth = int(depth[row])
            if best is None or (tqg, gdepth) < (best[0], best[1]):
                log = [
                    action_from_index(n, int(logs[s, row])) for s in range(tqg)
                ]
                best = (tqg, gdepth, log, done + int(row))

        done += b
        chunk_idx += 1
        if cfg.target_tqg is not None and best and best[0] <= cfg.target_tqg:
            break
        if cfg.time_budget is not None and time.monotonic() - start > cfg.time_budget:
            break

    if best is None:
        raise SearchFailure("no rollout terminated within the step cap")
    return _finish(g0, cfg, best[2], done, best[3])


# -- beam search -------------------------------------------------------


def beam_run(g0: Graph, cfg: SearchConfig) -> SynthesisResult:
    """Randomized beam search with masked-priority action sampling and
    cumulative normalized scoring; restarts on each terminal child."""
    if cfg.method != BEAM:
        raise ValueError("config method is not beam")
    if g0.edge_count() == 0:
        return _finish(g0, cfg, [], 0, 0)

    n = g0.n
    e0 = g0.edge_count()
    total = total_action_count(n)
    n_a = cfg.resolve_sampled(n)
    width = cfg.beam_width
    _, act_a, act_b = action_tables(n)
    extra_mask = _bipartite_mask(g0) if cfg.bipartite_only else None
    step_cap = 10 * e0 + 50

    best: tuple[int, int, list[Action], int] | None = None
    start = time.monotonic()
    iterations = 0
    for it in range(cfg.restarts):
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, it]))
        adjs = np.broadcast_to(g0.adj, (width, n, n)).copy()
        edges = np.full(width, e0, dtype=np.int64)
        cum = np.zeros(width, dtype=np.float64)
        history: list[tuple[np.ndarray, np.ndarray]] = []
        log = None
        for _ in range(step_cap):
            cur = adjs.shape[0]
            deltas = batch_action_deltas(adjs)
            # sampling priority: masked (edge-removing) actions first;
            # disallowed actions pushed behind everything else
            priority = (deltas >= 1).astype(np.float32)
            if extra_mask is not None:
                priority[:, ~extra_mask] = np.float32(-2.0)
            key = rng.random(deltas.shape, dtype=np.float32) + priority
            if n_a < total:
                top = np.argpartition(-key, n_a - 1, axis=1)[:, :n_a]
            else:
                top = np.broadcast_to(np.arange(total), (cur, total))
            child_delta = np.take_along_axis(deltas, top, axis=1)
            child_edges = edges[:, None] - child_delta.astype(np.int64)
            child_score = cum[:, None] + child_delta / edges[:, None]
            if extra_mask is not None:
                allowed = extra_mask[top]
                child_score = np.where(allowed, child_score, -np.inf)
                child_edges = np.where(allowed, child_edges, -1)

            term = child_edges == 0
            if term.any():
                flat = np.flatnonzero(term.ravel())
                pick = flat[np.argmax(child_score.ravel()[flat])]
                s_idx, a_pos = divmod(int(pick), top.shape[1])
                idx_chain = [int(top[s_idx, a_pos])]
                parent = s_idx
                for parents, acts in reversed(history):
                    idx_chain.append(int(acts[parent]))
                    parent = int(parents[parent])
                idx_chain.reverse()
                log = [action_from_index(n, i) for i in idx_chain]
                break

            flat_score = child_score.ravel()
            if extra_mask is not None:
                candidates = np.flatnonzero(np.isfinite(flat_score))
                if candidates.size == 0:
                    break  # dead beam; count as a failed iteration
                flat_idx = candidates
            else:
                flat_idx = np.arange(flat_score.size)
            if flat_idx.size > width:
                part = flat_idx[np.argpartition(-flat_score[flat_idx], width - 1)[:width]]
                order = part[np.lexsort((part, -flat_score[part]))]
            else:
                order = flat_idx[np.lexsort((flat_idx, -flat_score[flat_idx]))]
            cols = top.shape[1]
            parents = order // cols
            acts = top[parents, order % cols]
            history.append((parents, acts))
            adjs = batch_apply_action_indices(adjs[parents], acts)
            edges = child_edges.ravel()[order]
            cum = flat_score[order]

        iterations += 1
        if log is not None:
            tqg = len(log)
            gdepth = _greedy_tq_depth(log, n)
            if best is None or (tqg, gdepth) < (best[0], best[1]):
                best = (tqg, gdepth, log, it)
        if cfg.target_tqg is not None and best and best[0] <= cfg.target_tqg:
            break
        if cfg.time_budget is not None and time.monotonic() - start > cfg.time_budget:
            break

    if best is None:
        raise SearchFailure("beam search found no terminating trajectory")
    return _finish(g0, cfg, best[2], iterations, best[3])


def run_search(g0: Graph, cfg: SearchConfig) -> SynthesisResult:
    return befs_run(g0, cfg) if cfg.method == BEFS else beam_run(g0, cfg)
