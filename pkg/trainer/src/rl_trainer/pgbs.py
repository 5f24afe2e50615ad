"""Policy-guided beam search evaluation.

Plain beam search samples candidate actions uniformly; here candidates
are sampled from the trained policy instead.  With a beam width and
sample count of one the procedure degenerates to a greedy policy
rollout.  All stepping goes through bridge sessions; the winning action
log is compiled and re-verified by the primary toolchain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from .actions import index_to_triple, total_action_count
from .client import BridgeServer
from .features import (
    action_deltas,
    action_mask,
    adjacency,
    bits_length,
    layer_occupancy,
    observation_vector,
    update_layer_occupancy,
)
from .model import PolicyValueNet, load_checkpoint, masked_log_policy
from .verify import VerifiedCircuit, compile_and_verify


@dataclass
class EvalResult:
    tq_gate_count: int
    tq_depth: int
    actions: list
    verified: VerifiedCircuit


def _policy_probs(net: PolicyValueNet, n: int, bits: np.ndarray,
                  mask: np.ndarray, occ: np.ndarray | None = None) -> np.ndarray:
    """Masked policy distribution; the checkpoint's obs_dim selects the
    feature set it was trained on (plain bits, bits + per-action deltas,
    or bits + current-layer occupancy)."""
    if net.obs_dim == bits_length(n) + total_action_count(n):
        x = observation_vector(n, bits, with_deltas=True)
    elif net.obs_dim == bits_length(n) + n:
        if occ is None:
            occ = np.zeros(n, dtype=np.uint8)
        x = np.concatenate([bits.astype(np.float32), occ.astype(np.float32)])
    else:
        x = observation_vector(n, bits)
    with torch.no_grad():
        logits, _ = net(torch.from_numpy(x[None].astype(np.float32)))
        logp = masked_log_policy(logits, torch.from_numpy(mask[None]))
    return np.exp(logp.numpy()[0])


@dataclass
class _BeamState:
    actions: tuple
    bits: np.ndarray
    edges: int
    log_prob: float


def _replay(channel, code: str, actions) -> tuple[np.ndarray, bool]:
    reply = channel.reset(code=code)
    bits, done = reply["bits"], reply["edges"] == 0
    for a in actions:
        reply = channel.step(a)
        bits, done = reply["bits"], reply["done"]
    return bits, done


def greedy_rollout(net: PolicyValueNet, channel, code: str) -> list:
    """Deterministic argmax policy rollout; returns the action log."""
    reply = channel.reset(code=code)
    n, bits = reply["n"], reply["bits"]
    log = []
    occ = np.zeros(n, dtype=np.uint8)
    done = reply["edges"] == 0
    while not done:
        mask = action_mask(adjacency(n, bits))
        probs = _policy_probs(net, n, bits, mask, occ=occ)
        triple = index_to_triple(n, int(np.argmax(probs)))
        log.append(triple)
        update_layer_occupancy(occ, triple[1], triple[2])
        reply = channel.step(triple)
        bits, done = reply["bits"], reply["done"]
    return log


def pgbs_eval(checkpoint_path, code: str, beam_width: int = 100,
              samples_per_state: int = 8, seed: int = 0,
              server: BridgeServer | None = None) -> EvalResult:
    net, _ = load_checkpoint(checkpoint_path)
    own_server = server is None
    if own_server:
        server = BridgeServer()
    channel = server.connect()
    try:
        reply = channel.reset(code=code)
        n = reply["n"]
        rng = np.random.default_rng(seed)
        greedy = beam_width == 1 and samples_per_state == 1

        if greedy:
            best_log = greedy_rollout(net, channel, code)
        else:
            best_log = _beam(channel, net, code, n, reply, beam_width,
                             samples_per_state, rng)

        found = compile_and_verify(channel, code, best_log)
        if found is None:
            raise RuntimeError("winning action log failed re-verification")
        return EvalResult(
            tq_gate_count=found.tq_gate_count,
            tq_depth=found.tq_depth,
            actions=found.actions,
            verified=found,
        )
    finally:
        channel.close()
        if own_server:
            server.close()


def _beam(channel, net, code, n, reset_reply, beam_width, samples_per_state,
          rng) -> list:
    beam = [
        _BeamState((), reset_reply["bits"], reset_reply["edges"], 0.0)
    ]
    finished: list[tuple] = []
    for _ in range(bits_length(n)):  # masked episodes are depth-bounded
        candidates = []
        for state in beam:
            mask = action_mask(adjacency(n, state.bits))
            support = np.flatnonzero(mask)
            if len(support) == 0:
                continue
            probs = _policy_probs(net, n, state.bits, mask,
                                  occ=layer_occupancy(n, state.actions))
            take = min(samples_per_state, len(support))
            chosen = rng.choice(
                support, size=take, replace=False,
                p=probs[support] / probs[support].sum(),
            )
            deltas = None
            for idx in chosen:
                # masked actions remove >= 1 edge; rank children by the
                # resulting edge count, log-prob as tie-break
                if deltas is None:
                    deltas = action_deltas(adjacency(n, state.bits))
                child_edges = state.edges - int(deltas[idx])
                candidates.append(
                    (child_edges, -(state.log_prob + np.log(probs[idx])),
                     state, int(idx))
                )
        if not candidates:
            break
        candidates.sort(key=lambda c: (c[0], c[1]))
        next_beam = []
        for child_edges, neg_lp, state, idx in candidates[:beam_width]:
            triple = index_to_triple(n, idx)
            actions = state.actions + (triple,)
            if child_edges == 0:
                finished.append(actions)
                continue
            bits, done = _replay(channel, code, actions)
            if done:
                finished.append(actions)
                continue
            next_beam.append(
                _BeamState(actions, bits, child_edges, -neg_lp)
            )
        if finished and not next_beam:
            break
        beam = next_beam
        if not beam:
            break
    if not finished:
        raise RuntimeError("beam search found no complete decimation")
    return list(min(finished, key=len))
