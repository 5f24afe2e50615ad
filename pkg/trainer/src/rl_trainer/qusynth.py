"""MCTS-guided training: self-play through the bridge with the network
answering the environment's value/policy queries.

The loss is ``c_V MSE(y, y_hat) + c_pi CE(pi, pi_hat) + c_KL
KL(pi_hat, pi_ref)``: the value head regresses the remaining-action
count of each recorded state (which decreases by exactly one per step),
the policy head matches the root visit distribution of the tree search,
and a KL term keeps the learned policy near the environment's heuristic
reference policy.  Early self-play is tethered to the heuristic: the
network's answers are blended with the heuristic's, with the heuristic
weight decaying linearly over the first ``tether_fraction`` of training.
A blend weight of 1.0 plays the environment's own heuristic search,
untouched.

Optionally the network is warm-started by distilling a trained
policy checkpoint (e.g. a PPO run on the same code): the new
network regresses the reference policy's masked action distribution and
the empirical remaining-step counts of its rollouts before self-play
begins.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .client import BridgeServer
from .config import AgentConfig, default_config
from .features import (
    action_mask,
    adjacency,
    bits_length,
    decode_observation,
    heuristic_policy,
    heuristic_value,
    observation_vector,
    update_layer_occupancy,
)
from .actions import index_to_triple, total_action_count
from .model import (
    PolicyValueNet,
    load_checkpoint,
    masked_log_policy,
    save_checkpoint,
)
from .ppo import DivergenceError, TrainResult
from .verify import compile_and_verify


def tether_weight(progress: float, tether_fraction: float) -> float:
    """Heuristic blend weight: 1 at the start, linearly down to 0 over
    the first ``tether_fraction`` of training."""
    if tether_fraction <= 0:
        return 0.0
    return float(np.clip(1.0 - progress / tether_fraction, 0.0, 1.0))


class BlendedGuidance:
    """Answers bridge guidance queries with a heuristic/network blend.

    Values are remaining-cost estimates (lower is better); both the
    heuristic's removable-edge mass and the network's remaining-count
    prediction qualify, so a convex blend does too.
    """

    # remaining-gate estimate per removed edge; golay-scale decimation
    # removes ~1.7 edges per gate
    EDGE_SCALE = 0.59

    def __init__(self, net: PolicyValueNet, n: int, weight: float,
                 heuristic: str = "removable"):
        if heuristic not in ("removable", "edges"):
            raise ValueError(f"unknown heuristic {heuristic!r}")
        self.net = net
        self.n = n
        self.weight = weight
        self.heuristic = heuristic

    def _heuristic_value(self, adj) -> float:
        if self.heuristic == "edges":
            return adj.sum() / 2 * self.EDGE_SCALE
        return heuristic_value(adj)

    def _net_forward(self, bits_list):
        x = np.stack(
            [observation_vector(self.n, b, with_deltas=True) for b in bits_list]
        )
        with torch.no_grad():
            logits, values = self.net(torch.from_numpy(x.astype(np.float32)))
        return logits.numpy(), values.numpy()

    def value_batch(self, bits_list) -> np.ndarray:
        heur = np.array(
            [self._heuristic_value(adjacency(self.n, b)) for b in bits_list]
        )
        if self.weight >= 1.0:
            return heur
        _, net_values = self._net_forward(bits_list)
        net_values = np.maximum(net_values, 0.0)
        return self.weight * heur + (1.0 - self.weight) * net_values

    def policy(self, bits, action_indices) -> np.ndarray:
        heur = heuristic_policy(adjacency(self.n, bits), action_indices)
        if self.weight >= 1.0:
            return heur
        logits, _ = self._net_forward([bits])
        sub = torch.from_numpy(logits[0][action_indices])
        net_probs = torch.softmax(sub, dim=-1).numpy()
        p = self.weight * heur + (1.0 - self.weight) * net_probs
        return p / p.sum()


def _distill_dataset(ref_net, channel, code: str, n: int, rollouts: int,
                     gen: torch.Generator):
    """States from stochastic rollouts of a reference policy network
    (plain adjacency bits or bits + current-layer occupancy, per its
    obs_dim), labelled with its masked action distribution and the
    rollout's exact remaining-step count."""
    layer_ref = ref_net.obs_dim == bits_length(n) + n
    xs, pis, ys = [], [], []
    for _ in range(rollouts):
        reply = channel.reset(code=code)
        bits, done = reply["bits"], False
        occ = np.zeros(n, dtype=np.uint8)
        episode = []
        while not done:
            mask = action_mask(adjacency(n, bits))
            ref_in = bits.astype(np.float32)
            if layer_ref:
                ref_in = np.concatenate([ref_in, occ.astype(np.float32)])
            with torch.no_grad():
                logits, _ = ref_net(torch.from_numpy(ref_in)[None])
                logp = masked_log_policy(
                    logits, torch.from_numpy(mask[None])
                )[0]
            probs = torch.exp(logp)
            episode.append(
                (observation_vector(n, bits, with_deltas=True), probs.numpy())
            )
            action = int(torch.multinomial(probs, 1, generator=gen))
            triple = index_to_triple(n, action)
            update_layer_occupancy(occ, triple[1], triple[2])
            reply = channel.step(action=list(triple))
            bits, done = reply["bits"], reply["done"]
        for remaining, (x, p) in enumerate(reversed(episode), start=1):
            xs.append(x)
            pis.append(p)
            ys.append(float(remaining))
    return (
        torch.from_numpy(np.stack(xs).astype(np.float32)),
        torch.from_numpy(np.stack(pis).astype(np.float32)),
        torch.tensor(ys, dtype=torch.float32),
    )


def distill(net, ref_checkpoint: str | Path, channel, code: str, n: int,
            rollouts: int = 40, epochs: int = 60, batch_size: int = 256,
            seed: int = 0) -> dict:
    """Warm-start ``net`` from a trained policy checkpoint:
    regress its masked action distribution and the empirical
    remaining-step counts of its own rollouts."""
    ref_net, _ = load_checkpoint(ref_checkpoint)
    gen = torch.Generator().manual_seed(seed)
    x, pi, y = _distill_dataset(ref_net, channel, code, n, rollouts, gen)
    support = pi > 0
    opt = torch.optim.Adam(net.parameters(), lr=1e-3)
    last = {}
    for _ in range(epochs):
        perm = torch.randperm(len(x), generator=gen)
        for start in range(0, len(x), batch_size):
            idx = perm[start:start + batch_size]
            logits, values = net(x[idx])
            sup = support[idx]
            neg = torch.finfo(logits.dtype).min
            masked = torch.where(sup, logits, torch.full_like(logits, neg))
            logp = masked - torch.logsumexp(masked, dim=-1, keepdim=True)
            ce = -(pi[idx] * torch.where(sup, logp, torch.zeros_like(logp))
                   ).sum(-1).mean()
            mse = torch.mean((values - y[idx]) ** 2)
            loss = ce + mse
            opt.zero_grad()
            loss.backward()
            opt.step()
            last = {
                "distill_states": len(x),
                "distill_policy_ce": float(ce.detach()),
                "distill_value_mse": float(mse.detach()),
            }
    return last


def train_qusynth(code: str, cfg: AgentConfig | None = None,
                  out_dir: str | Path = ".",
                  init_checkpoint: str | Path | None = None) -> TrainResult:
    cfg = cfg or default_config(code)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    checkpoint_path = out_dir / f"qusynth_{code}.pt"
    curve_path = out_dir / f"qusynth_{code}_curve.json"
    circuit_path = out_dir / f"qusynth_{code}_best.txt"

    torch.manual_seed(cfg.seed)

    with BridgeServer() as server:
        channel = server.connect()
        n = channel.reset(code=code)["n"]
        n_actions = total_action_count(n)
        obs_dim = bits_length(n) + n_actions  # bits + per-action deltas
        net = PolicyValueNet(obs_dim, n_actions, cfg.hidden_units)
        distill_stats = {}
        if init_checkpoint is not None:
            distill_stats = distill(
                net, init_checkpoint, channel, code, n, seed=cfg.seed
            )
        opt = torch.optim.Adam(net.parameters(), lr=cfg.learning_rate, eps=1e-5)

        best = None
        curve: list[dict] = []
        t0 = time.monotonic()

        def meta(episode):
            return {
                "code": code, "algo": "qusynth", "episodes": episode,
                "best_tqg": None if best is None else best.tq_gate_count,
                "config": cfg.__dict__,
                **distill_stats,
            }

        for episode in range(cfg.episodes):
            progress = episode / max(cfg.episodes - 1, 1)
            weight = tether_weight(progress, cfg.tether_fraction)
            # full-tether episodes with the default heuristic are exactly
            # the environment's own search; skip the guidance round trips
            guidance = (
                None
                if weight >= 1.0 and cfg.q_heuristic == "removable"
                else BlendedGuidance(net, n, weight,
                                     heuristic=cfg.q_heuristic)
            )
            mcts = {
                "budget": cfg.mcts_budget, "k": cfg.mcts_k,
                "m": cfg.mcts_m, "seed": cfg.seed + episode,
            }
            if cfg.mcts_c is not None:
                mcts["c"] = cfg.mcts_c
            reply = channel.selfplay(code=code, mcts=mcts, guidance=guidance)

            if best is None or reply["tq_gate_count"] < best.tq_gate_count:
                found = compile_and_verify(channel, code, reply["actions"])
                if found is not None and (
                    best is None or found.tq_gate_count < best.tq_gate_count
                ):
                    best = found
                    circuit_path.write_text(found.circuit_text)

            losses = _update(net, opt, n, reply["records"], cfg)
            if losses is None:
                save_checkpoint(checkpoint_path, net, meta(episode))
                raise DivergenceError(checkpoint_path)
            curve.append(
                {
                    "episode": episode,
                    "tq_gate_count": reply["tq_gate_count"],
                    "best_tqg": None if best is None else best.tq_gate_count,
                    "tether_weight": weight,
                    "wall_time_s": time.monotonic() - t0,
                    **losses,
                }
            )
            curve_path.write_text(json.dumps(curve, indent=1))

        save_checkpoint(checkpoint_path, net, meta(cfg.episodes))
        channel.close()

    return TrainResult(
        code=code,
        timesteps=cfg.episodes,
        best=best,
        checkpoint_path=checkpoint_path,
        curve_path=curve_path,
        circuit_path=circuit_path if best is not None else None,
    )


def _update(net, opt, n, records, cfg: AgentConfig) -> dict | None:
    """One gradient step on an episode's self-play records; None on a
    non-finite loss."""
    xs, ys, pis, refs = [], [], [], []
    for rec in records:
        bits = decode_observation(rec["observation"])
        xs.append(observation_vector(n, bits, with_deltas=True))
        ys.append(float(rec["remaining"]))
        pi = np.zeros(total_action_count(n), dtype=np.float32)
        for key, p in rec["visits"].items():
            pi[int(key)] = p
        pis.append(pi)
        support = np.flatnonzero(pi > 0)
        ref = np.zeros_like(pi)
        ref[support] = heuristic_policy(adjacency(n, bits), support)
        refs.append(ref)

    x = torch.from_numpy(np.stack(xs).astype(np.float32))
    y = torch.tensor(ys, dtype=torch.float32)
    pi = torch.from_numpy(np.stack(pis))
    ref = torch.from_numpy(np.stack(refs))
    support = pi > 0

    # update_epochs gradient steps over the episode's records
    for _ in range(max(cfg.update_epochs, 1)):
        logits, values = net(x)
        neg = torch.finfo(logits.dtype).min
        masked = torch.where(support, logits, torch.full_like(logits, neg))
        log_probs = masked - torch.logsumexp(masked, dim=-1, keepdim=True)

        value_loss = torch.mean((values - y) ** 2)
        ce_loss = -(pi * torch.where(support, log_probs, torch.zeros_like(log_probs))).sum(-1).mean()
        probs = torch.exp(log_probs) * support
        safe_ref = torch.where(support, ref.clamp_min(1e-12), torch.ones_like(ref))
        kl = (probs * (torch.where(support, log_probs, torch.zeros_like(log_probs))
                       - torch.log(safe_ref))).sum(-1)
        kl_loss = kl.mean()
        loss = (
            cfg.q_value_coef * value_loss
            + cfg.q_policy_coef * ce_loss
            + cfg.q_kl_coef * kl_loss
        )
        if not torch.isfinite(loss):
            return None
        opt.zero_grad()
        loss.backward()
        torch.nn.utils.clip_grad_norm_(net.parameters(), 0.5)
        opt.step()
    return {
        "loss": float(loss.detach()),
        "value_loss": float(value_loss.detach()),
        "policy_ce": float(ce_loss.detach()),
        "kl_to_reference": float(kl_loss.detach()),
    }
