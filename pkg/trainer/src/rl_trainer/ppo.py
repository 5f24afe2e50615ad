"""Clipped-surrogate policy-gradient training on vectorized bridge envs.

The agent decimates the code's graph representative; each action costs a
constant reward of -1, so returns count (negated) remaining gates and the
value head learns remaining cost.  By default actions are masked to
those removing at least one edge, matching the environment's own mask;
with ``masked=False`` the full action set is available (edge count may
rise transiently) and episodes are cut off at ``max_episode_steps`` with
the final state's value bootstrapped into the reward.  The observation
is the graph's adjacency bits plus (by default, ``layer_obs``) the
qubits already occupied by a gate in the current circuit layer under
greedy layering, which lets the policy trade gate count against depth.
The loss is
``c_pi L_pi + c_V L_V + c_H H(pi)`` with a negative entropy coefficient
``c_H`` (entropy is maximized).
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .actions import index_to_triple, total_action_count
from .client import ServerPool
from .config import AgentConfig, default_config, schedule_value
from .features import (
    batch_action_deltas,
    batch_adjacency,
    bits_length,
    decode_observation,
    update_layer_occupancy,
)
from .model import (
    PolicyValueNet,
    masked_entropy,
    masked_log_policy,
    save_checkpoint,
)
from .verify import VerifiedCircuit, compile_and_verify


class DivergenceError(RuntimeError):
    """Non-finite loss; training aborted after writing a checkpoint."""

    def __init__(self, checkpoint_path):
        super().__init__(f"non-finite loss; checkpoint saved to {checkpoint_path}")
        self.checkpoint_path = checkpoint_path


@dataclass
class TrainResult:
    code: str
    timesteps: int
    best: VerifiedCircuit | None
    checkpoint_path: Path
    curve_path: Path
    circuit_path: Path | None


class _VecEnvs:
    """n parallel bridge sessions, sharded over a server pool and tracked
    client-side."""

    def __init__(self, pool: ServerPool, code: str, count: int,
                 masked: bool = True, max_steps: int | None = None):
        self.code = code
        self.masked = masked
        self.max_steps = max_steps
        self.channels = [pool.connect() for _ in range(count)]
        self.n = self.channels[0].reset(code=code, masked=masked)["n"]
        self.bits = np.zeros((count, bits_length(self.n)), dtype=np.uint8)
        # which qubits already carry a gate in the current circuit layer
        # (greedy layering); reset with the episode
        self.occ = np.zeros((count, self.n), dtype=np.uint8)
        self.logs: list[list] = [[] for _ in range(count)]
        for i, ch in enumerate(self.channels):
            self.bits[i] = ch.reset(code=self.code, masked=masked)["bits"]

    def masks(self) -> np.ndarray:
        if not self.masked:
            return np.ones(
                (len(self.channels), total_action_count(self.n)), dtype=bool
            )
        adjs = batch_adjacency(self.n, self.bits)
        return batch_action_deltas(adjs) >= 1

    def step_batch(
        self, action_indices
    ) -> tuple[list[tuple[bool, list | None]], dict[int, np.ndarray]]:
        """Step every env; returns (done, finished episode log or None)
        per env, plus {env: final observation bits} for envs cut off at
        the step cap (their value must be bootstrapped, unlike true
        terminations).  Requests are pipelined (one in flight per
        session) so the server threads work concurrently; finished envs
        are reset in place."""
        rids = []
        for i, idx in enumerate(action_indices):
            triple = index_to_triple(self.n, int(idx))
            self.logs[i].append(triple)
            update_layer_occupancy(self.occ[i], triple[1], triple[2])
            rids.append(self.channels[i].send_request("step", action=list(triple)))
        out = []
        truncated: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        reset_rids = {}
        for i, rid in enumerate(rids):
            reply = self.channels[i].receive_reply(rid)
            if reply["done"]:
                out.append((True, self.logs[i]))
            elif (self.max_steps is not None
                  and len(self.logs[i]) >= self.max_steps):
                truncated[i] = (decode_observation(reply["observation"]),
                                self.occ[i].copy())
                out.append((True, None))
            else:
                self.bits[i] = decode_observation(reply["observation"])
                out.append((False, None))
                continue
            self.logs[i] = []
            self.occ[i] = 0
            reset_rids[i] = self.channels[i].send_request(
                "reset", code=self.code, masked=self.masked
            )
        for i, rid in reset_rids.items():
            reply = self.channels[i].receive_reply(rid)
            self.bits[i] = decode_observation(reply["observation"])
        return out, truncated

    def close(self):
        for ch in self.channels:
            ch.close()


def train_ppo(code: str, cfg: AgentConfig | None = None,
              out_dir: str | Path = ".", servers: int = 1) -> TrainResult:
    cfg = cfg or default_config(code)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    checkpoint_path = out_dir / f"ppo_{code}.pt"
    curve_path = out_dir / f"ppo_{code}_curve.json"
    circuit_path = out_dir / f"ppo_{code}_best.txt"

    torch.manual_seed(cfg.seed)
    gen = torch.Generator().manual_seed(cfg.seed)

    with ServerPool(min(servers, cfg.n_envs)) as pool:
        envs = _VecEnvs(pool, code, cfg.n_envs, masked=cfg.masked,
                        max_steps=cfg.max_episode_steps)
        compile_channel = pool.connect()
        compile_channel.reset(code=code)
        try:
            return _train_loop(
                code, cfg, envs, compile_channel, gen,
                checkpoint_path, curve_path, circuit_path,
            )
        finally:
            compile_channel.close()
            envs.close()


def _train_loop(code, cfg, envs, compile_channel, gen,
                checkpoint_path, curve_path, circuit_path) -> TrainResult:
    n = envs.n
    n_actions = total_action_count(n)
    obs_dim = bits_length(n) + (n if cfg.layer_obs else 0)
    net = PolicyValueNet(obs_dim, n_actions, cfg.hidden_units)

    def current_obs() -> np.ndarray:
        x = envs.bits.astype(np.float32)
        if cfg.layer_obs:
            x = np.concatenate([x, envs.occ.astype(np.float32)], axis=1)
        return x
    opt = torch.optim.Adam(net.parameters(), lr=cfg.learning_rate, eps=1e-5)

    batch = cfg.n_envs * cfg.rollout_length
    n_updates = cfg.total_timesteps // batch if batch else 0
    timesteps = 0
    best: VerifiedCircuit | None = None
    best_proxy = np.inf
    recent_lengths: list[int] = []
    curve: list[dict] = []
    next_log = 0
    t0 = time.monotonic()

    def log_point(extra):
        curve.append(
            {
                "timesteps": timesteps,
                "best_tqg": None if best is None else best.tq_gate_count,
                "mean_episode_length": (
                    float(np.mean(recent_lengths[-200:])) if recent_lengths else None
                ),
                "wall_time_s": time.monotonic() - t0,
                **extra,
            }
        )
        curve_path.write_text(json.dumps(curve, indent=1))

    def meta():
        return {
            "code": code, "algo": "ppo", "timesteps": timesteps,
            "best_tqg": None if best is None else best.tq_gate_count,
            "config": cfg.__dict__,
        }

    for update in range(n_updates):
        progress = update / max(n_updates - 1, 1)
        lr = schedule_value(cfg.lr_schedule, cfg.learning_rate,
                            cfg.lr_end_fraction, progress)
        ent_coef = schedule_value(cfg.entropy_schedule, cfg.entropy_coef,
                                  cfg.entropy_end_fraction, progress)
        for group in opt.param_groups:
            group["lr"] = lr

        # -- rollout --------------------------------------------------
        obs_buf = np.zeros((cfg.rollout_length, cfg.n_envs, obs_dim),
                           dtype=np.float32)
        mask_buf = np.zeros((cfg.rollout_length, cfg.n_envs, n_actions),
                            dtype=bool)
        act_buf = np.zeros((cfg.rollout_length, cfg.n_envs), dtype=np.int64)
        logp_buf = np.zeros((cfg.rollout_length, cfg.n_envs), dtype=np.float32)
        val_buf = np.zeros((cfg.rollout_length, cfg.n_envs), dtype=np.float32)
        rew_buf = np.full((cfg.rollout_length, cfg.n_envs), -1.0, dtype=np.float32)
        done_buf = np.zeros((cfg.rollout_length, cfg.n_envs), dtype=np.float32)

        with torch.no_grad():
            for t in range(cfg.rollout_length):
                obs = current_obs()
                masks = envs.masks()
                logits, values = net(torch.from_numpy(obs))
                logp = masked_log_policy(logits, torch.from_numpy(masks))
                actions = torch.multinomial(torch.exp(logp), 1, generator=gen)
                actions = actions.squeeze(1)

                obs_buf[t] = obs
                mask_buf[t] = masks
                act_buf[t] = actions.numpy()
                logp_buf[t] = logp.gather(1, actions[:, None]).squeeze(1).numpy()
                val_buf[t] = values.numpy()

                results, truncated = envs.step_batch(act_buf[t])
                for i, (done, log) in enumerate(results):
                    if done:
                        done_buf[t, i] = 1.0
                        if log is None:
                            continue  # step-cap truncation, not a solution
                        recent_lengths.append(len(log))
                        if len(log) < best_proxy:
                            best_proxy = len(log)
                            found = compile_and_verify(compile_channel, code, log)
                            if found is not None and (
                                best is None
                                or found.tq_gate_count < best.tq_gate_count
                            ):
                                best = found
                                circuit_path.write_text(found.circuit_text)
                if truncated:
                    # bootstrap the cut-off state's value into the reward
                    idxs = sorted(truncated)
                    rows = []
                    for i in idxs:
                        bits, occ = truncated[i]
                        row = bits.astype(np.float32)
                        if cfg.layer_obs:
                            row = np.concatenate([row, occ.astype(np.float32)])
                        rows.append(row)
                    _, tv = net(torch.from_numpy(np.stack(rows)))
                    for j, i in enumerate(idxs):
                        rew_buf[t, i] += cfg.gamma * float(tv[j])
                timesteps += cfg.n_envs

            _, next_values = net(torch.from_numpy(current_obs()))
            next_values = next_values.numpy()

        # -- generalized advantage estimation -------------------------
        adv_buf = np.zeros_like(rew_buf)
        last_gae = np.zeros(cfg.n_envs, dtype=np.float32)
        for t in reversed(range(cfg.rollout_length)):
            next_v = next_values if t == cfg.rollout_length - 1 else val_buf[t + 1]
            nonterminal = 1.0 - done_buf[t]
            delta = rew_buf[t] + cfg.gamma * next_v * nonterminal - val_buf[t]
            last_gae = delta + cfg.gamma * cfg.gae_lambda * nonterminal * last_gae
            adv_buf[t] = last_gae
        ret_buf = adv_buf + val_buf

        # -- clipped-surrogate update ---------------------------------
        flat = lambda a: torch.from_numpy(a.reshape(batch, *a.shape[2:]))
        b_obs, b_mask = flat(obs_buf), flat(mask_buf)
        b_act, b_logp = flat(act_buf), flat(logp_buf)
        b_adv, b_ret = flat(adv_buf), flat(ret_buf)
        b_val = flat(val_buf)

        mb_size = batch // cfg.minibatches
        for _ in range(cfg.update_epochs):
            perm = torch.randperm(batch, generator=gen)
            for start in range(0, batch, mb_size):
                mb = perm[start : start + mb_size]
                logits, values = net(b_obs[mb])
                logp_all = masked_log_policy(logits, b_mask[mb])
                new_logp = logp_all.gather(1, b_act[mb][:, None]).squeeze(1)
                entropy = masked_entropy(logp_all, b_mask[mb]).mean()

                ratio = torch.exp(new_logp - b_logp[mb])
                adv = b_adv[mb]
                adv = (adv - adv.mean()) / (adv.std() + 1e-8)
                clipped = torch.clamp(
                    ratio, 1.0 - cfg.clip_epsilon, 1.0 + cfg.clip_epsilon
                )
                policy_loss = torch.max(-adv * ratio, -adv * clipped).mean()
                if cfg.value_clip:
                    v_clipped = b_val[mb] + torch.clamp(
                        values - b_val[mb],
                        -cfg.clip_epsilon, cfg.clip_epsilon,
                    )
                    value_loss = 0.5 * torch.max(
                        (values - b_ret[mb]) ** 2,
                        (v_clipped - b_ret[mb]) ** 2,
                    ).mean()
                else:
                    value_loss = 0.5 * ((values - b_ret[mb]) ** 2).mean()
                loss = (
                    policy_loss
                    + cfg.value_coef * value_loss
                    + (-ent_coef) * entropy  # c_H < 0: maximize entropy
                )
                if not torch.isfinite(loss):
                    save_checkpoint(checkpoint_path, net, meta())
                    log_point({"loss": float(loss.detach()), "lr": lr,
                               "diverged": True})
                    raise DivergenceError(checkpoint_path)

                opt.zero_grad()
                loss.backward()
                torch.nn.utils.clip_grad_norm_(net.parameters(), 0.5)
                opt.step()

        if timesteps >= next_log or update == n_updates - 1:
            next_log = timesteps + cfg.log_increment
            log_point(
                {
                    "loss": float(loss.detach()),
                    "policy_loss": float(policy_loss.detach()),
                    "value_loss": float(value_loss.detach()),
                    "entropy": float(entropy.detach()),
                    "lr": lr,
                    "entropy_coef": ent_coef,
                }
            )

    save_checkpoint(checkpoint_path, net, meta())
    if not curve:
        log_point({})
    return TrainResult(
        code=code,
        timesteps=timesteps,
        best=best,
        checkpoint_path=checkpoint_path,
        curve_path=curve_path,
        circuit_path=circuit_path if best is not None else None,
    )
