"""Training configuration with per-code defaults.

Each known code has a reference hyperparameter column; unknown codes get
the first (23-qubit) column, which is the smallest-scale setting.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass


@dataclass
class AgentConfig:
    # timesteps and parallelization
    total_timesteps: int = 2_200_000
    n_envs: int = 100
    log_increment: int = 96_000

    # PPO
    clip_epsilon: float = 0.14
    gamma: float = 0.953
    gae_lambda: float = 0.995
    rollout_length: int = 64
    entropy_coef: float = 0.003
    entropy_schedule: str = "constant"  # constant | cosine | linear
    entropy_end_fraction: float = 1.0
    value_coef: float = 0.44
    value_clip: bool = True  # PPO-style clipped value loss
    masked: bool = True  # restrict actions to net edge-removing ones
    max_episode_steps: int | None = None  # truncation cap (unmasked runs)
    layer_obs: bool = True  # append current-layer qubit occupancy to obs

    # optimizer
    learning_rate: float = 0.002
    lr_schedule: str = "cosine"  # constant | cosine | linear
    lr_end_fraction: float = 0.28
    update_epochs: int = 2
    minibatches: int = 2

    # network: an MLP with two hidden layers
    hidden_layers: int = 2
    hidden_units: int = 64

    # MCTS-guided training
    q_value_coef: float = 1.0
    q_policy_coef: float = 1.0
    q_kl_coef: float = 0.1
    q_heuristic: str = "removable"  # guidance value: removable | edges
    tether_fraction: float = 0.2  # heuristic blend decays linearly over this
    episodes: int = 200
    mcts_budget: int = 512
    mcts_k: int = 8
    mcts_m: int = 16
    mcts_c: float | None = None  # exploration constant; None = server default

    seed: int = 0

    def __post_init__(self):
        if self.hidden_layers != 2:
            raise ValueError("the policy/value network has two hidden layers")
        if not 64 <= self.hidden_units <= 512:
            raise ValueError("hidden_units must be in 64..512")
        if self.entropy_schedule not in ("constant", "cosine", "linear"):
            raise ValueError(f"unknown entropy schedule {self.entropy_schedule!r}")
        if self.lr_schedule not in ("constant", "cosine", "linear"):
            raise ValueError(f"unknown lr schedule {self.lr_schedule!r}")
        if not 0.0 <= self.tether_fraction <= 1.0:
            raise ValueError("tether_fraction must be in [0, 1]")
        if self.q_heuristic not in ("removable", "edges"):
            raise ValueError(f"unknown q_heuristic {self.q_heuristic!r}")

    def replace(self, **kw) -> "AgentConfig":
        return dataclasses.replace(self, **kw)


# Reference columns for the codes whose training setups are known.
CODE_DEFAULTS: dict[str, dict] = {
    "golay_23": dict(
        total_timesteps=2_200_000, n_envs=100, log_increment=96_000,
        clip_epsilon=0.14, gamma=0.953, gae_lambda=0.995, rollout_length=64,
        entropy_coef=0.003, entropy_schedule="constant", entropy_end_fraction=1.0,
        value_coef=0.44, learning_rate=0.002, lr_schedule="cosine",
        lr_end_fraction=0.28, update_epochs=2, minibatches=2, hidden_units=64,
    ),
}


def default_config(code: str, **overrides) -> AgentConfig:
    base = CODE_DEFAULTS.get(code, CODE_DEFAULTS["golay_23"])
    return AgentConfig(**{**base, **overrides})


def schedule_value(schedule: str, start: float, end_fraction: float,
                   progress: float) -> float:
    """Annealed coefficient at training progress in [0, 1]."""
    import math

    progress = min(max(progress, 0.0), 1.0)
    end = start * end_fraction
    if schedule == "constant":
        return start
    if schedule == "linear":
        return start + (end - start) * progress
    # cosine: smooth decay from start to end
    return end + (start - end) * 0.5 * (1.0 + math.cos(math.pi * progress))
