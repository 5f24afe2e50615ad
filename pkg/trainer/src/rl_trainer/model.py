"""Policy/value network and checkpointing."""

from __future__ import annotations

import torch
from torch import nn


def _layer_init(layer: nn.Linear, std: float) -> nn.Linear:
    nn.init.orthogonal_(layer.weight, std)
    nn.init.constant_(layer.bias, 0.0)
    return layer


class PolicyValueNet(nn.Module):
    """MLP with two hidden layers, a policy head over the full canonical
    action space, and a scalar value head.

    The policy head is initialized near zero so an untrained network is
    close to uniform over whatever mask it is given.
    """

    def __init__(self, obs_dim: int, n_actions: int, hidden_units: int = 64):
        super().__init__()
        self.obs_dim = obs_dim
        self.n_actions = n_actions
        self.hidden_units = hidden_units
        self.trunk = nn.Sequential(
            _layer_init(nn.Linear(obs_dim, hidden_units), std=2**0.5),
            nn.Tanh(),
            _layer_init(nn.Linear(hidden_units, hidden_units), std=2**0.5),
            nn.Tanh(),
        )
        self.policy_head = _layer_init(nn.Linear(hidden_units, n_actions), std=0.01)
        self.value_head = _layer_init(nn.Linear(hidden_units, 1), std=1.0)

    def forward(self, obs: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        h = self.trunk(obs)
        return self.policy_head(h), self.value_head(h).squeeze(-1)


def masked_log_policy(logits: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
    """Log-probabilities over the masked action set (rows of all-False
    masks are invalid and must not occur)."""
    neg = torch.finfo(logits.dtype).min
    masked = torch.where(mask, logits, torch.full_like(logits, neg))
    return masked - torch.logsumexp(masked, dim=-1, keepdim=True)


def masked_entropy(log_probs: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
    p = torch.exp(log_probs) * mask
    return -(p * torch.where(mask, log_probs, torch.zeros_like(log_probs))).sum(-1)


def save_checkpoint(path, net: PolicyValueNet, meta: dict):
    torch.save(
        {
            "state_dict": net.state_dict(),
            "obs_dim": net.obs_dim,
            "n_actions": net.n_actions,
            "hidden_units": net.hidden_units,
            "meta": meta,
        },
        path,
    )


def load_checkpoint(path) -> tuple[PolicyValueNet, dict]:
    blob = torch.load(path, map_location="cpu", weights_only=True)
    net = PolicyValueNet(blob["obs_dim"], blob["n_actions"], blob["hidden_units"])
    net.load_state_dict(blob["state_dict"])
    net.eval()
    return net, blob["meta"]
