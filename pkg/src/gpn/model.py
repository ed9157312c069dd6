"""
Graph policy network: attention encoder, LSTM path aggregator and pointer
decoder over candidate next hops
"""
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import torch
import torch.nn as nn
import torch.nn.functional as F

from ..core.errors import InvalidActionError, InvalidConfigError, NonFiniteError
from ..rl.features import FEATURE_DIM, MAX_USER

ENCODERS = ("gat", "gcn")
AGGREGATORS = ("lstm", "none")
SCORERS = ("attention", "mlp")
VARIANTS = ("full", "gcn", "no-lstm", "mlp")


@dataclass(frozen=True)
class ModelConfig:
    hidden_dim: int = 128
    heads: int = 4
    gat_layers: int = 2
    feature_dim: int = FEATURE_DIM
    encoder: str = "gat"
    aggregator: str = "lstm"
    scorer: str = "attention"
    logit_scale: float = 10.0
    epsilon: float = 1e-15
    max_user: int = MAX_USER
    leaky_slope: float = 0.2
    # False: encode once per episode instead of after every step
    encode_per_step: bool = True

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.hidden_dim < 1 or self.heads < 1:
            raise InvalidConfigError("hidden_dim and heads must be positive")
        if self.hidden_dim % self.heads != 0:
            raise InvalidConfigError(
                f"hidden_dim {self.hidden_dim} is not divisible by {self.heads} heads")
        if self.gat_layers < 1:
            raise InvalidConfigError(f"gat_layers must be >= 1, got {self.gat_layers}")
        if self.feature_dim != FEATURE_DIM:
            raise InvalidConfigError(f"feature_dim must be {FEATURE_DIM}, got {self.feature_dim}")
        if self.encoder not in ENCODERS:
            raise InvalidConfigError(f"encoder must be one of {ENCODERS}, got {self.encoder!r}")
        if self.aggregator not in AGGREGATORS:
            raise InvalidConfigError(f"aggregator must be one of {AGGREGATORS}, got {self.aggregator!r}")
        if self.scorer not in SCORERS:
            raise InvalidConfigError(f"scorer must be one of {SCORERS}, got {self.scorer!r}")
        if not self.logit_scale > 0:
            raise InvalidConfigError(f"logit_scale must be > 0, got {self.logit_scale}")
        if not self.epsilon >= 0:
            raise InvalidConfigError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.max_user < 1:
            raise InvalidConfigError(f"max_user must be >= 1, got {self.max_user}")

    @property
    def variant(self) -> str:
        if self.encoder == "gcn":
            return "gcn"
        if self.aggregator == "none":
            return "no-lstm"
        if self.scorer == "mlp":
            return "mlp"
        return "full"


def variant_config(variant: str, base: ModelConfig = ModelConfig()) -> ModelConfig:
    """ModelConfig for an ablation variant; only the flagged component differs"""
    if variant == "full":
        return replace(base, encoder="gat", aggregator="lstm", scorer="attention")
    if variant == "gcn":
        return replace(base, encoder="gcn", aggregator="lstm", scorer="attention")
    if variant == "no-lstm":
        return replace(base, encoder="gat", aggregator="none", scorer="attention")
    if variant == "mlp":
        return replace(base, encoder="gat", aggregator="lstm", scorer="mlp")
    raise InvalidConfigError(f"unknown variant {variant!r}; expected one of {VARIANTS}")


def check_finite(tensor: torch.Tensor, layer: str) -> torch.Tensor:
    if not torch.isfinite(tensor).all():
        raise NonFiniteError(layer)
    return tensor


class GatLayer(nn.Module):
    """
    Multi-head graph attention over each node's neighborhood plus itself

    e_ij = LeakyReLU(a^T [W x_i || W x_j]); alpha_i. = softmax over j in N(i) u {i};
    heads are concatenated.
    """

    def __init__(self, in_dim: int, out_dim: int, heads: int, slope: float, final: bool):
        super().__init__()
        self.heads = heads
        self.head_dim = out_dim // heads
        self.slope = slope
        self.final = final
        self.W = nn.Linear(in_dim, out_dim, bias=False)
        self.a = nn.Parameter(torch.empty(heads, 2 * self.head_dim))
        nn.init.xavier_uniform_(self.W.weight)
        nn.init.xavier_uniform_(self.a)

    def attention(self, x: torch.Tensor, adj: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
        """(alpha[n, n, heads], Wx[n, heads, head_dim])"""
        n = x.shape[0]
        wx = self.W(x).view(n, self.heads, self.head_dim)
        left = (wx * self.a[:, :self.head_dim]).sum(-1)
        right = (wx * self.a[:, self.head_dim:]).sum(-1)
        scores = F.leaky_relu(left.unsqueeze(1) + right.unsqueeze(0), self.slope)
        neighborhood = (adj > 0) | torch.eye(n, dtype=torch.bool, device=x.device)
        scores = scores.masked_fill(~neighborhood.unsqueeze(-1), float("-inf"))
        return torch.softmax(scores, dim=1), wx

    def forward(self, x: torch.Tensor, adj: torch.Tensor) -> torch.Tensor:
        alpha, wx = self.attention(x, adj)
        h = torch.einsum("ijh,jhd->ihd", alpha, wx).reshape(x.shape[0], -1)
        return F.relu(h) if self.final else F.elu(h)


class GcnLayer(nn.Module):
    """Symmetric-normalized propagation D^-1/2 (A + I) D^-1/2 W x"""

    def __init__(self, in_dim: int, out_dim: int, final: bool):
        super().__init__()
        self.final = final
        self.W = nn.Linear(in_dim, out_dim, bias=False)
        nn.init.xavier_uniform_(self.W.weight)

    def forward(self, x: torch.Tensor, adj: torch.Tensor) -> torch.Tensor:
        a_hat = adj + torch.eye(adj.shape[0], dtype=adj.dtype, device=adj.device)
        d_inv_sqrt = a_hat.sum(1).pow(-0.5)
        norm = d_inv_sqrt.unsqueeze(1) * a_hat * d_inv_sqrt.unsqueeze(0)
        h = norm @ self.W(x)
        return F.relu(h) if self.final else F.elu(h)


class AttentionScorer(nn.Module):
    """logit_v = h^T tanh(W2 x_v + W3 h)"""

    def __init__(self, hidden: int):
        super().__init__()
        self.W2 = nn.Parameter(torch.empty(hidden, hidden))
        self.W3 = nn.Parameter(torch.empty(hidden, hidden))
        nn.init.xavier_uniform_(self.W2)
        nn.init.xavier_uniform_(self.W3)

    def forward(self, h: torch.Tensor, candidates: torch.Tensor) -> torch.Tensor:
        return torch.tanh(candidates @ self.W2.T + h @ self.W3.T) @ h


class MlpScorer(nn.Module):
    """Two-layer perceptron on [x_v || h]"""

    def __init__(self, hidden: int):
        super().__init__()
        self.fc1 = nn.Linear(2 * hidden, hidden)
        self.fc2 = nn.Linear(hidden, 1)

    def forward(self, h: torch.Tensor, candidates: torch.Tensor) -> torch.Tensor:
        pairs = torch.cat([candidates, h.expand(candidates.shape[0], -1)], dim=1)
        return self.fc2(torch.tanh(self.fc1(pairs))).squeeze(-1)


class GpnModel(nn.Module):
    def __init__(self, config: ModelConfig = ModelConfig()):
        super().__init__()
        self.config = config
        layers = []
        in_dim = config.feature_dim
        for i in range(config.gat_layers):
            final = i == config.gat_layers - 1
            if config.encoder == "gat":
                layers.append(GatLayer(in_dim, config.hidden_dim, config.heads, config.leaky_slope, final))
            else:
                layers.append(GcnLayer(in_dim, config.hidden_dim, final))
            in_dim = config.hidden_dim
        self.encoder = nn.ModuleList(layers)
        self.lstm: Optional[nn.LSTMCell] = (
            nn.LSTMCell(config.hidden_dim, config.hidden_dim) if config.aggregator == "lstm" else None)
        self.scorer = (AttentionScorer(config.hidden_dim) if config.scorer == "attention"
                       else MlpScorer(config.hidden_dim))

    def encode(self, features: torch.Tensor, adj: torch.Tensor) -> torch.Tensor:
        """Per-node embeddings (n, H)"""
        if features.shape[-1] != self.config.feature_dim or adj.shape != (features.shape[0],) * 2:
            raise InvalidConfigError(
                f"expected features (n, {self.config.feature_dim}) and adjacency (n, n), "
                f"got {tuple(features.shape)} and {tuple(adj.shape)}")
        h = check_finite(features, "input")
        for i, layer in enumerate(self.encoder):
            h = check_finite(layer(h, adj), f"encoder.{i}")
        return h

    def aggregate(self, path_embeddings: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
        """
        Summarize the partial path (first row: the user's embedding)

        Returns:
            (h, c); without an LSTM, h is the last embedding and c is zero
        """
        if self.lstm is None:
            last = path_embeddings[-1]
            return last, torch.zeros_like(last)
        hidden = path_embeddings.new_zeros(1, self.config.hidden_dim)
        cell = path_embeddings.new_zeros(1, self.config.hidden_dim)
        for row in path_embeddings:
            hidden, cell = self.lstm(row.unsqueeze(0), (hidden, cell))
        check_finite(hidden, "lstm")
        return hidden.squeeze(0), cell.squeeze(0)

    def pointer(self, h: torch.Tensor, candidates: torch.Tensor, mask: torch.Tensor,
                smooth: bool = True) -> torch.Tensor:
        """
        Next-hop distribution; `mask` is True for excluded nodes

        Masked logits are -inf after scaling, so their probability is exactly
        zero before the epsilon smoothing.
        """
        if bool(mask.all()):
            raise InvalidActionError("every candidate is masked")
        logits = check_finite(self.scorer(h, candidates), "scorer") * self.config.logit_scale
        logits = logits.masked_fill(mask, float("-inf"))
        probs = torch.softmax(logits, dim=0)
        if smooth:
            probs = probs + self.config.epsilon
            probs = probs / probs.sum()
        return check_finite(probs, "pointer")

    def forward(self, features: torch.Tensor, adj: torch.Tensor, path: torch.Tensor,
                mask: torch.Tensor, embeddings: Optional[torch.Tensor] = None) -> torch.Tensor:
        """Action probabilities for one decision; `path` holds node indices"""
        if embeddings is None:
            embeddings = self.encode(features, adj)
        h, _ = self.aggregate(embeddings[path])
        return self.pointer(h, embeddings, mask)
