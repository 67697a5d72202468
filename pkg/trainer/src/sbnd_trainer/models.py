"""The two decoder architectures: a stacked GRU and a masked-attention
transformer. Both map [reliabilities (n) || bipolar syndrome (n-k)] to a
tanh-squashed estimate of the error pattern, so they never see sign(y).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
from torch import nn


@dataclass
class ModelSpec:
    arch: str                 # "gru" | "ecct"
    n: int
    k: int
    gru_layers: int = 5
    gru_steps: int = 3
    ecct_dim: int = 64
    ecct_layers: int = 6
    dropout: float | None = None  # None = architecture default (0.2 / 0.01)

    def __post_init__(self):
        if self.arch not in ("gru", "ecct"):
            raise ValueError(f"unknown architecture {self.arch!r}")
        if self.dropout is None:
            self.dropout = 0.2 if self.arch == "gru" else 0.01

    @property
    def input_width(self) -> int:
        return 2 * self.n - self.k

    @property
    def hidden(self) -> int:
        # fixed relation for the stacked GRU; not a free hyperparameter
        return 6 * (2 * self.n - self.k)

    @property
    def label(self) -> str:
        if self.arch == "gru":
            return f"GRU({self.gru_layers},{self.gru_steps})"
        return f"ECCT({self.ecct_dim},{self.ecct_layers})"


def make_inputs(reliab: np.ndarray, s: np.ndarray) -> np.ndarray:
    """[|y| normalized || bipolar syndrome] with 0 -> +1, 1 -> -1."""
    bipolar = 1.0 - 2.0 * s.astype(np.float32)
    return np.concatenate([reliab.astype(np.float32), bipolar], axis=-1)


class GruDecoder(nn.Module):
    """Stacked GRU over the input replicated across time steps; bias terms
    are dropped (they do not help and cost parameters)."""

    def __init__(self, spec: ModelSpec):
        super().__init__()
        self.spec = spec
        self.gru = nn.GRU(spec.input_width, spec.hidden,
                          num_layers=spec.gru_layers, bias=False,
                          batch_first=True,
                          dropout=spec.dropout if spec.gru_layers > 1 else 0.0)
        self.out = nn.Linear(spec.hidden, spec.n)

    def forward(self, x):
        rep = x.unsqueeze(1).expand(-1, self.spec.gru_steps, -1)
        seq, _ = self.gru(rep)
        return torch.tanh(self.out(seq[:, -1]))


def attention_mask(H: np.ndarray) -> np.ndarray:
    """Allowed-attention mask over [n bit positions || n-k check positions].

    Positions attend within each parity check: bits of a check couple to
    each other and to the check's own syndrome position.
    """
    nk, n = H.shape
    size = n + nk
    mask = np.eye(size, dtype=bool)
    for i in range(nk):
        idx = np.flatnonzero(H[i])
        mask[n + i, idx] = True
        mask[idx, n + i] = True
        mask[np.ix_(idx, idx)] = True
    return mask


class _EncoderLayer(nn.Module):
    def __init__(self, dim, heads, dropout, attn_dropout=0.1):
        super().__init__()
        self.norm1 = nn.LayerNorm(dim)
        self.norm2 = nn.LayerNorm(dim)
        self.attn = nn.MultiheadAttention(dim, heads, batch_first=True)
        self.attn_drop = nn.Dropout(attn_dropout)
        self.ff = nn.Sequential(nn.Linear(dim, 4 * dim), nn.GELU(),
                                nn.Linear(4 * dim, dim), nn.Dropout(dropout))

    def forward(self, x, not_allowed):
        h = self.norm1(x)
        a, _ = self.attn(h, h, h, attn_mask=not_allowed, need_weights=False)
        x = x + self.attn_drop(a)
        return x + self.ff(self.norm2(x))


class EcctDecoder(nn.Module):
    """Masked-attention transformer: each input scalar is embedded by a
    learned direction, encoder layers attend only along the code structure,
    and a 1-dim readout folds the sequence back to n outputs."""

    HEADS = 8  # fixed

    def __init__(self, spec: ModelSpec, H: np.ndarray):
        super().__init__()
        self.spec = spec
        width = spec.input_width
        self.embed = nn.Parameter(torch.empty(width, spec.ecct_dim))
        nn.init.xavier_uniform_(self.embed)
        self.layers = nn.ModuleList(
            _EncoderLayer(spec.ecct_dim, self.HEADS, spec.dropout)
            for _ in range(spec.ecct_layers))
        self.final_norm = nn.LayerNorm(spec.ecct_dim)
        self.to_scalar = nn.Linear(spec.ecct_dim, 1)
        self.to_bits = nn.Linear(width, spec.n)
        allowed = attention_mask(H)
        self.register_buffer("not_allowed", torch.from_numpy(~allowed))

    def forward(self, x):
        h = x.unsqueeze(-1) * self.embed
        for layer in self.layers:
            h = layer(h, self.not_allowed)
        h = self.to_scalar(self.final_norm(h)).squeeze(-1)
        return torch.tanh(self.to_bits(h))


def build_model(spec: ModelSpec, H: np.ndarray | None = None) -> nn.Module:
    if spec.arch == "gru":
        return GruDecoder(spec)
    if H is None:
        raise ValueError("the transformer needs the parity-check matrix")
    return EcctDecoder(spec, H)


def param_count(model: nn.Module) -> int:
    return sum(p.numel() for p in model.parameters())


def infer_bits(model: nn.Module, inputs: torch.Tensor) -> torch.Tensor:
    """Hard pattern decisions: e_i = 1 iff the activation is negative
    (Pr(e_i=1) = (1 - e_hat)/2 > 1/2); exact zero maps to 0."""
    model.eval()
    with torch.no_grad():
        ehat = model(inputs)
    return (ehat < 0).to(torch.uint8)
