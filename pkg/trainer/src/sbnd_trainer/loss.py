"""Binary cross-entropy in bits between a 0/1 target pattern and the
tanh-squashed activations, via the inverse BPSK map Pr(e=1) = (1-e_hat)/2.

An activation of exactly 0 costs 1 bit per position regardless of the
target; +1 on a zero target (and -1 on a one target) costs nothing.
"""

from __future__ import annotations

import torch

EPS = 1e-12


def bipolar_bce(target: torch.Tensor, ehat: torch.Tensor) -> torch.Tensor:
    p_one = ((1.0 - ehat) / 2.0).clamp_min(EPS)
    p_zero = ((1.0 + ehat) / 2.0).clamp_min(EPS)
    bits = -(target * torch.log2(p_one) + (1.0 - target) * torch.log2(p_zero))
    return bits.mean()
