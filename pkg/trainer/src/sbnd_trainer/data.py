"""Training data sources: fixed dataset files and on-demand generation.

Every example is a pair (inputs, target) with inputs
[normalized reliabilities || bipolar syndrome]; only nonzero-syndrome words
are ever produced, matching what the decoder sees in operation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codefile import Code
from .models import make_inputs
from .records import TARGET_CHAN, TARGET_ML, load_dataset


@dataclass
class Batches:
    """One validation block plus an endless shuffled train-batch generator."""
    code: Code
    train_x: np.ndarray | None      # fixed sources only
    train_y: np.ndarray | None
    val_x: np.ndarray
    val_y: np.ndarray
    steps_per_epoch: int
    sample_generator: object        # callable(batch) -> (x, y) for on-demand

    @property
    def on_demand(self) -> bool:
        return self.train_x is None


class FixedSource:
    """Dataset file + target column selection ("ml" or "chan")."""

    def __init__(self, path, code: Code, target: str = "ml",
                 val_fraction: float = 0.02, seed: int = 0):
        arrays = load_dataset(path)
        h = arrays.header
        if (h.n, h.k) != (code.n, code.k):
            raise ValueError(f"dataset is for ({h.n},{h.k}), code is "
                             f"({code.n},{code.k})")
        self.code = code
        self.header = h
        if target == "ml":
            if h.target_kind != TARGET_ML:
                raise ValueError("dataset does not carry ML targets")
            targets = arrays.e_target
        elif target == "chan":
            if h.target_kind == TARGET_CHAN:
                targets = arrays.e_target
            elif arrays.e_chan is not None:
                targets = arrays.e_chan
            else:
                raise ValueError("dataset carries neither chan targets nor "
                                 "a stored e_chan column")
        else:
            raise ValueError(f"unknown target {target!r}")
        self.x = make_inputs(arrays.reliab, arrays.s)
        self.y = targets.astype(np.float32)
        self.val_fraction = val_fraction
        self.seed = seed

    def batches(self, batch: int) -> Batches:
        n_total = len(self.x)
        rng = np.random.default_rng(self.seed)
        order = rng.permutation(n_total)
        n_val = max(1, int(self.val_fraction * n_total))
        val_idx, train_idx = order[:n_val], order[n_val:]
        train_x = self.x[train_idx]
        train_y = self.y[train_idx]
        return Batches(code=self.code, train_x=train_x, train_y=train_y,
                       val_x=self.x[val_idx], val_y=self.y[val_idx],
                       steps_per_epoch=max(1, len(train_x) // batch),
                       sample_generator=None)


class OnDemandSource:
    """Fresh noisy all-zero-codeword words every step (never reused)."""

    def __init__(self, code: Code, snr_db: float, seed: int = 0,
                 val_size: int = 2048):
        self.code = code
        self.snr_db = snr_db
        rate = code.k / code.n
        self.sigma = float(np.sqrt(1.0 / (2.0 * rate * 10 ** (snr_db / 10))))
        self.rng = np.random.default_rng(seed)
        self.generated = 0  # kept (nonzero-syndrome) samples handed out
        self.val_size = val_size

    def _draw(self, count: int):
        xs, ys = [], []
        got = 0
        while got < count:
            y = 1.0 + self.sigma * self.rng.standard_normal((2 * count, self.code.n))
            z = (y < 0).astype(np.uint8)
            s = self.code.syndrome_batch(z)
            keep = s.any(axis=1)
            y, z, s = y[keep], z[keep], s[keep]
            mags = np.abs(y)
            peak = mags.max(axis=1, keepdims=True)
            peak[peak == 0.0] = 1.0
            xs.append(make_inputs((mags / peak).astype(np.float32), s))
            ys.append(z.astype(np.float32))  # true pattern: e_chan = z
            got += len(y)
        x = np.concatenate(xs)[:count]
        t = np.concatenate(ys)[:count]
        return x, t

    def batches(self, batch: int) -> Batches:
        val_x, val_y = self._draw(self.val_size)

        def generate(count):
            x, t = self._draw(count)
            self.generated += count
            return x, t

        return Batches(code=self.code, train_x=None, train_y=None,
                       val_x=val_x, val_y=val_y, steps_per_epoch=25,
                       sample_generator=generate)
