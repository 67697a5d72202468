"""Trainer-side Monte Carlo FER measurement of a model in inference mode.

Random codewords, AWGN, zero-syndrome frames bypass the model (e-hat = 0);
a frame errs when the estimated pattern differs from the true one anywhere.
"""

from __future__ import annotations

import numpy as np
import torch

from .codefile import Code
from .models import infer_bits, make_inputs


def fer(model, code: Code, snr_db: float, min_errors: int = 100,
        max_frames: int = 200_000, seed: int = 0, batch: int = 4096) -> dict:
    rate = code.k / code.n
    sigma = float(np.sqrt(1.0 / (2.0 * rate * 10 ** (snr_db / 10))))
    rng = np.random.default_rng(seed)
    frames = frame_errors = bit_errors = 0
    model.eval()
    while frame_errors < min_errors and frames < max_frames:
        infos = rng.integers(0, 2, size=(batch, code.k), dtype=np.uint8)
        cws = code.encode_batch(infos)
        y = (1.0 - 2.0 * cws) + sigma * rng.standard_normal(cws.shape)
        z = (y < 0).astype(np.uint8)
        s = code.syndrome_batch(z)
        e_chan = z ^ cws
        nonzero = s.any(axis=1)
        # bypassed frames: e-hat = 0, error iff z lands on a wrong codeword
        w_bypass = e_chan[~nonzero].sum(axis=1)
        frame_errors += int((w_bypass > 0).sum())
        bit_errors += int(w_bypass.sum())
        if nonzero.any():
            mags = np.abs(y[nonzero])
            peak = mags.max(axis=1, keepdims=True)
            peak[peak == 0.0] = 1.0
            x = make_inputs((mags / peak).astype(np.float32), s[nonzero])
            e_hat = infer_bits(model, torch.from_numpy(x)).numpy()
            mism = (e_hat != e_chan[nonzero]).sum(axis=1)
            frame_errors += int((mism > 0).sum())
            bit_errors += int(mism.sum())
        frames += batch
    return {"snr_db": snr_db, "frames": frames, "frame_errors": frame_errors,
            "bit_errors": bit_errors, "fer": frame_errors / frames,
            "ber": bit_errors / (frames * code.n), "seed": seed}
