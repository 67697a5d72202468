"""BPSK over the binary-input AWGN channel: transmission, LLRs, hard
decisions, noise-weight statistics, and the weight-biased generator used
for importance-style dataset construction.

All randomness flows through counter-based Philox streams keyed by
(master_seed, *path) so that parallel generation replays bit-identically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erfc, ndtr, ndtri

from .codes import LinearCode

# stream-domain tags; keep distinct so different subsystems never share a stream
DOMAIN_BUILD = 1
DOMAIN_EVAL = 2
DOMAIN_ADHOC = 9


def stream_rng(master_seed: int, *path: int) -> np.random.Generator:
    """Independent Philox stream for (master_seed, *path)."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence((master_seed,) + path)))


@dataclass(frozen=True)
class ChannelParams:
    """E_b/N_0 operating point for a rate-R code; sigma^2 = 1/(2 R Eb/N0)."""

    ebn0_db: float
    rate: float

    def __post_init__(self):
        if not 0.0 < self.rate <= 1.0:
            raise ValueError(f"rate {self.rate} outside (0, 1]")

    @property
    def ebn0_linear(self) -> float:
        return 10.0 ** (self.ebn0_db / 10.0)

    @property
    def sigma2(self) -> float:
        return 1.0 / (2.0 * self.rate * self.ebn0_linear)

    @property
    def sigma(self) -> float:
        return self.sigma2 ** 0.5

    @classmethod
    def for_code(cls, code: LinearCode, ebn0_db: float) -> "ChannelParams":
        return cls(ebn0_db=ebn0_db, rate=code.k / code.n)


def hard_error_prob(params: ChannelParams) -> float:
    """Raw hard-decision bit error probability p_b = erfc(sqrt(R Eb/N0)) / 2."""
    return 0.5 * erfc(np.sqrt(params.rate * params.ebn0_linear))


@dataclass
class ReceivedWord:
    """Channel output with every decoder-facing view derived once."""

    y: np.ndarray            # raw channel output
    llr: np.ndarray          # (2 / sigma^2) * y
    z: np.ndarray            # hard decisions, z_i = 0 iff y_i >= 0
    s: np.ndarray            # syndrome of z
    reliab_norm: np.ndarray  # |y| / max|y|, in [0, 1] with max exactly 1


def _derive(code: LinearCode, y: np.ndarray, sigma2: float) -> ReceivedWord:
    llr = (2.0 / sigma2) * y
    z = (y < 0).astype(np.uint8)
    s = code.syndrome(z)
    mags = np.abs(y)
    reliab = mags / mags.max()
    return ReceivedWord(y=y, llr=llr, z=z, s=s, reliab_norm=reliab)


def transmit(code: LinearCode, codeword: np.ndarray, params: ChannelParams,
             rng: np.random.Generator) -> ReceivedWord:
    """BPSK-modulate (x = (-1)^c), add N(0, sigma^2) noise, derive LLRs etc."""
    c = np.asarray(codeword, dtype=np.uint8)
    x = 1.0 - 2.0 * c
    while True:
        y = x + params.sigma * rng.standard_normal(code.n)
        if np.abs(y).max() > 0.0:  # all-zero output is measure zero; redraw
            return _derive(code, y, params.sigma2)


@dataclass
class NoiseWeightDistribution:
    """Probability mass function over Hamming weights 0..n."""

    pmf: np.ndarray

    def __post_init__(self):
        self.pmf = np.asarray(self.pmf, dtype=np.float64)
        if self.pmf.ndim != 1 or len(self.pmf) < 1:
            raise ValueError("pmf must be a 1-D weight-indexed vector")
        if (self.pmf < 0).any():
            raise ValueError("pmf entries must be nonnegative")
        if abs(self.pmf.sum() - 1.0) > 1e-12:
            raise ValueError(f"pmf sums to {self.pmf.sum()!r}, not 1")

    @property
    def n(self) -> int:
        return len(self.pmf) - 1

    @classmethod
    def point_mass(cls, w: int, n: int) -> "NoiseWeightDistribution":
        pmf = np.zeros(n + 1)
        pmf[w] = 1.0
        return cls(pmf)

    @classmethod
    def uniform_weights(cls, lo: int, hi: int, n: int) -> "NoiseWeightDistribution":
        if not 0 <= lo <= hi <= n:
            raise ValueError(f"bad weight range [{lo}, {hi}] for n={n}")
        pmf = np.zeros(n + 1)
        pmf[lo:hi + 1] = 1.0 / (hi - lo + 1)
        return cls(pmf)

    def sample(self, rng: np.random.Generator, size=None):
        return rng.choice(len(self.pmf), size=size, p=self.pmf)


def channel_weight_pmf(params: ChannelParams, n: int) -> NoiseWeightDistribution:
    """Binomial weight distribution of hard errors Binom(n, p_b)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    from scipy.stats import binom
    pmf = binom.pmf(np.arange(n + 1), n, hard_error_prob(params))
    return NoiseWeightDistribution(pmf / pmf.sum())


def _truncated_half_normal(mu, sigma, u, negative_side):
    """Inverse-CDF draw of N(mu, sigma^2) restricted to y<0 or y>=0.

    u is uniform in [0,1). The boundary is nudged so the sign constraint
    holds exactly even when ndtri/ndtr round across zero.
    """
    f0 = ndtr((0.0 - mu) / sigma)  # P(y < 0)
    q = np.where(negative_side, u * f0, f0 + u * (1.0 - f0))
    q = np.clip(q, 1e-300, 1.0 - 1e-16)
    y = mu + sigma * ndtri(q)
    y = np.where(negative_side, np.minimum(y, -np.finfo(float).tiny),
                 np.maximum(y, 0.0))
    return y


def transmit_biased(code: LinearCode, codeword: np.ndarray,
                    params: ChannelParams, input_pmf: NoiseWeightDistribution,
                    rng: np.random.Generator) -> ReceivedWord:
    """Transmit with the hard-error weight forced to w ~ input_pmf.

    Draws w, picks a uniform size-w flip set, and samples each position from
    the half-line of N((-1)^c_i, sigma^2) that realizes (or preserves) the
    hard decision. The resulting word has exactly w hard errors.
    """
    if input_pmf.n != code.n:
        raise ValueError(f"input pmf covers 0..{input_pmf.n}, code n={code.n}")
    c = np.asarray(codeword, dtype=np.uint8)
    while True:
        w = int(input_pmf.sample(rng))
        flip = np.zeros(code.n, dtype=bool)
        if w:
            flip[rng.choice(code.n, size=w, replace=False)] = True
        mu = 1.0 - 2.0 * c
        # flipped position: hard decision z != c; z=1 needs y<0, z=0 needs y>=0
        z_target = c ^ flip
        negative_side = z_target == 1
        y = _truncated_half_normal(mu, params.sigma, rng.random(code.n),
                                   negative_side)
        if np.abs(y).max() > 0.0:
            return _derive(code, y, params.sigma2)


def transmit_zero_batch(code: LinearCode, params: ChannelParams,
                        rng: np.random.Generator, batch: int) -> dict:
    """Vectorized all-zero-codeword transmissions (builder hot path)."""
    y = 1.0 + params.sigma * rng.standard_normal((batch, code.n))
    return _derive_batch(code, y, params.sigma2)


def transmit_biased_zero_batch(code: LinearCode, params: ChannelParams,
                               input_pmf: NoiseWeightDistribution,
                               rng: np.random.Generator, batch: int) -> dict:
    """Vectorized weight-biased all-zero-codeword transmissions."""
    n = code.n
    w = input_pmf.sample(rng, size=batch).astype(np.int64)
    ranks = np.argsort(np.argsort(rng.random((batch, n)), axis=1), axis=1)
    flip = ranks < w[:, None]
    negative_side = flip  # all-zero codeword: flip means z=1 means y<0
    y = _truncated_half_normal(np.ones((batch, n)), params.sigma,
                               rng.random((batch, n)), negative_side)
    return _derive_batch(code, y, params.sigma2)


def _derive_batch(code: LinearCode, y: np.ndarray, sigma2: float) -> dict:
    z = (y < 0).astype(np.uint8)
    s = code.syndrome_batch(z)
    mags = np.abs(y)
    peak = mags.max(axis=1, keepdims=True)
    peak[peak == 0.0] = 1.0  # measure-zero guard; such rows carry z == 0 anyway
    return {
        "y": y,
        "llr": (2.0 / sigma2) * y,
        "z": z,
        "s": s,
        "reliab_norm": mags / peak,
        "nonzero_syndrome": s.any(axis=1),
    }


def on_demand_stream(code: LinearCode, params: ChannelParams, batch: int,
                     rng: np.random.Generator):
    """Endless (ReceivedWord, e_chan) pairs with nonzero syndrome.

    The transmitted codeword is fixed to all-zero, so e_chan == z. Words are
    generated `batch` at a time and the zero-syndrome ones are dropped.
    """
    if batch < 1:
        raise ValueError("batch must be >= 1")
    while True:
        out = transmit_zero_batch(code, params, rng, batch)
        for i in np.flatnonzero(out["nonzero_syndrome"]):
            rw = ReceivedWord(y=out["y"][i], llr=out["llr"][i], z=out["z"][i],
                              s=out["s"][i], reliab_norm=out["reliab_norm"][i])
            yield rw, out["z"][i].copy()
