import itertools

import numpy as np
import pytest
from scipy.stats import chisquare, ks_2samp, norm

from sbndkit.channel import (ChannelParams, NoiseWeightDistribution,
                             channel_weight_pmf, hard_error_prob,
                             on_demand_stream, stream_rng, transmit,
                             transmit_biased, transmit_zero_batch)


def test_params_sigma2():
    p = ChannelParams(ebn0_db=3.0, rate=21 / 31)
    assert p.sigma2 == pytest.approx(1.0 / (2 * (21 / 31) * 10 ** 0.3))
    assert p.sigma2 > 0


def test_params_invalid_rate():
    with pytest.raises(ValueError):
        ChannelParams(ebn0_db=3.0, rate=0.0)
    with pytest.raises(ValueError):
        ChannelParams(ebn0_db=3.0, rate=1.5)


def test_transmit_derived_fields(bch31, params31_3db):
    rng = stream_rng(123, 0)
    cw = bch31.encode(np.arange(21, dtype=np.uint8) % 2)
    rw = transmit(bch31, cw, params31_3db, rng)
    assert np.allclose(rw.llr, 2.0 / params31_3db.sigma2 * rw.y)
    assert np.array_equal(rw.z, (rw.y < 0).astype(np.uint8))
    assert np.array_equal(rw.s, bch31.syndrome(rw.z))
    assert rw.reliab_norm.max() == 1.0
    assert rw.reliab_norm.min() >= 0.0
    assert np.all(np.sign(rw.llr) == np.sign(rw.y))


def test_transmit_noiseless_limit(bch31):
    # sigma -> 0: hard decisions reproduce the codeword, syndrome is zero
    params = ChannelParams.for_code(bch31, 80.0)
    rng = stream_rng(1, 0)
    cw = bch31.encode(np.ones(21, dtype=np.uint8))
    rw = transmit(bch31, cw, params, rng)
    assert np.array_equal(rw.z, cw)
    assert not rw.s.any()


def test_scaling_invariance(bch31, params31_3db):
    rng = stream_rng(2, 0)
    rw = transmit(bch31, np.zeros(31, dtype=np.uint8), params31_3db, rng)
    for alpha in (0.5, 2.0, 17.3):
        y = alpha * rw.y
        z = (y < 0).astype(np.uint8)
        assert np.array_equal(z, rw.z)
        assert np.array_equal(bch31.syndrome(z), rw.s)
        mags = np.abs(y)
        assert np.allclose(mags / mags.max(), rw.reliab_norm)


def test_deterministic_replay(bch31, params31_3db):
    cw = np.zeros(31, dtype=np.uint8)
    a = [transmit(bch31, cw, params31_3db, stream_rng(77, i)) for i in range(4)]
    b = [transmit(bch31, cw, params31_3db, stream_rng(77, i)) for i in range(4)]
    for x, y in zip(a, b):
        assert np.array_equal(x.y, y.y)
        assert np.array_equal(x.z, y.z)


def test_hard_error_rate_matches_formula(bch31, params31_3db):
    p_b = hard_error_prob(params31_3db)
    out = transmit_zero_batch(bch31, params31_3db, stream_rng(3, 0), 8000)
    n_bits = out["z"].size
    err = int(out["z"].sum())
    se = np.sqrt(p_b * (1 - p_b) / n_bits)
    assert abs(err / n_bits - p_b) < 3 * se


def test_weight_pmf_normalization(params31_3db):
    dist = channel_weight_pmf(params31_3db, 31)
    assert dist.pmf.sum() == pytest.approx(1.0, abs=1e-12)
    p_b = hard_error_prob(params31_3db)
    assert dist.pmf[0] == pytest.approx((1 - p_b) ** 31, rel=1e-12)


def _chi2_pvalue(counts, pmf):
    """Chi-square with right-tail bins merged so every expectation >= 5."""
    n = counts.sum()
    expected = pmf * n
    hi = len(expected)
    while hi > 1 and expected[hi - 1:].sum() < 5:
        hi -= 1
    obs = np.concatenate([counts[:hi - 1], [counts[hi - 1:].sum()]])
    exp = np.concatenate([expected[:hi - 1], [expected[hi - 1:].sum()]])
    return chisquare(obs, exp).pvalue


def test_weight_histogram_chi2(bch31, params31_3db):
    out = transmit_zero_batch(bch31, params31_3db, stream_rng(4, 0), 30_000)
    weights = out["z"].sum(axis=1)
    counts = np.bincount(weights, minlength=32)
    dist = channel_weight_pmf(params31_3db, 31)
    assert _chi2_pvalue(counts, dist.pmf) > 0.01


def test_noise_weight_distribution_validation():
    with pytest.raises(ValueError):
        NoiseWeightDistribution(np.array([0.5, 0.6]))
    with pytest.raises(ValueError):
        NoiseWeightDistribution(np.array([-0.1, 1.1]))
    d = NoiseWeightDistribution.uniform_weights(1, 4, 31)
    assert d.pmf[1:5].sum() == pytest.approx(1.0)
    assert d.pmf[0] == 0.0 and d.pmf[5:].sum() == 0.0


def test_biased_point_mass_zero(bch31, params31_3db):
    pmf = NoiseWeightDistribution.point_mass(0, 31)
    rng = stream_rng(5, 0)
    for _ in range(20):
        rw = transmit_biased(bch31, np.zeros(31, dtype=np.uint8),
                             params31_3db, pmf, rng)
        assert not rw.z.any()
        assert not rw.s.any()


def test_biased_exact_weight(bch31, params31_3db):
    rng = stream_rng(6, 0)
    cw = bch31.encode(rng.integers(0, 2, size=21, dtype=np.uint8))
    for w in (1, 3, 5, 12, 31):
        pmf = NoiseWeightDistribution.point_mass(w, 31)
        for _ in range(10):
            rw = transmit_biased(bch31, cw, params31_3db, pmf, rng)
            assert int((rw.z ^ cw).sum()) == w


def test_biased_with_channel_pmf_is_indistinguishable(bch31, params31_3db):
    # drawing the weight from the true binomial and then sampling each half-line
    # reconstructs the unconditioned channel; KS test on the first coordinate
    pmf = channel_weight_pmf(params31_3db, 31)
    cw = np.zeros(31, dtype=np.uint8)
    rng1 = stream_rng(7, 0)
    rng2 = stream_rng(8, 0)
    n_draws = 20_000
    y_plain = np.array([transmit(bch31, cw, params31_3db, rng1).y[0]
                        for _ in range(n_draws)])
    y_biased = np.array([transmit_biased(bch31, cw, params31_3db, pmf, rng2).y[0]
                         for _ in range(n_draws)])
    assert ks_2samp(y_plain, y_biased).pvalue > 0.01


def test_truncated_sampler_mean(bch31, params31_3db):
    # flipped bit of an all-zero codeword: y ~ N(1, sigma^2) conditioned on y<0
    pmf = NoiseWeightDistribution.point_mass(31, 31)
    rng = stream_rng(9, 0)
    draws = np.concatenate([
        transmit_biased(bch31, np.zeros(31, dtype=np.uint8), params31_3db,
                        pmf, rng).y
        for _ in range(4000)])
    sigma = params31_3db.sigma
    beta = -1.0 / sigma
    lam = norm.pdf(beta) / norm.cdf(beta)
    mean_expected = 1.0 - sigma * lam
    var_trunc = sigma ** 2 * (1.0 - beta * lam - lam ** 2)
    se = np.sqrt(var_trunc / len(draws))
    assert (draws < 0).all()
    assert abs(draws.mean() - mean_expected) < 3 * se


def test_on_demand_stream_filters_and_replays(bch31, params31_3db):
    stream = on_demand_stream(bch31, params31_3db, 512, stream_rng(10, 0))
    words = list(itertools.islice(stream, 300))
    for rw, e_chan in words:
        assert rw.s.any()
        assert np.array_equal(e_chan, rw.z)  # all-zero codeword
    again = list(itertools.islice(
        on_demand_stream(bch31, params31_3db, 512, stream_rng(10, 0)), 300))
    for (a, ea), (b, eb) in zip(words, again):
        assert np.array_equal(a.y, b.y)
        assert np.array_equal(ea, eb)


def test_on_demand_kept_fraction(bch31, params31_3db):
    out = transmit_zero_batch(bch31, params31_3db, stream_rng(11, 0), 40_000)
    kept = out["nonzero_syndrome"].mean()
    pmf0 = channel_weight_pmf(params31_3db, 31).pmf[0]
    # zero-weight words are always dropped; nonzero codeword hits are rare
    se = np.sqrt(pmf0 * (1 - pmf0) / 40_000)
    assert kept <= 1 - pmf0 + 3 * se
    assert kept >= 1 - pmf0 - 3 * se - 1e-3


def test_on_demand_weight_histogram(bch31, params31_3db):
    # kept-word weights follow the binomial restricted to nonzero syndrome
    stream = on_demand_stream(bch31, params31_3db, 2048, stream_rng(12, 0))
    weights = np.array([int(e.sum()) for _, e in itertools.islice(stream, 20_000)])
    counts = np.bincount(weights, minlength=32)
    pmf = channel_weight_pmf(params31_3db, 31).pmf.copy()
    pmf[0] = 0.0  # weight-0 words always have zero syndrome
    pmf /= pmf.sum()
    assert counts[0] == 0
    assert _chi2_pvalue(counts[1:], pmf[1:] / pmf[1:].sum()) > 0.01
