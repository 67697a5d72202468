import numpy as np
import pytest

from sbnd_trainer import load_code


def test_load_code(code15):
    assert (code15.n, code15.k, code15.d_min) == (15, 7, 5)
    assert code15.name == "BCH_15_7_5"
    assert code15.H.shape == (8, 15)
    assert code15.G.shape == (7, 15)
    # systematic: identity prefix and G H^T = 0
    assert np.array_equal(code15.G[:, :7], np.eye(7, dtype=np.uint8))
    assert not ((code15.G @ code15.H.T) % 2).any()


def test_encode_and_syndrome(code15):
    rng = np.random.default_rng(0)
    infos = rng.integers(0, 2, size=(50, 7), dtype=np.uint8)
    cws = code15.encode_batch(infos)
    assert not code15.syndrome_batch(cws).any()
    flipped = cws.copy()
    flipped[:, 3] ^= 1
    assert code15.syndrome_batch(flipped).any(axis=1).all()


def test_rejects_malformed(tmp_path):
    p = tmp_path / "bad.code"
    p.write_text("n=7\nk=4\ndmin=3\nff\n")
    with pytest.raises(ValueError):
        load_code(p)
