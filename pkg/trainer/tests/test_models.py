import numpy as np
import torch

from sbnd_trainer import (ModelSpec, attention_mask, build_model, infer_bits,
                          make_inputs, param_count)


def test_gru_hidden_size_is_fixed():
    spec = ModelSpec(arch="gru", n=31, k=21)
    assert spec.hidden == 6 * (2 * 31 - 21) == 246
    model = build_model(spec)
    assert model.gru.hidden_size == 246
    assert model.gru.bias is False


def test_gru_param_count_matches_published():
    spec = ModelSpec(arch="gru", n=31, k=21, gru_layers=5, gru_steps=3)
    p = param_count(build_model(spec))
    assert 1_600_000 < p < 1_750_000  # the 1.7M figure


def test_ecct_param_count_matches_published(code15):
    # (31,21) instance; mask only needs some H with matching shape, so build
    # the real one through the code file fixture scaled up is not possible
    # here: use a synthetic H of the right shape
    H = np.zeros((10, 31), dtype=np.uint8)
    H[:, 21:] = np.eye(10, dtype=np.uint8)
    H[:, :21] = (np.arange(210).reshape(10, 21) % 3 == 0)
    spec = ModelSpec(arch="ecct", n=31, k=21, ecct_dim=64, ecct_layers=6)
    p = param_count(build_model(spec, H))
    assert 295_000 < p < 315_000  # the 304K figure


def test_ecct_heads_fixed(code15):
    spec = ModelSpec(arch="ecct", n=15, k=7, ecct_dim=32, ecct_layers=2)
    model = build_model(spec, code15.H)
    for layer in model.layers:
        assert layer.attn.num_heads == 8


def test_attention_mask_structure(code7):
    H = code7.H
    mask = attention_mask(H)
    n, nk = 7, 3
    assert mask.shape == (n + nk, n + nk)
    assert mask.diagonal().all()
    assert np.array_equal(mask, mask.T)
    for i in range(nk):
        idx = np.flatnonzero(H[i])
        assert mask[n + i, idx].all()
        for a in idx:
            assert mask[a, idx].all()
    # two checks never attend to each other directly
    assert not mask[n, n + 1]


def test_make_inputs_layout(code15):
    reliab = np.linspace(0.1, 1.0, 15, dtype=np.float32)[None, :]
    s = np.array([[1, 0, 1, 0, 0, 0, 0, 1]], dtype=np.uint8)
    x = make_inputs(reliab, s)
    assert x.shape == (1, 23)
    assert np.allclose(x[0, :15], reliab[0])
    assert x[0, 15] == -1.0 and x[0, 16] == 1.0 and x[0, 22] == -1.0


def test_eval_mode_is_deterministic(code15):
    for arch in ("gru", "ecct"):
        spec = ModelSpec(arch=arch, n=15, k=7, gru_layers=2, gru_steps=2,
                         ecct_dim=16, ecct_layers=2)
        torch.manual_seed(3)
        model = build_model(spec, code15.H)
        model.eval()
        x = torch.randn(8, 23)
        with torch.no_grad():
            a = model(x)
            b = model(x)
        assert torch.equal(a, b)


def test_dropout_changes_training_output(code15):
    spec = ModelSpec(arch="gru", n=15, k=7, gru_layers=2, gru_steps=2,
                     dropout=0.5)
    torch.manual_seed(4)
    model = build_model(spec)
    model.train()
    x = torch.randn(8, 23)
    assert not torch.equal(model(x), model(x))


def test_infer_bits_tie_is_zero():
    class Fixed(torch.nn.Module):
        def forward(self, x):
            return torch.tensor([[0.0, -0.2, 0.7, -1.0 + 1e-7]])

    bits = infer_bits(Fixed(), torch.zeros(1, 4))
    assert bits.tolist() == [[0, 1, 0, 1]]


def test_outputs_squashed(code15):
    for arch in ("gru", "ecct"):
        spec = ModelSpec(arch=arch, n=15, k=7, gru_layers=2, gru_steps=2,
                         ecct_dim=16, ecct_layers=1)
        torch.manual_seed(5)
        model = build_model(spec, code15.H)
        out = model(torch.randn(16, 23) * 5)
        assert (out.abs() <= 1.0).all()
