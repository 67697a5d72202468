import math

import numpy as np
import pytest
import torch

from sbnd_trainer import bipolar_bce


def test_zero_activation_costs_one_bit():
    for target in (0.0, 1.0):
        e = torch.full((4, 8), target, dtype=torch.float64)
        ehat = torch.zeros(4, 8, dtype=torch.float64)
        assert float(bipolar_bce(e, ehat)) == pytest.approx(1.0, abs=1e-12)


def test_confident_correct_costs_nothing():
    eps = 1e-6
    e = torch.tensor([[0.0, 1.0]], dtype=torch.float64)
    ehat = torch.tensor([[1.0 - eps, -(1.0 - eps)]], dtype=torch.float64)
    # -log2(1 - eps/2) per position
    expected = -math.log2(1.0 - eps / 2.0)
    assert float(bipolar_bce(e, ehat)) == pytest.approx(expected, rel=1e-6)


def test_confident_wrong_is_expensive():
    eps = 1e-6
    e = torch.tensor([[0.0]], dtype=torch.float64)
    ehat = torch.tensor([[-(1.0 - eps)]], dtype=torch.float64)
    expected = -math.log2(eps / 2.0)
    assert float(bipolar_bce(e, ehat)) == pytest.approx(expected, rel=1e-6)


def test_loss_nonnegative_random():
    rng = np.random.default_rng(1)
    for _ in range(50):
        e = torch.from_numpy(rng.integers(0, 2, (16, 9)).astype(np.float64))
        ehat = torch.from_numpy(rng.uniform(-0.999, 0.999, (16, 9)))
        assert float(bipolar_bce(e, ehat)) >= 0.0


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(2)
    e = torch.from_numpy(rng.integers(0, 2, (5, 7)).astype(np.float64))
    ehat = torch.from_numpy(rng.uniform(-0.95, 0.95, (5, 7)))
    ehat.requires_grad_(True)
    loss = bipolar_bce(e, ehat)
    loss.backward()
    grad = ehat.grad.numpy()
    h = 1e-6
    with torch.no_grad():
        for i in range(5):
            for j in range(7):
                for sign in (1,):
                    up = ehat.detach().clone()
                    dn = ehat.detach().clone()
                    up[i, j] += h
                    dn[i, j] -= h
                    fd = (float(bipolar_bce(e, up)) -
                          float(bipolar_bce(e, dn))) / (2 * h)
                    rel = abs(fd - grad[i, j]) / max(abs(fd), 1e-12)
                    assert rel < 1e-4, (i, j, fd, grad[i, j])


def test_gradient_analytic_form():
    # per element: d/de_hat = [e/(1-e_hat) - (1-e)/(1+e_hat)] / ln(2) / N
    e = torch.tensor([[1.0, 0.0]], dtype=torch.float64)
    ehat = torch.tensor([[0.3, -0.4]], dtype=torch.float64,
                        requires_grad=True)
    loss = bipolar_bce(e, ehat)
    loss.backward()
    ln2 = math.log(2.0)
    n = 2.0
    expect = np.array([[1.0 / ((1 - 0.3) * ln2) / n,
                        -1.0 / ((1 - 0.4) * ln2) / n]])
    assert np.allclose(ehat.grad.numpy(), expect, rtol=1e-12)
