import numpy as np
import pytest

from hybridstream import dhbm, dhda, recognition
from hybridstream.numerics import make_rng, sigmoid


def setup_model(seed=0, d=4, hidden=(3, 3), c=2, std=0.5):
    model = dhbm.HybridParams.initialize(d, list(hidden), c, make_rng(seed),
                                         weight_std=std)
    return model, recognition.init_from_model(model)


def test_corrupt_identity_at_p0():
    rng = make_rng(0)
    v = rng.random((5, 7))
    assert np.array_equal(dhda.corrupt(make_rng(1), v, 0.0), v)


def test_corrupt_zeros_at_p1():
    v = make_rng(0).random((5, 7))
    assert np.array_equal(dhda.corrupt(make_rng(1), v, 1.0), np.zeros_like(v))


def test_corrupt_rejects_bad_probability():
    with pytest.raises(ValueError):
        dhda.corrupt(make_rng(0), np.ones(3), -0.1)


def test_corruption_rate_within_binomial_bounds():
    mask = dhda.corruption_mask(make_rng(2), (1000, 100), 0.15)
    surviving = mask.mean()
    assert 0.843 <= surviving <= 0.857


def test_encode_hand_case():
    # 1-unit chain with W1 x = 1 and (W2)' h2 = 1 gives sigma(2)
    model, _ = setup_model(d=1, hidden=(1, 1), std=0.0)
    model.layers[0].W[0, 0] = 1.0
    model.layers[1].W[0, 0] = 1.0
    h1 = dhda.encode_h(model, 0, np.array([[1.0]]), np.array([[1.0]]))
    assert np.allclose(h1, sigmoid(2.0), atol=1e-12)
    assert abs(float(h1[0, 0]) - 0.88080) < 1e-4


def test_decode_uses_tied_transpose():
    model, _ = setup_model(3)
    h = make_rng(4).random((2, 3))
    z = dhda.decode(model, 0, h)
    assert np.allclose(z, sigmoid(h @ model.layers[0].W
                                  + model.layers[0].b_visible), atol=1e-12)


def test_recon_cross_entropy_perfect_reconstruction():
    x = np.array([[1.0, 0.0, 1.0]])
    near = np.clip(x, 1e-9, 1 - 1e-9)
    assert dhda.recon_cross_entropy(x, near) < 1e-6


def test_recon_quadratic():
    x = np.zeros((2, 3))
    z = np.ones((2, 3))
    assert dhda.recon_quadratic(x, z) == pytest.approx(1.5)


def test_forward_shapes_and_determinism():
    model, rec = setup_model(5)
    x = make_rng(6).random((4, 4))
    s1 = dhda.dhda_forward(model, rec, x, make_rng(7), corruption_p=0.15)
    s2 = dhda.dhda_forward(model, rec, x, make_rng(7), corruption_p=0.15)
    assert np.array_equal(s1.input_hat, s2.input_hat)
    assert np.array_equal(s1.recons[0], s2.recons[0])
    assert s1.class_probs.shape == (4, 2)
    assert len(s1.hidden) == 2
    assert s1.recons[0].shape == x.shape


def test_forward_rejects_zero_steps():
    model, rec = setup_model()
    with pytest.raises(ValueError):
        dhda.dhda_forward(model, rec, np.ones((1, 4)), make_rng(0), num_steps=0)


def test_forward_no_corruption_matches_clean_encoding():
    model, rec = setup_model(8)
    x = make_rng(9).random((3, 4))
    state = dhda.dhda_forward(model, rec, x, make_rng(10), corruption_p=0.0)
    assert np.array_equal(state.input_hat, x)
    for h, h_hat in zip(state.hidden, state.hidden_hat):
        assert np.array_equal(h, h_hat)


def test_hybrid_loss_weighting():
    val = dhda.hybrid_loss_value(1.0, 2.0, 3.0, 4.0, alpha=1.0, beta=0.1)
    assert val == pytest.approx(3.0 + 0.7)
