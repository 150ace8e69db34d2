import numpy as np

from hybridstream import dhbm, recognition
from hybridstream.numerics import make_rng, sigmoid


def small_net(seed=0, dims=(3, 4, 3)):
    model = dhbm.HybridParams.initialize(dims[0], list(dims[1:]), 2,
                                         make_rng(seed), weight_std=0.5)
    return model, recognition.init_from_model(model)


def test_init_copies_model_weights():
    model, rec = small_net()
    for lp, layer in zip(model.layers, rec.layers):
        assert np.array_equal(lp.W, layer.R)
        assert np.array_equal(lp.b_hidden, layer.b)
    # independent storage after init
    rec.layers[0].R += 1.0
    assert not np.array_equal(model.layers[0].W, rec.layers[0].R)


def test_recognize_doubling():
    _, rec = small_net()
    x = make_rng(1).random((2, 3))
    v = recognition.recognize(rec, x)
    expect0 = sigmoid(2.0 * (x @ rec.layers[0].R.T) + rec.layers[0].b)
    assert np.allclose(v[0], expect0, atol=1e-12)
    expect1 = sigmoid(expect0 @ rec.layers[1].R.T + rec.layers[1].b)
    assert np.allclose(v[1], expect1, atol=1e-12)


def test_kl_loss_minimized_at_target():
    _, rec = small_net()
    x = make_rng(2).random((3, 3))
    v = recognition.recognize(rec, x)
    at_target = recognition.kl_loss(v, v)
    perturbed = [np.clip(m + 0.1, 0.0, 1.0) for m in v]
    assert recognition.kl_loss(v, perturbed) > at_target - 1e-12


def test_gradients_vanish_at_target():
    _, rec = small_net()
    x = make_rng(3).random((2, 3))
    v = recognition.recognize(rec, x)
    grads = recognition.rec_gradients(rec, x, v)
    for g in grads.layers:
        assert np.allclose(g.R, 0.0, atol=1e-12)
        assert np.allclose(g.b, 0.0, atol=1e-12)


def test_gradients_match_finite_differences():
    from hybridstream.checks import gradcheck_recognition
    assert gradcheck_recognition() < 1e-4


def test_rec_update_descends_loss():
    _, rec = small_net(5)
    rng = make_rng(6)
    x = rng.random((4, 3))
    mu = [rng.random((4, 4)), rng.random((4, 3))]
    before = recognition.kl_loss(recognition.recognize(rec, x), mu)
    for _ in range(50):
        g = recognition.rec_gradients(rec, x, mu)
        recognition.rec_update(rec, g, None, 0.1, 0.0)
    after = recognition.kl_loss(recognition.recognize(rec, x), mu)
    assert after < before


def test_rec_update_handles_missing_sides():
    _, rec = small_net(7)
    x = make_rng(8).random((2, 3))
    mu = recognition.recognize(rec, x)
    mu = [np.clip(m + 0.2, 0, 1) for m in mu]
    g = recognition.rec_gradients(rec, x, mu)
    before = [l.R.copy() for l in rec.layers]
    recognition.rec_update(rec, None, g, 0.1, 0.5)
    assert not np.array_equal(before[0], rec.layers[0].R)
