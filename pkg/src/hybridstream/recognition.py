"""Weight-doubled feed-forward recognition network.

Produces the factorial posterior guess used to initialize mean-field
inference and is trained by cross-entropy toward the mean-field statistics
(the KL divergence up to a constant that does not depend on the network).
"""

from dataclasses import dataclass

import numpy as np

from .numerics import sigmoid, sigmoid_prime_from_output

EPS = 1e-7


@dataclass
class RecognitionLayer:
    R: np.ndarray
    b: np.ndarray

    def copy(self):
        return RecognitionLayer(self.R.copy(), self.b.copy())


@dataclass
class RecognitionParams:
    layers: list

    @property
    def n_layers(self):
        return len(self.layers)

    def copy(self):
        return RecognitionParams([l.copy() for l in self.layers])


def init_from_model(model):
    """Copy W^l (and hidden biases) out of the model; independent afterwards."""
    return RecognitionParams([RecognitionLayer(lp.W.copy(), lp.b_hidden.copy())
                              for lp in model.layers])


def _doubling(l, n_layers):
    # weights are doubled at every layer except the top one
    return 2.0 if l < n_layers - 1 else 1.0


def recognize(rec, x):
    """Feed-forward pass; returns the list of per-layer activation matrices."""
    out = []
    below = np.asarray(x, dtype=np.float64)
    for l, layer in enumerate(rec.layers):
        below = sigmoid(_doubling(l, rec.n_layers) * (below @ layer.R.T) + layer.b)
        out.append(below)
    return out


def kl_loss(v_list, mu_list):
    """Cross-entropy of the factorial posterior against the mean-field target.

    Summed over every latent unit of every layer, averaged over the batch.
    Equals KL(Q_MF || Q_rec) minus the (constant in the network) entropy of
    the target.
    """
    if len(v_list) != len(mu_list):
        raise ValueError("layer count mismatch")
    total = 0.0
    n = None
    for v, mu in zip(v_list, mu_list):
        if v.shape != mu.shape:
            raise ValueError(f"shape mismatch {v.shape} vs {mu.shape}")
        n = v.shape[0] if v.ndim == 2 else 1
        vc = np.clip(v, EPS, 1.0 - EPS)
        total += float(np.sum(-mu * np.log(vc) - (1.0 - mu) * np.log(1.0 - vc)))
    return total / n


def rec_gradients(rec, x, mu_list):
    """Descent gradients of kl_loss w.r.t. every R^l and bias.

    The targets mu are constants.  The delta at each layer is (v - mu) plus
    the contribution backpropagated from the layer above; weight gradients
    carry the doubling factor of their own layer.
    """
    x = np.asarray(x, dtype=np.float64)
    v_list = recognize(rec, x)
    n = x.shape[0] if x.ndim == 2 else 1
    L = rec.n_layers
    inputs = [x] + v_list[:-1]
    deltas = [None] * L
    deltas[L - 1] = v_list[L - 1] - mu_list[L - 1]
    for l in range(L - 2, -1, -1):
        back = deltas[l + 1] @ (_doubling(l + 1, L) * rec.layers[l + 1].R)
        deltas[l] = (v_list[l] - mu_list[l]) \
            + back * sigmoid_prime_from_output(v_list[l])
    grads = []
    for l in range(L):
        d = np.atleast_2d(deltas[l])
        inp = np.atleast_2d(inputs[l])
        gR = _doubling(l, L) * (d.T @ inp) / n
        gb = d.sum(axis=0) / n
        grads.append(RecognitionLayer(gR, gb))
    return RecognitionParams(grads)


def rec_update(rec, grad_lab, grad_unlab, lam, beta):
    """In-place descent step: R <- R - lam * (g_lab + beta * g_unlab)."""
    for layer, gl, gu in zip(rec.layers,
                             grad_lab.layers if grad_lab else [None] * rec.n_layers,
                             grad_unlab.layers if grad_unlab else [None] * rec.n_layers):
        gR = (gl.R if gl is not None else 0.0) + beta * (gu.R if gu is not None else 0.0)
        gb = (gl.b if gl is not None else 0.0) + beta * (gu.b if gu is not None else 0.0)
        layer.R -= lam * gR
        layer.b -= lam * gb
    return rec
