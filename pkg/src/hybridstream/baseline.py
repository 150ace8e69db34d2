"""Comparison model: drop-out rectifier feed-forward network trained with
supervised back-propagation plus a weighted pseudo-label gradient on
unlabeled samples (entropy-regularization self-training).
"""

from dataclasses import dataclass

import numpy as np

from .numerics import one_hot, relu, softmax

EPS = 1e-12


@dataclass
class MlpParams:
    Ws: list
    bs: list

    @property
    def n_hidden_layers(self):
        return len(self.Ws) - 1

    @property
    def n_classes(self):
        return self.Ws[-1].shape[0]

    def copy(self):
        return MlpParams([w.copy() for w in self.Ws], [b.copy() for b in self.bs])

    @classmethod
    def initialize(cls, n_visible, hidden_dims, n_classes, rng, weight_std=0.01):
        dims = [n_visible] + list(hidden_dims) + [n_classes]
        Ws = [rng.normal(0.0, weight_std, size=(dims[i + 1], dims[i]))
              for i in range(len(dims) - 1)]
        bs = [np.zeros(dims[i + 1]) for i in range(len(dims) - 1)]
        return cls(Ws, bs)


def mlp_forward(params, x, keep_prob=1.0, train_mode=False, rng=None):
    """Rectifier layers with drop-out, softmax head.

    Train mode applies fresh binary masks to each hidden layer (rng
    required when keep_prob < 1); eval mode scales activations by
    keep_prob.  Returns (hidden activations, class probs, masks).
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    hidden = []
    masks = []
    below = x
    for W, b in zip(params.Ws[:-1], params.bs[:-1]):
        h = relu(below @ W.T + b)
        if keep_prob < 1.0:
            if train_mode:
                if rng is None:
                    raise ValueError("train-mode drop-out needs an rng")
                m = (rng.random(h.shape) < keep_prob).astype(np.float64)
                h = h * m
                masks.append(m)
            else:
                h = h * keep_prob
        hidden.append(h)
        below = h
    probs = softmax(below @ params.Ws[-1].T + params.bs[-1])
    return hidden, probs, masks


def log_loss(probs, y_onehot):
    n = probs.shape[0]
    return float(-np.sum(y_onehot * np.log(np.clip(probs, EPS, 1.0)))) / n


def mlp_gradients(params, x, y_onehot, keep_prob=1.0, train_mode=False, rng=None):
    """Descent gradients of the batch-averaged softmax log-loss."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    n = x.shape[0]
    hidden, probs, masks = mlp_forward(params, x, keep_prob, train_mode, rng)
    inputs = [x] + hidden[:-1]
    gWs = [None] * len(params.Ws)
    gbs = [None] * len(params.bs)
    delta = (probs - y_onehot) / n
    gWs[-1] = delta.T @ (hidden[-1] if hidden else x)
    gbs[-1] = delta.sum(axis=0)
    for l in range(len(hidden) - 1, -1, -1):
        delta = (delta @ params.Ws[l + 1]) * (hidden[l] > 0)
        if masks:
            delta = delta * masks[l]
        gWs[l] = delta.T @ inputs[l]
        gbs[l] = delta.sum(axis=0)
    return MlpParams(gWs, gbs)


def mlp_update(params, x_lab, y_lab, x_unlab, lr, beta, keep_prob=1.0, rng=None):
    """Descent step on log-loss(lab) + beta * log-loss(unlab, pseudo-labels).

    Pseudo-labels are the model's own eval-mode argmax predictions.
    Mutates params in place.
    """
    grads = []
    if x_lab is not None and len(x_lab) > 0:
        y_arr = np.asarray(y_lab)
        y_oh = y_arr if y_arr.ndim == 2 else one_hot(y_arr, params.n_classes)
        grads.append((1.0, mlp_gradients(params, x_lab, y_oh, keep_prob,
                                         train_mode=True, rng=rng)))
    if beta != 0.0 and x_unlab is not None and len(x_unlab) > 0:
        _, probs, _ = mlp_forward(params, x_unlab, keep_prob, train_mode=False)
        y_pseudo = one_hot(np.argmax(probs, axis=1), params.n_classes)
        grads.append((beta, mlp_gradients(params, x_unlab, y_pseudo, keep_prob,
                                          train_mode=True, rng=rng)))
    for weight, g in grads:
        for W, b, gW, gb in zip(params.Ws, params.bs, g.Ws, g.bs):
            W -= lr * weight * gW
            b -= lr * weight * gb
    return params


def mlp_predict(params, x, keep_prob=1.0):
    _, probs, _ = mlp_forward(params, x, keep_prob, train_mode=False)
    return probs
