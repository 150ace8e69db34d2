"""Deep hybrid Boltzmann machine: energy, exact tiny-model oracle, and the
conditional / mean-field equations with top-down feedback.

Layer convention: a model with hidden sizes [H1, ..., HL] over D visible
units and C classes stores per layer l (0-based here) a weight matrix
W[l] of shape (H_l, H_{l-1}) with H_{-1} = D, a class matrix U[l] of shape
(H_l, C), a hidden bias (H_l,) and a visible-side bias (H_{l-1},).  The
visible-side biases of layers l > 0 are only exercised by the autoencoder
decoders; the Boltzmann energy uses layer 0's.

Probabilities are proportional to exp(-E) with E as returned by
:func:`energy`; under that convention every conditional below is the
sigmoid / softmax form that the mean-field equations iterate.
"""

from dataclasses import dataclass, field

import numpy as np

from .numerics import one_hot, sigmoid, softmax


@dataclass
class LayerParams:
    W: np.ndarray
    U: np.ndarray
    b_hidden: np.ndarray
    b_visible: np.ndarray

    def copy(self):
        return LayerParams(self.W.copy(), self.U.copy(),
                           self.b_hidden.copy(), self.b_visible.copy())


@dataclass
class HybridParams:
    layers: list
    b_class: np.ndarray

    @property
    def n_layers(self):
        return len(self.layers)

    @property
    def n_visible(self):
        return self.layers[0].W.shape[1]

    @property
    def n_classes(self):
        return self.b_class.shape[0]

    @property
    def hidden_dims(self):
        return [lp.W.shape[0] for lp in self.layers]

    def copy(self):
        return HybridParams([lp.copy() for lp in self.layers], self.b_class.copy())

    def validate(self):
        for l, lp in enumerate(self.layers):
            h, v = lp.W.shape
            if lp.U.shape != (h, self.n_classes):
                raise ValueError(f"layer {l}: U shape {lp.U.shape} inconsistent")
            if lp.b_hidden.shape != (h,) or lp.b_visible.shape != (v,):
                raise ValueError(f"layer {l}: bias shapes inconsistent")
            if l > 0 and v != self.layers[l - 1].W.shape[0]:
                raise ValueError(f"layer {l}: expects {v} inputs, "
                                 f"layer {l-1} provides {self.layers[l-1].W.shape[0]}")

    @classmethod
    def initialize(cls, n_visible, hidden_dims, n_classes, rng, weight_std=0.01):
        """Gaussian weights (mean 0, std `weight_std`), zero biases."""
        layers = []
        below = n_visible
        for h in hidden_dims:
            layers.append(LayerParams(
                W=rng.normal(0.0, weight_std, size=(h, below)),
                U=rng.normal(0.0, weight_std, size=(h, n_classes)),
                b_hidden=np.zeros(h),
                b_visible=np.zeros(below),
            ))
            below = h
        return cls(layers, np.zeros(n_classes))


@dataclass
class MeanFieldState:
    layer_means: list
    class_probs: np.ndarray
    input_recon: np.ndarray

    def copy(self):
        return MeanFieldState([m.copy() for m in self.layer_means],
                              self.class_probs.copy(), self.input_recon.copy())


def energy(params, y, x, hs):
    """E(y, x, h^1..h^L) = -sum_l h_l'W_l v_{l-1} - sum_l h_l'U_l e_y - biases."""
    x = np.asarray(x, dtype=np.float64)
    hs = [np.asarray(h, dtype=np.float64) for h in hs]
    if len(hs) != params.n_layers:
        raise ValueError(f"expected {params.n_layers} hidden vectors, got {len(hs)}")
    ey = one_hot(y, params.n_classes)
    e = 0.0
    below = x
    for lp, h in zip(params.layers, hs):
        if lp.W.shape != (h.shape[0], below.shape[0]):
            raise ValueError(f"W shape {lp.W.shape} does not match "
                             f"({h.shape[0]}, {below.shape[0]})")
        e -= h @ lp.W @ below
        e -= h @ lp.U @ ey
        e -= lp.b_hidden @ h
        below = h
    e -= params.layers[0].b_visible @ x
    e -= params.b_class @ ey
    return float(e)


def cond_h(params, l, y_probs, below, above=None):
    """Mean of hidden layer l given its neighbours and the class distribution.

    sigma(U_l y + W_l v_{l-1} + W_{l+1}' h_{l+1} + b); accepts mean vectors in
    place of binary states, and batches (rows) in place of single vectors.
    """
    lp = params.layers[l]
    pre = below @ lp.W.T + y_probs @ lp.U.T + lp.b_hidden
    if l + 1 < params.n_layers:
        if above is None:
            raise ValueError(f"layer {l} requires the state of layer {l + 1}")
        pre = pre + above @ params.layers[l + 1].W
    return sigmoid(pre)


def cond_x(params, h1):
    """Mean of the visible layer given h^1: sigma(W1' h1 + b_visible)."""
    lp = params.layers[0]
    return sigmoid(h1 @ lp.W + lp.b_visible)


def cond_y(params, h_means):
    """Class distribution from all layers jointly: softmax(sum_l U_l' h_l + b)."""
    if len(h_means) != params.n_layers:
        raise ValueError(f"expected {params.n_layers} layer means, got {len(h_means)}")
    logits = np.asarray(h_means[0]) @ params.layers[0].U + params.b_class
    for lp, h in zip(params.layers[1:], h_means[1:]):
        logits = logits + h @ lp.U
    return softmax(logits)


def mean_field_step(params, x, state, clamped_y=None):
    """One full fixed-point cycle: h^1, ..., h^L, then y, then x-reconstruction.

    x stays clamped to the data; `input_recon` holds the model's reconstruction.
    If `clamped_y` (a batch x C one-hot matrix) is given the class distribution
    is held fixed at it.
    """
    means = [m for m in state.layer_means]
    y_probs = clamped_y if clamped_y is not None else state.class_probs
    L = params.n_layers
    for l in range(L):
        below = x if l == 0 else means[l - 1]
        above = means[l + 1] if l + 1 < L else None
        means[l] = cond_h(params, l, y_probs, below, above)
    if clamped_y is None:
        y_probs = cond_y(params, means)
    return MeanFieldState(means, y_probs, cond_x(params, means[0]))


def bottom_up_init(params, x):
    """Single bottom-up pass with weight doubling on all but the top layer."""
    means = []
    below = np.asarray(x, dtype=np.float64)
    L = params.n_layers
    for l in range(L):
        lp = params.layers[l]
        factor = 2.0 if l < L - 1 else 1.0
        below = sigmoid(factor * (below @ lp.W.T) + lp.b_hidden)
        means.append(below)
    return MeanFieldState(means, cond_y(params, means), cond_x(params, means[0]))


def _enumerate_binary(n):
    """All binary vectors of length n; row i holds the bits of i (LSB first)."""
    idx = np.arange(1 << n)
    return ((idx[:, None] >> np.arange(n)) & 1).astype(np.float64)


def _state_index(v):
    bits = np.asarray(v).astype(np.int64)
    return int(bits @ (1 << np.arange(bits.shape[0])))


class BruteForceJoint:
    """Exact joint p(y, x, h^1, h^2) of a tiny two-layer model by enumeration.

    The table is built directly from exp(-E) over every configuration, so the
    conditionals read off it are an oracle that is independent of the
    sigmoid/softmax formulas in this module.
    """

    MAX_CONFIGS = 1 << 20

    def __init__(self, params):
        if params.n_layers != 2:
            raise ValueError("enumeration oracle supports exactly 2 hidden layers")
        D = params.n_visible
        H1, H2 = params.hidden_dims
        C = params.n_classes
        total = (1 << (D + H1 + H2)) * C
        if total > self.MAX_CONFIGS:
            raise ValueError(f"{total} configurations exceed the "
                             f"{self.MAX_CONFIGS} enumeration bound")
        X = _enumerate_binary(D)
        A = _enumerate_binary(H1)
        B = _enumerate_binary(H2)
        W1, U1 = params.layers[0].W, params.layers[0].U
        W2, U2 = params.layers[1].W, params.layers[1].U
        # -E indexed [y, ix, i1, i2], assembled term by term via broadcasting
        negE = np.zeros((C, len(X), len(A), len(B)))
        negE += (A @ W1 @ X.T).T[None, :, :, None]
        negE += (B @ W2 @ A.T).T[None, None, :, :]
        negE += (A @ U1).T[:, None, :, None]
        negE += (B @ U2).T[:, None, None, :]
        negE += (A @ params.layers[0].b_hidden)[None, None, :, None]
        negE += (B @ params.layers[1].b_hidden)[None, None, None, :]
        negE += (X @ params.layers[0].b_visible)[None, :, None, None]
        negE += params.b_class[:, None, None, None]
        w = np.exp(negE - negE.max())
        self.log_z = float(np.log(w.sum()) + negE.max())
        self.joint = w / w.sum()
        self._X, self._A, self._B = X, A, B
        self._dims = (D, H1, H2, C)

    def marginal_xy(self):
        """p(x, y) as an array indexed [ix, y]."""
        return self.joint.sum(axis=(2, 3)).T

    def _unit_marginal(self, weights, states):
        w = weights / weights.sum()
        return w @ states

    def cond_h1(self, y, x, h2):
        w = self.joint[int(y), _state_index(x), :, _state_index(h2)]
        return self._unit_marginal(w, self._A)

    def cond_h2(self, y, h1):
        w = self.joint[int(y), :, _state_index(h1), :].sum(axis=0)
        return self._unit_marginal(w, self._B)

    def cond_x(self, h1):
        w = self.joint[:, :, _state_index(h1), :].sum(axis=(0, 2))
        return self._unit_marginal(w, self._X)

    def cond_y(self, h1, h2):
        w = self.joint[:, :, _state_index(h1), _state_index(h2)].sum(axis=1)
        return w / w.sum()
