"""The three parameter-gradient estimators: mean-field contrastive divergence,
mean-field back-propagation, and the stochastic approximation procedure with
persistent fantasy particles.

All estimators return an ASCENT direction: the trainer applies them with a
single "+ learning rate" update rule, so the back-propagation estimator
negates its descent gradients internally.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .numerics import one_hot, relu_prime, sigmoid_prime_from_output


@dataclass
class LayerGradients:
    dW: np.ndarray
    dU: np.ndarray
    db_hidden: np.ndarray
    db_visible: np.ndarray


@dataclass
class Gradients:
    layers: list
    db_class: np.ndarray

    @classmethod
    def zeros_like(cls, params):
        return cls([LayerGradients(np.zeros_like(lp.W), np.zeros_like(lp.U),
                                   np.zeros_like(lp.b_hidden),
                                   np.zeros_like(lp.b_visible))
                    for lp in params.layers],
                   np.zeros_like(params.b_class))

    def scaled_add(self, other, factor=1.0):
        for a, b in zip(self.layers, other.layers):
            a.dW += factor * b.dW
            a.dU += factor * b.dU
            a.db_hidden += factor * b.db_hidden
            a.db_visible += factor * b.db_visible
        self.db_class += factor * other.db_class
        return self

    def is_finite(self):
        return all(np.isfinite(g.dW).all() and np.isfinite(g.dU).all()
                   and np.isfinite(g.db_hidden).all()
                   and np.isfinite(g.db_visible).all()
                   for g in self.layers) and np.isfinite(self.db_class).all()


def apply_gradients(params, grads, lr):
    """Ascent step: params += lr * grads (Algorithm-1 update convention)."""
    for lp, g in zip(params.layers, grads.layers):
        lp.W += lr * g.dW
        lp.U += lr * g.dU
        lp.b_hidden += lr * g.db_hidden
        lp.b_visible += lr * g.db_visible
    params.b_class += lr * grads.db_class
    return params


def _positive_phase(x, q_rec):
    """Per-layer (h+, v+): recognition statistics, with the data at the bottom."""
    return [(q_rec[l], x if l == 0 else q_rec[l - 1]) for l in range(len(q_rec))]


def mf_cd_gradients(x, y_probs, y_hat, q_rec, mf_state, params):
    """Mean-field contrastive divergence.

    Positive phase from the recognition statistics (data clamped), negative
    phase from the mean-field posterior; per layer dW = <h+ v+'> - <h- v-'>
    and dU = <h+ e_y'> - <h- e_yhat'>, batch-averaged.
    """
    x = np.atleast_2d(x)
    n = x.shape[0]
    out = Gradients.zeros_like(params)
    for l, (h_pos, v_pos) in enumerate(_positive_phase(x, q_rec)):
        h_neg = mf_state.layer_means[l]
        v_neg = mf_state.input_recon if l == 0 else mf_state.layer_means[l - 1]
        g = out.layers[l]
        g.dW[...] = (h_pos.T @ v_pos - h_neg.T @ v_neg) / n
        g.dU[...] = (h_pos.T @ y_probs - h_neg.T @ y_hat) / n
        g.db_hidden[...] = (h_pos - h_neg).sum(axis=0) / n
        if l == 0:
            g.db_visible[...] = (v_pos - v_neg).sum(axis=0) / n
    out.db_class[...] = (y_probs - y_hat).sum(axis=0) / n
    return out


def _phi_prime(values, activation):
    if activation == "sigmoid":
        return sigmoid_prime_from_output(values)
    return relu_prime(values)


def mf_bp_gradients(x, y_probs, q_rec, state, params, activation="sigmoid",
                    dropout_masks=None):
    """Layer-local back-propagation for the DHDA.

    Differentiates, per layer, the tied encoder/decoder reconstruction loss
    (target: the data at layer 1, the recognition statistic below at upper
    layers) plus the shared softmax log-loss; mean-field statistics entering
    from other layers are constants.  Reconstruction corruption masks are
    part of the forward function and therefore of the gradient.  Drop-out
    masks, when given, are re-applied to the hidden error deltas.

    Returns the negation of the descent gradient (ascent convention).
    """
    x = np.atleast_2d(x)
    n = x.shape[0]
    L = params.n_layers
    out = Gradients.zeros_like(params)
    # softmax + log-loss output delta: (p - e_y), batch-averaged
    xi_out = (state.class_probs - y_probs) / n
    for l in range(L):
        lp = params.layers[l]
        h = state.hidden[l]
        h_hat = state.hidden_hat[l]
        v_in = state.input_hat if l == 0 else state.hidden_hat[l - 1]
        v_target = x if l == 0 else q_rec[l - 1]
        z = state.recons[l]
        if activation == "sigmoid":
            # cross-entropy through the output sigmoid collapses to (z - target)
            xi_recon = (z - v_target) / n
        else:
            xi_recon = (z - v_target) * _phi_prime(z, activation) / n
        hid_prime = _phi_prime(h, activation)
        xi_hid = (xi_recon @ lp.W.T) * state.masks[l] * hid_prime
        xi_hid_out = (xi_out @ lp.U.T) * hid_prime
        xi_hid_total = xi_hid + xi_hid_out
        if dropout_masks is not None:
            xi_hid_total = xi_hid_total * dropout_masks[l]
        g = out.layers[l]
        g.dW[...] = -(xi_hid_total.T @ v_in + h_hat.T @ xi_recon)
        g.dU[...] = -(h.T @ xi_out)
        g.db_hidden[...] = -xi_hid_total.sum(axis=0)
        g.db_visible[...] = -xi_recon.sum(axis=0)
    out.db_class[...] = -xi_out.sum(axis=0)
    return out


@dataclass
class FantasyParticles:
    """M persistent Gibbs-chain states with binary units and sampled labels."""
    x: np.ndarray
    hs: list
    y: np.ndarray

    @property
    def n_particles(self):
        return self.x.shape[0]

    @classmethod
    def initialize(cls, params, n_particles, rng):
        if n_particles < 1:
            raise ValueError("need at least one fantasy particle")
        x = (rng.random((n_particles, params.n_visible)) < 0.5).astype(np.float64)
        hs = [(rng.random((n_particles, h)) < 0.5).astype(np.float64)
              for h in params.hidden_dims]
        y = rng.integers(0, params.n_classes, size=n_particles).astype(np.int64)
        return cls(x, hs, y)

    def advance(self, params, rng, n_sweeps=1, counts=None):
        """Advance every chain by full block-Gibbs sweeps (in place)."""
        stride = kernels.uniforms_per_sweep(params, self.n_particles)
        uniforms = rng.random(stride * n_sweeps)
        kernels.gibbs_sweeps(params, self.x, self.hs, self.y, uniforms, n_sweeps,
                             counts=counts)
        return self


def sap_gradients(x, y_probs, q_rec, particles, params, rng):
    """Stochastic approximation procedure (persistent contrastive divergence).

    Positive phase as in MF-CD; negative phase from the fantasy particles,
    each advanced one block-Gibbs sweep, averaged over the M chains with
    their own sampled labels.
    """
    x = np.atleast_2d(x)
    n = x.shape[0]
    particles.advance(params, rng, n_sweeps=1)
    m = particles.n_particles
    ey_neg = one_hot(particles.y, params.n_classes)
    out = Gradients.zeros_like(params)
    for l, (h_pos, v_pos) in enumerate(_positive_phase(x, q_rec)):
        h_neg = particles.hs[l]
        v_neg = particles.x if l == 0 else particles.hs[l - 1]
        g = out.layers[l]
        g.dW[...] = h_pos.T @ v_pos / n - h_neg.T @ v_neg / m
        g.dU[...] = h_pos.T @ y_probs / n - h_neg.T @ ey_neg / m
        g.db_hidden[...] = h_pos.sum(axis=0) / n - h_neg.sum(axis=0) / m
        if l == 0:
            g.db_visible[...] = v_pos.sum(axis=0) / n - v_neg.sum(axis=0) / m
    out.db_class[...] = y_probs.sum(axis=0) / n - ey_neg.sum(axis=0) / m
    return out
