"""Experiment loops: prequential stream runs and offline MNIST-style runs.

A stream run draws mini-batches from one shared generator, scores every
model on each batch before training on it (test-then-train), and feeds all
models the identical semi-supervised batches.  Iterations count instances.
"""

import json
import os
from dataclasses import asdict

import numpy as np

from . import baseline, streams
from .dhbm import HybridParams
from .datasets import load_idx, mnist_paths, split_semi_supervised
from .evaluation import CurveWriter, PrequentialState, summarize_trials, test_error
from .numerics import make_rng
from .trainer import Trainer, TrainerConfig

STREAM_MODEL_KINDS = ("dhbm-mf", "dhbm-sap", "dhda", "mlp-pl")


def parse_architecture(arch):
    """'D-H1-...-HL-C' -> (n_visible, hidden_dims, n_classes)."""
    parts = [int(p) for p in arch.split("-")]
    if len(parts) < 3:
        raise ValueError(f"architecture {arch!r} needs at least D-H-C")
    return parts[0], parts[1:-1], parts[-1]


class MlpPseudoLabelModel:
    """Adapter giving the baseline MLP the trainer's update/predict surface."""

    def __init__(self, n_visible, hidden_dims, n_classes, config, rng):
        self.params = baseline.MlpParams.initialize(
            n_visible, hidden_dims, n_classes, rng)
        self.config = config
        self.rng = rng

    def update(self, x_lab=None, y_lab=None, x_unlab=None):
        cfg = self.config
        baseline.mlp_update(self.params, x_lab, y_lab, x_unlab, cfg.lr,
                            cfg.beta_f, cfg.keep_prob, self.rng)

    def predict(self, x):
        return baseline.mlp_predict(self.params, x, self.config.keep_prob)


def build_model(kind, n_visible, hidden_dims, n_classes, config, rng):
    if kind == "mlp-pl":
        return MlpPseudoLabelModel(n_visible, hidden_dims, n_classes, config, rng)
    if kind == "mlp-lab":
        cfg_dict = asdict(config)
        cfg_dict["beta_f"] = 0.0
        return MlpPseudoLabelModel(n_visible, hidden_dims, n_classes,
                                   TrainerConfig(**cfg_dict), rng)
    estimator = {"dhbm-mf": "mf-cd", "dhbm-sap": "sap", "dhda": "mf-bp"}.get(kind)
    if estimator is None:
        raise ValueError(f"unknown model kind {kind!r}")
    cfg_dict = asdict(config)
    cfg_dict["estimator"] = estimator
    cfg = TrainerConfig(**cfg_dict)
    params = HybridParams.initialize(n_visible, hidden_dims, n_classes, rng)
    return Trainer(params, cfg, rng)


def _split_batch(batch):
    lab = batch.labels >= 0
    x_lab = batch.features[lab]
    y_lab = batch.labels[lab]
    x_unlab = batch.features[~lab]
    return x_lab, y_lab, x_unlab


def run_stream_trial(config, trial, out_dir):
    """One seeded trial; returns {model: final prequential error}."""
    stream_cfg = streams.StreamConfig(**config["stream"])
    trial_seed = int(config.get("seed", 0)) + 1000 * trial
    stream_rng = make_rng(trial_seed)
    stream = streams.make_stream(stream_cfg, stream_rng)
    label_fraction = stream_cfg.label_fraction
    if config.get("label_fraction_uniform", False):
        label_fraction = float(stream_rng.uniform(0.0, 2.0 * label_fraction))
    n_visible, hidden_dims, n_classes = parse_architecture(config["architecture"])
    trainer_cfg = TrainerConfig(**config.get("trainer", {}))
    alpha_err = float(config.get("preq_alpha", 0.995))
    iterations = int(config["iterations"])
    curve_every = int(config.get("curve_every", 1000))
    models = {}
    preq = {}
    for i, kind in enumerate(config.get("models", list(STREAM_MODEL_KINDS))):
        models[kind] = build_model(kind, n_visible, hidden_dims, n_classes,
                                   trainer_cfg, make_rng(trial_seed + i + 1))
        preq[kind] = PrequentialState(alpha_err)
    os.makedirs(out_dir, exist_ok=True)
    curve_path = os.path.join(out_dir, f"curves_trial{trial}.csv")
    seen = 0
    with CurveWriter(curve_path) as curves:
        next_point = curve_every
        while seen < iterations:
            n = min(stream_cfg.batch_size, iterations - seen)
            batch = stream.next_batch(n)
            masked = streams.mask_labels(batch, label_fraction, stream_rng)
            x_lab, y_lab, x_unlab = _split_batch(masked)
            for kind, model in models.items():
                pred = np.argmax(model.predict(batch.features), axis=1)
                preq[kind].update_many((pred != batch.labels).astype(np.float64))
                model.update(x_lab, y_lab, x_unlab)
            seen += n
            if seen >= next_point or seen >= iterations:
                for kind in models:
                    curves.add(seen, kind, preq[kind].error)
                next_point += curve_every
    return {kind: preq[kind].error for kind in models}


def _echo_config(config, out_dir, extra=None):
    os.makedirs(out_dir, exist_ok=True)
    echo = dict(config)
    if extra:
        echo.update(extra)
    with open(os.path.join(out_dir, "config_echo.json"), "w") as f:
        json.dump(echo, f, indent=2, default=str)


def run_stream_experiment(config, out_dir, jobs=1):
    """All trials; emits per-trial curves, a summary CSV and a config echo."""
    trials = int(config.get("trials", 5))
    _echo_config(config, out_dir, {"resolved_trials": trials})
    finals = {}
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_trial_worker,
                                    [(config, t, out_dir) for t in range(trials)]))
    else:
        results = [run_stream_trial(config, t, out_dir) for t in range(trials)]
    for res in results:
        for kind, err in res.items():
            finals.setdefault(kind, []).append(err)
    summary = summarize_trials(finals)
    with open(os.path.join(out_dir, "summary.csv"), "w") as f:
        f.write("model,trial,final_preq_error\n")
        for kind, errs in finals.items():
            for t, err in enumerate(errs):
                f.write(f"{kind},{t},{err!r}\n")
        f.write("model,mean,stderr\n")
        for kind, s in summary.items():
            f.write(f"{kind},{s['mean']!r},{s['stderr']!r}\n")
    return finals


def _trial_worker(args):
    return run_stream_trial(*args)


def run_mnist_trial(config, trial, dataset, test_set):
    """Offline semi-supervised run with validation-based model selection."""
    trial_seed = int(config.get("seed", 0)) + 1000 * trial
    rng = make_rng(trial_seed)
    n_labeled = int(config.get("n_labeled", 1000))
    n_valid = int(config.get("n_valid", 1000))
    n_unlabeled = config.get("n_unlabeled")
    labeled, unlabeled, validation = split_semi_supervised(
        dataset, n_labeled, n_valid, rng)
    if n_unlabeled is not None:
        unlabeled = unlabeled[:int(n_unlabeled)]
    n_visible, hidden_dims, n_classes = parse_architecture(config["architecture"])
    base_cfg = dict(config.get("trainer", {}))
    base_cfg.setdefault("anneal", True)
    base_cfg.setdefault("labeled_epoch_size", n_labeled)
    trainer_cfg = TrainerConfig(**base_cfg)
    batch_size = int(config.get("batch_size", 10))
    epochs = int(config.get("epochs", 6))
    results = {}
    for i, kind in enumerate(config.get("models", ["dhbm-mf", "mlp-lab"])):
        model = build_model(kind, n_visible, hidden_dims, n_classes,
                            trainer_cfg, make_rng(trial_seed + i + 1))
        epoch_rng = make_rng(trial_seed + 7919 + i)
        pool_x = np.concatenate([labeled.images, unlabeled])
        pool_y = np.concatenate([labeled.labels,
                                 -np.ones(len(unlabeled), dtype=np.int64)])
        best_val = np.inf
        best_snapshot = None
        for _ in range(epochs):
            order = epoch_rng.permutation(len(pool_x))
            for start in range(0, len(order), batch_size):
                idx = order[start:start + batch_size]
                x_lab = pool_x[idx][pool_y[idx] >= 0]
                y_lab = pool_y[idx][pool_y[idx] >= 0]
                x_unlab = pool_x[idx][pool_y[idx] < 0]
                model.update(x_lab, y_lab, x_unlab)
            val_err = test_error(model.predict, validation.images,
                                 validation.labels)
            if val_err < best_val:
                best_val = val_err
                best_snapshot = _snapshot(model)
        if best_snapshot is not None:
            _restore(model, best_snapshot)
        results[kind] = test_error(model.predict, test_set.images,
                                   test_set.labels)
    return results


def _snapshot(model):
    if isinstance(model, MlpPseudoLabelModel):
        return model.params.copy()
    return (model.model.copy(), model.rec.copy())


def _restore(model, snapshot):
    if isinstance(model, MlpPseudoLabelModel):
        model.params = snapshot
    else:
        model.model, model.rec = snapshot


def run_mnist_experiment(config, out_dir):
    data_root = config.get("data_root")
    train = load_idx(*mnist_paths(data_root, "train"))
    test = load_idx(*mnist_paths(data_root, "test"))
    trials = int(config.get("trials", 1))
    _echo_config(config, out_dir, {"resolved_trials": trials})
    finals = {}
    for t in range(trials):
        for kind, err in run_mnist_trial(config, t, train, test).items():
            finals.setdefault(kind, []).append(err)
    summary = summarize_trials(finals)
    with open(os.path.join(out_dir, "summary.csv"), "w") as f:
        f.write("model,trial,test_error\n")
        for kind, errs in finals.items():
            for t, err in enumerate(errs):
                f.write(f"{kind},{t},{err!r}\n")
        f.write("model,mean,stderr\n")
        for kind, s in summary.items():
            f.write(f"{kind},{s['mean']!r},{s['stderr']!r}\n")
    return finals
