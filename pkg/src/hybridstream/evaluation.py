"""Prequential error with exponential forgetting, finite-set test error, and
CSV curve emission.
"""

import csv
import math

import numpy as np


class PrequentialState:
    """Memoryless prequential error: S <- a*S + loss, B <- a*B + 1, P = S/B.

    Algebraically identical to the weighted-sum ratio with forgetting factor
    a; at a = 1 it reduces exactly to the running mean.
    """

    def __init__(self, alpha=0.995):
        if not 0.0 < alpha <= 1.0:
            raise ValueError("forgetting factor must lie in (0, 1]")
        self.alpha = alpha
        self.weighted_loss = 0.0
        self.weighted_count = 0.0

    @property
    def error(self):
        if self.weighted_count == 0.0:
            raise ValueError("prequential error undefined before any sample")
        return self.weighted_loss / self.weighted_count

    def update(self, loss):
        self.weighted_loss = self.alpha * self.weighted_loss + loss
        self.weighted_count = self.alpha * self.weighted_count + 1.0
        return self.error

    def update_many(self, losses):
        p = None
        for loss in losses:
            p = self.update(loss)
        return p


def prequential_direct(losses, alpha):
    """Direct evaluation of the weighted-sum definition (test oracle)."""
    i = len(losses)
    num = sum(alpha ** (i - k) * losses[k - 1] for k in range(1, i + 1))
    den = sum(alpha ** (i - k) for k in range(1, i + 1))
    return num / den


def test_error(predict_fn, features, labels):
    """Fraction misclassified under argmax prediction."""
    labels = np.asarray(labels)
    if len(labels) == 0:
        raise ValueError("empty evaluation set")
    pred = np.argmax(np.atleast_2d(predict_fn(features)), axis=1)
    return float(np.mean(pred != labels))


class CurveWriter:
    """Append-safe CSV of (iteration, model, prequential error) points."""

    HEADER = ["iteration", "model", "preq_error"]

    def __init__(self, path, flush_every=100):
        self.path = path
        self.flush_every = flush_every
        self._file = open(path, "w", newline="")
        self._writer = csv.writer(self._file)
        self._writer.writerow(self.HEADER)
        self._pending = 0

    def add(self, iteration, model, value):
        try:
            self._writer.writerow([iteration, model, repr(float(value))])
        except OSError as exc:
            raise OSError(f"writing curve file {self.path}: {exc}") from exc
        self._pending += 1
        if self._pending >= self.flush_every:
            self._file.flush()
            self._pending = 0

    def close(self):
        self._file.flush()
        self._file.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_curve(path):
    rows = []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        if header != CurveWriter.HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        for iteration, model, value in reader:
            rows.append((int(iteration), model, float(value)))
    return rows


def summarize_trials(final_errors):
    """Mean and standard error per model over trials.

    final_errors: {model: [per-trial final error]}.
    """
    out = {}
    for model, values in final_errors.items():
        v = np.asarray(values, dtype=np.float64)
        stderr = float(v.std(ddof=1) / math.sqrt(len(v))) if len(v) > 1 else 0.0
        out[model] = {"mean": float(v.mean()), "stderr": stderr,
                      "trials": len(v)}
    return out
