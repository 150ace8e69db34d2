"""Evolving data-stream generators (LED, Waveform) with feature noise,
cyclic-attribute concept drift, and semi-supervised label masking.

Drift model: every `drift_interval` instances the positions of the first
`drift_attr_count` attributes rotate one step among themselves, so the
mapping from generator attributes to feature slots changes over time while
the underlying concept stays recoverable.  A full cycle restores the
original order.
"""

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .numerics import make_rng

# Seven-segment encodings per digit, segment order (a, b, c, d, e, f, g):
# a = top, b = top-right, c = bottom-right, d = bottom, e = bottom-left,
# f = top-left, g = middle.
LED_SEGMENTS = np.array([
    [1, 1, 1, 1, 1, 1, 0],  # 0
    [0, 1, 1, 0, 0, 0, 0],  # 1
    [1, 1, 0, 1, 1, 0, 1],  # 2
    [1, 1, 1, 1, 0, 0, 1],  # 3
    [0, 1, 1, 0, 0, 1, 1],  # 4
    [1, 0, 1, 1, 0, 1, 1],  # 5
    [1, 0, 1, 1, 1, 1, 1],  # 6
    [1, 1, 1, 0, 0, 0, 0],  # 7
    [1, 1, 1, 1, 1, 1, 1],  # 8
    [1, 1, 1, 1, 0, 1, 1],  # 9
], dtype=np.float64)

LED_FEATURES = 24
LED_CLASSES = 10

WAVEFORM_FEATURES = 40
WAVEFORM_SIGNAL = 21
WAVEFORM_CLASSES = 3
# Triangular base waveforms peaking at attributes 7, 15 and 11 (1-based).
_centers = [7, 15, 11]
WAVEFORM_BASES = np.array(
    [[max(6.0 - abs(i - c), 0.0) for i in range(1, WAVEFORM_SIGNAL + 1)]
     for c in _centers])
# Classes combine base pairs (1,2), (1,3), (2,3).
WAVEFORM_PAIRS = [(0, 1), (0, 2), (1, 2)]
# Fixed affine normalization: [-3, 9] -> [0, 1], clamped.
WAVEFORM_LO, WAVEFORM_HI = -3.0, 9.0


@dataclass
class StreamConfig:
    kind: str = "led"
    noise_fraction: float = 0.1
    drift_attr_count: int = 0
    drift_interval: int = 50_000
    label_fraction: float = 0.1
    batch_size: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("led", "waveform"):
            raise ValueError(f"unknown stream kind {self.kind!r}")
        if not 0.0 <= self.noise_fraction <= 1.0:
            raise ValueError("noise_fraction must lie in [0, 1]")
        if not 0.0 <= self.label_fraction <= 1.0:
            raise ValueError("label_fraction must lie in [0, 1]")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


@dataclass
class StreamBatch:
    features: np.ndarray
    labels: np.ndarray  # class index per row, -1 = unlabeled

    def __len__(self):
        return self.features.shape[0]


class _DriftingStream:
    """Shared drift/permutation bookkeeping for both generators."""

    def __init__(self, config, n_features, rng=None):
        self.config = config
        self.n_features = n_features
        self.rng = rng if rng is not None else make_rng(config.seed)
        self.instances = 0
        self.perm = np.arange(n_features)
        if config.drift_attr_count > n_features:
            raise ValueError("drift_attr_count exceeds the feature count")

    def _drift_rotations(self):
        if self.config.drift_interval <= 0:
            return 0
        return self.instances // self.config.drift_interval

    def _current_perm(self):
        k = self.config.drift_attr_count
        if k <= 1:
            return self.perm
        perm = self.perm.copy()
        rot = self._drift_rotations() % k
        perm[:k] = np.roll(perm[:k], rot)
        return perm

    def _raw_chunk(self, n):
        raise NotImplementedError

    def next_batch(self, n=None):
        """Next n instances (default: config batch size), drift-boundary exact."""
        n = self.config.batch_size if n is None else n
        feats = []
        labels = []
        remaining = n
        while remaining > 0:
            chunk = remaining
            if self.config.drift_interval > 0 and self.config.drift_attr_count > 1:
                to_boundary = self.config.drift_interval \
                    - self.instances % self.config.drift_interval
                chunk = min(chunk, to_boundary)
            f, y = self._raw_chunk(chunk)
            f = f[:, self._current_perm()]
            feats.append(f)
            labels.append(y)
            self.instances += chunk
            remaining -= chunk
        return StreamBatch(np.concatenate(feats), np.concatenate(labels))

    def next_instance(self):
        batch = self.next_batch(1)
        return batch.features[0], int(batch.labels[0])


class LedStream(_DriftingStream):
    """Noisy 24-attribute LED digit stream: 7 segment attributes plus 17
    irrelevant ones, each independently flipped with probability
    noise_fraction."""

    def __init__(self, config, rng=None):
        super().__init__(config, LED_FEATURES, rng)

    def _raw_chunk(self, n):
        digits = self.rng.integers(0, LED_CLASSES, size=n)
        feats = np.empty((n, LED_FEATURES))
        feats[:, :7] = LED_SEGMENTS[digits]
        feats[:, 7:] = self.rng.integers(0, 2, size=(n, LED_FEATURES - 7))
        if self.config.noise_fraction > 0:
            flip = self.rng.random((n, LED_FEATURES)) < self.config.noise_fraction
            feats = np.abs(feats - flip)
        return feats, digits.astype(np.int64)


def waveform_instance(cls_idx, u, eps_signal, eps_noise):
    """One raw waveform instance before normalization (pure function)."""
    a, b = WAVEFORM_PAIRS[cls_idx]
    signal = u * WAVEFORM_BASES[a] + (1.0 - u) * WAVEFORM_BASES[b] + eps_signal
    return np.concatenate([signal, eps_noise])


def waveform_normalize(raw):
    scaled = (raw - WAVEFORM_LO) / (WAVEFORM_HI - WAVEFORM_LO)
    return np.clip(scaled, 0.0, 1.0)


class WaveformStream(_DriftingStream):
    """Three-class waveform stream: convex combinations of two of three
    triangular bases over 21 attributes plus unit Gaussian noise, 19 pure
    noise attributes, all mapped affinely to [0, 1]."""

    def __init__(self, config, rng=None):
        super().__init__(config, WAVEFORM_FEATURES, rng)

    def _raw_chunk(self, n):
        classes = self.rng.integers(0, WAVEFORM_CLASSES, size=n)
        u = self.rng.random(n)
        pairs = np.array(WAVEFORM_PAIRS)[classes]
        signal = u[:, None] * WAVEFORM_BASES[pairs[:, 0]] \
            + (1.0 - u[:, None]) * WAVEFORM_BASES[pairs[:, 1]]
        signal = signal + self.rng.standard_normal((n, WAVEFORM_SIGNAL))
        noise = self.rng.standard_normal((n, WAVEFORM_FEATURES - WAVEFORM_SIGNAL))
        feats = waveform_normalize(np.concatenate([signal, noise], axis=1))
        return feats, classes.astype(np.int64)


def make_stream(config, rng=None):
    if config.kind == "led":
        return LedStream(config, rng)
    return WaveformStream(config, rng)


def mask_labels(batch, label_fraction, rng):
    """Independently keep each row's label with probability label_fraction."""
    if not 0.0 <= label_fraction <= 1.0:
        raise ValueError("label_fraction must lie in [0, 1]")
    keep = rng.random(len(batch)) < label_fraction
    labels = np.where(keep, batch.labels, -1)
    return StreamBatch(batch.features, labels.astype(np.int64))


STREAM_MAGIC = b"HSST"


def write_stream(path, config, batches):
    """Dump instances for replay: JSON config header, then per-instance
    records (features as little-endian doubles, label as signed byte)."""
    header = json.dumps(config.__dict__).encode()
    with open(path, "wb") as f:
        f.write(STREAM_MAGIC)
        f.write(struct.pack("<I", len(header)))
        f.write(header)
        for batch in batches:
            for row, label in zip(batch.features, batch.labels):
                f.write(row.astype("<f8").tobytes())
                f.write(struct.pack("b", int(label)))


def read_stream(path):
    with open(path, "rb") as f:
        if f.read(4) != STREAM_MAGIC:
            raise ValueError(f"{path}: not a stream dump")
        (hlen,) = struct.unpack("<I", f.read(4))
        config = StreamConfig(**json.loads(f.read(hlen).decode()))
        n_features = LED_FEATURES if config.kind == "led" else WAVEFORM_FEATURES
        rec = n_features * 8 + 1
        payload = f.read()
    if len(payload) % rec != 0:
        raise ValueError(f"{path}: truncated record at byte {8 + hlen + len(payload)}")
    n = len(payload) // rec
    feats = np.empty((n, n_features))
    labels = np.empty(n, dtype=np.int64)
    for i in range(n):
        chunk = payload[i * rec:(i + 1) * rec]
        feats[i] = np.frombuffer(chunk[:-1], dtype="<f8")
        labels[i] = struct.unpack("b", chunk[-1:])[0]
    return config, StreamBatch(feats, labels)
