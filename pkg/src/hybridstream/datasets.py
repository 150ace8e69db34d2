"""IDX (MNIST-style) dataset loading and stratified semi-supervised splits."""

import os
import struct
from dataclasses import dataclass

import numpy as np

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801


class IdxError(ValueError):
    pass


@dataclass
class IdxDataset:
    images: np.ndarray  # (N, D) in [0, 1]
    labels: np.ndarray  # (N,) class indices


def _read_exact(f, n, path):
    data = f.read(n)
    if len(data) != n:
        raise IdxError(f"{path}: truncated at byte {f.tell() - len(data)} "
                       f"(wanted {n} bytes, got {len(data)})")
    return data


def load_idx(images_path, labels_path):
    """Big-endian IDX parsing; pixels are scaled from [0, 255] to [0, 1]."""
    with open(images_path, "rb") as f:
        (magic,) = struct.unpack(">I", _read_exact(f, 4, images_path))
        if magic != IMAGE_MAGIC:
            raise IdxError(f"{images_path}: bad image magic 0x{magic:08x} at byte 0")
        n, rows, cols = struct.unpack(">III", _read_exact(f, 12, images_path))
        raw = _read_exact(f, n * rows * cols, images_path)
        images = np.frombuffer(raw, dtype=np.uint8).reshape(n, rows * cols)
        images = images.astype(np.float64) / 255.0
    with open(labels_path, "rb") as f:
        (magic,) = struct.unpack(">I", _read_exact(f, 4, labels_path))
        if magic != LABEL_MAGIC:
            raise IdxError(f"{labels_path}: bad label magic 0x{magic:08x} at byte 0")
        (n_labels,) = struct.unpack(">I", _read_exact(f, 4, labels_path))
        labels = np.frombuffer(_read_exact(f, n_labels, labels_path),
                               dtype=np.uint8).astype(np.int64)
    if n_labels != n:
        raise IdxError(f"{labels_path}: {n_labels} labels for {n} images")
    return IdxDataset(images, labels)


def mnist_paths(root=None, split="train"):
    """Conventional IDX file locations under a dataset root.

    Falls back to the HYBRIDSTREAM_DATA environment variable.
    """
    root = root or os.environ.get("HYBRIDSTREAM_DATA", ".")
    prefix = "train" if split == "train" else "t10k"
    return (os.path.join(root, f"{prefix}-images-idx3-ubyte"),
            os.path.join(root, f"{prefix}-labels-idx1-ubyte"))


def split_semi_supervised(dataset, n_labeled, n_valid, rng):
    """Class-stratified disjoint (labeled, unlabeled, validation) split.

    The unlabeled part is the remainder with labels stripped (returned as
    features only).
    """
    labels = dataset.labels
    classes = np.unique(labels)
    per_class_lab = n_labeled // len(classes)
    per_class_val = n_valid // len(classes)
    lab_idx, val_idx = [], []
    for c in classes:
        idx = np.flatnonzero(labels == c)
        if len(idx) < per_class_lab + per_class_val:
            raise ValueError(f"class {c}: only {len(idx)} samples for "
                             f"{per_class_lab + per_class_val} requested")
        idx = rng.permutation(idx)
        lab_idx.append(idx[:per_class_lab])
        val_idx.append(idx[per_class_lab:per_class_lab + per_class_val])
    lab_idx = np.concatenate(lab_idx)
    val_idx = np.concatenate(val_idx)
    taken = np.zeros(len(labels), dtype=bool)
    taken[lab_idx] = True
    taken[val_idx] = True
    unlab_idx = np.flatnonzero(~taken)
    labeled = IdxDataset(dataset.images[lab_idx], labels[lab_idx])
    validation = IdxDataset(dataset.images[val_idx], labels[val_idx])
    unlabeled = dataset.images[unlab_idx]
    return labeled, unlabeled, validation
