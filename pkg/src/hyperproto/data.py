"""Datasets: CSV and word2vec loaders plus seeded synthetic generators."""

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (DomainError, DuplicateNameError, HeaderMismatchError, MissingLabelError,
                     ParseError, RaggedRowError, ZeroVectorError)
from .geometry import NORM_FLOOR
from .prototypes import EmbeddingSet

SPLITS = ("train", "test")


@dataclass
class Dataset:
    inputs: np.ndarray
    class_labels: Optional[np.ndarray] = None
    scalar_targets: Optional[np.ndarray] = None
    split: str = "train"
    n_classes: Optional[int] = None

    def __post_init__(self):
        self.inputs = np.asarray(self.inputs, dtype=np.float64)
        if self.inputs.ndim != 2:
            raise DomainError(f"inputs must be an N x L matrix, got shape {self.inputs.shape}")
        n = self.inputs.shape[0]
        if self.class_labels is None and self.scalar_targets is None:
            raise DomainError("dataset needs class labels, scalar targets or both")
        if not np.all(np.isfinite(self.inputs)):
            raise DomainError("inputs contain non-finite values")
        if self.class_labels is not None:
            self.class_labels = np.asarray(self.class_labels, dtype=np.int64)
            if self.class_labels.shape != (n,):
                raise DomainError(f"{self.class_labels.shape[0]} labels for {n} examples")
            if n and self.class_labels.min() < 0:
                raise DomainError("class labels must be non-negative")
            if self.n_classes is not None and n and self.class_labels.max() >= self.n_classes:
                raise DomainError(f"class label {int(self.class_labels.max())} outside [0, {self.n_classes})")
        if self.scalar_targets is not None:
            self.scalar_targets = np.asarray(self.scalar_targets, dtype=np.float64)
            if self.scalar_targets.shape != (n,):
                raise DomainError(f"{self.scalar_targets.shape[0]} targets for {n} examples")
            if not np.all(np.isfinite(self.scalar_targets)):
                raise DomainError("scalar targets contain non-finite values")
        if self.split not in SPLITS:
            raise DomainError(f"split must be one of {SPLITS}, got {self.split!r}")

    @property
    def n(self):
        return self.inputs.shape[0]

    def subset(self, idx, split=None):
        return Dataset(
            self.inputs[idx],
            None if self.class_labels is None else self.class_labels[idx],
            None if self.scalar_targets is None else self.scalar_targets[idx],
            split or self.split,
            self.n_classes,
        )


def split_dataset(data, test_fraction, seed):
    """Shuffle with ``seed`` and cut off ``round(n * test_fraction)`` test rows."""
    if not 0 <= test_fraction < 1:
        raise DomainError(f"test fraction must lie in [0, 1), got {test_fraction}")
    order = np.random.default_rng([seed, 1]).permutation(data.n)
    n_test = int(round(data.n * test_fraction))
    return data.subset(order[n_test:], "train"), data.subset(order[:n_test], "test")


def _check_counts(K, n_per_class):
    if int(K) != K or K < 2:
        raise DomainError(f"need at least 2 classes, got {K}")
    if int(n_per_class) != n_per_class or n_per_class < 1:
        raise DomainError(f"n_per_class must be positive, got {n_per_class}")


def gen_blobs(K, n_per_class, input_dim, spread, seed):
    """Isotropic Gaussian clusters around random unit directions.

    Centers are scaled up, if needed, until every pair is at least 1 apart.
    """
    _check_counts(K, n_per_class)
    if int(input_dim) != input_dim or input_dim < 2:
        raise DomainError(f"input_dim must be >= 2, got {input_dim}")
    if not spread > 0:
        raise DomainError(f"spread must be positive, got {spread}")
    rng = np.random.default_rng(seed)
    centers = rng.standard_normal((K, input_dim))
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    diff = centers[:, None, :] - centers[None, :, :]
    dist = np.linalg.norm(diff, axis=2)[np.triu_indices(K, 1)]
    if dist.min() < NORM_FLOOR:
        raise DomainError("random centers coincide; choose another seed")
    centers *= max(1.0, 1.0 / dist.min())
    labels = np.repeat(np.arange(K), n_per_class)
    X = centers[labels] + spread * rng.standard_normal((K * n_per_class, input_dim))
    return Dataset(X, labels, None, "train", K)


TEMPLATE_POINTS = 4


def rotation_templates(K, seed):
    """``K`` random 2-D point clouds of ``TEMPLATE_POINTS`` points each."""
    rng = np.random.default_rng([seed, 0])
    return rng.uniform(-1.0, 1.0, size=(K, TEMPLATE_POINTS, 2))


def rotate_template(template, degrees):
    t = np.deg2rad(degrees)
    c, s = np.cos(t), np.sin(t)
    R = np.array([[c, -s], [s, c]])
    return (template @ R.T).ravel()


def gen_rotated(K, n_per_class, seed):
    """Rotated point-cloud templates with class and angle (degrees) targets.

    Angles are uniform on [0, 180] and drawn independently of the class.
    """
    _check_counts(K, n_per_class)
    templates = rotation_templates(K, seed)
    rng = np.random.default_rng([seed, 1])
    labels = np.repeat(np.arange(K), n_per_class)
    angles = rng.uniform(0.0, 180.0, size=labels.size)
    X = np.stack([rotate_template(templates[c], a) for c, a in zip(labels, angles)])
    return Dataset(X, labels, angles, "train", K)


def _parse_float(cell, line):
    try:
        v = float(cell)
    except ValueError:
        raise ParseError(f"cannot parse {cell!r} as a number", line) from None
    if not np.isfinite(v):
        raise ParseError(f"non-finite value {cell!r}", line)
    return v


def load_csv(path):
    """Read a dataset with a header row.

    ``class`` holds integer labels, ``target`` scalar targets; every other
    column is an input feature, in header order.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise MissingLabelError("empty file", 1)
    header = [h.strip() for h in rows[0]]
    if "class" not in header and "target" not in header:
        raise MissingLabelError("no 'class' or 'target' column", 1)
    ci = header.index("class") if "class" in header else None
    ti = header.index("target") if "target" in header else None
    feat = [i for i, h in enumerate(header) if i not in (ci, ti)]
    X, labels, targets = [], [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise RaggedRowError(f"expected {len(header)} fields, got {len(row)}", lineno)
        X.append([_parse_float(row[i], lineno) for i in feat])
        if ci is not None:
            cell = row[ci].strip()
            try:
                lab = int(cell)
            except ValueError:
                raise ParseError(f"class label {cell!r} is not an integer", lineno) from None
            if lab < 0:
                raise ParseError(f"negative class label {lab}", lineno)
            labels.append(lab)
        if ti is not None:
            targets.append(_parse_float(row[ti], lineno))
    X = np.array(X, dtype=np.float64).reshape(len(X), len(feat))
    return Dataset(
        X,
        np.array(labels, dtype=np.int64) if ci is not None else None,
        np.array(targets, dtype=np.float64) if ti is not None else None,
    )


def save_csv(data, path):
    """Write ``data`` in the format read by :func:`load_csv`, 17 significant digits."""
    header = [f"x{i}" for i in range(data.inputs.shape[1])]
    if data.class_labels is not None:
        header.append("class")
    if data.scalar_targets is not None:
        header.append("target")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for n in range(data.n):
            row = [format(v, ".17g") for v in data.inputs[n]]
            if data.class_labels is not None:
                row.append(str(int(data.class_labels[n])))
            if data.scalar_targets is not None:
                row.append(format(data.scalar_targets[n], ".17g"))
            w.writerow(row)


def load_embeddings(path):
    """Read class embeddings in word2vec text format."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise HeaderMismatchError("empty embedding file", 1)
    head = lines[0].split()
    if len(head) != 2:
        raise HeaderMismatchError("header must be '<count> <dim>'", 1)
    try:
        count, dim = int(head[0]), int(head[1])
    except ValueError:
        raise HeaderMismatchError("header must be '<count> <dim>'", 1) from None
    body = lines[1:]
    if len(body) != count:
        raise HeaderMismatchError(f"header declares {count} vectors, file has {len(body)}")
    names, vectors, seen = [], [], set()
    for lineno, line in enumerate(body, start=2):
        parts = line.split()
        if len(parts) != dim + 1:
            raise HeaderMismatchError(f"expected name and {dim} values, got {len(parts) - 1} values", lineno)
        name = parts[0]
        if name in seen:
            raise DuplicateNameError(f"duplicate class name {name!r}", lineno)
        seen.add(name)
        vec = [_parse_float(c, lineno) for c in parts[1:]]
        if np.linalg.norm(vec) < NORM_FLOOR:
            raise ZeroVectorError(f"embedding for {name!r} is a zero vector", lineno)
        names.append(name)
        vectors.append(vec)
    return EmbeddingSet(names, np.array(vectors, dtype=np.float64).reshape(count, dim))


def save_embeddings(W, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(W)} {W.vectors.shape[1]}\n")
        for name, v in zip(W.names, W.vectors):
            fh.write(name + " " + " ".join(format(x, ".17g") for x in v) + "\n")
