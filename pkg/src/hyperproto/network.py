"""A small fully connected network trained against fixed prototypes."""

from dataclasses import dataclass, field, replace
from typing import List, Tuple

import numpy as np

from .errors import DomainError, RunError
from .geometry import check_prototypes
from .losses import (JointSpace, RegressionBounds, _guard, class_loss_batch, denormalize_cos,
                     normalize_target, regr_loss_batch)

TASKS = ("classification", "regression", "joint")


@dataclass
class MlpParams:
    """Layers as ``(W, b)`` pairs with ``W`` of shape (out, in).

    Hidden layers use a rectifier, the output layer is linear.
    """

    layers: List[Tuple[np.ndarray, np.ndarray]]

    def __post_init__(self):
        if not self.layers:
            raise DomainError("network needs at least one layer")
        prev = None
        for idx, (W, b) in enumerate(self.layers):
            if W.ndim != 2 or b.shape != (W.shape[0],):
                raise DomainError(f"layer {idx}: weight {W.shape} and bias {b.shape} disagree")
            if prev is not None and W.shape[1] != prev:
                raise DomainError(f"layer {idx} expects {W.shape[1]} inputs, previous layer gives {prev}")
            if not (np.all(np.isfinite(W)) and np.all(np.isfinite(b))):
                raise DomainError(f"layer {idx} has non-finite entries")
            prev = W.shape[0]

    @property
    def widths(self):
        return [self.layers[0][0].shape[1]] + [W.shape[0] for W, _ in self.layers]

    @property
    def input_dim(self):
        return self.layers[0][0].shape[1]

    @property
    def output_dim(self):
        return self.layers[-1][0].shape[0]

    def copy(self):
        return MlpParams([(W.copy(), b.copy()) for W, b in self.layers])


@dataclass
class TrainConfig:
    epochs: int = 250
    batch_size: int = 128
    learning_rate: float = 0.01
    momentum: float = 0.9
    weight_decay: float = 1e-4
    lr_drop_epochs: Tuple[int, ...] = (100, 200)
    lr_drop_factor: float = 0.1
    seed: int = 0
    task: str = "classification"
    eval_every: int = 10

    def __post_init__(self):
        if self.epochs < 1:
            raise DomainError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise DomainError(f"batch_size must be >= 1, got {self.batch_size}")
        if not self.learning_rate > 0:
            raise DomainError("learning_rate must be positive")
        if self.weight_decay < 0:
            raise DomainError("weight_decay must be non-negative")
        if not self.lr_drop_factor > 0:
            raise DomainError("lr_drop_factor must be positive")
        drops = tuple(int(e) for e in self.lr_drop_epochs)
        if any(b <= a for a, b in zip(drops, drops[1:])):
            raise DomainError(f"lr_drop_epochs must be strictly increasing, got {drops}")
        self.lr_drop_epochs = drops
        if self.task not in TASKS:
            raise DomainError(f"task must be one of {TASKS}, got {self.task!r}")

    def scaled(self, epochs):
        """Same schedule stretched or shrunk to ``epochs`` total epochs."""
        drops = tuple(round(e * epochs / self.epochs) for e in self.lr_drop_epochs)
        drops = tuple(sorted(set(d for d in drops if 0 < d < epochs)))
        return replace(self, epochs=epochs, lr_drop_epochs=drops)

    def lr_at(self, epoch):
        """Learning rate for a 0-based epoch index."""
        drops = sum(1 for d in self.lr_drop_epochs if d <= epoch)
        return self.learning_rate * self.lr_drop_factor**drops


@dataclass
class MetricsLog:
    rows: List[Tuple[int, str, str, float]] = field(default_factory=list)

    def add(self, epoch, split, metric, value):
        self.rows.append((int(epoch), split, metric, float(value)))

    def last(self, split, metric):
        for e, s, m, v in reversed(self.rows):
            if s == split and m == metric:
                return v
        raise KeyError((split, metric))

    def series(self, split, metric):
        return [(e, v) for e, s, m, v in self.rows if s == split and m == metric]


def mlp_init(layer_widths, seed):
    """Gaussian weights with std ``1/sqrt(fan_in)`` and zero biases."""
    widths = [int(w) for w in layer_widths]
    if len(widths) < 2:
        raise DomainError(f"need at least input and output widths, got {widths}")
    if any(w < 1 for w in widths):
        raise DomainError(f"layer widths must be positive, got {widths}")
    rng = np.random.default_rng(seed)
    layers = []
    for fan_in, fan_out in zip(widths, widths[1:]):
        W = rng.standard_normal((fan_out, fan_in)) / np.sqrt(fan_in)
        layers.append((W, np.zeros(fan_out)))
    return MlpParams(layers)


def forward(params, x):
    """Outputs for a single input vector or a batch of row inputs.

    Returns ``(z, cache)``; ``cache`` holds each layer's input and
    pre-activation for :func:`backward`.
    """
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    X = x[None, :] if single else x
    if X.ndim != 2 or X.shape[1] != params.input_dim:
        raise DomainError(f"input has {X.shape[-1]} dims, network expects {params.input_dim}")
    inputs, pre = [], []
    h = X
    last = len(params.layers) - 1
    for idx, (W, b) in enumerate(params.layers):
        inputs.append(h)
        a = h @ W.T + b
        pre.append(a)
        h = a if idx == last else np.maximum(a, 0.0)
    cache = {"inputs": inputs, "pre": pre, "single": single, "widths": params.widths}
    return (h[0] if single else h), cache


def backward(params, cache, dLdz):
    """Gradients ``[(dW, db), ...]`` of the loss whose output gradient is ``dLdz``.

    For a batch, ``dLdz`` holds one row per example and the parameter
    gradients are summed over rows.
    """
    if cache["widths"] != params.widths:
        raise DomainError("cache was produced by a network of different shape")
    G = np.asarray(dLdz, dtype=np.float64)
    if cache["single"]:
        G = G[None, :]
    if G.shape != cache["pre"][-1].shape:
        raise DomainError(f"output gradient shape {G.shape} does not match outputs {cache['pre'][-1].shape}")
    grads = [None] * len(params.layers)
    for idx in range(len(params.layers) - 1, -1, -1):
        W, _ = params.layers[idx]
        grads[idx] = (G.T @ cache["inputs"][idx], G.sum(axis=0))
        if idx > 0:
            G = (G @ W) * (cache["pre"][idx - 1] > 0)
    return grads


def sgd_step(params, grads, velocity, lr, momentum, weight_decay):
    """Classical momentum with L2 folded into the gradient.

    ``velocity`` may be ``None`` for a zero start. Returns new params and
    velocity; inputs are not modified.
    """
    if len(grads) != len(params.layers):
        raise DomainError("gradient list does not match layers")
    if velocity is None:
        velocity = [(np.zeros_like(W), np.zeros_like(b)) for W, b in params.layers]
    new_layers, new_vel = [], []
    for (W, b), (gW, gb), (vW, vb) in zip(params.layers, grads, velocity):
        if gW.shape != W.shape or gb.shape != b.shape or vW.shape != W.shape or vb.shape != b.shape:
            raise DomainError("parameter, gradient and velocity shapes disagree")
        vW = momentum * vW + (gW + weight_decay * W)
        vb = momentum * vb + (gb + weight_decay * b)
        new_layers.append((W - lr * vW, b - lr * vb))
        new_vel.append((vW, vb))
    return MlpParams(new_layers), new_vel


def _target_dim(task, targets):
    if task == "classification":
        if not isinstance(targets, np.ndarray):
            raise DomainError("classification needs a prototype matrix")
        return check_prototypes(targets).shape[1]
    if task == "regression":
        if not isinstance(targets, RegressionBounds):
            raise DomainError("regression needs RegressionBounds")
        return None
    if not isinstance(targets, JointSpace):
        raise DomainError("joint training needs a JointSpace")
    return targets.dims


def _check_data(task, data, targets):
    if data.n == 0:
        raise DomainError("dataset is empty")
    if task in ("classification", "joint"):
        if data.class_labels is None:
            raise DomainError(f"{task} needs class labels")
        K = (targets if task == "classification" else targets.class_prototypes).shape[0]
        if data.class_labels.max() >= K:
            raise DomainError(f"class label {int(data.class_labels.max())} outside [0, {K})")
    if task in ("regression", "joint"):
        if data.scalar_targets is None:
            raise DomainError(f"{task} needs scalar targets")
        if not np.all(np.isfinite(data.scalar_targets)):
            raise DomainError("regression targets must be finite")


def batch_loss(task, targets, Z, labels, r):
    """Per-example losses and output gradients for a batch of outputs."""
    if task == "classification":
        return class_loss_batch(Z, targets[labels])
    if task == "regression":
        return regr_loss_batch(Z, targets, r)
    lc, gc = class_loss_batch(Z, targets.class_prototypes[labels])
    lr_, gr = regr_loss_batch(Z, targets.bounds, r)
    return lc + lr_, gc + gr


def train(config, data, targets, params=None, eval_data=None, hidden=(64, 64), out_dim=None):
    """Mini-batch SGD of an MLP against fixed ``targets``.

    ``targets`` is a prototype matrix, :class:`RegressionBounds` or
    :class:`JointSpace` according to ``config.task``. Without ``params`` a
    network with the given ``hidden`` widths is initialized from
    ``config.seed``; regression then also needs ``out_dim``. Evaluation
    metrics for ``data`` and ``eval_data`` are logged every
    ``config.eval_every`` epochs and after the last one.

    Returns ``(params, MetricsLog)``.
    """
    task = config.task
    D = _target_dim(task, targets)
    _check_data(task, data, targets)
    if params is None:
        width = D if D is not None else out_dim
        if width is None:
            raise DomainError("regression needs out_dim when no params are given")
        params = mlp_init([data.inputs.shape[1], *hidden, width], config.seed)
    if D is not None and params.output_dim != D:
        raise DomainError(f"network outputs {params.output_dim} dims, targets have {D}")
    if task == "regression":
        targets.upper(params.output_dim)
    if data.inputs.shape[1] != params.input_dim:
        raise DomainError(f"data has {data.inputs.shape[1]} features, network expects {params.input_dim}")

    bounds = targets if task == "regression" else getattr(targets, "bounds", None)
    X = data.inputs
    labels = data.class_labels
    r_all = normalize_target(data.scalar_targets, bounds) if bounds is not None else None

    rng = np.random.default_rng(np.random.SeedSequence(config.seed).spawn(1)[0])
    log = MetricsLog()
    velocity = None
    n = data.n
    for epoch in range(config.epochs):
        lr = config.lr_at(epoch)
        order = rng.permutation(n)
        total = 0.0
        for batch, start in enumerate(range(0, n, config.batch_size)):
            idx = order[start:start + config.batch_size]
            Z, cache = forward(params, X[idx])
            lab = labels[idx] if labels is not None else None
            r = r_all[idx] if r_all is not None else None
            losses, dZ = batch_loss(task, targets, Z, lab, r)
            loss = losses.mean()
            if not np.isfinite(loss):
                raise RunError(f"non-finite loss at epoch {epoch + 1}, batch {batch}",
                               epoch=epoch + 1, batch=batch)
            total += losses.sum()
            grads = backward(params, cache, dZ / len(idx))
            if not all(np.all(np.isfinite(gW)) and np.all(np.isfinite(gb)) for gW, gb in grads):
                raise RunError(f"non-finite gradient at epoch {epoch + 1}, batch {batch}",
                               epoch=epoch + 1, batch=batch)
            params, velocity = sgd_step(params, grads, velocity, lr, config.momentum,
                                        config.weight_decay)
        log.add(epoch + 1, "train", "loss", total / n)
        if (epoch + 1) % config.eval_every == 0 or epoch + 1 == config.epochs:
            for split, ds in (("train", data), ("test", eval_data)):
                if ds is not None and ds.n > 0:
                    for name, value in evaluate(params, ds, targets, task).items():
                        log.add(epoch + 1, split, name, value)
    return params, log


def outputs(params, X):
    Z, _ = forward(params, np.asarray(X, dtype=np.float64).reshape(-1, params.input_dim))
    Z, _ = _guard(Z)
    return Z


def predict_classes(params, X, P):
    Z = outputs(params, X)
    Zn = Z / np.linalg.norm(Z, axis=1)[:, None]
    Pn = P / np.linalg.norm(P, axis=1)[:, None]
    return np.argmax(Zn @ Pn.T, axis=1)


def predict_values(params, X, b):
    Z = outputs(params, X)
    if b.pole_axis >= Z.shape[1]:
        raise DomainError(f"pole axis {b.pole_axis} outside {Z.shape[1]} output dims")
    c = np.clip(Z[:, b.pole_axis] / np.linalg.norm(Z, axis=1), -1.0, 1.0)
    return np.clip(denormalize_cos(c, b), b.v_l, b.v_u)


def evaluate_classification(params, data, P):
    if data.n == 0:
        raise DomainError("cannot evaluate on an empty dataset")
    P = np.asarray(P, dtype=np.float64)
    if P.shape[1] != params.output_dim:
        raise DomainError(f"network outputs {params.output_dim} dims, prototypes have {P.shape[1]}")
    return float(np.mean(predict_classes(params, data.inputs, P) == data.class_labels))


def evaluate_regression(params, data, b):
    if data.n == 0:
        raise DomainError("cannot evaluate on an empty dataset")
    return float(np.mean(np.abs(predict_values(params, data.inputs, b) - data.scalar_targets)))


def evaluate(params, data, targets, task):
    """Metric dict for ``task``: ``accuracy`` and/or ``mae``."""
    out = {}
    if task in ("classification", "joint"):
        P = targets if task == "classification" else targets.class_prototypes
        out["accuracy"] = evaluate_classification(params, data, P)
    if task in ("regression", "joint"):
        b = targets if task == "regression" else targets.bounds
        out["mae"] = evaluate_regression(params, data, b)
    return out
