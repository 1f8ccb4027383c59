"""Cosine losses for classification, regression and both at once.

Every loss depends on the network output ``z`` only through its direction,
so positive rescaling of ``z`` leaves losses and predictions unchanged.
The gradients are with respect to the raw (unnormalized) output.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .geometry import NORM_FLOOR, check_prototypes, cosine_similarity
from .prototypes import ProtoOptConfig, optimize_prototypes


@dataclass(frozen=True)
class RegressionBounds:
    """Target range ``[v_l, v_u]`` with poles ``p_u = +e_axis``, ``p_l = -e_axis``."""

    v_l: float
    v_u: float
    pole_axis: int = 0

    def __post_init__(self):
        if not (np.isfinite(self.v_l) and np.isfinite(self.v_u)):
            raise DomainError("regression bounds must be finite")
        if not self.v_u > self.v_l:
            raise DomainError(f"need v_u > v_l, got v_l={self.v_l}, v_u={self.v_u}")
        if self.pole_axis < 0:
            raise DomainError(f"pole_axis must be non-negative, got {self.pole_axis}")

    def upper(self, D):
        if self.pole_axis >= D:
            raise DomainError(f"pole axis {self.pole_axis} outside {D} output dims")
        p = np.zeros(D)
        p[self.pole_axis] = 1.0
        return p

    def lower(self, D):
        return -self.upper(D)


@dataclass
class JointSpace:
    """Regression poles on one axis, class prototypes orthogonal to it."""

    bounds: RegressionBounds
    class_prototypes: np.ndarray

    def __post_init__(self):
        P = check_prototypes(self.class_prototypes)
        if self.bounds.pole_axis >= P.shape[1]:
            raise DomainError("pole axis outside the prototype dimension")
        off = np.abs(P[:, self.bounds.pole_axis])
        if np.any(off > 1e-9):
            raise DomainError(f"class prototype {int(np.argmax(off > 1e-9))} is not orthogonal to the pole axis")
        self.class_prototypes = P

    @property
    def dims(self):
        return self.class_prototypes.shape[1]


def _vec(z, name="z"):
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 1:
        raise DomainError(f"{name} must be a vector")
    if np.linalg.norm(z) < NORM_FLOOR:
        raise DomainError(f"{name} has zero norm")
    return z


def class_loss(z, p):
    """``(1 - cos(z, p))**2`` with the signed cosine."""
    return (1.0 - cosine_similarity(_vec(z), p)) ** 2


def class_loss_grad(z, p):
    z = _vec(z)
    p = np.asarray(p, dtype=np.float64)
    c = cosine_similarity(z, p)
    nz = np.linalg.norm(z)
    return 2.0 * (1.0 - c) * (c * z / nz**2 - p / (nz * np.linalg.norm(p)))


def classify(z, P):
    """Index of the prototype with the highest cosine to ``z``; ties go low."""
    z = _vec(z)
    P = np.asarray(P, dtype=np.float64)
    if P.ndim != 2 or P.shape[1] != z.size:
        raise DomainError(f"output has {z.size} dims, prototypes have shape {P.shape}")
    sims = (P @ z) / (np.linalg.norm(P, axis=1) * np.linalg.norm(z))
    return int(np.argmax(sims))


def normalize_target(y, b):
    """Map ``[v_l, v_u]`` affinely onto ``[-1, 1]``; no clamping."""
    return 2.0 * (y - b.v_l) / (b.v_u - b.v_l) - 1.0


def denormalize_cos(c, b):
    return b.v_l + (c + 1.0) / 2.0 * (b.v_u - b.v_l)


def predict_value(z, b):
    """Regression prediction from an output vector, clamped to the bounds."""
    z = _vec(z)
    c = cosine_similarity(z, b.upper(z.size))
    return float(np.clip(denormalize_cos(c, b), b.v_l, b.v_u))


def regr_loss(z, b, r):
    """``(r - cos(z, p_u))**2`` for an already normalized target ``r``."""
    z = _vec(z)
    return (r - cosine_similarity(z, b.upper(z.size))) ** 2


def regr_loss_grad(z, b, r):
    z = _vec(z)
    pu = b.upper(z.size)
    c = cosine_similarity(z, pu)
    nz = np.linalg.norm(z)
    return -2.0 * (r - c) * (pu / nz - c * z / nz**2)


def joint_loss(z, space, class_label, r):
    """Class term plus regression term, unweighted."""
    P = space.class_prototypes
    if not 0 <= class_label < P.shape[0]:
        raise DomainError(f"class label {class_label} outside [0, {P.shape[0]})")
    return class_loss(z, P[class_label]) + regr_loss(z, space.bounds, r)


def joint_loss_grad(z, space, class_label, r):
    P = space.class_prototypes
    if not 0 <= class_label < P.shape[0]:
        raise DomainError(f"class label {class_label} outside [0, {P.shape[0]})")
    return class_loss_grad(z, P[class_label]) + regr_loss_grad(z, space.bounds, r)


def build_joint_space(K, D, config=None, bounds=None):
    """Poles on axis 0; class prototypes optimized in the remaining D-1 axes.

    ``bounds`` defaults to [0, 1]; pass the task's real range so targets
    normalize into [-1, 1].
    """
    if int(D) != D or D < 3:
        raise DomainError(f"joint space needs D >= 3, got {D}")
    P, _ = optimize_prototypes(K, D - 1, config or ProtoOptConfig())
    return embed_equator(P, bounds)


def embed_equator(P, bounds=None):
    """Prepend a zero pole coordinate to (D-1)-dim class prototypes."""
    P = check_prototypes(P)
    bounds = bounds or RegressionBounds(0.0, 1.0)
    if bounds.pole_axis != 0:
        raise DomainError("equator embedding requires pole_axis 0")
    full = np.hstack([np.zeros((P.shape[0], 1)), P])
    return JointSpace(bounds, full)


# Batched forms used in training. Rows of ``Z`` are outputs; each returns
# per-row losses and per-row gradients with respect to ``Z``.

def _guard(Z):
    n = np.linalg.norm(Z, axis=1)
    small = n < NORM_FLOOR
    if np.any(small):
        Z = Z.copy()
        Z[small, 0] += NORM_FLOOR
        n = np.linalg.norm(Z, axis=1)
    return Z, n


def _cos_rows(Z, n, T):
    return np.clip(np.einsum("ij,ij->i", Z, T) / (n * np.linalg.norm(T, axis=1)), -1.0, 1.0)


def class_loss_batch(Z, targets):
    """Losses and gradients for outputs ``Z`` against prototype rows ``targets``."""
    Z, n = _guard(np.asarray(Z, dtype=np.float64))
    c = _cos_rows(Z, n, targets)
    tn = np.linalg.norm(targets, axis=1)
    grad = 2.0 * (1.0 - c)[:, None] * (c[:, None] * Z / (n * n)[:, None]
                                       - targets / (n * tn)[:, None])
    return (1.0 - c) ** 2, grad


def regr_loss_batch(Z, b, r):
    Z, n = _guard(np.asarray(Z, dtype=np.float64))
    ax = b.pole_axis
    c = np.clip(Z[:, ax] / n, -1.0, 1.0)
    diff = r - c
    grad = 2.0 * diff[:, None] * c[:, None] * Z / (n * n)[:, None]
    grad[:, ax] -= 2.0 * diff / n
    return diff**2, grad
