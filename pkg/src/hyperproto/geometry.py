"""Vector kernels on the unit hypersphere."""

import numpy as np

from .errors import DomainError

NORM_FLOOR = 1e-12


def _as_vector(v, name):
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise DomainError(f"{name} must be a non-empty 1-D vector, got shape {v.shape}")
    return v


def cosine_similarity(a, b):
    """Cosine of the angle between ``a`` and ``b``, clamped to [-1, 1]."""
    a = _as_vector(a, "a")
    b = _as_vector(b, "b")
    if a.shape != b.shape:
        raise DomainError(f"dimension mismatch: {a.size} vs {b.size}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na < NORM_FLOOR:
        raise DomainError("argument a has zero norm")
    if nb < NORM_FLOOR:
        raise DomainError("argument b has zero norm")
    c = float(a @ b) / (na * nb)
    return min(1.0, max(-1.0, c))


def cosine_matrix(X, Y=None):
    """Pairwise cosine similarities between the rows of ``X`` and ``Y``."""
    X = np.asarray(X, dtype=np.float64)
    nx = np.linalg.norm(X, axis=1)
    if np.any(nx < NORM_FLOOR):
        raise DomainError(f"row {int(np.argmax(nx < NORM_FLOOR))} has zero norm")
    Xn = X / nx[:, None]
    if Y is None:
        Yn = Xn
    else:
        Y = np.asarray(Y, dtype=np.float64)
        ny = np.linalg.norm(Y, axis=1)
        if np.any(ny < NORM_FLOOR):
            raise DomainError(f"row {int(np.argmax(ny < NORM_FLOOR))} has zero norm")
        Yn = Y / ny[:, None]
    return np.clip(Xn @ Yn.T, -1.0, 1.0)


def l2_normalize(v):
    v = _as_vector(v, "v")
    n = np.linalg.norm(v)
    if n <= NORM_FLOOR:
        raise DomainError(f"cannot normalize vector with norm {n:.3g}")
    return v / n


def normalize_rows(X):
    """Scale every row of ``X`` to unit norm."""
    X = np.asarray(X, dtype=np.float64)
    n = np.linalg.norm(X, axis=1)
    if np.any(n <= NORM_FLOOR):
        raise DomainError(f"row {int(np.argmax(n <= NORM_FLOOR))} has zero norm")
    return X / n[:, None]


def _check_count(K, name="K"):
    if int(K) != K or K < 1:
        raise DomainError(f"{name} must be a positive integer, got {K}")
    return int(K)


def circle_prototypes(K):
    """K points on the unit circle, spaced 2*pi/K apart starting at (1, 0)."""
    K = _check_count(K)
    psi = 2.0 * np.pi * np.arange(K) / K
    return np.column_stack([np.cos(psi), np.sin(psi)])


def one_hot_prototypes(K):
    K = _check_count(K)
    return np.eye(K)


def sample_unit(D, rng):
    """Draw a direction uniformly from the unit sphere in ``D`` dimensions.

    Normalizes ``D`` standard normal draws from ``rng``. A draw whose norm
    falls under the floor is rejected and redrawn.
    """
    D = _check_count(D, "D")
    while True:
        v = rng.standard_normal(D)
        n = np.linalg.norm(v)
        if n > NORM_FLOOR:
            return v / n


def check_prototypes(P, tol=1e-6):
    """Validate a K x D prototype matrix and return it as float64."""
    P = np.asarray(P, dtype=np.float64)
    if P.ndim != 2 or P.shape[0] < 1 or P.shape[1] < 1:
        raise DomainError(f"prototypes must be a non-empty K x D matrix, got shape {P.shape}")
    if not np.all(np.isfinite(P)):
        raise DomainError("prototypes contain non-finite values")
    dev = np.abs(np.linalg.norm(P, axis=1) - 1.0)
    if np.any(dev > tol):
        i = int(np.argmax(dev > tol))
        raise DomainError(f"prototype row {i} is not unit norm (|norm - 1| = {dev[i]:.3g})")
    return P
