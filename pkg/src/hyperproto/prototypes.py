"""Data-independent positioning of class prototypes on the hypersphere.

Prototypes are spread out by minimizing the mean, over prototypes, of the
cosine similarity to the nearest other prototype. Optionally a triplet
ranking loss pulls the similarity order of the prototypes towards that of
class-name embeddings.
"""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from . import kernels
from .errors import DomainError, RunError
from .geometry import NORM_FLOOR, cosine_matrix, normalize_rows, sample_unit

PAIR_UPDATES = ("anchor", "both")


@dataclass
class EmbeddingSet:
    """Named class embeddings used as a semantic prior.

    ``vectors`` is K x E; E need not equal the prototype dimension.
    """

    names: List[str]
    vectors: np.ndarray

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=np.float64)
        if self.vectors.ndim != 2:
            raise DomainError(f"embedding vectors must be a K x E matrix, got shape {self.vectors.shape}")
        if len(self.names) != self.vectors.shape[0]:
            raise DomainError(f"{len(self.names)} names for {self.vectors.shape[0]} vectors")
        seen = set()
        for name in self.names:
            if not name:
                raise DomainError("empty class name")
            if name in seen:
                raise DomainError(f"duplicate class name {name!r}")
            seen.add(name)
        norms = np.linalg.norm(self.vectors, axis=1)
        for name, n in zip(self.names, norms):
            if n < NORM_FLOOR:
                raise DomainError(f"embedding for class {name!r} has zero norm")

    def __len__(self):
        return len(self.names)


@dataclass
class ProtoOptConfig:
    """Settings for :func:`optimize_prototypes`.

    ``pair_update`` selects how the nearest-neighbour term of each row is
    applied: ``"anchor"`` moves only the anchor row, ``"both"`` follows the
    full subgradient and moves the neighbour too. The full subgradient lets
    neighbouring prototypes merge in low dimensions (coincident rows are a
    fixed point), so ``"anchor"`` is the default.
    """

    epochs: int = 1000
    learning_rate: float = 0.01
    momentum: float = 0.9
    seed: int = 0
    triplet_subsample: Optional[int] = None
    pi_enabled: bool = True
    pair_update: str = "anchor"

    def __post_init__(self):
        if int(self.epochs) != self.epochs or self.epochs < 1:
            raise DomainError(f"epochs must be >= 1, got {self.epochs}")
        if not self.learning_rate > 0:
            raise DomainError(f"learning_rate must be positive, got {self.learning_rate}")
        if not 0 <= self.momentum < 1:
            raise DomainError(f"momentum must lie in [0, 1), got {self.momentum}")
        if self.triplet_subsample is not None and self.triplet_subsample < 1:
            raise DomainError("triplet_subsample must be positive")
        if self.pair_update not in PAIR_UPDATES:
            raise DomainError(f"pair_update must be one of {PAIR_UPDATES}, got {self.pair_update!r}")


@dataclass(frozen=True)
class SeparationStats:
    """Cosine distances (1 - cos) over all unordered prototype pairs."""

    min: float
    mean: float
    max: float

    def line(self):
        return f"min={self.min:.6f} mean={self.mean:.6f} max={self.max:.6f}"


def _check_pairs(P):
    P = np.asarray(P, dtype=np.float64)
    if P.ndim != 2:
        raise DomainError(f"prototypes must be a K x D matrix, got shape {P.shape}")
    if P.shape[0] < 2:
        raise DomainError(f"need at least 2 prototypes to separate, got {P.shape[0]}")
    return np.ascontiguousarray(P)


def _shifted_gram(P):
    return P @ P.T - 2.0 * np.eye(P.shape[0])


def separation_loss(P):
    """Mean over rows of the largest entry of ``P P^T - 2I``."""
    P = _check_pairs(P)
    return float(_shifted_gram(P).max(axis=1).mean())


def separation_loss_grad(P):
    """Subgradient of :func:`separation_loss` in ambient coordinates.

    Each row's maximal entry contributes to both rows it couples. Ties pick
    the lowest column index.
    """
    P = _check_pairs(P)
    _, G, _ = kernels.rowmax_scatter(_shifted_gram(P), P, True)
    return G / P.shape[0]


def _decode_triplets(K, flat):
    n = K - 1
    per_anchor = n * (n - 1) // 2
    a_idx, b_idx = np.triu_indices(n, 1)
    i = flat // per_anchor
    r = flat % per_anchor
    a, b = a_idx[r], b_idx[r]
    # map [0, K-1) onto [0, K) \ {i}
    j = a + (a >= i)
    k = b + (b >= i)
    return np.column_stack([i, j, k]).astype(np.int64)


def triplet_count(K):
    return K * (K - 1) * (K - 2) // 2


def build_triplets(K, rng=None, subsample=None):
    """Class triplets ``(i, j, k)`` with i, j, k distinct and j < k.

    Without ``subsample`` all ``K(K-1)(K-2)/2`` triplets are returned in
    lexicographic order. Otherwise a uniform random subset of that size is
    drawn from ``rng`` (a fresh ``default_rng(0)`` when omitted) and returned
    in the same order.
    """
    if int(K) != K or K < 3:
        raise DomainError(f"triplets need K >= 3, got {K}")
    K = int(K)
    total = triplet_count(K)
    if subsample is None or subsample >= total:
        flat = np.arange(total, dtype=np.int64)
    else:
        if subsample < 1:
            raise DomainError(f"subsample must be positive, got {subsample}")
        if rng is None:
            rng = np.random.default_rng(0)
        flat = np.sort(rng.choice(total, size=int(subsample), replace=False))
    return _decode_triplets(K, flat)


def check_triplets(T, K):
    T = np.asarray(T, dtype=np.int64)
    if T.ndim != 2 or T.shape[1] != 3 or T.shape[0] == 0:
        raise DomainError(f"triplets must be a non-empty T x 3 array, got shape {T.shape}")
    if T.min() < 0 or T.max() >= K:
        raise DomainError(f"triplet index out of range [0, {K})")
    i, j, k = T.T
    if np.any((i == j) | (i == k) | (j == k)):
        raise DomainError("triplet indices must be pairwise distinct")
    if len(np.unique(T, axis=0)) != len(T):
        raise DomainError("duplicate triplets")
    return np.ascontiguousarray(T)


def prior_order(W, T):
    """1.0 where cos(w_i, w_j) >= cos(w_i, w_k) for each triplet, else 0.0."""
    Cw = cosine_matrix(W.vectors)
    i, j, k = T.T
    return (Cw[i, j] >= Cw[i, k]).astype(np.float64)


def _rank_setup(P, W, T):
    P = np.asarray(P, dtype=np.float64)
    if P.ndim != 2:
        raise DomainError(f"prototypes must be a K x D matrix, got shape {P.shape}")
    if P.shape[0] != len(W):
        raise DomainError(f"{P.shape[0]} prototypes but {len(W)} embeddings")
    T = check_triplets(T, P.shape[0])
    return P, T


def _rank_terms(P, T, sbar):
    C = np.ascontiguousarray(cosine_matrix(P))
    total, A = kernels.rank_accumulate(C, T, np.ascontiguousarray(sbar))
    return total / len(T), A / len(T), C


def _cosine_chain(P, C, A):
    """Pull d/dC back to d/dP through C_ij = p_i . p_j / (|p_i| |p_j|)."""
    B = A + A.T
    n = np.linalg.norm(P, axis=1)
    U = P / n[:, None]
    return (B @ U) / n[:, None] - (B * C).sum(axis=1)[:, None] * P / (n * n)[:, None]


def rank_loss(P, W, T):
    """Mean RankNet-style cross entropy between prior and prototype orderings."""
    P, T = _rank_setup(P, W, T)
    loss, _, _ = _rank_terms(P, T, prior_order(W, T))
    return loss


def rank_loss_grad(P, W, T):
    """Gradient of :func:`rank_loss` with respect to the prototypes only."""
    P, T = _rank_setup(P, W, T)
    _, A, C = _rank_terms(P, T, prior_order(W, T))
    return _cosine_chain(P, C, A)


def optimize_prototypes(K, D, config=None, priors=None):
    """Spread ``K`` prototypes over the unit sphere in ``D`` dimensions.

    Each epoch evaluates the separation loss (plus the ranking loss when
    ``priors`` is given and ``config.pi_enabled``), takes one momentum step
    in ambient space and renormalizes every row.

    Returns
    -------
    P : (K, D) ndarray
        Final unit-norm prototypes.
    losses : list of float
        Total loss at the start of every epoch.
    """
    config = config or ProtoOptConfig()
    if int(K) != K or K < 2:
        raise DomainError(f"need K >= 2 prototypes, got {K}")
    if int(D) != D or D < 1:
        raise DomainError(f"D must be >= 1, got {D}")
    if K >= 3 and D < 2:
        raise DomainError(f"D=1 holds at most 2 separated prototypes, got K={K}")
    K, D = int(K), int(D)
    use_priors = priors is not None and config.pi_enabled
    if use_priors:
        if len(priors) != K:
            raise DomainError(f"priors have {len(priors)} classes, expected {K}")
        if K < 3:
            raise DomainError("ranking priors need K >= 3")

    init_seq, triplet_seq = np.random.SeedSequence(config.seed).spawn(2)
    rng = np.random.default_rng(init_seq)
    P = np.stack([sample_unit(D, rng) for _ in range(K)])

    subsample = config.triplet_subsample
    if use_priors:
        if subsample is None and K > 100:
            subsample = 10 * K * K
        resample = subsample is not None and subsample < triplet_count(K)
        triplet_rng = np.random.default_rng(triplet_seq)
        T = build_triplets(K)
        sbar = prior_order(priors, T)

    both = config.pair_update == "both"
    velocity = np.zeros_like(P)
    losses = []
    for epoch in range(config.epochs):
        total, grad, _ = kernels.rowmax_scatter(_shifted_gram(P), P, both)
        loss = total / K
        grad = grad / K
        if use_priors:
            if resample:
                T = build_triplets(K, triplet_rng, subsample)
                sbar = prior_order(priors, T)
            r_loss, A, C = _rank_terms(P, T, sbar)
            loss += r_loss
            grad = grad + _cosine_chain(P, C, A)
        if not np.isfinite(loss) or not np.all(np.isfinite(grad)):
            raise RunError(f"non-finite prototype loss at epoch {epoch}", epoch=epoch)
        losses.append(loss)
        velocity = config.momentum * velocity + grad
        P = normalize_rows(P - config.learning_rate * velocity)
    return P, losses


def embedding_prototypes(W):
    """Use the normalized embeddings themselves as prototypes."""
    for name, v in zip(W.names, W.vectors):
        if np.linalg.norm(v) < NORM_FLOOR:
            raise DomainError(f"embedding for class {name!r} has zero norm")
    return normalize_rows(W.vectors)


def separation_stats(P):
    P = _check_pairs(P)
    C = cosine_matrix(P)
    d = 1.0 - C[np.triu_indices(P.shape[0], 1)]
    return SeparationStats(float(d.min()), float(d.mean()), float(d.max()))
