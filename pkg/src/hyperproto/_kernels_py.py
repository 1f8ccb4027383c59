"""Pure numpy implementations of the hot kernels.

These mirror ``_ckernels.pyx`` exactly in contract. They are used when the
compiled extension is unavailable or ``HYPERPROTO_PURE=1`` is set.
"""

import numpy as np

LOG_FLOOR = 1e-12


def _sigmoid_pair(o):
    # S and 1 - S, each computed without cancellation
    e = np.exp(-np.abs(o))
    big = 1.0 / (1.0 + e)
    small = e / (1.0 + e)
    pos = o >= 0
    return np.where(pos, big, small), np.where(pos, small, big)


def rank_accumulate(C, triplets, sbar):
    """Triplet ranking loss and its gradient with respect to ``C``.

    Parameters
    ----------
    C : (K, K) float64
        Pairwise cosine similarities of the prototypes.
    triplets : (T, 3) int64
        Anchor, first and second comparison index.
    sbar : (T,) float64
        1.0 where the anchor is at least as similar to the first index as to
        the second under the prior, else 0.0.

    Returns
    -------
    loss_sum : float
        Sum of per-triplet losses (not averaged).
    A : (K, K) float64
        d(loss_sum)/dC, entry-wise. ``C`` is treated as an unconstrained
        matrix, so ``A`` is not symmetric.
    """
    K = C.shape[0]
    i, j, k = triplets[:, 0], triplets[:, 1], triplets[:, 2]
    o = C[i, j] - C[i, k]
    S, Sc = _sigmoid_pair(o)
    pos = sbar > 0.5
    loss = np.where(pos, -np.log(np.maximum(S, LOG_FLOOR)),
                    -np.log(np.maximum(Sc, LOG_FLOOR)))
    coef = np.where(pos, np.where(S > LOG_FLOOR, -Sc, 0.0),
                    np.where(Sc > LOG_FLOOR, S, 0.0))
    A = np.bincount(i * K + j, weights=coef, minlength=K * K)
    A -= np.bincount(i * K + k, weights=coef, minlength=K * K)
    return float(loss.sum()), A.reshape(K, K)


def rowmax_scatter(M, P, both):
    """Row-wise max of ``M`` and the matching subgradient with respect to ``P``.

    ``M`` must equal ``P @ P.T - 2 I``. Ties resolve to the lowest column.
    With ``both`` set, each selected entry also sends gradient to the
    selected column's row; otherwise only the anchor row moves.

    Returns ``(sum of row maxima, grad, argmax)``; the caller divides by K.
    """
    j = np.argmax(M, axis=1)
    rows = np.arange(M.shape[0])
    total = float(M[rows, j].sum())
    G = P[j].copy()
    diag = j == rows
    # dM_ii/dp_i = 2 p_i; covers the degenerate self-selection case
    G[diag] += P[diag]
    if both:
        off = ~diag
        np.add.at(G, j[off], P[off])
    return total, G, j
