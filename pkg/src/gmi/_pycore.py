"""Numpy implementation of the hot kernel primitives.

This is the fallback selected when the compiled extension (``gmi._native``)
is unavailable; both expose the same functions and must agree to ~1e-12.
Inputs are C-contiguous float64 arrays (the public layer guarantees this).
"""

import numpy as np

# Above this many scalar subtractions the O(n*m*d) broadcast temporary is
# replaced by the dot-product expansion (clamped at zero).
_BROADCAST_LIMIT = 2_000_000


def pairwise_sq_dists(X, Y):
    n, d = X.shape
    m = Y.shape[0]
    if n * m * d <= _BROADCAST_LIMIT:
        diff = X[:, None, :] - Y[None, :, :]
        return np.einsum("ijk,ijk->ij", diff, diff)
    sq = (X * X).sum(axis=1)[:, None] + (Y * Y).sum(axis=1)[None, :]
    sq -= 2.0 * (X @ Y.T)
    np.maximum(sq, 0.0, out=sq)
    return sq


def rbf_gram(X, Y, gamma):
    K = pairwise_sq_dists(X, Y)
    K *= -gamma
    np.exp(K, out=K)
    return K


def rbf_to_point(X, y, gamma):
    diff = X - y[None, :]
    sq = np.einsum("ij,ij->i", diff, diff)
    sq *= -gamma
    np.exp(sq, out=sq)
    return sq


def expansion_sq_distance(X, a, Y, b, gamma):
    """Squared RKHS norm of sum_i a_i k(x_i,.) - sum_j b_j k(y_j,.)."""
    kxx = a @ rbf_gram(X, X, gamma) @ a
    kyy = b @ rbf_gram(Y, Y, gamma) @ b
    kxy = a @ rbf_gram(X, Y, gamma) @ b
    return float(kxx - 2.0 * kxy + kyy)


def cosine_weights(Q, q):
    norms = np.sqrt(np.einsum("ij,ij->i", Q, Q))
    qn = np.sqrt(q @ q)
    return (Q @ q) / (norms * qn)
