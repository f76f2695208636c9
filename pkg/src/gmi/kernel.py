"""RKHS numerics: RBF kernel, cosine weights, and the squared-distance scores.

Embeddings are plain 1-D float64 arrays (anything array-like is accepted
and converted; 32-bit input is widened). All scores are squared RKHS
distances between kernel-expansion mixtures, so smaller means a better
match; callers that want a similarity negate them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from gmi.backend import impl
from gmi.errors import (
    DimensionMismatchError,
    EmptySetError,
    LengthMismatchError,
    NonFiniteError,
    ZeroNormError,
)

__all__ = [
    "KernelParams",
    "as_embedding",
    "as_embedding_matrix",
    "rbf_kernel",
    "cosine_similarity",
    "uniform_mmd_sq",
    "weighted_mmd_sq",
    "prompt_weighted_score",
]


@dataclass(frozen=True)
class KernelParams:
    """RBF bandwidth: k(x, y) = exp(-gamma * ||x - y||^2)."""

    gamma: float = 0.02

    def __post_init__(self):
        g = float(self.gamma)
        if not np.isfinite(g) or g <= 0.0:
            raise ValueError(f"gamma must be a positive real, got {self.gamma!r}")
        object.__setattr__(self, "gamma", g)


def as_embedding(values, name: str = "embedding") -> np.ndarray:
    """Validate and convert one embedding to a contiguous float64 vector."""
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] < 1:
        raise DimensionMismatchError(
            f"{name} must be a nonempty 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{name} contains NaN or Inf")
    return arr


def as_embedding_matrix(values, name: str = "embeddings") -> np.ndarray:
    """Validate a nonempty sequence of same-dim embeddings as an (n, d) matrix."""
    if isinstance(values, np.ndarray) and values.ndim == 2:
        arr = np.ascontiguousarray(values, dtype=np.float64)
    else:
        rows = list(values)
        if not rows:
            raise EmptySetError(f"{name} must contain at least one embedding")
        dims = {np.asarray(r).shape for r in rows}
        if len(dims) > 1:
            raise DimensionMismatchError(f"{name} mix dimensions: {sorted(dims)}")
        arr = np.ascontiguousarray(rows, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise EmptySetError(f"{name} must be a nonempty (n, d) matrix, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{name} contain NaN or Inf")
    return arr


def _check_same_dim(a: np.ndarray, b: np.ndarray, what: str):
    if a.shape[-1] != b.shape[-1]:
        raise DimensionMismatchError(
            f"{what}: dimensions differ ({a.shape[-1]} vs {b.shape[-1]})")


def rbf_kernel(x, y, params: KernelParams) -> float:
    """k(x, y) = exp(-gamma * ||x - y||^2); 1.0 iff x == y."""
    xv = as_embedding(x, "x")
    yv = as_embedding(y, "y")
    _check_same_dim(xv, yv, "rbf_kernel")
    return float(impl.rbf_to_point(xv[None, :], yv, params.gamma)[0])


def cosine_similarity(a, b) -> float:
    """Inner-product cosine of two nonzero vectors, in [-1, 1]."""
    av = as_embedding(a, "a")
    bv = as_embedding(b, "b")
    _check_same_dim(av, bv, "cosine_similarity")
    na = float(np.linalg.norm(av))
    nb = float(np.linalg.norm(bv))
    if na == 0.0 or nb == 0.0:
        raise ZeroNormError("cosine_similarity is undefined for zero-norm input")
    return float(av @ bv) / (na * nb)


def uniform_mmd_sq(spec_points, query, params: KernelParams) -> float:
    """Squared RKHS distance between the empirical mean embedding of
    ``spec_points`` and the query's kernel image."""
    X = as_embedding_matrix(spec_points, "spec_points")
    q = as_embedding(query, "query")
    _check_same_dim(X, q, "uniform_mmd_sq")
    n = X.shape[0]
    a = np.full(n, 1.0 / n)
    return impl.expansion_sq_distance(X, a, q[None, :], np.ones(1), params.gamma)


def weighted_mmd_sq(spec_points, weights, query, params: KernelParams) -> float:
    """Same as :func:`uniform_mmd_sq` with a per-point weight inside the mean:
    || (1/N) sum_i w_i k(x_i,.) - k(query,.) ||^2."""
    X = as_embedding_matrix(spec_points, "spec_points")
    q = as_embedding(query, "query")
    _check_same_dim(X, q, "weighted_mmd_sq")
    w = np.ascontiguousarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.shape[0] != X.shape[0]:
        raise LengthMismatchError(
            f"weights length {w.shape} does not match {X.shape[0]} spec points")
    if not np.all(np.isfinite(w)):
        raise NonFiniteError("weights contain NaN or Inf")
    a = w / X.shape[0]
    return impl.expansion_sq_distance(X, a, q[None, :], np.ones(1), params.gamma)


def prompt_weighted_score(spec_images, spec_prompts, query_image, query_prompt,
                          params: KernelParams) -> float:
    """The prompt-conditioned score: weight each spec image by the cosine
    similarity of its prompt to the query prompt, then take the weighted
    squared RKHS distance to the query image. Lower is a better match."""
    Z = as_embedding_matrix(spec_images, "spec_images")
    Q = as_embedding_matrix(spec_prompts, "spec_prompts")
    if Z.shape[0] != Q.shape[0]:
        raise LengthMismatchError(
            f"{Z.shape[0]} spec images but {Q.shape[0]} spec prompts")
    z = as_embedding(query_image, "query_image")
    q = as_embedding(query_prompt, "query_prompt")
    _check_same_dim(Z, z, "prompt_weighted_score images")
    _check_same_dim(Q, q, "prompt_weighted_score prompts")
    if float(np.linalg.norm(q)) == 0.0:
        raise ZeroNormError("query prompt embedding has zero norm")
    norms = np.linalg.norm(Q, axis=1)
    if np.any(norms == 0.0):
        raise ZeroNormError("a spec prompt embedding has zero norm")
    w = impl.cosine_weights(Q, q)
    a = w / Z.shape[0]
    return impl.expansion_sq_distance(Z, a, z[None, :], np.ones(1), params.gamma)
