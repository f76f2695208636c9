"""Scoring strategies and the ranking protocol.

Every strategy reports a distance (smaller is a better match) and the
ranking sorts ascending by (distance, model_id); similarity is the
negated distance, kept alongside because both orderings appear in user
surfaces.

Scoring happens in two phases so that a registry can honor the per-query
cost contract: ``build_cache`` does the query-independent work for one
spec (Gram matrix, reduced set, self-terms) and ``score_one`` consumes
it. The cached and cache-free paths execute the same expressions on the
same arrays, so their distances agree bit-for-bit; the service relies
on that when it answers with a cache that a library caller may not have.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from gmi.backend import impl
from gmi.errors import (
    DimensionMismatchError,
    EmptyRegistryError,
    UnknownModelError,
    ValidationError,
    ZeroNormError,
)
from gmi.kernel import KernelParams
from gmi.reduced import ReduceOptions, reduce
from gmi.requirement import Requirement
from gmi.spec import ModelSpec

__all__ = [
    "STRATEGY_VARIANTS",
    "ScoringStrategy",
    "RankedEntry",
    "ScoredRanking",
    "SpecCache",
    "cache_key",
    "build_cache",
    "score_one",
    "identify",
    "top_k",
]

STRATEGY_VARIANTS = (
    "download", "rkme-basic", "rkme-embed", "rkme-concat", "weighted")


@dataclass(frozen=True)
class ScoringStrategy:
    """Which score to compute and with what knobs.

    reduced_size applies to the rkme-* variants: a positive budget fits a
    reduced set at submit/cache time, None scores against the full sample
    set. The literal score weights reduced points uniformly;
    use_learned_betas swaps in the fitted coefficients instead.
    concat_scale multiplies the prompt block of rkme-concat's stacked
    embedding (1.0 keeps the plain unscaled concatenation).
    """

    variant: str = "weighted"
    kernel: KernelParams = field(default_factory=KernelParams)
    reduced_size: int | None = 1
    use_learned_betas: bool = False
    concat_scale: float = 1.0
    reduce_opts: ReduceOptions = field(default_factory=ReduceOptions)

    def __post_init__(self):
        if self.variant not in STRATEGY_VARIANTS:
            raise ValidationError(
                f"variant must be one of {STRATEGY_VARIANTS}, got {self.variant!r}")
        if self.reduced_size is not None and int(self.reduced_size) < 1:
            raise ValidationError("reduced_size must be a positive integer or None")
        if not (float(self.concat_scale) > 0.0 and np.isfinite(self.concat_scale)):
            raise ValidationError("concat_scale must be a positive finite real")


@dataclass(frozen=True)
class RankedEntry:
    model_id: str
    distance: float
    similarity: float
    rank: int


@dataclass(frozen=True)
class ScoredRanking:
    """All models sorted by ascending distance; rank is the 1-based
    position after the deterministic (distance, model_id) sort."""

    entries: tuple
    strategy: ScoringStrategy

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def entry_for(self, model_id: str) -> RankedEntry:
        for e in self.entries:
            if e.model_id == model_id:
                return e
        raise UnknownModelError(model_id)

    def tie_averaged_rank(self, model_id: str) -> float:
        """Expected rank of model_id under random shuffling of its tie
        group: strictly-better count plus half the group, 1-based. A
        requirement-blind strategy that ties all M models yields
        (M+1)/2 for every model."""
        d = self.entry_for(model_id).distance
        below = sum(1 for e in self.entries if e.distance < d)
        ties = sum(1 for e in self.entries if e.distance == d)
        return below + (ties + 1) / 2


def cache_key(strategy: ScoringStrategy) -> tuple:
    """Strategies whose query-independent work coincides share a key;
    rkme-basic and rkme-embed differ only in which space the caller fed
    the spec from, so their caches are interchangeable."""
    if strategy.variant == "download":
        return ("download",)
    g = strategy.kernel.gamma
    if strategy.variant == "weighted":
        return ("weighted", g)
    common = (g, strategy.reduced_size, strategy.use_learned_betas,
              strategy.reduce_opts)
    if strategy.variant == "rkme-concat":
        return ("rkme-concat", strategy.concat_scale) + common
    return ("rkme",) + common


@dataclass(frozen=True)
class SpecCache:
    """Query-independent scoring state for one spec under one cache_key."""

    key: tuple
    points: np.ndarray | None = None       # expansion support points
    coeffs: np.ndarray | None = None       # their mixture coefficients
    self_term: float | None = None         # coeffs @ K_pp @ coeffs
    gram: np.ndarray | None = None         # weighted: spec-image Gram
    prompts_unit: np.ndarray | None = None  # weighted: row-normalized prompts


def _reduced_support(samples: np.ndarray, strategy: ScoringStrategy):
    if strategy.reduced_size is None:
        n = samples.shape[0]
        return samples, np.full(n, 1.0 / n)
    rs = reduce(samples, int(strategy.reduced_size), strategy.kernel,
                strategy.reduce_opts)
    if strategy.use_learned_betas:
        return rs.points, rs.betas
    return rs.points, np.full(rs.size, 1.0 / rs.size)


def _concat(images: np.ndarray, prompts: np.ndarray, scale: float) -> np.ndarray:
    if scale == 1.0:
        return np.hstack([images, prompts])
    return np.hstack([images, scale * prompts])


def build_cache(spec: ModelSpec, strategy: ScoringStrategy) -> SpecCache:
    key = cache_key(strategy)
    if strategy.variant == "download":
        return SpecCache(key=key)
    gamma = strategy.kernel.gamma
    if strategy.variant == "weighted":
        Q = spec.prompt_matrix()
        norms = np.linalg.norm(Q, axis=1)
        if np.any(norms == 0.0):
            raise ZeroNormError(
                f"spec {spec.model_id!r} has a zero-norm prompt embedding")
        return SpecCache(key=key,
                         gram=impl.rbf_gram(spec.images, spec.images, gamma),
                         prompts_unit=Q / norms[:, None])
    if strategy.variant == "rkme-concat":
        samples = _concat(spec.images, spec.prompt_matrix(),
                          float(strategy.concat_scale))
    else:
        samples = spec.images
    points, coeffs = _reduced_support(samples, strategy)
    gram = impl.rbf_gram(points, points, gamma)
    return SpecCache(key=key, points=points, coeffs=coeffs,
                     self_term=float(coeffs @ gram @ coeffs))


def _check_dims(spec: ModelSpec, req: Requirement, strategy: ScoringStrategy):
    if strategy.variant == "download":
        return
    if spec.image_dim != req.image_embedding.shape[0]:
        raise DimensionMismatchError(
            f"spec {spec.model_id!r} image dim {spec.image_dim} != "
            f"requirement {req.image_embedding.shape[0]}")
    if strategy.variant in ("weighted", "rkme-concat"):
        if spec.prompt_dim != req.prompt_embedding.shape[0]:
            raise DimensionMismatchError(
                f"spec {spec.model_id!r} prompt dim {spec.prompt_dim} != "
                f"requirement {req.prompt_embedding.shape[0]}")


def score_one(spec: ModelSpec, req: Requirement, strategy: ScoringStrategy,
              cache: SpecCache | None = None) -> float:
    """Distance between one spec and the requirement under the strategy."""
    _check_dims(spec, req, strategy)
    if strategy.variant == "download":
        return -float(spec.download_count)
    if cache is None:
        cache = build_cache(spec, strategy)
    elif cache.key != cache_key(strategy):
        raise ValidationError("cache was built for a different strategy")
    gamma = strategy.kernel.gamma
    if strategy.variant == "weighted":
        q = req.prompt_embedding
        w = cache.prompts_unit @ (q / np.linalg.norm(q))
        a = w / w.shape[0]
        kq = impl.rbf_to_point(spec.images, req.image_embedding, gamma)
        return float(a @ cache.gram @ a - 2.0 * (a @ kq) + 1.0)
    if strategy.variant == "rkme-concat":
        query = np.concatenate([
            req.image_embedding,
            float(strategy.concat_scale) * req.prompt_embedding])
    else:
        query = req.image_embedding
    kq = impl.rbf_to_point(cache.points, query, gamma)
    return float(cache.self_term - 2.0 * (cache.coeffs @ kq) + 1.0)


def identify(specs, req: Requirement, strategy: ScoringStrategy,
             caches: dict | None = None) -> ScoredRanking:
    """Score every spec and return the full ranking.

    ``caches`` optionally maps model_id to a SpecCache built under the
    same strategy key. Per-model scoring is independent, so scores could
    be computed in any order or in parallel; the sort at the end fixes
    the result either way.
    """
    specs = list(specs)
    if not specs:
        raise EmptyRegistryError("cannot identify against an empty model set")
    ids = [s.model_id for s in specs]
    if len(set(ids)) != len(ids):
        raise ValidationError("duplicate model_id in spec list")
    scored = []
    for s in specs:
        cache = caches.get(s.model_id) if caches else None
        scored.append((score_one(s, req, strategy, cache=cache), s.model_id))
    scored.sort(key=lambda t: (t[0], t[1]))
    entries = tuple(
        RankedEntry(model_id=mid, distance=d, similarity=-d, rank=i + 1)
        for i, (d, mid) in enumerate(scored))
    return ScoredRanking(entries=entries, strategy=strategy)


def top_k(ranking: ScoredRanking, k: int) -> list:
    """First k model ids in rank order; k must lie in [1, M]."""
    k = int(k)
    if k < 1 or k > len(ranking.entries):
        raise ValidationError(
            f"k must be in [1, {len(ranking.entries)}], got {k}")
    return [e.model_id for e in ranking.entries[:k]]
