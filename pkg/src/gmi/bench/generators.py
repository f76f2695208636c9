"""Synthetic conditional generators for the evaluation harness.

Each generator maps a scalar prompt p in [-1, 1] to a mean image
embedding plus optional isotropic Gaussian noise. The toy pair traces
the unit circle, one model as (cos p*pi, sin p*pi) and its sibling with
the coordinates swapped: under p ~ U(-1, 1) both marginals are uniform
on the circle, so only the conditional structure tells them apart. The
confounded benchmark replants that pair into ambient dimension D at
well-separated centers, once per pair.

Prompt embeddings use a lifted angle map: (cos p*pi, sin p*pi, 1) pushed
through a fixed seeded orthonormal matrix into prompt_dim. The lift
keeps cosine similarity a smooth decreasing function of |p - p'| with
range [0, 1]; without the constant coordinate the similarities are
zero-mean over the platform set and the weighted score loses its sign
convention (a negative mean weight turns a close match into a penalty).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from gmi.errors import ValidationError

__all__ = ["SyntheticGenerator", "example1_models", "make_confounded_generators",
           "substream"]


def substream(master_seed: int, *tag: int) -> np.random.Generator:
    """Named deterministic RNG substream: same (seed, tag) → same stream,
    regardless of how many other streams were drawn before it."""
    entropy = (int(master_seed),) + tuple(int(t) for t in tag)
    return np.random.default_rng(np.random.SeedSequence(entropy))


@dataclass(frozen=True)
class SyntheticGenerator:
    """A conditional generator f(p) = mean_fn(p) + N(0, noise_sigma^2 I)."""

    generator_id: str
    mean_fn: Callable
    prompt_embed_fn: Callable
    noise_sigma: float
    image_dim: int
    prompt_dim: int

    def mean_image(self, p):
        return self.mean_fn(np.asarray(p, dtype=np.float64))

    def prompt_embedding(self, p):
        return self.prompt_embed_fn(np.asarray(p, dtype=np.float64))

    def sample(self, p, rng: np.random.Generator):
        """Draw image embeddings at prompt(s) p. noise_sigma == 0 is exact
        and consumes nothing from rng."""
        mean = self.mean_image(p)
        if self.noise_sigma > 0.0:
            return mean + rng.normal(scale=self.noise_sigma, size=mean.shape)
        return mean


def _lifted_prompt_map(prompt_dim: int, rng: np.random.Generator) -> Callable:
    if prompt_dim < 3:
        raise ValidationError(f"prompt_dim must be >= 3, got {prompt_dim}")
    basis = np.linalg.qr(rng.normal(size=(prompt_dim, 3)))[0]

    def embed(p):
        p = np.asarray(p, dtype=np.float64)
        lift = np.stack([np.cos(p * np.pi), np.sin(p * np.pi),
                         np.ones_like(p)], axis=-1)
        return lift @ basis.T

    return embed


def _circle_pair(center: np.ndarray, plane: np.ndarray):
    """Mean maps for one confounded pair: center + plane-embedded circle
    point, the sibling with swapped plane coordinates."""

    def mean_a(p):
        xy = np.stack([np.cos(p * np.pi), np.sin(p * np.pi)], axis=-1)
        return center + xy @ plane.T

    def mean_b(p):
        xy = np.stack([np.sin(p * np.pi), np.cos(p * np.pi)], axis=-1)
        return center + xy @ plane.T

    return mean_a, mean_b


def example1_models(noise_sigma: float = 0.0, prompt_dim: int = 8,
                    master_seed: int = 0):
    """The two-model toy: f1 draws (cos p*pi, sin p*pi), f2 the swap.

    Marginals under p ~ U(-1, 1) coincide (uniform on the unit circle);
    conditionals differ everywhere except the diagonal crossings.
    """
    geo = substream(master_seed, 1)
    qmap = _lifted_prompt_map(prompt_dim, geo)
    mean1, mean2 = _circle_pair(np.zeros(2), np.eye(2))
    common = dict(prompt_embed_fn=qmap, noise_sigma=float(noise_sigma),
                  image_dim=2, prompt_dim=prompt_dim)
    return (SyntheticGenerator(generator_id="f1", mean_fn=mean1, **common),
            SyntheticGenerator(generator_id="f2", mean_fn=mean2, **common))


def make_confounded_generators(n_models: int = 16, image_dim: int = 16,
                               prompt_dim: int = 8, noise_sigma: float = 0.05,
                               pair_radius: float = 5.0,
                               master_seed: int = 0) -> list:
    """n_models generators as n_models/2 confounded circle pairs.

    Pair centers are orthonormal directions scaled by pair_radius, so
    pairs are mutually distinguishable by marginal alone; the two models
    inside a pair share center, plane, and marginal, and differ only in
    the conditional. All geometry comes from one seeded substream.
    """
    if n_models < 2 or n_models % 2:
        raise ValidationError(f"n_models must be even and >= 2, got {n_models}")
    n_pairs = n_models // 2
    if image_dim < max(2, n_pairs):
        raise ValidationError(
            f"image_dim {image_dim} too small for {n_pairs} orthogonal pair centers")
    geo = substream(master_seed, 1)
    centers = np.linalg.qr(geo.normal(size=(image_dim, n_pairs)))[0].T * float(pair_radius)
    planes = [np.linalg.qr(geo.normal(size=(image_dim, 2)))[0]
              for _ in range(n_pairs)]
    qmap = _lifted_prompt_map(prompt_dim, geo)

    out = []
    for j in range(n_pairs):
        mean_a, mean_b = _circle_pair(centers[j], planes[j])
        for k, mean in enumerate((mean_a, mean_b)):
            out.append(SyntheticGenerator(
                generator_id=f"gen-{2 * j + k:02d}", mean_fn=mean,
                prompt_embed_fn=qmap, noise_sigma=float(noise_sigma),
                image_dim=image_dim, prompt_dim=prompt_dim))
    return out
