"""Vision encoder, text encoder, and interrogator behind named lookups.

The engine consumes embeddings and never sees images, so any model
honoring the contracts here (fixed dim, finite unit-norm output,
deterministic for fixed weights) can sit behind a name. The bundled
implementations are deterministic local features: seeded random
projections of pixel and character-n-gram statistics. They run offline,
produce byte-stable output, and need no model downloads; swapping in a
heavyweight pretrained encoder is a matter of registering another class.
"""

from __future__ import annotations

import dataclasses
import zlib

import numpy as np
from PIL import Image

from gmi_bridge.errors import (
    ConfigError,
    EncoderLoadError,
    EncodingError,
    ImageReadError,
)

_PATCH = 16  # images are pooled to a PATCH x PATCH RGB grid before featurizing


@dataclasses.dataclass(frozen=True)
class EncoderConfig:
    """Names and batching for the three models.

    device is a placement hint; the bundled encoders are numpy on cpu
    and record it without acting on it.
    """

    vision_model_name: str = "tiny-patch-v1"
    text_model_name: str = "tiny-hash-v1"
    interrogator_name: str = "tiny-interrogator-v1"
    device: str = "cpu"
    batch_size: int = 8

    def __post_init__(self):
        for field in ("vision_model_name", "text_model_name",
                      "interrogator_name", "device"):
            value = getattr(self, field)
            if not isinstance(value, str) or not value:
                raise ConfigError(f"{field} must be a non-empty string, "
                                  f"got {value!r}")
        if (not isinstance(self.batch_size, int)
                or isinstance(self.batch_size, bool) or self.batch_size < 1):
            raise ConfigError(
                f"batch_size must be a positive integer, got {self.batch_size!r}")


def _seeded(name: str) -> np.random.Generator:
    # crc32 keys the stream to the encoder name; stable across platforms,
    # unlike the salted builtin hash()
    return np.random.default_rng(
        np.random.SeedSequence(zlib.crc32(name.encode("utf-8"))))


def _unit(vec: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(vec)):
        raise EncodingError(f"{what} produced a non-finite embedding")
    norm = float(np.linalg.norm(vec))
    if not norm > 0.0:
        raise EncodingError(f"{what} produced a zero embedding")
    return vec / norm


def load_image(path) -> np.ndarray:
    """Decode to a PATCH x PATCH x 3 float array in [0, 1]."""
    try:
        with Image.open(path) as img:
            small = img.convert("RGB").resize(
                (_PATCH, _PATCH), Image.Resampling.BILINEAR)
    except (OSError, ValueError) as exc:
        raise ImageReadError(f"cannot read image {str(path)!r}: {exc}") from None
    return np.asarray(small, dtype=np.float64) / 255.0


class TinyPatchVision:
    """Pooled RGB grid, bias feature, seeded projection, unit norm."""

    name = "tiny-patch-v1"
    dim = 64

    def __init__(self):
        n_feat = _PATCH * _PATCH * 3 + 1
        self._proj = (_seeded(self.name).standard_normal((n_feat, self.dim))
                      / np.sqrt(n_feat))

    def encode_path(self, path) -> np.ndarray:
        # bias 1.0 keeps the feature vector nonzero even for constant images
        feats = np.append(load_image(path).reshape(-1), 1.0)
        return _unit(feats @ self._proj, f"vision encoder {self.name!r}")

    def encode_paths(self, paths, batch_size: int) -> np.ndarray:
        rows = []
        for start in range(0, len(paths), batch_size):
            batch = paths[start:start + batch_size]
            rows.extend(self.encode_path(p) for p in batch)
        return np.asarray(rows, dtype=np.float64).reshape(len(paths), self.dim)


class TinyHashText:
    """Hashed character trigram counts, seeded projection, unit norm."""

    name = "tiny-hash-v1"
    dim = 32
    _buckets = 512

    def __init__(self):
        n_feat = self._buckets + 1
        self._proj = (_seeded(self.name).standard_normal((n_feat, self.dim))
                      / np.sqrt(n_feat))

    def encode(self, text: str) -> np.ndarray:
        if not isinstance(text, str):
            raise EncodingError(f"prompt text must be a string, got "
                                f"{type(text).__name__}")
        padded = f" {' '.join(text.lower().split())} "
        counts = np.zeros(self._buckets + 1)
        counts[-1] = 1.0  # bias; empty prompts must still embed to nonzero
        for i in range(len(padded) - 2):
            gram = padded[i:i + 3]
            counts[zlib.crc32(gram.encode("utf-8")) % self._buckets] += 1.0
        # sqrt damps repeated grams the way tf weighting would
        return _unit(np.sqrt(counts) @ self._proj,
                     f"text encoder {self.name!r}")


_COLOR_ANCHORS = (
    ("red", (0.75, 0.15, 0.15)),
    ("orange", (0.85, 0.55, 0.15)),
    ("yellow", (0.85, 0.85, 0.2)),
    ("green", (0.15, 0.65, 0.2)),
    ("cyan", (0.2, 0.75, 0.75)),
    ("blue", (0.15, 0.25, 0.75)),
    ("purple", (0.55, 0.2, 0.7)),
    ("white", (0.92, 0.92, 0.92)),
    ("gray", (0.5, 0.5, 0.5)),
    ("black", (0.08, 0.08, 0.08)),
)


class TinyInterrogator:
    """Captions an image from its color, brightness, and edge statistics."""

    name = "tiny-interrogator-v1"

    def caption(self, path) -> str:
        px = load_image(path)
        mean_rgb = px.mean(axis=(0, 1))
        color = min(
            _COLOR_ANCHORS,
            key=lambda item: float(((mean_rgb - np.asarray(item[1])) ** 2).sum()),
        )[0]
        level = float(px.mean())
        tone = "dark" if level < 0.34 else ("muted" if level < 0.67 else "bright")
        grad = float(np.abs(np.diff(px, axis=0)).mean()
                     + np.abs(np.diff(px, axis=1)).mean())
        texture = ("smooth" if grad < 0.02
                   else ("textured" if grad < 0.12 else "busy"))
        return f"a {tone} {texture} {color} picture"


_VISION = {TinyPatchVision.name: TinyPatchVision}
_TEXT = {TinyHashText.name: TinyHashText}
_INTERROGATORS = {TinyInterrogator.name: TinyInterrogator}


def _load(table: dict, kind: str, name: str):
    try:
        cls = table[name]
    except KeyError:
        known = ", ".join(sorted(table))
        raise EncoderLoadError(
            f"unknown {kind} model {name!r} (available: {known})") from None
    return cls()


def load_vision(config: EncoderConfig):
    return _load(_VISION, "vision", config.vision_model_name)


def load_text(config: EncoderConfig):
    return _load(_TEXT, "text", config.text_model_name)


def load_interrogator(config: EncoderConfig):
    return _load(_INTERROGATORS, "interrogator", config.interrogator_name)
