"""User requirements: one image embedding plus one prompt embedding.

The prompt embedding comes either from an interrogator (pseudo) or from
the user directly; the provenance tag is audit-only and never reaches the
scoring math. Requirements are ephemeral query objects, so the JSON form
exists for transport, not storage.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from gmi.errors import DimensionMismatchError, SpecFormatError, ValidationError, ZeroNormError
from gmi.kernel import as_embedding

__all__ = [
    "PROVENANCE_PSEUDO",
    "PROVENANCE_USER",
    "Requirement",
    "build_requirement",
    "requirement_from_doc",
    "serialize_requirement",
    "deserialize_requirement",
]

PROVENANCE_PSEUDO = "pseudo"
PROVENANCE_USER = "user"
_PROVENANCES = (PROVENANCE_PSEUDO, PROVENANCE_USER)


@dataclass(frozen=True, eq=False)
class Requirement:
    image_embedding: np.ndarray
    prompt_embedding: np.ndarray
    prompt_provenance: str = PROVENANCE_PSEUDO
    prompt_text: str | None = None

    def __eq__(self, other):
        if not isinstance(other, Requirement):
            return NotImplemented
        return (self.prompt_provenance == other.prompt_provenance
                and self.prompt_text == other.prompt_text
                and np.array_equal(self.image_embedding, other.image_embedding)
                and np.array_equal(self.prompt_embedding, other.prompt_embedding))


def build_requirement(image_embedding, prompt_embedding,
                      provenance: str = PROVENANCE_PSEUDO,
                      prompt_text: str | None = None,
                      image_dim: int | None = None,
                      prompt_dim: int | None = None) -> Requirement:
    """Validate and assemble a Requirement.

    ``image_dim``/``prompt_dim`` optionally pin the expected dims (callers
    holding a registry schema pass them; standalone use omits them).
    """
    img = as_embedding(image_embedding, "image_embedding")
    prm = as_embedding(prompt_embedding, "prompt_embedding")
    if float(np.linalg.norm(prm)) == 0.0:
        raise ZeroNormError("prompt_embedding must have nonzero norm")
    if provenance not in _PROVENANCES:
        raise ValidationError(
            f"prompt_provenance must be one of {_PROVENANCES}, got {provenance!r}")
    if prompt_text is not None and not isinstance(prompt_text, str):
        raise ValidationError("prompt_text must be a string or None")
    if image_dim is not None and img.shape[0] != image_dim:
        raise DimensionMismatchError(
            f"image embedding dim {img.shape[0]} != expected {image_dim}")
    if prompt_dim is not None and prm.shape[0] != prompt_dim:
        raise DimensionMismatchError(
            f"prompt embedding dim {prm.shape[0]} != expected {prompt_dim}")
    return Requirement(image_embedding=img, prompt_embedding=prm,
                       prompt_provenance=provenance, prompt_text=prompt_text)


def serialize_requirement(req: Requirement) -> bytes:
    doc = {
        "image_embedding": req.image_embedding.tolist(),
        "prompt_embedding": req.prompt_embedding.tolist(),
        "prompt_provenance": req.prompt_provenance,
        "prompt_text": req.prompt_text,
    }
    return json.dumps(doc, ensure_ascii=False).encode("utf-8")


def requirement_from_doc(doc, image_dim: int | None = None,
                         prompt_dim: int | None = None) -> Requirement:
    """Build from an already-parsed JSON object (the wire-format shape)."""
    if not isinstance(doc, dict):
        raise SpecFormatError("requirement must be a JSON object")
    for key in ("image_embedding", "prompt_embedding"):
        if key not in doc:
            raise SpecFormatError(f"requirement is missing {key!r}")
    return build_requirement(
        doc["image_embedding"], doc["prompt_embedding"],
        provenance=doc.get("prompt_provenance", PROVENANCE_PSEUDO),
        prompt_text=doc.get("prompt_text"),
        image_dim=image_dim, prompt_dim=prompt_dim)


def deserialize_requirement(data: bytes | str,
                            image_dim: int | None = None,
                            prompt_dim: int | None = None) -> Requirement:
    text = data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        off = len(text[:exc.pos].encode("utf-8"))
        raise SpecFormatError(
            f"malformed requirement JSON at byte {off}: {exc.msg}",
            offset=off) from exc
    return requirement_from_doc(doc, image_dim=image_dim, prompt_dim=prompt_dim)
