"""Model specifications: index-aligned image/prompt embedding sets plus
housekeeping fields, with a JSON wire format.

A spec stores embeddings verbatim (no normalization at rest; cosine
weighting normalizes at score time) and is immutable once built. The
document format is::

    { "spec_version": 1, "model_id": str, "download_count": int,
      "metadata": {...}, "image_dim": int, "prompt_dim": int,
      "images": [[f64, ...], ...],
      "prompts": [{"text": str|null, "embedding": [f64, ...]}, ...] }

plus an optional "created_at" ISO timestamp stamped at registry submit.
A streaming variant holds one JSON object per line: the same header with
"streaming": true and "n_samples" instead of the arrays, then one
{"image": [...], "prompt": {...}} record per line. JSON float repr is
shortest-round-trip, so embeddings survive serialization bit-exact.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from gmi.errors import (
    LengthMismatchError,
    SpecFormatError,
    SpecVersionError,
    ValidationError,
)
from gmi.kernel import as_embedding, as_embedding_matrix

__all__ = [
    "SPEC_VERSION",
    "PromptRecord",
    "ModelSpec",
    "build_spec",
    "serialize_spec",
    "serialize_spec_jsonl",
    "deserialize_spec",
    "spec_fingerprint",
]

SPEC_VERSION = 1


@dataclass(frozen=True, eq=False)
class PromptRecord:
    """One prompt: its embedding, and optionally the raw text for audit."""

    embedding: np.ndarray
    text: str | None = None

    def __eq__(self, other):
        if not isinstance(other, PromptRecord):
            return NotImplemented
        return self.text == other.text and np.array_equal(
            self.embedding, other.embedding)


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """A model's specification: N index-aligned (image, prompt) embedding
    pairs, metadata, and the download counter used by the requirement-blind
    baseline. Immutable; safe to share across threads."""

    model_id: str
    images: np.ndarray
    prompts: tuple
    metadata: Mapping = field(default_factory=dict)
    download_count: int = 0
    created_at: str | None = None
    spec_version: int = SPEC_VERSION

    @property
    def n(self) -> int:
        return self.images.shape[0]

    @property
    def image_dim(self) -> int:
        return self.images.shape[1]

    @property
    def prompt_dim(self) -> int:
        return self.prompts[0].embedding.shape[0]

    def prompt_matrix(self) -> np.ndarray:
        """The prompt embeddings stacked as an (N, prompt_dim) matrix."""
        return np.vstack([p.embedding for p in self.prompts])

    def __eq__(self, other):
        if not isinstance(other, ModelSpec):
            return NotImplemented
        return (self.model_id == other.model_id
                and self.spec_version == other.spec_version
                and self.download_count == other.download_count
                and self.created_at == other.created_at
                and dict(self.metadata) == dict(other.metadata)
                and np.array_equal(self.images, other.images)
                and self.prompts == other.prompts)


def build_spec(model_id: str, image_embeddings, prompt_records,
               metadata: Mapping | None = None, download_count: int = 0,
               created_at: str | None = None) -> ModelSpec:
    """Pair and validate embedding sets into a ModelSpec.

    ``prompt_records`` entries may be PromptRecord instances or bare
    embeddings (wrapped with text=None). Index i of the prompts is the
    prompt that generated image i; the pairing is load-bearing for the
    prompt-weighted score, so lengths must match exactly.
    """
    if not isinstance(model_id, str) or not model_id:
        raise ValidationError("model_id must be a nonempty string")
    images = as_embedding_matrix(image_embeddings, "image_embeddings")
    records = []
    for i, rec in enumerate(prompt_records):
        if isinstance(rec, PromptRecord):
            emb = as_embedding(rec.embedding, f"prompt_records[{i}]")
            records.append(PromptRecord(embedding=emb, text=rec.text))
        else:
            records.append(PromptRecord(
                embedding=as_embedding(rec, f"prompt_records[{i}]")))
    if len(records) != images.shape[0]:
        raise LengthMismatchError(
            f"{images.shape[0]} images but {len(records)} prompt records")
    dims = {r.embedding.shape[0] for r in records}
    if len(dims) != 1:
        raise LengthMismatchError(f"prompt embeddings mix dimensions: {sorted(dims)}")
    if isinstance(download_count, bool) or not isinstance(download_count, int):
        raise ValidationError("download_count must be an integer")
    if download_count < 0:
        raise ValidationError("download_count must be >= 0")
    if created_at is not None and not isinstance(created_at, str):
        raise ValidationError("created_at must be a string timestamp or None")
    meta = dict(metadata or {})
    if any(not isinstance(k, str) for k in meta):
        raise ValidationError("metadata keys must be strings")
    try:
        json.dumps(meta)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"metadata is not JSON-serializable: {exc}") from exc
    return ModelSpec(model_id=model_id, images=images, prompts=tuple(records),
                     metadata=MappingProxyType(meta),
                     download_count=download_count, created_at=created_at)


def _header_dict(spec: ModelSpec) -> dict:
    out = {
        "spec_version": spec.spec_version,
        "model_id": spec.model_id,
        "download_count": spec.download_count,
        "metadata": dict(spec.metadata),
        "image_dim": spec.image_dim,
        "prompt_dim": spec.prompt_dim,
    }
    if spec.created_at is not None:
        out["created_at"] = spec.created_at
    return out


def _prompt_dict(rec: PromptRecord) -> dict:
    return {"text": rec.text, "embedding": rec.embedding.tolist()}


def serialize_spec(spec: ModelSpec) -> bytes:
    """Single UTF-8 JSON document; key order is fixed, so the output is
    deterministic and usable as a fingerprint preimage."""
    doc = _header_dict(spec)
    doc["images"] = spec.images.tolist()
    doc["prompts"] = [_prompt_dict(r) for r in spec.prompts]
    return json.dumps(doc, ensure_ascii=False).encode("utf-8")


def serialize_spec_jsonl(spec: ModelSpec) -> bytes:
    """Streaming form: header line, then one record line per sample."""
    head = _header_dict(spec)
    head["streaming"] = True
    head["n_samples"] = spec.n
    lines = [json.dumps(head, ensure_ascii=False)]
    for img, rec in zip(spec.images, spec.prompts):
        lines.append(json.dumps(
            {"image": img.tolist(), "prompt": _prompt_dict(rec)},
            ensure_ascii=False))
    return ("\n".join(lines) + "\n").encode("utf-8")


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


def _loads(text: str, base: int):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        off = base + _byte_offset(text, exc.pos)
        raise SpecFormatError(f"malformed spec JSON at byte {off}: {exc.msg}",
                              offset=off) from exc


def _require(doc: dict, key: str, kinds, what: str):
    if key not in doc:
        raise SpecFormatError(f"spec {what} is missing required key {key!r}")
    val = doc[key]
    if isinstance(val, bool) and bool not in (kinds if isinstance(kinds, tuple) else (kinds,)):
        raise SpecFormatError(f"spec key {key!r} has wrong type bool")
    if not isinstance(val, kinds):
        raise SpecFormatError(
            f"spec key {key!r} has wrong type {type(val).__name__}")
    return val


def _check_version(doc: dict):
    version = _require(doc, "spec_version", int, "header")
    if version < 1:
        raise SpecFormatError(f"spec_version must be >= 1, got {version}")
    if version > SPEC_VERSION:
        raise SpecVersionError(
            f"spec_version {version} is newer than supported {SPEC_VERSION}")
    return version


def _spec_from_parts(doc: dict, images, prompts) -> ModelSpec:
    _check_version(doc)
    model_id = _require(doc, "model_id", str, "header")
    download_count = _require(doc, "download_count", int, "header")
    metadata = _require(doc, "metadata", dict, "header")
    image_dim = _require(doc, "image_dim", int, "header")
    prompt_dim = _require(doc, "prompt_dim", int, "header")
    created_at = doc.get("created_at")
    records = []
    for i, p in enumerate(prompts):
        if not isinstance(p, dict) or "embedding" not in p:
            raise SpecFormatError(f"prompt {i} must be an object with 'embedding'")
        text = p.get("text")
        if text is not None and not isinstance(text, str):
            raise SpecFormatError(f"prompt {i} text must be a string or null")
        records.append(PromptRecord(
            embedding=as_embedding(p["embedding"], f"prompts[{i}]"), text=text))
    try:
        spec = build_spec(model_id, images, records, metadata=metadata,
                          download_count=download_count, created_at=created_at)
    except ValidationError as exc:
        raise SpecFormatError(f"invalid spec content: {exc}") from exc
    if spec.image_dim != image_dim:
        raise SpecFormatError(
            f"declared image_dim {image_dim} but arrays have {spec.image_dim}")
    if spec.prompt_dim != prompt_dim:
        raise SpecFormatError(
            f"declared prompt_dim {prompt_dim} but arrays have {spec.prompt_dim}")
    return spec


def deserialize_spec(data: bytes | str) -> ModelSpec:
    """Parse either wire form. Malformed JSON raises SpecFormatError with
    the byte offset of the failure; unsupported versions raise
    SpecVersionError."""
    text = data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data
    if not text.strip():
        raise SpecFormatError("empty spec payload", offset=0)

    first_line, sep, rest = text.partition("\n")
    streaming = False
    if sep:
        try:
            head = json.loads(first_line)
            streaming = isinstance(head, dict) and head.get("streaming") is True
        except json.JSONDecodeError:
            streaming = False

    if not streaming:
        doc = _loads(text, 0)
        if not isinstance(doc, dict):
            raise SpecFormatError("spec document must be a JSON object")
        images = _require(doc, "images", list, "document")
        prompts = _require(doc, "prompts", list, "document")
        return _spec_from_parts(doc, images, prompts)

    head = _loads(first_line, 0)
    n = _require(head, "n_samples", int, "streaming header")
    if n < 1:
        raise SpecFormatError(f"n_samples must be >= 1, got {n}")
    images, prompts = [], []
    base = _byte_offset(text, len(first_line) + 1)
    for line in rest.split("\n"):
        if line.strip():
            rec = _loads(line, base)
            if not isinstance(rec, dict) or "image" not in rec or "prompt" not in rec:
                raise SpecFormatError(
                    f"streaming record at byte {base} must hold 'image' and 'prompt'",
                    offset=base)
            images.append(rec["image"])
            prompts.append(rec["prompt"])
        base += len(line.encode("utf-8")) + 1
    if len(images) != n:
        raise SpecFormatError(
            f"streaming header declares {n} samples but payload has {len(images)}")
    return _spec_from_parts(head, images, prompts)


def spec_fingerprint(spec: ModelSpec) -> str:
    """sha256 hex digest of the canonical single-document serialization."""
    return hashlib.sha256(serialize_spec(spec)).hexdigest()
