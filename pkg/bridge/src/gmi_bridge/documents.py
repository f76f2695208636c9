"""Emission of engine wire documents.

The engine's JSON contracts are reproduced here rather than imported so
the bridge stands alone; conformance is enforced end to end by the
round-trip tests, which push every emitted file through the gmi CLI.
Floats serialize via repr (shortest round-trip), so the engine's 64-bit
pipeline sees exactly the vectors the encoders produced.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from gmi_bridge.errors import DocumentError

SPEC_VERSION = 1

PROVENANCES = ("pseudo", "user")


def _vector(row, what: str) -> list[float]:
    values = [float(v) for v in np.asarray(row, dtype=np.float64).reshape(-1)]
    if not values:
        raise DocumentError(f"{what} is empty")
    if not all(math.isfinite(v) for v in values):
        raise DocumentError(f"{what} contains non-finite values")
    return values


def spec_document(model_id: str, image_rows, prompt_records,
                  download_count: int = 0, metadata: dict | None = None) -> dict:
    """Assemble a spec document; validates the self-consistency invariants."""
    if not isinstance(model_id, str) or not model_id:
        raise DocumentError("model_id must be a nonempty string")
    if (not isinstance(download_count, int) or isinstance(download_count, bool)
            or download_count < 0):
        raise DocumentError(f"download_count must be a nonnegative integer, "
                            f"got {download_count!r}")
    metadata = {} if metadata is None else metadata
    if not isinstance(metadata, dict):
        raise DocumentError("metadata must be a dict")
    try:
        json.dumps(metadata)
    except (TypeError, ValueError) as exc:
        raise DocumentError(f"metadata is not JSON-serializable: {exc}") from None

    images = [_vector(row, f"image embedding {i}")
              for i, row in enumerate(image_rows)]
    prompts = []
    for i, record in enumerate(prompt_records):
        text = record["text"]
        if text is not None and not isinstance(text, str):
            raise DocumentError(f"prompt text {i} must be a string or None, "
                                f"got {type(text).__name__}")
        prompts.append({"text": text,
                        "embedding": _vector(record["embedding"],
                                             f"prompt embedding {i}")})
    if not images:
        raise DocumentError("spec needs at least one image embedding")
    if len(images) != len(prompts):
        raise DocumentError(f"{len(images)} image embeddings but "
                            f"{len(prompts)} prompt records")

    image_dim = len(images[0])
    prompt_dim = len(prompts[0]["embedding"])
    for i, row in enumerate(images):
        if len(row) != image_dim:
            raise DocumentError(f"image embedding {i} has dim {len(row)}, "
                                f"expected {image_dim}")
    for i, record in enumerate(prompts):
        if len(record["embedding"]) != prompt_dim:
            raise DocumentError(
                f"prompt embedding {i} has dim {len(record['embedding'])}, "
                f"expected {prompt_dim}")

    return {
        "spec_version": SPEC_VERSION,
        "model_id": model_id,
        "download_count": download_count,
        "metadata": metadata,
        "image_dim": image_dim,
        "prompt_dim": prompt_dim,
        "images": images,
        "prompts": prompts,
    }


def requirement_document(image_embedding, prompt_embedding,
                         provenance: str, prompt_text: str | None) -> dict:
    if provenance not in PROVENANCES:
        raise DocumentError(f"prompt_provenance must be one of {PROVENANCES}, "
                            f"got {provenance!r}")
    if prompt_text is not None and not isinstance(prompt_text, str):
        raise DocumentError(f"prompt_text must be a string or None, got "
                            f"{type(prompt_text).__name__}")
    return {
        "image_embedding": _vector(image_embedding, "image embedding"),
        "prompt_embedding": _vector(prompt_embedding, "prompt embedding"),
        "prompt_provenance": provenance,
        "prompt_text": prompt_text,
    }


def write_document(doc: dict, out_path) -> Path:
    """Serialize to UTF-8 JSON, atomically (temp file + rename)."""
    out_path = Path(out_path)
    payload = json.dumps(doc, ensure_ascii=False).encode("utf-8") + b"\n"
    try:
        fd, tmp_name = tempfile.mkstemp(
            dir=out_path.parent, prefix=f".{out_path.name}.", suffix=".tmp")
    except OSError as exc:
        raise DocumentError(f"cannot write {str(out_path)!r}: {exc}") from None
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(payload)
        os.replace(tmp_name, out_path)
    except OSError as exc:
        os.unlink(tmp_name)
        raise DocumentError(f"cannot write {str(out_path)!r}: {exc}") from None
    return out_path
