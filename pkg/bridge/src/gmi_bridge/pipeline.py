"""The two bridge operations: encode a spec, encode a requirement.

All scoring stays on the engine side; this module only turns files and
text into validated embedding documents.
"""

from __future__ import annotations

from pathlib import Path

from gmi_bridge.documents import (
    requirement_document,
    spec_document,
    write_document,
)
from gmi_bridge.encoders import (
    EncoderConfig,
    load_interrogator,
    load_text,
    load_vision,
)
from gmi_bridge.errors import InterrogatorError, LengthMismatchError


def encode_spec(model_id: str, image_paths, prompts, out_path, *,
                download_count: int = 0, metadata: dict | None = None,
                config: EncoderConfig = EncoderConfig()) -> Path:
    """Encode index-aligned images and prompts into a spec document.

    Length mismatch fails before any encoder work.
    """
    image_paths = list(image_paths)
    prompts = list(prompts)
    if len(image_paths) != len(prompts):
        raise LengthMismatchError(f"{len(image_paths)} images but "
                                  f"{len(prompts)} prompts")
    vision = load_vision(config)
    text = load_text(config)
    image_rows = vision.encode_paths(image_paths, config.batch_size)
    records = [{"text": p, "embedding": text.encode(p)} for p in prompts]
    doc = spec_document(model_id, image_rows, records,
                        download_count=download_count, metadata=metadata)
    return write_document(doc, out_path)


def encode_requirement(image_path, out_path, *, prompt_text: str | None = None,
                       config: EncoderConfig = EncoderConfig()) -> Path:
    """Encode one image (plus optional user prompt) into a requirement.

    Without prompt_text the interrogator captions the image and
    provenance is "pseudo"; with it, provenance is "user".
    """
    vision = load_vision(config)
    text = load_text(config)
    if prompt_text is None:
        interrogator = load_interrogator(config)
        caption = interrogator.caption(image_path)
        # a blank caption would embed as bias-only; fail loudly instead
        if not isinstance(caption, str) or not caption.strip():
            raise InterrogatorError(
                f"interrogator {config.interrogator_name!r} returned an "
                f"empty caption for {str(image_path)!r}")
        provenance, used_text = "pseudo", caption
    else:
        provenance, used_text = "user", prompt_text
    doc = requirement_document(vision.encode_path(image_path),
                               text.encode(used_text), provenance, used_text)
    return write_document(doc, out_path)
