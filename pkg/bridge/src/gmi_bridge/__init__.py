"""gmi-bridge: encode images and prompt text into gmi engine documents."""

from gmi_bridge.documents import (
    SPEC_VERSION,
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
from gmi_bridge.errors import (
    BridgeError,
    ConfigError,
    DocumentError,
    EncoderLoadError,
    EncodingError,
    ImageReadError,
    InterrogatorError,
    LengthMismatchError,
)
from gmi_bridge.pipeline import encode_requirement, encode_spec

__version__ = "0.1.0"

__all__ = [
    "BridgeError",
    "ConfigError",
    "DocumentError",
    "EncoderConfig",
    "EncoderLoadError",
    "EncodingError",
    "ImageReadError",
    "InterrogatorError",
    "LengthMismatchError",
    "SPEC_VERSION",
    "encode_requirement",
    "encode_spec",
    "load_interrogator",
    "load_text",
    "load_vision",
    "requirement_document",
    "spec_document",
    "write_document",
    "__version__",
]
