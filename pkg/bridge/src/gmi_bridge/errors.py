"""Bridge exception hierarchy.

Everything user-facing derives from BridgeError so the CLI can map the
whole family to one exit code.
"""

from __future__ import annotations


class BridgeError(Exception):
    """Base class for all bridge failures."""


class ConfigError(BridgeError):
    """EncoderConfig field rejected."""


class EncoderLoadError(BridgeError):
    """Requested encoder or interrogator name is not available."""


class ImageReadError(BridgeError):
    """Image file missing, unreadable, or not a decodable raster."""


class EncodingError(BridgeError):
    """An encoder produced a degenerate (non-finite or zero) vector."""


class InterrogatorError(BridgeError):
    """Interrogator failed or returned an empty caption."""


class LengthMismatchError(BridgeError):
    """Index-aligned inputs have different lengths."""


class DocumentError(BridgeError):
    """Emitted document would violate the wire contract."""
