"""gmi: identify which generative model produced an image embedding.

Models are represented by specifications (paired image and prompt
embedding sets); queries are requirements (one image embedding plus a
prompt embedding). Scoring runs in a reproducing-kernel Hilbert space:
the flagship strategy reweights each spec sample by the cosine
similarity of its prompt to the query prompt, which separates models
whose marginal image distributions coincide but whose prompt-conditional
behavior differs.
"""

from gmi.backend import active_backend, available_backends
from gmi.errors import (
    DimensionMismatchError,
    DuplicateModelError,
    EmptyRegistryError,
    EmptySetError,
    GmiError,
    LengthMismatchError,
    NonFiniteError,
    ReducedSizeError,
    SchemaMismatchError,
    SpecFormatError,
    SpecVersionError,
    StorageError,
    UnknownModelError,
    ValidationError,
    ZeroNormError,
)
from gmi.identification import (
    STRATEGY_VARIANTS,
    RankedEntry,
    ScoredRanking,
    ScoringStrategy,
    SpecCache,
    build_cache,
    cache_key,
    identify,
    score_one,
    top_k,
)
from gmi.kernel import (
    KernelParams,
    cosine_similarity,
    prompt_weighted_score,
    rbf_kernel,
    uniform_mmd_sq,
    weighted_mmd_sq,
)
from gmi.reduced import ReduceOptions, ReducedSet, reduce, reduction_error
from gmi.registry import Registry
from gmi.requirement import (
    Requirement,
    build_requirement,
    deserialize_requirement,
    serialize_requirement,
)
from gmi.spec import (
    SPEC_VERSION,
    ModelSpec,
    PromptRecord,
    build_spec,
    deserialize_spec,
    serialize_spec,
    serialize_spec_jsonl,
    spec_fingerprint,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "active_backend",
    "available_backends",
    "KernelParams",
    "rbf_kernel",
    "cosine_similarity",
    "uniform_mmd_sq",
    "weighted_mmd_sq",
    "prompt_weighted_score",
    "ReduceOptions",
    "ReducedSet",
    "reduce",
    "reduction_error",
    "SPEC_VERSION",
    "ModelSpec",
    "PromptRecord",
    "build_spec",
    "serialize_spec",
    "serialize_spec_jsonl",
    "deserialize_spec",
    "spec_fingerprint",
    "Requirement",
    "build_requirement",
    "serialize_requirement",
    "deserialize_requirement",
    "STRATEGY_VARIANTS",
    "ScoringStrategy",
    "RankedEntry",
    "ScoredRanking",
    "SpecCache",
    "build_cache",
    "cache_key",
    "score_one",
    "identify",
    "top_k",
    "Registry",
    "GmiError",
    "ValidationError",
    "DimensionMismatchError",
    "NonFiniteError",
    "ZeroNormError",
    "EmptySetError",
    "LengthMismatchError",
    "ReducedSizeError",
    "SpecFormatError",
    "SpecVersionError",
    "UnknownModelError",
    "DuplicateModelError",
    "SchemaMismatchError",
    "EmptyRegistryError",
    "StorageError",
]
