"""File-backed model registry: the platform's store plus its query surface.

Layout under the root directory::

    manifest.json      registry state: schema dims + model table
    specs/<file>.json  one spec document per model (current version only)
    audit.log          append-only JSONL event trail

Every mutation writes the spec file first, then swaps the manifest via an
atomic rename; the manifest is the commit point, so a reader (or a crash)
sees either the old registry or the new one, never a half-written state.
Scoring caches are built eagerly at submit and load time for the default
strategies and memoized per strategy key otherwise; they are derived,
in-memory state and never outlive the spec version they were built from.
"""

from __future__ import annotations

import dataclasses
import json
import os
import re
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from hashlib import sha1
from pathlib import Path

from gmi import identification
from gmi.errors import (
    DuplicateModelError,
    EmptyRegistryError,
    SchemaMismatchError,
    StorageError,
    UnknownModelError,
    ValidationError,
)
from gmi.identification import ScoringStrategy, build_cache, cache_key
from gmi.requirement import Requirement
from gmi.spec import ModelSpec, deserialize_spec, serialize_spec, spec_fingerprint

__all__ = ["Registry", "DEFAULT_EAGER_STRATEGIES"]

MANIFEST_FORMAT = 1

# built at submit/load so a default-strategy query never pays setup cost
DEFAULT_EAGER_STRATEGIES = (
    ScoringStrategy(variant="weighted"),
    ScoringStrategy(variant="rkme-embed"),
)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _slug(model_id: str) -> str:
    safe = re.sub(r"[^A-Za-z0-9._-]+", "_", model_id)[:48].strip("._") or "model"
    return f"{safe}-{sha1(model_id.encode('utf-8')).hexdigest()[:8]}"


@dataclass
class _Entry:
    spec: ModelSpec
    version: int
    filename: str
    fingerprint: str


class Registry:
    """Single-directory persistent registry.

    One writer at a time (guarded by an internal lock); reads snapshot
    under the same lock and then work on immutable specs. Embedding dims
    are fixed by the first submitted spec; later mismatches are rejected.
    """

    MANIFEST = "manifest.json"
    SPEC_DIR = "specs"
    AUDIT = "audit.log"

    def __init__(self, root, eager: bool = True):
        self.root = Path(root)
        self._lock = threading.RLock()
        self._entries: dict[str, _Entry] = {}
        self._order: list[str] = []
        self._caches: dict[str, dict[tuple, identification.SpecCache]] = {}
        self._image_dim: int | None = None
        self._prompt_dim: int | None = None
        self._eager = bool(eager)
        try:
            (self.root / self.SPEC_DIR).mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise StorageError(f"cannot create registry root {self.root}: {exc}") from exc
        if (self.root / self.MANIFEST).exists():
            self._load()
        else:
            self._write_manifest()

    # ---- properties ----

    @property
    def schema(self) -> tuple:
        """(image_dim, prompt_dim); (None, None) until the first submit."""
        return (self._image_dim, self._prompt_dim)

    def __len__(self) -> int:
        return len(self._order)

    def model_ids(self) -> list:
        with self._lock:
            return list(self._order)

    def specs(self) -> list:
        with self._lock:
            return [self._entries[mid].spec for mid in self._order]

    # ---- persistence ----

    def _write_atomic(self, path: Path, data: bytes):
        tmp = path.with_name(path.name + ".tmp")
        try:
            tmp.write_bytes(data)
            os.replace(tmp, path)
        except OSError as exc:
            raise StorageError(f"write to {path} failed: {exc}") from exc

    def _write_manifest(self):
        doc = {
            "format_version": MANIFEST_FORMAT,
            "image_dim": self._image_dim,
            "prompt_dim": self._prompt_dim,
            "models": [
                {
                    "model_id": mid,
                    "file": self._entries[mid].filename,
                    "version": self._entries[mid].version,
                    "fingerprint": self._entries[mid].fingerprint,
                    "n_samples": self._entries[mid].spec.n,
                    "download_count": self._entries[mid].spec.download_count,
                    "created_at": self._entries[mid].spec.created_at,
                }
                for mid in self._order
            ],
        }
        self._write_atomic(self.root / self.MANIFEST,
                           json.dumps(doc, indent=2).encode("utf-8"))

    def _load(self):
        try:
            raw = (self.root / self.MANIFEST).read_bytes()
        except OSError as exc:
            raise StorageError(f"cannot read manifest: {exc}") from exc
        doc = json.loads(raw)
        if doc.get("format_version") != MANIFEST_FORMAT:
            raise StorageError(
                f"unsupported manifest format {doc.get('format_version')!r}")
        self._image_dim = doc.get("image_dim")
        self._prompt_dim = doc.get("prompt_dim")
        for row in doc.get("models", []):
            path = self.root / self.SPEC_DIR / row["file"]
            try:
                spec = deserialize_spec(path.read_bytes())
            except OSError as exc:
                raise StorageError(f"cannot read spec file {path}: {exc}") from exc
            if spec.model_id != row["model_id"]:
                raise StorageError(
                    f"spec file {row['file']} holds {spec.model_id!r}, "
                    f"manifest says {row['model_id']!r}")
            self._entries[spec.model_id] = _Entry(
                spec=spec, version=int(row.get("version", 1)),
                filename=row["file"],
                fingerprint=row.get("fingerprint") or spec_fingerprint(spec))
            self._order.append(spec.model_id)
        if self._eager:
            for strategy in DEFAULT_EAGER_STRATEGIES:
                self._ensure_caches(strategy)

    def _audit(self, event: str, **fields):
        line = json.dumps({"ts": _now(), "event": event, **fields})
        try:
            with open(self.root / self.AUDIT, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")
        except OSError as exc:
            raise StorageError(f"audit append failed: {exc}") from exc

    # ---- caches ----

    def _ensure_caches(self, strategy: ScoringStrategy) -> dict:
        key = cache_key(strategy)
        out = {}
        with self._lock:
            for mid in self._order:
                per_model = self._caches.setdefault(mid, {})
                if key not in per_model:
                    per_model[key] = build_cache(self._entries[mid].spec, strategy)
                out[mid] = per_model[key]
        return out

    # ---- operations ----

    def submit_model(self, spec: ModelSpec, replace: bool = False) -> str:
        """Persist a spec and build its default caches. A duplicate id is
        rejected unless ``replace`` asks for an explicit version bump."""
        if not isinstance(spec, ModelSpec):
            raise ValidationError("submit_model expects a ModelSpec")
        with self._lock:
            existing = self._entries.get(spec.model_id)
            if existing is not None and not replace:
                raise DuplicateModelError(
                    f"model {spec.model_id!r} already registered")
            img_d, prm_d = spec.image_dim, spec.prompt_dim
            if self._image_dim is not None and (
                    img_d != self._image_dim or prm_d != self._prompt_dim):
                raise SchemaMismatchError(
                    f"spec dims ({img_d}, {prm_d}) do not match registry "
                    f"schema ({self._image_dim}, {self._prompt_dim})")
            if spec.created_at is None:
                spec = dataclasses.replace(spec, created_at=_now())
            version = existing.version + 1 if existing else 1
            filename = f"{_slug(spec.model_id)}-v{version}.json"
            self._write_atomic(self.root / self.SPEC_DIR / filename,
                               serialize_spec(spec))
            old_file = existing.filename if existing else None
            self._entries[spec.model_id] = _Entry(
                spec=spec, version=version, filename=filename,
                fingerprint=spec_fingerprint(spec))
            if existing is None:
                self._order.append(spec.model_id)
            if self._image_dim is None:
                self._image_dim, self._prompt_dim = img_d, prm_d
            self._write_manifest()
            if old_file and old_file != filename:
                try:
                    (self.root / self.SPEC_DIR / old_file).unlink()
                except OSError:
                    pass  # stale file is harmless; manifest no longer points at it
            self._caches.pop(spec.model_id, None)
            if self._eager:
                for strategy in DEFAULT_EAGER_STRATEGIES:
                    self._ensure_caches(strategy)
            self._audit("submit", model_id=spec.model_id, version=version,
                        n_samples=spec.n, fingerprint=self._entries[spec.model_id].fingerprint)
            return spec.model_id

    def get_spec(self, model_id: str) -> ModelSpec:
        with self._lock:
            entry = self._entries.get(model_id)
        if entry is None:
            raise UnknownModelError(model_id)
        return entry.spec

    def spec_document(self, model_id: str) -> bytes:
        """The stored JSON document for a model, byte-for-byte."""
        with self._lock:
            entry = self._entries.get(model_id)
            if entry is None:
                raise UnknownModelError(model_id)
            path = self.root / self.SPEC_DIR / entry.filename
        try:
            return path.read_bytes()
        except OSError as exc:
            raise StorageError(f"cannot read spec file {path}: {exc}") from exc

    def list_models(self) -> list:
        """Summaries in insertion order."""
        with self._lock:
            return [
                {
                    "model_id": mid,
                    "n_samples": self._entries[mid].spec.n,
                    "download_count": self._entries[mid].spec.download_count,
                }
                for mid in self._order
            ]

    def remove_model(self, model_id: str):
        with self._lock:
            entry = self._entries.get(model_id)
            if entry is None:
                raise UnknownModelError(model_id)
            del self._entries[model_id]
            self._order.remove(model_id)
            self._caches.pop(model_id, None)
            if not self._order:
                self._image_dim = None
                self._prompt_dim = None
            self._write_manifest()
            try:
                (self.root / self.SPEC_DIR / entry.filename).unlink()
            except OSError:
                pass
            self._audit("remove", model_id=model_id)

    def identify(self, req: Requirement, strategy: ScoringStrategy,
                 k: int | None = None) -> identification.ScoredRanking:
        """Rank all registered models against the requirement.

        Returns the full ranking, or the first k entries when k is given.
        Scores are computed by the identification module on the cached
        spec state, so they equal a direct library call bit-for-bit.
        """
        with self._lock:
            if not self._order:
                raise EmptyRegistryError("registry has no models")
            specs = [self._entries[mid].spec for mid in self._order]
        if strategy.variant != "download":
            if req.image_embedding.shape[0] != self._image_dim:
                raise SchemaMismatchError(
                    f"requirement image dim {req.image_embedding.shape[0]} != "
                    f"registry schema {self._image_dim}")
            if strategy.variant in ("weighted", "rkme-concat") and \
                    req.prompt_embedding.shape[0] != self._prompt_dim:
                raise SchemaMismatchError(
                    f"requirement prompt dim {req.prompt_embedding.shape[0]} != "
                    f"registry schema {self._prompt_dim}")
        if k is not None and (int(k) < 1 or int(k) > len(specs)):
            raise ValidationError(f"k must be in [1, {len(specs)}], got {k}")
        caches = self._ensure_caches(strategy)
        ranking = identification.identify(specs, req, strategy, caches=caches)
        self._audit("identify", strategy=strategy.variant,
                    gamma=strategy.kernel.gamma, k=k,
                    models=len(specs), top=ranking.entries[0].model_id)
        if k is None:
            return ranking
        return identification.ScoredRanking(
            entries=ranking.entries[:int(k)], strategy=strategy)
