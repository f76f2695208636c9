"""HTTP surface over a Registry.

Bodies are parsed by the same functions the library exposes, so a
distance served over HTTP is the figure a direct in-process call
produces, bit for bit; responses serialize floats with shortest
round-trip repr, which preserves them exactly.

Routes (JSON in/out):
    POST   /v1/models            spec document -> 201 {"model_id": ...}
    GET    /v1/models            -> summaries in insertion order
    GET    /v1/models/{id}       -> the stored spec document
    DELETE /v1/models/{id}       -> 204
    POST   /v1/identify          {"requirement": {...}, "strategy": str,
                                  "gamma"?: float, "k"?: int} -> entries
    GET    /v1/healthz           -> {"status": "ok", "models": M}

Error mapping: malformed or invalid input 400, unknown model 404,
duplicate submit and empty-registry identify 409, storage failures 500.
"""

from __future__ import annotations

import json

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

from gmi.errors import (
    DuplicateModelError,
    EmptyRegistryError,
    SpecFormatError,
    SpecVersionError,
    StorageError,
    UnknownModelError,
    ValidationError,
)
from gmi.identification import STRATEGY_VARIANTS, ScoringStrategy
from gmi.kernel import KernelParams
from gmi.registry import Registry
from gmi.requirement import requirement_from_doc
from gmi.spec import deserialize_spec

__all__ = ["create_app"]

DEFAULT_GAMMA = 0.02


def _error_response(status: int, exc: Exception) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={"error": str(exc), "type": type(exc).__name__})


def _parse_identify_body(raw: bytes) -> dict:
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SpecFormatError(f"malformed identify body: {exc}") from exc
    if not isinstance(doc, dict):
        raise SpecFormatError("identify body must be a JSON object")
    if "requirement" not in doc:
        raise SpecFormatError("identify body is missing 'requirement'")
    variant = doc.get("strategy")
    if variant not in STRATEGY_VARIANTS:
        raise ValidationError(
            f"strategy must be one of {STRATEGY_VARIANTS}, got {variant!r}")
    gamma = doc.get("gamma", DEFAULT_GAMMA)
    if isinstance(gamma, bool) or not isinstance(gamma, (int, float)) or not gamma > 0:
        raise ValidationError(f"gamma must be a positive number, got {gamma!r}")
    k = doc.get("k")
    if k is not None and (isinstance(k, bool) or not isinstance(k, int)):
        raise ValidationError(f"k must be an integer, got {k!r}")
    return {"requirement": doc["requirement"], "variant": variant,
            "gamma": float(gamma), "k": k}


def create_app(registry: Registry) -> FastAPI:
    app = FastAPI(title="gmi", docs_url=None, redoc_url=None, openapi_url=None)

    @app.exception_handler(ValidationError)
    @app.exception_handler(SpecFormatError)
    @app.exception_handler(SpecVersionError)
    async def _bad_request(request: Request, exc: Exception):
        return _error_response(400, exc)

    @app.exception_handler(UnknownModelError)
    async def _not_found(request: Request, exc: Exception):
        return _error_response(404, exc)

    @app.exception_handler(DuplicateModelError)
    @app.exception_handler(EmptyRegistryError)
    async def _conflict(request: Request, exc: Exception):
        return _error_response(409, exc)

    @app.exception_handler(StorageError)
    async def _storage(request: Request, exc: Exception):
        return _error_response(500, exc)

    @app.get("/v1/healthz")
    async def healthz():
        return {"status": "ok", "models": len(registry)}

    @app.post("/v1/models", status_code=201)
    async def submit(request: Request):
        replace = request.query_params.get("replace", "").lower() in ("1", "true")
        spec = deserialize_spec(await request.body())
        model_id = registry.submit_model(spec, replace=replace)
        return {"model_id": model_id}

    @app.get("/v1/models")
    async def list_models():
        return registry.list_models()

    @app.get("/v1/models/{model_id}")
    async def get_model(model_id: str):
        return Response(content=registry.spec_document(model_id),
                        media_type="application/json")

    @app.delete("/v1/models/{model_id}", status_code=204)
    async def remove(model_id: str):
        registry.remove_model(model_id)
        return Response(status_code=204)

    @app.post("/v1/identify")
    async def identify(request: Request):
        parsed = _parse_identify_body(await request.body())
        # download ignores the embeddings, so don't pin dims for it
        image_dim, prompt_dim = (
            (None, None) if parsed["variant"] == "download" else registry.schema)
        req = requirement_from_doc(parsed["requirement"],
                                   image_dim=image_dim, prompt_dim=prompt_dim)
        strategy = ScoringStrategy(variant=parsed["variant"],
                                   kernel=KernelParams(parsed["gamma"]))
        ranking = registry.identify(req, strategy, k=parsed["k"])
        return {
            "strategy": parsed["variant"],
            "gamma": parsed["gamma"],
            "entries": [
                {"model_id": e.model_id, "distance": e.distance,
                 "similarity": e.similarity, "rank": e.rank}
                for e in ranking.entries
            ],
        }

    return app
