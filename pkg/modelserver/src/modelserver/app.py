"""FastAPI application exposing /v1/caption, /v1/generate, /v1/embed, /healthz.

Every successful response carries elapsed_ms measured around the model call
only (request parsing excluded); every failure returns {"error": str} with
status >= 400. Mock mode is stateless and needs no model assets.
"""

import base64
import binascii
import time
from dataclasses import dataclass, field

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import mocks

DEFAULT_MAX_REQUEST_BYTES = 32 * 1024 * 1024


@dataclass
class ServerConfig:
    port: int = 8080
    mode: str = "mock"
    model_dir: str | None = None
    max_request_bytes: int = DEFAULT_MAX_REQUEST_BYTES

    def __post_init__(self):
        if self.mode not in ("mock", "real"):
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass
class Models:
    """The three model callables behind the endpoints."""
    caption: callable
    generate: callable
    embed: callable


def _mock_models() -> Models:
    return Models(caption=mocks.caption, generate=mocks.generate, embed=mocks.embed)


def _real_models(config: ServerConfig) -> Models:
    # optional plugin; the mock acceptance path never exercises this
    from .real import load_models
    return load_models(config.model_dir)


class CaptionRequest(BaseModel):
    image_b64: str


class GenerateRequest(BaseModel):
    prompt: str
    seed: int


class EmbedRequest(BaseModel):
    text: str


def self_timed(fn, *args):
    """Run a model callable and report its execution time in ms."""
    start = time.perf_counter()
    result = fn(*args)
    elapsed_ms = (time.perf_counter() - start) * 1000.0
    return result, elapsed_ms


def create_app(config: ServerConfig | None = None) -> FastAPI:
    config = config or ServerConfig()
    models = _mock_models() if config.mode == "mock" else _real_models(config)
    app = FastAPI(title="modelserver")

    @app.exception_handler(RequestValidationError)
    async def validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.exception_handler(Exception)
    async def internal_error(request: Request, exc: Exception):
        return JSONResponse(status_code=500, content={"error": str(exc)})

    @app.middleware("http")
    async def limit_request_size(request: Request, call_next):
        length = request.headers.get("content-length")
        if length and int(length) > config.max_request_bytes:
            return JSONResponse(status_code=413, content={"error": "request body too large"})
        return await call_next(request)

    @app.get("/healthz")
    async def healthz():
        return {"status": "ok", "mode": config.mode}

    @app.post("/v1/caption")
    async def caption(req: CaptionRequest):
        try:
            image = base64.b64decode(req.image_b64, validate=True)
        except (binascii.Error, ValueError):
            return JSONResponse(status_code=400, content={"error": "image_b64 is not valid base64"})
        text, elapsed_ms = self_timed(models.caption, image)
        return {"text": text, "elapsed_ms": elapsed_ms}

    @app.post("/v1/generate")
    async def generate(req: GenerateRequest):
        if req.seed < 0 or req.seed >= (1 << 64):
            return JSONResponse(status_code=400, content={"error": "seed must fit in 64 unsigned bits"})
        try:
            image, elapsed_ms = self_timed(models.generate, req.prompt, req.seed)
        except ValueError as exc:
            return JSONResponse(status_code=400, content={"error": str(exc)})
        return {"image_b64": base64.b64encode(image).decode("ascii"), "elapsed_ms": elapsed_ms}

    @app.post("/v1/embed")
    async def embed(req: EmbedRequest):
        vector, elapsed_ms = self_timed(models.embed, req.text)
        return {"vector": vector, "elapsed_ms": elapsed_ms}

    return app
