"""Captioner / generator / embedder backends.

The mock family is fully deterministic and referentially transparent, built on
FNV-1a hashing so every expected value can be reproduced with a few lines of
arithmetic. Seed 0 is a deliberate anchor: its candidate always captions back
to the original prompt, giving distance 0.

The remote client speaks the JSON-over-HTTP wire protocol; the endpoint is
selected by the SEMCHAIN_BACKEND_URL environment variable (unset = mocks).
"""

import base64
import json
import os
import re
import string
from dataclasses import dataclass
from typing import Callable

import numpy as np
import requests

from .errors import EmptyPrompt, ProtocolError, RemoteTimeout, ServerError
from .semantics import Embedding

MOCK_MAGIC = b"MOCKIMG1"
MOCK_EMBED_DIM = 256

FNV_OFFSET = 14695981039346656037
FNV_PRIME = 1099511628211
_MASK64 = (1 << 64) - 1

_TOKEN_SPLIT = re.compile("[" + re.escape(string.punctuation) + r"\s]+")


def fnv1a64(data: bytes) -> int:
    h = FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * FNV_PRIME) & _MASK64
    return h


def _xor_fold32(h: int) -> int:
    return (h >> 32) ^ (h & 0xFFFFFFFF)


@dataclass
class BackendSet:
    """The three fixed model mappings, each returning (result, elapsed_ms)."""
    caption: Callable[[bytes], tuple[str, float]]
    generate: Callable[[str, int], tuple[bytes, float]]
    embed: Callable[[str], tuple[Embedding, float]]


def tokenize(text: str) -> list[str]:
    """Lowercase and split on whitespace plus ASCII punctuation."""
    return [t for t in _TOKEN_SPLIT.split(text.lower()) if t]


def mock_embed(text: str) -> Embedding:
    """Signed bag-of-words feature hashing into 256 dims, L2-normalized."""
    vec = np.zeros(MOCK_EMBED_DIM)
    for token in tokenize(text):
        h = fnv1a64(token.encode("utf-8"))
        index = h % MOCK_EMBED_DIM
        sign = 1.0 if _xor_fold32(h) & 1 == 0 else -1.0
        vec[index] += sign
    return Embedding.normalized(vec)


def mock_generate(prompt: str, seed: int) -> bytes:
    if not prompt:
        raise EmptyPrompt("prompt must be non-empty")
    return MOCK_MAGIC + seed.to_bytes(8, "big") + prompt.encode("utf-8")


def mock_caption(image: bytes) -> str:
    """Parse a mock image back to a (possibly degraded) caption.

    Seed 0 reproduces the prompt verbatim. Other seeds keep each
    whitespace-separated token with probability 3/4, decided by hashing
    (seed || 0x1F || token). Non-mock bytes get a content-hash caption.
    """
    if image.startswith(MOCK_MAGIC) and len(image) >= 16:
        seed_bytes = image[8:16]
        prompt = image[16:].decode("utf-8")
        if seed_bytes == b"\x00" * 8:
            return prompt
        kept = [t for t in prompt.split()
                if fnv1a64(seed_bytes + b"\x1f" + t.encode("utf-8")) % 4 != 0]
        return " ".join(kept)
    return "image-" + format(fnv1a64(image), "016x")[:8]


def _timed(fn):
    def wrapper(*args):
        return fn(*args), 0.0
    return wrapper


def mock_backends() -> BackendSet:
    """In-process mocks; elapsed_ms is always 0 (no model runs)."""
    return BackendSet(
        caption=_timed(mock_caption),
        generate=_timed(mock_generate),
        embed=_timed(mock_embed),
    )


class RemoteClient:
    """Client for a model server implementing the wire protocol."""

    def __init__(self, base_url: str, timeout_s: float = 120.0, session=None):
        self.base_url = base_url.rstrip("/")
        self.timeout_s = timeout_s
        self.session = session or requests.Session()

    def _post(self, path: str, payload: dict) -> dict:
        url = self.base_url + path
        try:
            resp = self.session.post(url, json=payload, timeout=self.timeout_s)
        except requests.Timeout as exc:
            raise RemoteTimeout(f"timeout calling {url}") from exc
        except requests.RequestException as exc:
            raise ProtocolError(f"transport failure calling {url}: {exc}") from exc
        if resp.status_code >= 500:
            raise ServerError(f"{url} returned {resp.status_code}: {_error_text(resp)}")
        if resp.status_code >= 400:
            raise ProtocolError(f"{url} returned {resp.status_code}: {_error_text(resp)}")
        try:
            body = resp.json()
        except (json.JSONDecodeError, ValueError) as exc:
            raise ProtocolError(f"{url} returned malformed JSON") from exc
        if "elapsed_ms" not in body:
            raise ProtocolError(f"{url} response missing field 'elapsed_ms'")
        return body

    def caption(self, image: bytes) -> tuple[str, float]:
        body = self._post("/v1/caption", {"image_b64": base64.b64encode(image).decode("ascii")})
        if "text" not in body:
            raise ProtocolError("/v1/caption response missing field 'text'")
        return body["text"], float(body["elapsed_ms"])

    def generate(self, prompt: str, seed: int) -> tuple[bytes, float]:
        body = self._post("/v1/generate", {"prompt": prompt, "seed": seed})
        if "image_b64" not in body:
            raise ProtocolError("/v1/generate response missing field 'image_b64'")
        return base64.b64decode(body["image_b64"]), float(body["elapsed_ms"])

    def embed(self, text: str) -> tuple[Embedding, float]:
        body = self._post("/v1/embed", {"text": text})
        if "vector" not in body:
            raise ProtocolError("/v1/embed response missing field 'vector'")
        # normalize client-side regardless of what the server returned
        return Embedding.normalized(np.asarray(body["vector"], dtype=float)), float(body["elapsed_ms"])


def _error_text(resp) -> str:
    try:
        return resp.json().get("error", resp.text)
    except ValueError:
        return resp.text


def remote_backends(base_url: str, timeout_s: float = 120.0) -> BackendSet:
    client = RemoteClient(base_url, timeout_s=timeout_s)
    return BackendSet(caption=client.caption, generate=client.generate, embed=client.embed)


def default_backends() -> BackendSet:
    url = os.environ.get("SEMCHAIN_BACKEND_URL")
    if url:
        return remote_backends(url)
    return mock_backends()
