"""Deterministic mock models for the caption/generate/embed endpoints.

These are pure functions of the request body and are kept bit-compatible
with the client-side mocks used by pipeline consumers: FNV-1a feature
hashing into 256 dims for embeddings, a magic-prefixed byte layout for
generated images, and a hash-driven token dropout for captions. Seed 0
always captions back to the original prompt.
"""

import math
import re
import string

MAGIC = b"MOCKIMG1"
EMBED_DIM = 256

_FNV_OFFSET = 14695981039346656037
_FNV_PRIME = 1099511628211
_MASK64 = (1 << 64) - 1

_TOKEN_SPLIT = re.compile("[" + re.escape(string.punctuation) + r"\s]+")


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME) & _MASK64
    return h


def _xor_fold32(h: int) -> int:
    return (h >> 32) ^ (h & 0xFFFFFFFF)


def embed(text: str) -> list[float]:
    """Signed bag-of-words hash embedding, L2-normalized; empty text -> zero vector."""
    vec = [0.0] * EMBED_DIM
    for token in _TOKEN_SPLIT.split(text.lower()):
        if not token:
            continue
        h = fnv1a64(token.encode("utf-8"))
        vec[h % EMBED_DIM] += 1.0 if _xor_fold32(h) & 1 == 0 else -1.0
    norm = math.sqrt(sum(v * v for v in vec))
    if norm == 0.0:
        return vec
    return [v / norm for v in vec]


def generate(prompt: str, seed: int) -> bytes:
    if not prompt:
        raise ValueError("prompt must be non-empty")
    return MAGIC + seed.to_bytes(8, "big") + prompt.encode("utf-8")


def caption(image: bytes) -> str:
    if image.startswith(MAGIC) and len(image) >= 16:
        seed_bytes = image[8:16]
        prompt = image[16:].decode("utf-8")
        if seed_bytes == b"\x00" * 8:
            return prompt
        kept = [t for t in prompt.split()
                if fnv1a64(seed_bytes + b"\x1f" + t.encode("utf-8")) % 4 != 0]
        return " ".join(kept)
    return "image-" + format(fnv1a64(image), "016x")[:8]
