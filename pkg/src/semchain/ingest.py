"""Payload ingest: base64 serialization, fixed-size chunking, prompt gzip.

Everything here is a pure function; chunk boundaries are measured on the
encoded text because that is what occupies block capacity.
"""

import base64
import binascii
import gzip
import json
import zlib
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import DecodeError, DecompressError, EmptyPayload, InvalidChunkSize

DEFAULT_CHUNK_SIZE = 100_000


class AssetKind(str, Enum):
    IMAGE = "image"
    PROMPT_TEXT = "prompt_text"
    PROMPT_GZ = "prompt_gz"
    OTHER = "other"


@dataclass
class FileAsset:
    id: str
    data: bytes
    kind: AssetKind = AssetKind.OTHER
    source_path: str | None = None

    def __post_init__(self):
        if not self.data:
            raise EmptyPayload(f"asset {self.id!r} has empty payload")
        if isinstance(self.kind, str):
            self.kind = AssetKind(self.kind)


@dataclass
class ChunkSet:
    asset_id: str
    chunks: list[str] = field(default_factory=list)
    encoded_len: int = 0


def encode_base64(data: bytes) -> str:
    """Standard-alphabet padded base64; output length is 4*ceil(len/3)."""
    return base64.b64encode(data).decode("ascii")


def partition(encoded: str, chunk_size: int = DEFAULT_CHUNK_SIZE, asset_id: str = "") -> ChunkSet:
    """Slice encoded text into sequential chunks; the last one keeps the remainder."""
    if chunk_size <= 0:
        raise InvalidChunkSize(f"chunk_size must be >= 1, got {chunk_size}")
    if not encoded:
        raise EmptyPayload("cannot partition empty payload")
    chunks = [encoded[i:i + chunk_size] for i in range(0, len(encoded), chunk_size)]
    return ChunkSet(asset_id=asset_id, chunks=chunks, encoded_len=len(encoded))


def reassemble(chunk_set: ChunkSet) -> bytes:
    """Decode the concatenated chunks back to the original bytes."""
    joined = "".join(chunk_set.chunks)
    try:
        return base64.b64decode(joined, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise DecodeError(f"invalid base64 content for asset {chunk_set.asset_id!r}: {exc}") from exc


def make_chunk_set(asset: FileAsset, chunk_size: int = DEFAULT_CHUNK_SIZE) -> ChunkSet:
    return partition(encode_base64(asset.data), chunk_size, asset_id=asset.id)


def compress_prompt(text: str) -> bytes:
    """Gzip-compress prompt text; mtime pinned to 0 so output is byte-stable."""
    return gzip.compress(text.encode("utf-8"), mtime=0)


def decompress_prompt(data: bytes) -> str:
    try:
        return gzip.decompress(data).decode("utf-8")
    except (gzip.BadGzipFile, zlib.error, EOFError, UnicodeDecodeError) as exc:
        raise DecompressError(f"malformed gzip container: {exc}") from exc


def iter_manifest(path: str | Path) -> list[tuple[str, Path, AssetKind]]:
    """Parse a corpus manifest (JSON array of {id, path, kind}) without reading files."""
    path = Path(path)
    entries = json.loads(path.read_text())
    out = []
    seen = set()
    for entry in entries:
        asset_id = entry["id"]
        if asset_id in seen:
            raise DecodeError(f"duplicate id in manifest: {asset_id!r}")
        seen.add(asset_id)
        file_path = Path(entry["path"])
        if not file_path.is_absolute():
            file_path = path.parent / file_path
        out.append((asset_id, file_path, AssetKind(entry.get("kind", "other"))))
    return out


def load_manifest(path: str | Path) -> list[FileAsset]:
    """Read a corpus manifest and the files it lists."""
    return [FileAsset(id=asset_id, data=file_path.read_bytes(), kind=kind,
                      source_path=str(file_path))
            for asset_id, file_path, kind in iter_manifest(path)]


def write_manifest(assets: list[FileAsset], path: str | Path) -> None:
    entries = [{"id": a.id, "path": a.source_path, "kind": a.kind.value} for a in assets]
    Path(path).write_text(json.dumps(entries, indent=2) + "\n")
