"""Deterministic discrete-event model of up-chaining.

Transactions enter a FIFO queue at submission time. Blocks are produced at
fixed interval boundaries after genesis (t = genesis + h * interval, h >= 1)
and greedily pack queue-front transactions while capacity remains. Packing is
strict FIFO: a transaction that does not fit blocks everything behind it, and
a transaction submitted exactly at a production instant waits for the next
block. Boundaries where nothing is packed produce no recorded block.
"""

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DuplicateAsset, MissingTx, OversizedChunk, ZeroDivisor, ZeroSize
from .ingest import ChunkSet, FileAsset

DEFAULT_BLOCK_INTERVAL_MS = 1000
DEFAULT_BLOCK_CAPACITY_BYTES = 2_000_000
DEFAULT_NODE_COUNT = 10


def capacity_from_gas(gas_limit: int, gas_per_byte: int) -> int:
    """Block byte capacity implied by a gas limit and a per-byte gas cost."""
    if gas_per_byte == 0:
        raise ZeroDivisor("gas_per_byte must be nonzero")
    return gas_limit // gas_per_byte


@dataclass
class ChainConfig:
    block_interval_ms: int = DEFAULT_BLOCK_INTERVAL_MS
    block_capacity_bytes: int = DEFAULT_BLOCK_CAPACITY_BYTES
    node_count: int = DEFAULT_NODE_COUNT
    chunk_size: int = 100_000
    gas_limit: int | None = None
    gas_per_byte: int | None = None

    def __post_init__(self):
        if self.gas_limit is not None and self.gas_per_byte is not None:
            self.block_capacity_bytes = capacity_from_gas(self.gas_limit, self.gas_per_byte)
        if self.block_interval_ms <= 0:
            raise ValueError("block_interval_ms must be positive")
        if self.block_capacity_bytes <= 0:
            raise ValueError("block_capacity_bytes must be positive")
        if self.node_count <= 0:
            raise ValueError("node_count must be positive")
        if self.chunk_size > self.block_capacity_bytes:
            raise ValueError("chunk_size exceeds block capacity; no chunk could ever be packed")

    @classmethod
    def from_dict(cls, d: dict) -> "ChainConfig":
        known = {k: d[k] for k in (
            "block_interval_ms", "block_capacity_bytes", "node_count",
            "chunk_size", "gas_limit", "gas_per_byte") if k in d}
        return cls(**known)


@dataclass
class ChainTx:
    asset_id: str
    chunk_index: int
    payload_bytes: int
    submit_time_ms: int
    seq: int  # global submission sequence, the FIFO tiebreaker


@dataclass
class Block:
    height: int
    timestamp_ms: int
    txs: list[ChainTx] = field(default_factory=list)

    @property
    def used_bytes(self) -> int:
        return sum(tx.payload_bytes for tx in self.txs)


@dataclass
class Submission:
    asset_id: str
    source_bytes: int
    chunk_bytes: list[int]
    submit_time_ms: int


@dataclass
class PersistenceReport:
    tpt_ms: int
    wt_ms: dict[str, int]
    mwt_ms: int
    Mwt_ms: int
    mwt_ratio: float
    fs_source_bytes: int
    fs_onchain_bytes: int
    storage_pressure_bytes: int
    block_count: int
    block_span: dict[str, tuple[int, int]]  # asset -> (first, last) block height

    def to_dict(self) -> dict:
        return {
            "tpt_ms": self.tpt_ms,
            "wt_ms": self.wt_ms,
            "mwt_ms": self.mwt_ms,
            "MWT_ms": self.Mwt_ms,
            "mwt_ratio": self.mwt_ratio,
            "fs_source_bytes": self.fs_source_bytes,
            "fs_onchain_bytes": self.fs_onchain_bytes,
            "storage_pressure_bytes": self.storage_pressure_bytes,
            "block_count": self.block_count,
            "block_span": {k: list(v) for k, v in self.block_span.items()},
        }


class ChainSimulator:
    """Single-threaded deterministic queue + block producer."""

    def __init__(self, config: ChainConfig, genesis_ms: int = 0):
        self.config = config
        self.genesis_ms = genesis_ms
        self.queue: list[ChainTx] = []
        self.submissions: dict[str, Submission] = {}
        self._seq = 0

    def submit(self, asset: FileAsset, chunks: ChunkSet, submit_time_ms: int = 0) -> list[ChainTx]:
        """Enqueue all chunks of an asset atomically, in chunk order."""
        if submit_time_ms < 0:
            raise ValueError("submit_time_ms must be >= 0")
        if asset.id in self.submissions:
            raise DuplicateAsset(f"asset {asset.id!r} already submitted")
        cap = self.config.block_capacity_bytes
        for i, chunk in enumerate(chunks.chunks):
            if len(chunk) > cap:
                raise OversizedChunk(
                    f"asset {asset.id!r} chunk {i} is {len(chunk)} bytes, capacity {cap}")
        txs = []
        for i, chunk in enumerate(chunks.chunks):
            txs.append(ChainTx(asset.id, i, len(chunk), submit_time_ms, self._seq))
            self._seq += 1
        self.queue.extend(txs)
        self.submissions[asset.id] = Submission(
            asset_id=asset.id,
            source_bytes=len(asset.data),
            chunk_bytes=[len(c) for c in chunks.chunks],
            submit_time_ms=submit_time_ms,
        )
        return txs

    def run(self) -> list[Block]:
        """Produce blocks until the queue drains; returns non-empty blocks only."""
        if not self.queue:
            raise MissingTx("nothing submitted")
        pending = sorted(self.queue, key=lambda t: (t.submit_time_ms, t.seq))
        blocks: list[Block] = []
        interval = self.config.block_interval_ms
        cap = self.config.block_capacity_bytes
        height = 0
        while pending:
            height += 1
            ts = self.genesis_ms + height * interval
            block = Block(height=height, timestamp_ms=ts)
            used = 0
            while pending:
                front = pending[0]
                if front.submit_time_ms >= ts:
                    break
                if used + front.payload_bytes > cap:
                    break
                block.txs.append(pending.pop(0))
                used += front.payload_bytes
            if block.txs:
                blocks.append(block)
        return blocks


def compute_report(blocks: list[Block], submissions: dict[str, Submission],
                   config: ChainConfig) -> PersistenceReport:
    """Derive the waiting-time and storage metrics from a finished block log."""
    landed: dict[str, set[int]] = {}
    last_block_ts: dict[str, int] = {}
    span: dict[str, list[int]] = {}
    for block in blocks:
        for tx in block.txs:
            landed.setdefault(tx.asset_id, set()).add(tx.chunk_index)
            last_block_ts[tx.asset_id] = block.timestamp_ms
            if tx.asset_id in span:
                span[tx.asset_id][1] = block.height
            else:
                span[tx.asset_id] = [block.height, block.height]
    for asset_id, sub in submissions.items():
        expected = set(range(len(sub.chunk_bytes)))
        if landed.get(asset_id, set()) != expected:
            raise MissingTx(f"asset {asset_id!r} has chunks missing from the block log")

    wt = {aid: last_block_ts[aid] - sub.submit_time_ms for aid, sub in submissions.items()}
    earliest_submit = min(s.submit_time_ms for s in submissions.values())
    tpt = max(b.timestamp_ms for b in blocks) - earliest_submit
    mwt = min(wt.values())
    Mwt = max(wt.values())
    fs_source = sum(s.source_bytes for s in submissions.values())
    fs_onchain = sum(sum(s.chunk_bytes) for s in submissions.values())
    return PersistenceReport(
        tpt_ms=tpt,
        wt_ms=wt,
        mwt_ms=mwt,
        Mwt_ms=Mwt,
        mwt_ratio=Mwt / mwt if mwt else float("inf"),
        fs_source_bytes=fs_source,
        fs_onchain_bytes=fs_onchain,
        storage_pressure_bytes=fs_onchain * config.node_count,
        block_count=len(blocks),
        block_span={k: (v[0], v[1]) for k, v in span.items()},
    )


def compression_ratio(fs_baseline_bytes: float, fs_ours_bytes: float) -> float:
    """How many times smaller our representation is than the baseline."""
    if fs_baseline_bytes <= 0 or fs_ours_bytes <= 0:
        raise ZeroSize("both sizes must be positive")
    return fs_baseline_bytes / fs_ours_bytes


def export_block_log(blocks: list[Block], path: str | Path) -> None:
    """JSON lines, one block per line."""
    with open(path, "w") as fh:
        for block in blocks:
            fh.write(json.dumps({
                "height": block.height,
                "timestamp_ms": block.timestamp_ms,
                "txs": [{"asset_id": t.asset_id, "chunk_index": t.chunk_index,
                         "bytes": t.payload_bytes} for t in block.txs],
            }, sort_keys=True) + "\n")


def export_report_json(report: PersistenceReport, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")


def report_csv_text(report: PersistenceReport) -> str:
    import io
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["TPT_ms", "mWT_ms", "MWT_ms", "MWT_over_mWT",
                     "FS_source_bytes", "FS_onchain_bytes",
                     "storage_pressure_bytes", "block_count"])
    writer.writerow([report.tpt_ms, report.mwt_ms, report.Mwt_ms,
                     f"{report.mwt_ratio:.6f}", report.fs_source_bytes,
                     report.fs_onchain_bytes, report.storage_pressure_bytes,
                     report.block_count])
    return buf.getvalue()


def export_report_csv(report: PersistenceReport, path: str | Path) -> None:
    Path(path).write_text(report_csv_text(report))
