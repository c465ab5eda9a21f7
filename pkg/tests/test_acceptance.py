"""Acceptance gate: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion lines.
"""

import json
import random
import time
from pathlib import Path

import numpy as np
import pytest

from semchain import backends, chainsim, ingest, semantics
from semchain.chainsim import ChainConfig, ChainSimulator
from semchain.cli import improvement_pct, main
from semchain.semantics import Embedding, Prompt, cosine_distance, rosis_select
from oracle import enumerate_schedule

WORDS = ["red", "fox", "tiger", "grass", "river", "stone", "cloud", "moon",
         "yellow", "green", "field", "mountain", "bird", "tree", "lake", "snow",
         "wolf", "desert", "glass", "tower", "bridge", "storm", "flower", "sand",
         "valley", "ocean", "leaf", "iron", "amber", "silver", "dawn", "mist"]


def _random_corpus(rng):
    jobs = []
    for i in range(rng.randint(1, 10)):
        n_chunks = rng.randint(1, 8)
        chunk = rng.randint(1, 1000)
        sizes = [chunk] * (n_chunks - 1) + [rng.randint(1, chunk)]
        jobs.append((f"a{i}", sizes, rng.choice([0, 0, rng.randint(0, 5000)])))
    return jobs, rng.randint(1000, 5000), rng.choice([100, 250, 500, 1000])


def _run_sim(jobs, capacity, interval):
    cfg = ChainConfig(block_interval_ms=interval, block_capacity_bytes=capacity,
                      chunk_size=1)
    sim = ChainSimulator(cfg)
    for asset_id, sizes, submit in jobs:
        asset = ingest.FileAsset(asset_id, b"\x00" * sum(sizes))
        chunks = ingest.ChunkSet(asset_id=asset_id, chunks=["x" * s for s in sizes],
                                 encoded_len=sum(sizes))
        sim.submit(asset, chunks, submit)
    blocks = sim.run()
    return blocks, chainsim.compute_report(blocks, sim.submissions, cfg)


def test_scheduler_oracle_equivalence_200_corpora():
    start = time.monotonic()
    rng = random.Random(2024)
    for _ in range(200):
        jobs, capacity, interval = _random_corpus(rng)
        blocks, report = _run_sim(jobs, capacity, interval)
        o_blocks, o_wt, o_tpt = enumerate_schedule(jobs, capacity, interval)
        got = [(b.height, b.timestamp_ms,
                [(t.asset_id, t.chunk_index, t.payload_bytes) for t in b.txs])
               for b in blocks]
        assert got == o_blocks
        assert report.wt_ms == o_wt
        assert report.tpt_ms == o_tpt
    elapsed = time.monotonic() - start
    assert elapsed < 10.0
    print(f"\nPASS: scheduler oracle equivalence (200 corpora, {elapsed:.2f}s)")


def test_single_block_consistency():
    rng = random.Random(99)
    for _ in range(50):
        n = rng.randint(1, 10)
        sizes_per_asset = [[rng.randint(1, 100) for _ in range(rng.randint(1, 4))]
                           for _ in range(n)]
        total = sum(sum(s) for s in sizes_per_asset)
        jobs = [(f"a{i}", sizes, 0) for i, sizes in enumerate(sizes_per_asset)]
        _, report = _run_sim(jobs, capacity=max(total, 1), interval=1000)
        assert report.block_count == 1
        assert report.mwt_ms == report.Mwt_ms == report.tpt_ms
    print("\nPASS: single-block corpora give mWT = MWT = TPT exactly")


def test_table2_ordering_100_prompts():
    start = time.monotonic()
    rng = random.Random(31)
    mocks = backends.mock_backends()
    seeds = [1, 2, 3, 4]  # anchor seed 0 excluded
    means = {"best": [], "random": [], "worst": []}
    for i in range(100):
        prompt = Prompt(" ".join(rng.sample(WORDS, rng.randint(4, 8))))
        picks = {}
        for mode in ("best", "worst"):
            picks[mode] = rosis_select(prompt, seeds, mocks, mode=mode).chosen.distance
        picks["random"] = rosis_select(prompt, seeds, mocks, mode="random",
                                       rng_seed=rng.randrange(1 << 32)).chosen.distance
        assert picks["best"] <= picks["random"] <= picks["worst"]
        for mode, d in picks.items():
            means[mode].append(d)
    mean = {mode: sum(v) / len(v) for mode, v in means.items()}
    assert mean["best"] < mean["random"] < mean["worst"]
    elapsed = time.monotonic() - start
    assert elapsed < 5.0
    print(f"\nPASS: Dis_mean best {mean['best']:.3f} < random {mean['random']:.3f}"
          f" < worst {mean['worst']:.3f} ({elapsed:.2f}s)")


def test_improvement_arithmetic():
    assert improvement_pct(0.652, 0.376) == pytest.approx(73.4, abs=0.1)
    assert improvement_pct(0.498, 0.376) == pytest.approx(32.4, abs=0.1)
    print("\nPASS: improvement arithmetic reproduces 73.4% and 32.4%")


def test_compression_ratio_published_value():
    ratio = chainsim.compression_ratio(3800.515, 0.00879)
    assert 430_000 <= ratio <= 435_000
    print(f"\nPASS: compression ratio {ratio:.0f} in [430000, 435000]")


def test_distance_axioms_10000_pairs():
    rng = np.random.default_rng(12345)
    for _ in range(10_000):
        dim = 8
        a = Embedding.normalized(rng.normal(size=dim))
        b = Embedding.normalized(rng.normal(size=dim))
        d = cosine_distance(a, b)
        assert 0.0 <= d <= 2.0
        assert cosine_distance(a, a) <= 1e-9
        neg = Embedding.normalized(-a.values)
        assert abs(cosine_distance(a, neg) - 2.0) <= 1e-9
    print("\nPASS: distance axioms on 10000 random embedding pairs")


def test_round_trip_suite_1000_payloads():
    rng = random.Random(55)
    for i in range(1000):
        data = rng.randbytes(rng.randint(1, 4096))
        chunk_size = rng.randint(1, 2000)
        cs = ingest.partition(ingest.encode_base64(data), chunk_size, asset_id=str(i))
        assert ingest.reassemble(cs) == data
        prompt = " ".join(rng.choices(WORDS, k=rng.randint(1, 30)))
        assert ingest.decompress_prompt(ingest.compress_prompt(prompt)) == prompt
    print("\nPASS: 1000 base64/partition/gzip round trips bit-exact")


def test_anchor_smoke():
    rng = random.Random(77)
    mocks = backends.mock_backends()
    for _ in range(25):
        prompt = Prompt(" ".join(rng.sample(WORDS, 5)))
        result = rosis_select(prompt, [0, 1, 2, 3], mocks, mode="best")
        assert result.chosen.distance == 0.0
    print("\nPASS: best mode with seed 0 always reaches distance 0")


def test_end_to_end_determinism(tmp_path):
    rng = random.Random(8)
    entries = []
    for i in range(4):
        prompt = " ".join(rng.sample(WORDS, 5))
        path = tmp_path / f"img{i}.mock"
        path.write_bytes(backends.mock_generate(prompt, 0))
        entries.append({"id": f"img{i}", "path": path.name, "kind": "image"})
    manifest = tmp_path / "manifest.json"
    manifest.write_text(json.dumps(entries))

    def pipeline(root: Path):
        root.mkdir()
        assert main(["sample", "--manifest", str(manifest),
                     "--out", str(root / "sampled"), "--deterministic-timing"]) == 0
        assert main(["upchain", "--prompts", str(root / "sampled" / "prompts.json"),
                     "--payload", "prompt_gz", "--out", str(root / "chain")]) == 0
        assert main(["reconstruct", "--prompts", str(root / "sampled" / "prompts.json"),
                     "--mode", "best", "--seeds", "0", "1", "2", "3",
                     "--out", str(root / "rec"), "--deterministic-timing"]) == 0
        assert main(["evaluate", "--prompts", str(root / "sampled" / "prompts.json"),
                     "--selections", str(root / "rec"), "--out", str(root / "eval")]) == 0
        names = ["sampled/prompts.json", "chain/report.json", "chain/report.csv",
                 "chain/blocks.jsonl", "rec/selections.json", "eval/evaluate.json"]
        return {n: (root / n).read_bytes() for n in names}

    assert pipeline(tmp_path / "run1") == pipeline(tmp_path / "run2")
    print("\nPASS: two identical end-to-end runs produce byte-identical reports")
