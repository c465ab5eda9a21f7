"""Command-line pipeline: sample -> upchain -> reconstruct -> evaluate -> report.

Exit codes: 0 success, 1 partial per-asset failures, 2 invalid configuration.
All report files are written atomically (temp file + rename) and contain no
wall-clock data when --deterministic-timing is set, so repeated runs are
byte-identical under mock backends.
"""

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import backends as backends_mod
from . import chainsim, ingest, semantics
from .backends import BackendSet, fnv1a64
from .errors import MissingPair, SchemaMismatch, SemchainError

DEFAULT_SEEDS = [0, 1, 2, 3]


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _json_dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


@dataclass
class TimingTally:
    """Accumulates backend-reported model time; zeroed in deterministic mode."""
    total_ms: float = 0.0
    deterministic: bool = False

    def add(self, elapsed_ms: float) -> None:
        if not self.deterministic:
            self.total_ms += elapsed_ms

    def take(self) -> float:
        value = self.total_ms
        self.total_ms = 0.0
        return value


def _tallied_backends(inner: BackendSet, tally: TimingTally) -> BackendSet:
    def wrap(fn):
        def wrapper(*args):
            result, elapsed = fn(*args)
            tally.add(elapsed)
            return result, elapsed
        return wrapper
    return BackendSet(caption=wrap(inner.caption), generate=wrap(inner.generate),
                      embed=wrap(inner.embed))


def _select_backends(args) -> BackendSet:
    url = getattr(args, "backend_url", None) or os.environ.get("SEMCHAIN_BACKEND_URL")
    if url:
        return backends_mod.remote_backends(url)
    return backends_mod.mock_backends()


def _load_chain_config(args) -> chainsim.ChainConfig:
    if getattr(args, "config", None):
        data = json.loads(Path(args.config).read_text())
        chain = data.get("chain", data)
        return chainsim.ChainConfig.from_dict(chain)
    return chainsim.ChainConfig()


def cmd_sample(args) -> int:
    backends = _select_backends(args)
    tally = TimingTally(deterministic=args.deterministic_timing)
    backends = _tallied_backends(backends, tally)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    records, failures = [], []
    try:
        entries = ingest.iter_manifest(args.manifest)
    except (OSError, ValueError, KeyError, SemchainError) as exc:
        print(f"error: cannot read manifest: {exc}", file=sys.stderr)
        return 2
    for asset_id, file_path, kind in entries:
        try:
            asset = ingest.FileAsset(id=asset_id, data=file_path.read_bytes(),
                                     kind=kind, source_path=str(file_path))
            caption, _ = backends.caption(asset.data)
            tss_ms = tally.take()
            gz = ingest.compress_prompt(caption)
            txt_path = out_dir / f"{asset.id}.prompt.txt"
            gz_path = out_dir / f"{asset.id}.prompt.gz"
            txt_path.write_text(caption)
            gz_path.write_bytes(gz)
            records.append({
                "id": asset.id,
                "prompt": caption,
                "tss_ms": tss_ms,
                "txt_path": txt_path.name,
                "gz_path": gz_path.name,
                "txt_bytes": len(caption.encode("utf-8")),
                "gz_bytes": len(gz),
            })
        except Exception as exc:
            failures.append({"id": asset_id, "error": str(exc)})
    _atomic_write(out_dir / "prompts.json",
                  _json_dump({"prompts": records, "failures": failures}))
    if failures and not records:
        return 1
    return 1 if failures else 0


def _payload_assets(args) -> list[ingest.FileAsset]:
    """The representation to persist: original files or sampled prompts."""
    if args.payload == "original":
        return ingest.load_manifest(args.manifest)
    prompts_path = Path(args.prompts)
    data = json.loads(prompts_path.read_text())
    assets = []
    for rec in data["prompts"]:
        if args.payload == "prompt_gz":
            raw = (prompts_path.parent / rec["gz_path"]).read_bytes()
            kind = ingest.AssetKind.PROMPT_GZ
        else:
            raw = rec["prompt"].encode("utf-8")
            kind = ingest.AssetKind.PROMPT_TEXT
        assets.append(ingest.FileAsset(id=rec["id"], data=raw, kind=kind))
    return assets


def cmd_upchain(args) -> int:
    config = _load_chain_config(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        assets = _payload_assets(args)
    except (OSError, ValueError, KeyError, SemchainError) as exc:
        print(f"error: cannot load payloads: {exc}", file=sys.stderr)
        return 2
    sim = chainsim.ChainSimulator(config)
    try:
        for asset in assets:
            sim.submit(asset, ingest.make_chunk_set(asset, config.chunk_size),
                       submit_time_ms=0)
        blocks = sim.run()
        report = chainsim.compute_report(blocks, sim.submissions, config)
    except SemchainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    chainsim.export_block_log(blocks, out_dir / "blocks.jsonl")
    _atomic_write(out_dir / "report.json", _json_dump(report.to_dict()))
    _atomic_write(out_dir / "report.csv", chainsim.report_csv_text(report))
    return 0


def cmd_reconstruct(args) -> int:
    backends = _select_backends(args)
    tally = TimingTally(deterministic=args.deterministic_timing)
    backends = _tallied_backends(backends, tally)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        data = json.loads(Path(args.prompts).read_text())
        seeds = args.seeds
        if len(set(seeds)) != len(seeds):
            raise ValueError("seeds must be distinct")
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: invalid inputs: {exc}", file=sys.stderr)
        return 2

    index, failures = [], []
    for rec in data["prompts"]:
        prompt = semantics.Prompt(rec["prompt"])
        per_asset_rng = None
        if args.mode == "random":
            base = args.rng_seed if args.rng_seed is not None else 0
            per_asset_rng = fnv1a64(f"{base}:{rec['id']}".encode("utf-8"))
        try:
            result = semantics.rosis_select(prompt, seeds, backends, mode=args.mode,
                                            rng_seed=per_asset_rng)
            tsr_ms = tally.take()
            path = semantics.export_selection(result, prompt, out_dir, rec["id"])
            index.append({
                "id": rec["id"],
                "selection_path": path.name,
                "mode": args.mode,
                "chosen_distance": result.chosen.distance,
                "tsr_ms": tsr_ms,
            })
        except SemchainError as exc:
            tally.take()
            failures.append({"id": rec["id"], "error": str(exc)})
    _atomic_write(out_dir / "selections.json",
                  _json_dump({"mode": args.mode, "rng_seed": args.rng_seed,
                              "seeds": seeds, "selections": index,
                              "failures": failures}))
    if failures and not index:
        return 1
    return 1 if failures else 0


def cmd_evaluate(args) -> int:
    backends = _select_backends(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        prompts = {rec["id"]: rec["prompt"]
                   for rec in json.loads(Path(args.prompts).read_text())["prompts"]}
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: invalid prompts file: {exc}", file=sys.stderr)
        return 2

    rows = []
    try:
        for sel_dir in args.selections:
            sel_dir = Path(sel_dir)
            meta = json.loads((sel_dir / "selections.json").read_text())
            distances = []
            for entry in meta["selections"]:
                asset_id = entry["id"]
                if asset_id not in prompts:
                    raise MissingPair(f"no original prompt for asset {asset_id!r}")
                record = json.loads((sel_dir / entry["selection_path"]).read_text())
                image = (sel_dir / record["image_path"]).read_bytes()
                d = semantics.evaluate_pair(semantics.Prompt(prompts[asset_id]),
                                            image, backends)
                distances.append(d)
            stats = semantics.distance_stats(distances)
            rows.append({"mode": meta["mode"], **stats.to_dict()})
    except (OSError, ValueError, KeyError, SemchainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    best = next((r for r in rows if r["mode"] == "best"), None)
    if best:
        for row in rows:
            if row is best:
                row["improvement_pct"] = 0.0
            else:
                row["improvement_pct"] = improvement_pct(row["mean"], best["mean"])
    _atomic_write(out_dir / "evaluate.json", _json_dump({"rows": rows}))
    return 0


def improvement_pct(other_mean: float, best_mean: float) -> float:
    """Percentage improvement of the best selection over another mode."""
    return (other_mean - best_mean) / best_mean * 100.0


def _parse_labeled(pairs: list[str]) -> dict[str, Path]:
    out = {}
    for pair in pairs:
        label, _, path = pair.partition("=")
        if not path:
            raise SchemaMismatch(f"expected LABEL=PATH, got {pair!r}")
        out[label] = Path(path)
    return out


REPORT_COLUMNS = ["label", "TPT_s", "mWT_ms", "MWT_ms", "FS_source_MB", "FS_onchain_MB",
                  "Dis_mean", "Dis_min", "Dis_max", "TSS_mean_s", "TSR_mean_s",
                  "block_count", "storage_pressure_MB", "FS_ratio_vs_Ori", "TPT_ratio_vs_Ori"]


def cmd_report(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        if not args.row:
            raise SchemaMismatch("at least one --row LABEL=REPORT_JSON is required")
        row_paths = _parse_labeled(args.row)
        dis_paths = _parse_labeled(args.dis or [])
        timing_paths = _parse_labeled(args.timing or [])

        rows = []
        for label, path in row_paths.items():
            rep = json.loads(path.read_text())
            for key in ("tpt_ms", "mwt_ms", "MWT_ms", "fs_source_bytes"):
                if key not in rep:
                    raise SchemaMismatch(f"report for {label!r} missing field {key!r}")
            row = {
                "label": label,
                "TPT_s": rep["tpt_ms"] / 1000.0,
                "mWT_ms": rep["mwt_ms"],
                "MWT_ms": rep["MWT_ms"],
                "FS_source_MB": rep["fs_source_bytes"] / 1e6,
                "FS_onchain_MB": rep["fs_onchain_bytes"] / 1e6,
                "block_count": rep["block_count"],
                "storage_pressure_MB": rep["storage_pressure_bytes"] / 1e6,
                "Dis_mean": None, "Dis_min": None, "Dis_max": None,
                "TSS_mean_s": None, "TSR_mean_s": None,
                "FS_ratio_vs_Ori": None, "TPT_ratio_vs_Ori": None,
            }
            if label in dis_paths:
                dis = json.loads(dis_paths[label].read_text())
                row["Dis_mean"], row["Dis_min"], row["Dis_max"] = dis["mean"], dis["min"], dis["max"]
            if label in timing_paths:
                timing = json.loads(timing_paths[label].read_text())
                if "tss_mean_ms" in timing:
                    row["TSS_mean_s"] = timing["tss_mean_ms"] / 1000.0
                if "tsr_mean_ms" in timing:
                    row["TSR_mean_s"] = timing["tsr_mean_ms"] / 1000.0
            rows.append(row)

        ori = next((r for r in rows if r["label"] == "Ori."), None)
        if ori:
            for row in rows:
                if row["FS_source_MB"] > 0:
                    row["FS_ratio_vs_Ori"] = chainsim.compression_ratio(
                        ori["FS_source_MB"], row["FS_source_MB"])
                if row["TPT_s"] > 0:
                    row["TPT_ratio_vs_Ori"] = ori["TPT_s"] / row["TPT_s"]
    except (OSError, ValueError, KeyError, SemchainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    _atomic_write(out_dir / "summary.json", _json_dump({"rows": rows}))
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=REPORT_COLUMNS)
    writer.writeheader()
    for row in rows:
        writer.writerow({k: ("" if row.get(k) is None else row[k]) for k in REPORT_COLUMNS})
    _atomic_write(out_dir / "summary.csv", buf.getvalue())
    return 0


def _add_common(parser):
    parser.add_argument("--backend-url", default=None,
                        help="model server URL; default is SEMCHAIN_BACKEND_URL or in-process mocks")
    parser.add_argument("--deterministic-timing", action="store_true",
                        help="report elapsed_ms as 0 everywhere")
    parser.add_argument("--out", required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semchain",
                                     description="Chunked on-chain persistence simulator "
                                                 "with best-of-n semantic reconstruction.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="caption source images into on-chain prompts")
    p.add_argument("--manifest", required=True)
    _add_common(p)
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("upchain", help="simulate persistence and emit the metric report")
    p.add_argument("--manifest", help="corpus manifest (payload original)")
    p.add_argument("--prompts", help="prompts.json from the sample step")
    p.add_argument("--payload", choices=["original", "prompt_txt", "prompt_gz"],
                   default="original")
    p.add_argument("--config", help="JSON config file with chain settings")
    _add_common(p)
    p.set_defaults(fn=cmd_upchain)

    p = sub.add_parser("reconstruct", help="best-of-n reconstruction from stored prompts")
    p.add_argument("--prompts", required=True)
    p.add_argument("--seeds", type=int, nargs="+", default=DEFAULT_SEEDS)
    p.add_argument("--mode", choices=list(semantics.MODES), default="best")
    p.add_argument("--rng-seed", type=int, default=None)
    _add_common(p)
    p.set_defaults(fn=cmd_reconstruct)

    p = sub.add_parser("evaluate", help="distance statistics per selection run")
    p.add_argument("--prompts", required=True)
    p.add_argument("--selections", nargs="+", required=True,
                   help="one or more reconstruction output directories")
    _add_common(p)
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("report", help="merge persistence and distance rows into one table")
    p.add_argument("--row", action="append", help="LABEL=report.json (repeatable)")
    p.add_argument("--dis", action="append", help="LABEL=stats.json with mean/min/max")
    p.add_argument("--timing", action="append", help="LABEL=timing.json")
    _add_common(p)
    p.set_defaults(fn=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except SchemaMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
