"""Cosine distance, best-of-n semantic isotope selection, distance statistics.

The selection routine generates one candidate image per seed, captions and
embeds each one, and scores it by cosine distance to the stored prompt.
Best mode takes the argmin (ties go to the lowest index), worst the argmax,
random a replayable draw from an explicit rng seed.
"""

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import BackendError, DegenerateEmbedding, EmptyList, NoSeeds

DEGENERATE_DISTANCE = 2.0


@dataclass
class Prompt:
    text: str

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("prompt text is empty")


@dataclass
class Embedding:
    values: np.ndarray
    degenerate: bool = False

    @property
    def dim(self) -> int:
        return len(self.values)

    @classmethod
    def normalized(cls, values) -> "Embedding":
        """L2-normalize; an all-zero vector is kept as-is and flagged degenerate."""
        vec = np.asarray(values, dtype=float)
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            return cls(values=vec, degenerate=True)
        return cls(values=vec / norm)


def cosine_distance(a: Embedding, b: Embedding) -> float:
    """1 - cos(a, b), clamped to [0, 2] against rounding."""
    if a.degenerate or b.degenerate:
        raise DegenerateEmbedding("cannot compare a zero-norm embedding")
    na = float(np.linalg.norm(a.values))
    nb = float(np.linalg.norm(b.values))
    d = 1.0 - float(np.dot(a.values, b.values)) / (na * nb)
    return min(max(d, 0.0), 2.0)


@dataclass
class Candidate:
    seed: int
    image: bytes
    caption: str
    distance: float


@dataclass
class SelectionResult:
    chosen_index: int
    mode: str
    candidates: list[Candidate]
    rng_seed: int | None = None

    @property
    def chosen(self) -> Candidate:
        return self.candidates[self.chosen_index]

    def to_dict(self, prompt: str) -> dict:
        return {
            "prompt": prompt,
            "mode": self.mode,
            "rng_seed": self.rng_seed,
            "chosen_index": self.chosen_index,
            "candidates": [{"seed": c.seed, "distance": c.distance, "caption": c.caption}
                           for c in self.candidates],
        }


MODES = ("best", "worst", "random")


def rosis_select(prompt: Prompt, seeds: list[int], backends, mode: str = "best",
                 rng_seed: int | None = None) -> SelectionResult:
    """Generate one candidate per seed and pick per the requested mode.

    A candidate whose caption embeds to the zero vector scores the maximal
    distance 2 instead of aborting the whole selection.
    """
    if not seeds:
        raise NoSeeds("at least one seed is required")
    if len(set(seeds)) != len(seeds):
        raise NoSeeds("seeds must be distinct")
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")

    prompt_emb, _ = backends.embed(prompt.text)
    if prompt_emb.degenerate:
        raise DegenerateEmbedding(f"prompt {prompt.text!r} embeds to the zero vector")

    candidates = []
    for seed in seeds:
        try:
            image, _ = backends.generate(prompt.text, seed)
            caption, _ = backends.caption(image)
            cap_emb, _ = backends.embed(caption)
        except Exception as exc:
            raise BackendError(f"backend failure for seed {seed}: {exc}", seed=seed) from exc
        if cap_emb.degenerate:
            distance = DEGENERATE_DISTANCE
        else:
            distance = cosine_distance(cap_emb, prompt_emb)
        candidates.append(Candidate(seed=seed, image=image, caption=caption, distance=distance))

    distances = [c.distance for c in candidates]
    if mode == "best":
        chosen = distances.index(min(distances))
    elif mode == "worst":
        chosen = distances.index(max(distances))
    else:
        chosen = random.Random(rng_seed).randrange(len(candidates))
    return SelectionResult(chosen_index=chosen, mode=mode, candidates=candidates,
                           rng_seed=rng_seed)


def evaluate_pair(original_prompt: Prompt, reconstructed_image: bytes, backends) -> float:
    """Distance between the stored prompt and the caption of a reconstruction."""
    orig_emb, _ = backends.embed(original_prompt.text)
    caption, _ = backends.caption(reconstructed_image)
    cap_emb, _ = backends.embed(caption)
    if cap_emb.degenerate:
        return DEGENERATE_DISTANCE
    return cosine_distance(orig_emb, cap_emb)


@dataclass
class DistanceStats:
    mean: float
    min: float
    max: float
    count: int

    def to_dict(self) -> dict:
        return {"mean": self.mean, "min": self.min, "max": self.max, "count": self.count}


def distance_stats(values: list[float]) -> DistanceStats:
    if not values:
        raise EmptyList("no distances to aggregate")
    return DistanceStats(mean=sum(values) / len(values), min=min(values),
                         max=max(values), count=len(values))


def export_selection(result: SelectionResult, prompt: Prompt, out_dir: str | Path,
                     asset_id: str) -> Path:
    """Write the selection JSON plus the chosen image as a sibling file."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    image_path = out_dir / f"{asset_id}.img"
    image_path.write_bytes(result.chosen.image)
    record = result.to_dict(prompt.text)
    record["image_path"] = image_path.name
    json_path = out_dir / f"{asset_id}.selection.json"
    json_path.write_text(json.dumps(record, indent=2, sort_keys=True) + "\n")
    return json_path
