"""Optional real-model adapters (captioning, diffusion, sentence embedding).

Loaded only in --mode real. Model weights are looked up under MODEL_DIR; the
server fails at startup when they (or the model libraries) are absent.
"""

import os


def load_models(model_dir: str | None):
    from .app import Models  # local import to avoid a cycle at module load

    model_dir = model_dir or os.environ.get("MODEL_DIR")
    if not model_dir or not os.path.isdir(model_dir):
        raise RuntimeError("real mode requires MODEL_DIR pointing at local model weights")

    try:
        from sentence_transformers import SentenceTransformer
    except ImportError as exc:
        raise RuntimeError(f"real mode needs sentence-transformers installed: {exc}") from exc

    embedder = SentenceTransformer(os.path.join(model_dir, "embedder"))

    def embed(text: str) -> list[float]:
        return embedder.encode(text).tolist()

    def caption(image: bytes) -> str:
        raise RuntimeError("no captioning adapter configured under MODEL_DIR")

    def generate(prompt: str, seed: int) -> bytes:
        raise RuntimeError("no generation adapter configured under MODEL_DIR")

    return Models(caption=caption, generate=generate, embed=embed)
