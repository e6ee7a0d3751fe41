"""Model backends for the bridge: a deterministic stub and real COMET checkpoints."""
from __future__ import annotations

import zlib
from typing import Protocol, Sequence


class ChunkModel(Protocol):
    name: str

    def score_batch(self, pairs: Sequence[tuple[str, str]]) -> list[float]:
        ...


class StubModel:
    """Deterministic stand-in used for protocol conformance testing.

    Scores are a pure hash of the input pair, stable across runs and
    platforms, in [0, 1].
    """

    name = "stub"

    def score_batch(self, pairs: Sequence[tuple[str, str]]) -> list[float]:
        return [
            zlib.crc32(f"{src}\x00{hyp}".encode("utf-8")) / 0xFFFFFFFF
            for src, hyp in pairs
        ]


class CometModel:
    """A COMET-family checkpoint scoring space-joined (src, hyp) chunks.

    The chunk text is passed through untouched: no tokenization,
    truncation, or re-segmentation happens here. Overlength inputs are
    cropped by the model's own pipeline, exactly as when it scores single
    sentences.
    """

    def __init__(self, model_id: str, device: str = "cpu", batch_size: int = 8):
        from comet import download_model, load_from_checkpoint

        checkpoint = download_model(model_id)
        self._model = load_from_checkpoint(checkpoint)
        self._model.eval()
        self._gpus = 0 if device == "cpu" else 1
        self._batch_size = batch_size
        self.name = model_id

    def score_batch(self, pairs: Sequence[tuple[str, str]]) -> list[float]:
        data = [{"src": src, "mt": hyp} for src, hyp in pairs]
        output = self._model.predict(
            data,
            batch_size=self._batch_size,
            gpus=self._gpus,
            progress_bar=False,
        )
        return [float(s) for s in output.scores]


def load_model(model_id: str, device: str = "cpu", batch_size: int = 8) -> ChunkModel:
    if model_id == "stub":
        return StubModel()
    return CometModel(model_id, device=device, batch_size=batch_size)
