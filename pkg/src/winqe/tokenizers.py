"""Token counting for chunk-length statistics and token-budget windowing.

Built-in counters are deliberately simple (whitespace tokens, characters).
Exact subword counts from an external tokenizer can be supplied through a
sidecar TSV mapping (doc_id, sentence_index) to per-sentence counts.
"""
from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .windowing import Chunk


class TokenizerError(ValueError):
    """Unknown tokenizer id or unusable sidecar data."""


class Tokenizer:
    """Counts tokens for sentence pairs and for whole chunks."""

    name = "abstract"

    def count_text(self, text: str) -> int:
        raise NotImplementedError

    def pair_tokens(self, doc_id: str, index: int, src: str, hyp: str) -> int:
        return self.count_text(src) + self.count_text(hyp)

    def chunk_tokens(self, chunk: "Chunk") -> int:
        return self.count_text(chunk.src_text) + self.count_text(chunk.hyp_text)


class WhitespaceTokenizer(Tokenizer):
    name = "whitespace"

    def count_text(self, text: str) -> int:
        return len(text.split())


class CharTokenizer(Tokenizer):
    name = "chars"

    def count_text(self, text: str) -> int:
        return len(text)


class SidecarTokenizer(Tokenizer):
    """Per-sentence token counts supplied externally.

    `counts` maps (doc_id, sentence_index) to (src_tokens, hyp_tokens).
    Chunk counts are the sum over the chunk's sentence span, so they
    reflect the external tokenizer exactly even though the chunk text is
    space-joined.
    """

    name = "sidecar"

    def __init__(self, counts: dict[tuple[str, int], tuple[int, int]]):
        self.counts = dict(counts)

    def _lookup(self, doc_id: str, index: int) -> tuple[int, int]:
        try:
            return self.counts[(doc_id, index)]
        except KeyError:
            raise TokenizerError(f"no sidecar count for ({doc_id!r}, {index})")

    def count_text(self, text: str) -> int:
        raise TokenizerError("sidecar tokenizer has no text-level counts")

    def pair_tokens(self, doc_id: str, index: int, src: str, hyp: str) -> int:
        src_n, hyp_n = self._lookup(doc_id, index)
        return src_n + hyp_n

    def chunk_tokens(self, chunk: "Chunk") -> int:
        total = 0
        for i in range(chunk.start, chunk.start + chunk.n_sentences):
            src_n, hyp_n = self._lookup(chunk.doc_id, i)
            total += src_n + hyp_n
        return total


_BUILTIN = {
    "whitespace": WhitespaceTokenizer,
    "chars": CharTokenizer,
}


def get_tokenizer(tokenizer_id: str) -> Tokenizer:
    """Resolve a tokenizer id: a built-in name or `sidecar:<path>`."""
    if tokenizer_id in _BUILTIN:
        return _BUILTIN[tokenizer_id]()
    if tokenizer_id.startswith("sidecar:"):
        return load_sidecar(tokenizer_id.split(":", 1)[1])
    raise TokenizerError(f"unknown tokenizer {tokenizer_id!r}")


def load_sidecar(path: Path | str) -> SidecarTokenizer:
    """Load a sidecar TSV: doc_id, sentence_index, src_tokens, hyp_tokens."""
    counts: dict[tuple[str, int], tuple[int, int]] = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line or line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 4:
            raise TokenizerError(f"{path}:{lineno}: expected 4 columns")
        try:
            key = (cols[0], int(cols[1]))
            value = (int(cols[2]), int(cols[3]))
        except ValueError as exc:
            raise TokenizerError(f"{path}:{lineno}: {exc}")
        if key in counts:
            raise TokenizerError(f"{path}:{lineno}: duplicate entry for {key}")
        counts[key] = value
    return SidecarTokenizer(counts)
