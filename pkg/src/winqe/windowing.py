"""Sliding-window chunk extraction, bounded by document boundaries.

A window of w sentences starts at the top of each document and advances by
a stride of s sentences; each placement yields a chunk whose source and
hypothesis sentences are joined with single spaces. Partial material (short
documents and uncovered tails) is either dropped or emitted as one partial
chunk per document. A token-budget variant grows each chunk greedily up to
a maximum token count instead of a fixed sentence count.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .corpus import Document
from .tokenizers import Tokenizer


class WindowingError(ValueError):
    """Invalid window configuration or misaligned inputs."""


class PartialPolicy(Enum):
    DROP = "drop"
    INCLUDE = "include"


@dataclass(frozen=True)
class WindowConfig:
    w: int
    s: int
    partial_policy: PartialPolicy = PartialPolicy.DROP

    def __post_init__(self) -> None:
        if not 1 <= self.s <= self.w:
            raise WindowingError(
                f"stride must satisfy 1 <= s <= w, got w={self.w} s={self.s}"
            )


@dataclass(frozen=True)
class TokenWindowConfig:
    """Token-budget windowing: chunks grow up to w_t tokens, stride stays in sentences."""

    w_t: int
    s: int
    tokenizer_id: str = "whitespace"

    def __post_init__(self) -> None:
        if self.w_t < 1:
            raise WindowingError(f"token budget must be >= 1, got {self.w_t}")
        if self.s < 1:
            raise WindowingError(f"stride must be >= 1, got {self.s}")


@dataclass(frozen=True)
class Chunk:
    """A contiguous sentence span of one document, ready for scoring."""

    doc_id: str
    start: int
    n_sentences: int
    src_text: str
    hyp_text: str
    is_partial: bool = False


def full_window_count(d: int, w: int, s: int) -> int:
    """Number of full w-sentence windows in a d-sentence document at stride s."""
    return max(0, (d - w) // s + 1)


def _make_chunk(
    doc: Document,
    hyp_slice: Sequence[str],
    start: int,
    n: int,
    is_partial: bool,
) -> Chunk:
    return Chunk(
        doc_id=doc.doc_id,
        start=start,
        n_sentences=n,
        src_text=" ".join(doc.src[start : start + n]),
        hyp_text=" ".join(hyp_slice[start : start + n]),
        is_partial=is_partial,
    )


def _check_alignment(doc: Document, hyp_slice: Sequence[str]) -> None:
    if len(hyp_slice) != doc.length:
        raise WindowingError(
            f"document {doc.doc_id!r} has {doc.length} sentences but "
            f"hypothesis slice has {len(hyp_slice)}"
        )


def extract_chunks(
    doc: Document, hyp_slice: Sequence[str], cfg: WindowConfig
) -> list[Chunk]:
    """Extract chunks for one document under a fixed (w, s) configuration.

    Full windows start at 0, s, 2s, ... while start + w <= d. Under DROP
    only full windows are returned. Under INCLUDE, a document shorter than
    w becomes a single partial chunk, and the uncovered tail after the last
    full window becomes one partial chunk.
    """
    _check_alignment(doc, hyp_slice)
    d = doc.length
    chunks = [
        _make_chunk(doc, hyp_slice, k * cfg.s, cfg.w, False)
        for k in range(full_window_count(d, cfg.w, cfg.s))
    ]
    if cfg.partial_policy is PartialPolicy.INCLUDE:
        if not chunks:
            chunks.append(_make_chunk(doc, hyp_slice, 0, d, True))
        else:
            tail_start = chunks[-1].start + cfg.w
            if tail_start < d:
                chunks.append(
                    _make_chunk(doc, hyp_slice, tail_start, d - tail_start, True)
                )
    return chunks


def extract_chunks_token_budget(
    doc: Document,
    hyp_slice: Sequence[str],
    cfg: TokenWindowConfig,
    tok: Tokenizer,
) -> list[Chunk]:
    """Greedy token-budget chunking.

    From each start index, sentence pairs are added while their cumulative
    token count stays within the budget; the start then advances by s
    sentences. A single pair that alone exceeds the budget is emitted as a
    1-sentence chunk flagged partial rather than dropped.
    """
    _check_alignment(doc, hyp_slice)
    d = doc.length
    chunks: list[Chunk] = []
    i = 0
    while i < d:
        total = 0
        j = i
        while j < d:
            pair = tok.pair_tokens(doc.doc_id, j, doc.src[j], hyp_slice[j])
            if total + pair > cfg.w_t:
                break
            total += pair
            j += 1
        if j == i:
            # overlength single pair: emit rather than silently drop
            chunks.append(_make_chunk(doc, hyp_slice, i, 1, True))
        else:
            chunks.append(_make_chunk(doc, hyp_slice, i, j - i, False))
        i += cfg.s
    return chunks


def count_tokens(chunk: Chunk, tok: Tokenizer) -> int:
    """Combined token count of a chunk's source and hypothesis text."""
    return tok.chunk_tokens(chunk)
