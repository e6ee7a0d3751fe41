"""System-level score aggregation from per-chunk scores.

The system-level score is the mean of chunk scores, either uniform or
weighted by each chunk's sentence count. Summation is compensated and runs
in canonical chunk order so results are bit-stable across runs.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .corpus import SystemOutput, TestSet
from .scoring import ScoreRequest, ScorerSession, ScorerSpec, open_session
from .tokenizers import Tokenizer, get_tokenizer
from .windowing import (
    Chunk,
    TokenWindowConfig,
    WindowConfig,
    extract_chunks,
    extract_chunks_token_budget,
)


class AggregationError(ValueError):
    """No chunks to aggregate: the configuration dropped the whole test set."""


class Weighting(Enum):
    UNIFORM = "uniform"
    SENTENCE_WEIGHTED = "sentence_weighted"


@dataclass(frozen=True)
class ChunkScore:
    chunk: Chunk
    score: float
    weight: float


@dataclass(frozen=True)
class SystemScore:
    system_name: str
    lang_pair: str
    config_label: str
    value: float
    n_chunks: int
    n_sentences_covered: int


def _compensated_sum(values: Iterable[float]) -> float:
    total = 0.0
    c = 0.0
    for v in values:
        y = v - c
        t = total + y
        c = (t - total) - y
        total = t
    return total


def chunk_weight(chunk: Chunk, mode: Weighting) -> float:
    if mode is Weighting.SENTENCE_WEIGHTED:
        return float(chunk.n_sentences)
    return 1.0


def aggregate(chunk_scores: Sequence[ChunkScore], mode: Weighting) -> float:
    """Weighted mean of chunk scores in input order.

    UNIFORM divides by the chunk count; SENTENCE_WEIGHTED divides by the
    total sentence weight, so the statistic stays a proper weighted mean.
    """
    if not chunk_scores:
        raise AggregationError("no chunks to aggregate")
    numerator = _compensated_sum(cs.score * cs.weight for cs in chunk_scores)
    denominator = _compensated_sum(cs.weight for cs in chunk_scores)
    return numerator / denominator


def extract_all_chunks(
    testset: TestSet,
    sysout: SystemOutput,
    cfg: WindowConfig | TokenWindowConfig,
    tokenizer: Tokenizer | None = None,
) -> list[Chunk]:
    """Chunks for every document of a test set, in document order."""
    chunks: list[Chunk] = []
    pos = 0
    for doc in testset.documents:
        hyp_slice = sysout.hyp[pos : pos + doc.length]
        pos += doc.length
        if isinstance(cfg, TokenWindowConfig):
            tok = tokenizer if tokenizer is not None else get_tokenizer(cfg.tokenizer_id)
            chunks.extend(extract_chunks_token_budget(doc, hyp_slice, cfg, tok))
        else:
            chunks.extend(extract_chunks(doc, hyp_slice, cfg))
    return chunks


def config_label(
    cfg: WindowConfig | TokenWindowConfig, mode: Weighting
) -> str:
    if isinstance(cfg, TokenWindowConfig):
        return f"wt{cfg.w_t}s{cfg.s}/{cfg.tokenizer_id}/{mode.value}"
    return f"w{cfg.w}s{cfg.s}/{cfg.partial_policy.value}/{mode.value}"


def covered_sentence_count(chunks: Sequence[Chunk]) -> int:
    covered: set[tuple[str, int]] = set()
    for chunk in chunks:
        for i in range(chunk.start, chunk.start + chunk.n_sentences):
            covered.add((chunk.doc_id, i))
    return len(covered)


def score_system(
    testset: TestSet,
    sysout: SystemOutput,
    cfg: WindowConfig | TokenWindowConfig,
    scorer: ScorerSpec | ScorerSession,
    mode: Weighting = Weighting.UNIFORM,
    tokenizer: Tokenizer | None = None,
) -> SystemScore:
    """End-to-end: extract chunks, score them, and aggregate one system score."""
    if len(sysout.hyp) != testset.total_sentences:
        raise AggregationError(
            f"system {sysout.system_name!r} has {len(sysout.hyp)} hypotheses "
            f"but test set has {testset.total_sentences} sentences"
        )
    chunks = extract_all_chunks(testset, sysout, cfg, tokenizer)
    if not chunks:
        raise AggregationError(
            f"configuration {config_label(cfg, mode)!r} yields no chunks for "
            f"{testset.lang_pair}"
        )
    reqs = [
        ScoreRequest(i, chunk.src_text, chunk.hyp_text)
        for i, chunk in enumerate(chunks)
    ]
    if isinstance(scorer, ScorerSession):
        responses = scorer.score_batch(reqs)
    else:
        with open_session(scorer) as session:
            responses = session.score_batch(reqs)
    chunk_scores = [
        ChunkScore(chunk, resp.score, chunk_weight(chunk, mode))
        for chunk, resp in zip(chunks, responses)
    ]
    return SystemScore(
        system_name=sysout.system_name,
        lang_pair=testset.lang_pair,
        config_label=config_label(cfg, mode),
        value=aggregate(chunk_scores, mode),
        n_chunks=len(chunks),
        n_sentences_covered=covered_sentence_count(chunks),
    )


def chunk_scores_to_tsv(chunk_scores: Sequence[ChunkScore]) -> str:
    """Audit dump: one row per scored chunk."""
    lines = ["doc_id\tstart\tn_sentences\tis_partial\tscore"]
    for cs in chunk_scores:
        c = cs.chunk
        lines.append(
            f"{c.doc_id}\t{c.start}\t{c.n_sentences}\t{int(c.is_partial)}\t{cs.score!r}"
        )
    return "\n".join(lines) + "\n"
