"""Meta-evaluation: pairwise system accuracy, grid sweeps, corpus statistics.

A metric is judged by the fraction of system pairs it orders the same way
as the human scores, computed within each language pair and pooled over
all pairs. Grid sweeps evaluate every (w, s) with 1 <= s <= w <= w_max,
caching chunk scores so overlapping cells never re-score identical chunks.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

from .aggregation import (
    ChunkScore,
    Weighting,
    aggregate,
    chunk_weight,
    config_label,
    extract_all_chunks,
)
from .corpus import HumanScores, SystemOutput, TestSet
from .scoring import ScoreRequest, ScorerSession, ScorerSpec, open_session
from .tokenizers import Tokenizer
from .windowing import (
    PartialPolicy,
    WindowConfig,
    count_tokens,
    full_window_count,
)
from .synth import generate_synthetic_corpus  # noqa: F401  (re-export)


class MetaEvalError(ValueError):
    pass


@dataclass(frozen=True)
class SystemPair:
    lang_pair: str
    sys_a: str
    sys_b: str
    human_delta: float
    metric_delta: float

    @property
    def correct(self) -> bool:
        # metric ties on a humanly decided pair count as incorrect
        if self.metric_delta == 0.0:
            return False
        return (self.metric_delta > 0) == (self.human_delta > 0)


@dataclass(frozen=True)
class PairCounts:
    n_pairs: int
    n_correct: int

    @property
    def accuracy(self) -> float:
        if self.n_pairs == 0:
            return 0.0
        return self.n_correct / self.n_pairs


@dataclass(frozen=True)
class AccuracyReport:
    per_lang_pair: Mapping[str, PairCounts]
    config_label: str = ""

    @property
    def pooled(self) -> PairCounts:
        """Microaverage: pairs pooled across language pairs."""
        return PairCounts(
            n_pairs=sum(c.n_pairs for c in self.per_lang_pair.values()),
            n_correct=sum(c.n_correct for c in self.per_lang_pair.values()),
        )

    @property
    def macro_accuracy(self) -> float:
        """Mean of per-language-pair accuracies (alternative pooling reading)."""
        counts = [c for c in self.per_lang_pair.values() if c.n_pairs > 0]
        if not counts:
            return 0.0
        return sum(c.accuracy for c in counts) / len(counts)


def enumerate_pairs(
    metric_scores: Mapping[tuple[str, str], float], human: Sequence[HumanScores]
) -> list[SystemPair]:
    """All unordered system pairs per language pair, human-tied pairs excluded."""
    pairs: list[SystemPair] = []
    for hs in human:
        systems = sorted(hs.scores)
        for sys_a, sys_b in itertools.combinations(systems, 2):
            for name in (sys_a, sys_b):
                if (hs.lang_pair, name) not in metric_scores:
                    raise MetaEvalError(
                        f"no metric score for ({hs.lang_pair}, {name})"
                    )
            human_delta = hs.scores[sys_a] - hs.scores[sys_b]
            if human_delta == 0.0:
                continue
            metric_delta = (
                metric_scores[(hs.lang_pair, sys_a)]
                - metric_scores[(hs.lang_pair, sys_b)]
            )
            pairs.append(
                SystemPair(hs.lang_pair, sys_a, sys_b, human_delta, metric_delta)
            )
    return pairs


def pairwise_accuracy(
    metric_scores: Mapping[tuple[str, str], float],
    human: Sequence[HumanScores],
    config_label: str = "",
) -> AccuracyReport:
    per_lp: dict[str, PairCounts] = {}
    pairs = enumerate_pairs(metric_scores, human)
    for hs in human:
        lp_pairs = [p for p in pairs if p.lang_pair == hs.lang_pair]
        per_lp[hs.lang_pair] = PairCounts(
            n_pairs=len(lp_pairs),
            n_correct=sum(p.correct for p in lp_pairs),
        )
    return AccuracyReport(per_lang_pair=per_lp, config_label=config_label)


@dataclass(frozen=True)
class GridResult:
    cells: Mapping[tuple[int, int], AccuracyReport]

    def best_cell(self) -> tuple[int, int]:
        return max(self.cells, key=lambda ws: (self.cells[ws].pooled.accuracy, -ws[0], -ws[1]))

    def worst_cell(self) -> tuple[int, int]:
        return min(self.cells, key=lambda ws: (self.cells[ws].pooled.accuracy, ws[0], ws[1]))


class _ScoreCache:
    """Chunk-score cache keyed by (lang_pair, system, doc_id, start, n_sentences).

    Scorers are pure in the chunk text, and the key determines the text, so
    caching across grid cells changes cost only.
    """

    def __init__(self, session: ScorerSession):
        self._session = session
        self._cache: dict[tuple, float] = {}
        self._next_id = itertools.count()

    def scores_for(self, lang_pair: str, system: str, chunks) -> list[float]:
        keys = [
            (lang_pair, system, c.doc_id, c.start, c.n_sentences) for c in chunks
        ]
        missing = [
            (key, chunk)
            for key, chunk in zip(keys, chunks)
            if key not in self._cache
        ]
        if missing:
            reqs = [
                ScoreRequest(next(self._next_id), chunk.src_text, chunk.hyp_text)
                for _, chunk in missing
            ]
            responses = self._session.score_batch(reqs)
            for (key, _), resp in zip(missing, responses):
                self._cache[key] = resp.score
        return [self._cache[key] for key in keys]


def run_grid(
    corpora: Mapping[str, TestSet],
    outputs: Mapping[str, Mapping[str, SystemOutput]],
    human: Sequence[HumanScores],
    scorer: ScorerSpec | ScorerSession,
    w_max: int,
    partial_policy: PartialPolicy = PartialPolicy.DROP,
    weighting: Weighting = Weighting.UNIFORM,
) -> GridResult:
    """Evaluate every (w, s) cell with 1 <= s <= w <= w_max.

    Cell (1, 1) is the sentence-level baseline. Any failing cell fails the
    sweep; the heatmap never has silent holes.
    """
    if w_max < 1:
        raise MetaEvalError(f"w_max must be >= 1, got {w_max}")
    for hs in human:
        if hs.lang_pair not in corpora:
            raise MetaEvalError(f"no corpus for language pair {hs.lang_pair!r}")
        for system in hs.scores:
            if system not in outputs.get(hs.lang_pair, {}):
                raise MetaEvalError(
                    f"no system output for ({hs.lang_pair}, {system})"
                )

    owns_session = not isinstance(scorer, ScorerSession)
    session = open_session(scorer) if owns_session else scorer
    cells: dict[tuple[int, int], AccuracyReport] = {}
    try:
        cache = _ScoreCache(session)
        for w in range(1, w_max + 1):
            for s in range(1, w + 1):
                cfg = WindowConfig(w=w, s=s, partial_policy=partial_policy)
                metric_scores: dict[tuple[str, str], float] = {}
                for hs in human:
                    testset = corpora[hs.lang_pair]
                    for system in sorted(hs.scores):
                        sysout = outputs[hs.lang_pair][system]
                        chunks = extract_all_chunks(testset, sysout, cfg)
                        if not chunks:
                            raise MetaEvalError(
                                f"cell (w={w}, s={s}) yields no chunks for "
                                f"({hs.lang_pair}, {system})"
                            )
                        scores = cache.scores_for(hs.lang_pair, system, chunks)
                        chunk_scores = [
                            ChunkScore(c, sc, chunk_weight(c, weighting))
                            for c, sc in zip(chunks, scores)
                        ]
                        metric_scores[(hs.lang_pair, system)] = aggregate(
                            chunk_scores, weighting
                        )
                cells[(w, s)] = pairwise_accuracy(
                    metric_scores, human, config_label(cfg, weighting)
                )
    finally:
        if owns_session:
            session.close()
    return GridResult(cells=cells)


# -- corpus statistics -----------------------------------------------------


@dataclass(frozen=True)
class CorpusStats:
    lang_pair: str
    dropped_fraction: Mapping[tuple[int, int], float]
    overlength_fraction: Mapping[int, float]
    tokenizer_id: str
    limit: int


def dropped_sentence_fraction(testset: TestSet, w: int, s: int) -> float:
    """Fraction of sentences in no full window under DROP."""
    dropped = 0
    total = 0
    for doc in testset.documents:
        d = doc.length
        total += d
        k = full_window_count(d, w, s)
        covered = s * (k - 1) + w if k > 0 else 0
        dropped += d - covered
    return dropped / total


def corpus_stats(
    testset: TestSet,
    w_max: int,
    tokenizer: Tokenizer,
    limit: int,
    tokenizer_id: str = "",
    outputs: Sequence[SystemOutput] = (),
) -> CorpusStats:
    """Dropped-sentence fractions for every (w, s) and overlength-chunk
    fractions per w at s = w.

    Overlength counting uses the given system outputs' hypotheses; with no
    outputs, only source text is counted.
    """
    if w_max < 1:
        raise MetaEvalError(f"w_max must be >= 1, got {w_max}")
    dropped = {
        (w, s): dropped_sentence_fraction(testset, w, s)
        for w in range(1, w_max + 1)
        for s in range(1, w + 1)
    }
    empty = SystemOutput(
        system_name="<none>",
        lang_pair=testset.lang_pair,
        hyp=tuple("" for _ in range(testset.total_sentences)),
    )
    pool = list(outputs) if outputs else [empty]
    overlength: dict[int, float] = {}
    for w in range(1, w_max + 1):
        cfg = WindowConfig(w=w, s=w, partial_policy=PartialPolicy.DROP)
        n_chunks = 0
        n_over = 0
        for sysout in pool:
            for chunk in extract_all_chunks(testset, sysout, cfg):
                n_chunks += 1
                if count_tokens(chunk, tokenizer) > limit:
                    n_over += 1
        overlength[w] = n_over / n_chunks if n_chunks else 0.0
    return CorpusStats(
        lang_pair=testset.lang_pair,
        dropped_fraction=dropped,
        overlength_fraction=overlength,
        tokenizer_id=tokenizer_id or tokenizer.name,
        limit=limit,
    )
