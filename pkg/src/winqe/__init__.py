"""Windowed document-level quality-estimation evaluation toolkit."""

from .corpus import (
    CorpusError,
    Document,
    HumanScores,
    JudgmentStyle,
    SystemOutput,
    TestSet,
    load_human_scores,
    load_jsonl_corpus,
    load_system_output,
    load_testset,
)
from .windowing import (
    Chunk,
    PartialPolicy,
    TokenWindowConfig,
    WindowConfig,
    WindowingError,
    count_tokens,
    extract_chunks,
    extract_chunks_token_budget,
    full_window_count,
)
from .tokenizers import Tokenizer, TokenizerError, get_tokenizer, load_sidecar
from .scoring import (
    ScoreRequest,
    ScoreResponse,
    ScorerError,
    ScorerKind,
    ScorerSession,
    ScorerSpec,
    open_session,
    score_batch,
    score_chunk,
)
from .aggregation import (
    AggregationError,
    ChunkScore,
    SystemScore,
    Weighting,
    aggregate,
    score_system,
)
from .metaeval import (
    AccuracyReport,
    CorpusStats,
    GridResult,
    MetaEvalError,
    corpus_stats,
    pairwise_accuracy,
    run_grid,
)
from .synth import generate_synthetic_corpus

__version__ = "0.1.0"
