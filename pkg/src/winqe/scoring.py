"""Scorer abstraction: built-in deterministic scorers and external sessions.

Built-in scorers are pure functions of (src_text, hyp_text, parameters) and
exist so the pipeline can be exercised and meta-evaluated without any model
inference. Real models live out of process behind the line-delimited JSON
wire protocol (see `winqe.external`).
"""
from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Mapping, Sequence


class ScorerError(RuntimeError):
    """Scoring failed; partial results must be discarded."""


@dataclass(frozen=True)
class ScoreRequest:
    request_id: int
    src_text: str
    hyp_text: str


@dataclass(frozen=True)
class ScoreResponse:
    request_id: int
    score: float


class ScorerKind(Enum):
    CONSTANT = "constant"
    LENGTH_RATIO = "length_ratio"
    LEXICAL_OVERLAP = "lexical_overlap"
    CONTEXT_AWARE_MOCK = "context_aware_mock"
    EXTERNAL = "external"


@dataclass(frozen=True)
class ScorerSpec:
    kind: ScorerKind
    parameters: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind is ScorerKind.CONSTANT and "value" not in self.parameters:
            raise ScorerError("CONSTANT scorer requires a 'value' parameter")
        if self.kind is ScorerKind.EXTERNAL and not (
            "command" in self.parameters or "endpoint" in self.parameters
        ):
            raise ScorerError("EXTERNAL scorer requires 'command' or 'endpoint'")


def length_ratio_score(src_text: str, hyp_text: str) -> float:
    """min/max ratio of whitespace token counts; 1.0 when both sides are empty."""
    a = len(src_text.split())
    b = len(hyp_text.split())
    if a == 0 and b == 0:
        return 1.0
    if a == 0 or b == 0:
        return 0.0
    return min(a, b) / max(a, b)


def lexical_overlap_score(src_text: str, hyp_text: str) -> float:
    """Multiset Dice overlap of whitespace tokens; 1.0 when both sides are empty."""
    a = Counter(src_text.split())
    b = Counter(hyp_text.split())
    total = sum(a.values()) + sum(b.values())
    if total == 0:
        return 1.0
    common = sum((a & b).values())
    return 2.0 * common / total


# Synthetic-corpus token grammar: an antecedent token "ANT<id>=<class>"
# appears in some source sentence; the hypothesis marks its resolution as
# "PRON<id>=<class>". Whether the antecedent is visible depends on how much
# of the document the chunk covers.
_DEFAULT_MARKER = "PRON"
_DEFAULT_ANTECEDENT = "ANT"


def context_aware_mock_score(
    src_text: str,
    hyp_text: str,
    ambiguity_marker: str = _DEFAULT_MARKER,
    antecedent_marker: str = _DEFAULT_ANTECEDENT,
    resolve: Callable[[str, str], bool] | None = None,
) -> float:
    """Fraction of marked hypothesis tokens resolved consistently with the
    antecedents visible in the chunk's source text.

    Marked tokens whose antecedent is not visible score 0.5 (unresolvable
    at this context width); a chunk with no marked tokens scores 1.0.
    """
    marker_re = re.compile(re.escape(ambiguity_marker) + r"(\d+)=(\w+)")
    ant_re = re.compile(re.escape(antecedent_marker) + r"(\d+)=(\w+)")
    antecedents = {m.group(1): m.group(2) for m in ant_re.finditer(src_text)}
    if resolve is None:
        resolve = lambda chosen, expected: chosen == expected
    total = 0.0
    n = 0
    for m in marker_re.finditer(hyp_text):
        marker_id, chosen = m.group(1), m.group(2)
        n += 1
        if marker_id not in antecedents:
            total += 0.5
        elif resolve(chosen, antecedents[marker_id]):
            total += 1.0
    if n == 0:
        return 1.0
    return total / n


def _builtin_fn(spec: ScorerSpec) -> Callable[[str, str], float]:
    params = spec.parameters
    if spec.kind is ScorerKind.CONSTANT:
        value = float(params["value"])  # type: ignore[arg-type]
        return lambda src, hyp: value
    if spec.kind is ScorerKind.LENGTH_RATIO:
        return length_ratio_score
    if spec.kind is ScorerKind.LEXICAL_OVERLAP:
        return lexical_overlap_score
    if spec.kind is ScorerKind.CONTEXT_AWARE_MOCK:
        marker = str(params.get("marker", _DEFAULT_MARKER))
        antecedent = str(params.get("antecedent", _DEFAULT_ANTECEDENT))
        return lambda src, hyp: context_aware_mock_score(src, hyp, marker, antecedent)
    raise ScorerError(f"no built-in scorer for kind {spec.kind}")


class ScorerSession:
    """One scoring session; built-in sessions are trivial, external ones own a process."""

    def score_chunk(self, req: ScoreRequest) -> ScoreResponse:
        return self.score_batch([req])[0]

    def score_batch(self, reqs: Sequence[ScoreRequest]) -> list[ScoreResponse]:
        raise NotImplementedError

    def close(self) -> None:
        pass

    def __enter__(self) -> "ScorerSession":
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()


def _check_ids(reqs: Sequence[ScoreRequest]) -> None:
    ids = [r.request_id for r in reqs]
    if len(set(ids)) != len(ids):
        raise ScorerError("duplicate request_id in batch")


class BuiltinSession(ScorerSession):
    def __init__(self, spec: ScorerSpec, workers: int = 1):
        self._fn = _builtin_fn(spec)
        self._workers = workers

    def score_batch(self, reqs: Sequence[ScoreRequest]) -> list[ScoreResponse]:
        _check_ids(reqs)
        fn = self._fn
        if self._workers > 1 and len(reqs) > 1:
            from concurrent.futures import ThreadPoolExecutor

            with ThreadPoolExecutor(max_workers=self._workers) as pool:
                scores = list(pool.map(lambda r: fn(r.src_text, r.hyp_text), reqs))
        else:
            scores = [fn(r.src_text, r.hyp_text) for r in reqs]
        out = []
        for req, score in zip(reqs, scores):
            if not math.isfinite(score):
                raise ScorerError(f"non-finite score for request {req.request_id}")
            out.append(ScoreResponse(req.request_id, score))
        return out


def open_session(
    spec: ScorerSpec,
    timeout: float = 60.0,
    window: int = 32,
    workers: int = 1,
) -> ScorerSession:
    """Open a scoring session for a spec; external sessions launch/connect now."""
    if spec.kind is ScorerKind.EXTERNAL:
        from .external import ExternalSession

        return ExternalSession(spec, timeout=timeout, window=window)
    return BuiltinSession(spec, workers=workers)


def score_chunk(spec: ScorerSpec, req: ScoreRequest) -> ScoreResponse:
    with open_session(spec) as session:
        return session.score_chunk(req)


def score_batch(spec: ScorerSpec, reqs: Sequence[ScoreRequest]) -> list[ScoreResponse]:
    with open_session(spec) as session:
        return session.score_batch(reqs)
