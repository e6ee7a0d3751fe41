"""Deterministic synthetic corpora with context-sensitive translation errors.

Each document is a run of filler sentences. With some probability a
sentence introduces an antecedent token ("ANT<id>=<class>") and the next
sentence references it with an ambiguous token ("REF<id>"). Synthetic
systems must commit to a class when translating the reference
("PRON<id>=<class>"); they pick the wrong class at their configured error
rate. The mistake is only detectable by a scorer whose context window
covers the antecedent sentence, which is exactly what the context-aware
mock scorer checks. Human scores are set to each system's true quality
(1 - error_rate), so the human ranking is the ground-truth ranking.
"""
from __future__ import annotations

import random
from typing import Mapping

from .corpus import Document, HumanScores, JudgmentStyle, SystemOutput, TestSet

CLASSES = ("a", "b", "c", "d")
SYNTH_LANG_PAIR = "syn-syn"


def generate_synthetic_corpus(
    n_docs: int,
    doc_len_range: tuple[int, int] = (2, 6),
    ambiguity_rate: float = 0.5,
    error_rates: Mapping[str, float] | None = None,
    seed: int = 0,
) -> tuple[TestSet, dict[str, SystemOutput], HumanScores]:
    if error_rates is None:
        error_rates = {"good": 0.05, "bad": 0.30}
    if n_docs < 1:
        raise ValueError(f"n_docs must be >= 1, got {n_docs}")
    if len(error_rates) < 2:
        raise ValueError("need at least 2 systems")
    if not 0.0 <= ambiguity_rate <= 1.0:
        raise ValueError(f"ambiguity_rate must be in [0, 1], got {ambiguity_rate}")
    for name, rate in error_rates.items():
        if not 0.0 <= rate <= 1.0:
            raise ValueError(f"error rate for {name!r} must be in [0, 1], got {rate}")
    lo, hi = doc_len_range
    if not 1 <= lo <= hi:
        raise ValueError(f"bad document length range {doc_len_range}")

    rng = random.Random(seed)
    systems = sorted(error_rates)
    documents: list[Document] = []
    hyps: dict[str, list[str]] = {name: [] for name in systems}
    marker_id = 0

    for doc_index in range(n_docs):
        length = rng.randint(lo, hi)
        tokens = [
            [f"t{rng.randrange(100)}" for _ in range(rng.randint(3, 6))]
            for _ in range(length)
        ]
        # (sentence index of the reference, marker id, correct class)
        markers: list[tuple[int, int, str]] = []
        for j in range(1, length):
            if rng.random() < ambiguity_rate:
                cls = rng.choice(CLASSES)
                tokens[j - 1].append(f"ANT{marker_id}={cls}")
                tokens[j].append(f"REF{marker_id}")
                markers.append((j, marker_id, cls))
                marker_id += 1
        src = tuple(" ".join(sent) for sent in tokens)
        documents.append(Document(f"doc{doc_index:06d}", src))

        for name in systems:
            rate = error_rates[name]
            hyp_tokens = [list(sent) for sent in tokens]
            for j, mid, cls in markers:
                if rng.random() < rate:
                    chosen = rng.choice([c for c in CLASSES if c != cls])
                else:
                    chosen = cls
                ref_token = f"REF{mid}"
                hyp_tokens[j] = [
                    f"PRON{mid}={chosen}" if tok == ref_token else tok
                    for tok in hyp_tokens[j]
                ]
            hyps[name].extend(" ".join(sent) for sent in hyp_tokens)

    testset = TestSet(lang_pair=SYNTH_LANG_PAIR, documents=tuple(documents))
    outputs = {
        name: SystemOutput(name, SYNTH_LANG_PAIR, tuple(hyps[name]))
        for name in systems
    }
    human = HumanScores(
        lang_pair=SYNTH_LANG_PAIR,
        scores={name: 1.0 - error_rates[name] for name in systems},
        judgment_style=JudgmentStyle.OTHER,
    )
    return testset, outputs, human
