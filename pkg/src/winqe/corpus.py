"""Loading, validation, and serialization of document-annotated parallel test sets.

The canonical on-disk format is WMT-style: one sentence per line in a source
file, with a parallel docid file assigning each line to a document. Documents
are maximal runs of consecutive identical docids. A JSON-lines format bundling
source and per-system hypotheses into one file is accepted as an alternative.

All corpus objects are immutable after construction and safe to share across
threads.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence


class CorpusError(ValueError):
    """Malformed, misaligned, or otherwise unusable corpus data."""


class JudgmentStyle(Enum):
    MQM = "MQM"
    DA_SQM = "DA_SQM"
    OTHER = "OTHER"


def _check_sentences(sentences: Iterable[str], origin: str) -> None:
    for i, text in enumerate(sentences):
        if "\n" in text or "\r" in text:
            raise CorpusError(f"{origin}: sentence {i} contains a line break")


@dataclass(frozen=True)
class Document:
    """A contiguous block of source sentences sharing one docid."""

    doc_id: str
    src: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.src) < 1:
            raise CorpusError(f"document {self.doc_id!r} has no sentences")
        _check_sentences(self.src, f"document {self.doc_id!r}")

    @property
    def length(self) -> int:
        return len(self.src)


@dataclass(frozen=True)
class TestSet:
    """An ordered collection of documents for one language pair."""

    lang_pair: str
    documents: tuple[Document, ...]

    def __post_init__(self) -> None:
        seen = set()
        for doc in self.documents:
            if doc.doc_id in seen:
                raise CorpusError(f"duplicate doc_id {doc.doc_id!r} in test set")
            seen.add(doc.doc_id)

    @property
    def total_sentences(self) -> int:
        return sum(doc.length for doc in self.documents)

    def doc_offsets(self) -> list[int]:
        """Offset of each document's first sentence in the flat sentence list."""
        offsets = []
        pos = 0
        for doc in self.documents:
            offsets.append(pos)
            pos += doc.length
        return offsets


@dataclass(frozen=True)
class SystemOutput:
    """One system's hypotheses, aligned 1:1 with the test set's source sentences."""

    system_name: str
    lang_pair: str
    hyp: tuple[str, ...]

    def __post_init__(self) -> None:
        _check_sentences(self.hyp, f"system {self.system_name!r}")


@dataclass(frozen=True)
class HumanScores:
    """Human system-level scores for one language pair; higher is better."""

    lang_pair: str
    scores: Mapping[str, float]
    judgment_style: JudgmentStyle = JudgmentStyle.OTHER


def _read_lines(path: Path | str) -> list[str]:
    """Read UTF-8 lines; a missing final newline is tolerated."""
    text = Path(path).read_text(encoding="utf-8")
    if text == "":
        return []
    lines = text.split("\n")
    if lines[-1] == "":
        lines.pop()
    return lines


def _write_lines(path: Path | str, lines: Sequence[str]) -> None:
    """Write UTF-8 lines, ending the file with exactly one newline."""
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_testset(
    source_path: Path | str, docid_path: Path | str, lang_pair: str
) -> TestSet:
    """Build a TestSet from a source file and a parallel docid file.

    Documents are maximal runs of consecutive identical docids, in file
    order. A docid that reappears non-consecutively signals a corrupted
    document annotation and raises CorpusError.
    """
    src_lines = _read_lines(source_path)
    docids = _read_lines(docid_path)
    if not src_lines:
        raise CorpusError(f"empty source file: {source_path}")
    if len(src_lines) != len(docids):
        raise CorpusError(
            f"line-count mismatch: {source_path} has {len(src_lines)} lines, "
            f"{docid_path} has {len(docids)}"
        )
    documents: list[Document] = []
    closed: set[str] = set()
    run_id: str | None = None
    run: list[str] = []
    for line, doc_id in zip(src_lines, docids):
        if doc_id != run_id:
            if run_id is not None:
                documents.append(Document(run_id, tuple(run)))
                closed.add(run_id)
            if doc_id in closed:
                raise CorpusError(
                    f"doc_id {doc_id!r} reappears non-consecutively in {docid_path}"
                )
            run_id = doc_id
            run = []
        run.append(line)
    assert run_id is not None
    documents.append(Document(run_id, tuple(run)))
    return TestSet(lang_pair=lang_pair, documents=tuple(documents))


def save_testset(
    testset: TestSet, source_path: Path | str, docid_path: Path | str
) -> None:
    src_lines: list[str] = []
    docids: list[str] = []
    for doc in testset.documents:
        src_lines.extend(doc.src)
        docids.extend(doc.doc_id for _ in doc.src)
    _write_lines(source_path, src_lines)
    _write_lines(docid_path, docids)


def load_system_output(
    path: Path | str, testset: TestSet, system_name: str
) -> SystemOutput:
    """Load one hypothesis-per-line output aligned with the test set."""
    lines = _read_lines(path)
    if len(lines) != testset.total_sentences:
        raise CorpusError(
            f"{path}: {len(lines)} hypotheses but test set has "
            f"{testset.total_sentences} sentences"
        )
    return SystemOutput(
        system_name=system_name, lang_pair=testset.lang_pair, hyp=tuple(lines)
    )


def save_system_output(sysout: SystemOutput, path: Path | str) -> None:
    _write_lines(path, sysout.hyp)


HUMAN_SCORES_HEADER = ("lang_pair", "system", "score")


def load_human_scores(path: Path | str) -> list[HumanScores]:
    """Load a TSV of human system scores, one HumanScores per language pair.

    Expected columns: lang_pair, system, score, with an optional fourth
    column naming the judgment style (MQM, DA_SQM, or OTHER).
    """
    lines = _read_lines(path)
    if not lines:
        raise CorpusError(f"empty human-scores file: {path}")
    header = tuple(lines[0].split("\t"))
    if header[:3] != HUMAN_SCORES_HEADER:
        expected = "\t".join(HUMAN_SCORES_HEADER)
        raise CorpusError(f"{path}: expected header {expected!r}, got {lines[0]!r}")
    per_lp: dict[str, dict[str, float]] = {}
    styles: dict[str, JudgmentStyle] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if line == "":
            continue
        cols = line.split("\t")
        if len(cols) < 3:
            raise CorpusError(f"{path}:{lineno}: expected at least 3 columns")
        lp, system, raw_score = cols[0], cols[1], cols[2]
        try:
            score = float(raw_score)
        except ValueError:
            raise CorpusError(f"{path}:{lineno}: non-numeric score {raw_score!r}")
        if not math.isfinite(score):
            raise CorpusError(f"{path}:{lineno}: non-finite score {raw_score!r}")
        scores = per_lp.setdefault(lp, {})
        if system in scores:
            raise CorpusError(f"{path}:{lineno}: duplicate ({lp}, {system}) row")
        scores[system] = score
        if len(cols) >= 4 and cols[3]:
            style = JudgmentStyle(cols[3])
            if lp in styles and styles[lp] != style:
                raise CorpusError(f"{path}:{lineno}: conflicting judgment styles for {lp}")
            styles[lp] = style
    return [
        HumanScores(lp, scores, styles.get(lp, JudgmentStyle.OTHER))
        for lp, scores in per_lp.items()
    ]


def save_human_scores(human: Sequence[HumanScores], path: Path | str) -> None:
    lines = ["\t".join(HUMAN_SCORES_HEADER) + "\tjudgment"]
    for hs in human:
        for system, score in hs.scores.items():
            lines.append(
                f"{hs.lang_pair}\t{system}\t{score!r}\t{hs.judgment_style.value}"
            )
    _write_lines(path, lines)


def load_jsonl_corpus(
    path: Path | str, lang_pair: str
) -> tuple[TestSet, dict[str, SystemOutput]]:
    """Load the single-file JSON-lines corpus format.

    Each line holds one document: {"doc_id": str, "src": [str, ...],
    "hyp": {"system": [str, ...], ...}}. Every document must carry the
    same set of systems, each aligned with its source sentences.
    """
    documents: list[Document] = []
    per_system: dict[str, list[str]] = {}
    system_set: set[str] | None = None
    for lineno, line in enumerate(_read_lines(path), start=1):
        if line == "":
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"{path}:{lineno}: invalid JSON: {exc}")
        try:
            doc = Document(record["doc_id"], tuple(record["src"]))
            hyps = record["hyp"]
        except KeyError as exc:
            raise CorpusError(f"{path}:{lineno}: missing field {exc}")
        if system_set is None:
            system_set = set(hyps)
            per_system = {name: [] for name in hyps}
        elif set(hyps) != system_set:
            raise CorpusError(f"{path}:{lineno}: inconsistent system set")
        for name, sents in hyps.items():
            if len(sents) != doc.length:
                raise CorpusError(
                    f"{path}:{lineno}: system {name!r} misaligned with source"
                )
            per_system[name].extend(sents)
        documents.append(doc)
    if not documents:
        raise CorpusError(f"empty corpus file: {path}")
    testset = TestSet(lang_pair=lang_pair, documents=tuple(documents))
    outputs = {
        name: SystemOutput(name, lang_pair, tuple(hyp))
        for name, hyp in per_system.items()
    }
    return testset, outputs
