"""Command-line interface: score, grid, stats, synth, validate.

Runs are described by a declarative YAML config file; common settings can
be given or overridden with flags, and flags alone suffice for simple
runs. Exit codes: 0 success, 2 usage or configuration error, 1 runtime
failure.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import yaml

from . import corpus as corpus_mod
from .aggregation import AggregationError, Weighting, score_system
from .corpus import CorpusError, HumanScores, SystemOutput, TestSet
from .metaeval import MetaEvalError, corpus_stats, run_grid
from .reports import (
    grid_to_tsv,
    heatmap_svg,
    render_heatmap,
    stats_dropped_tsv,
    stats_overlength_tsv,
    system_scores_table,
    system_scores_tsv,
)
from .scoring import ScorerError, ScorerKind, ScorerSpec, open_session
from .synth import generate_synthetic_corpus
from .tokenizers import TokenizerError, get_tokenizer
from .windowing import PartialPolicy, WindowConfig, WindowingError

ENDPOINT_ENV = "WINQE_SCORER_ENDPOINT"

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


class UsageError(Exception):
    """Bad flags, bad config, or missing inputs; maps to exit code 2."""


@dataclass
class LangPairPaths:
    source: Path
    docids: Path
    systems: dict[str, Path] = field(default_factory=dict)


@dataclass
class RunConfig:
    lang_pairs: dict[str, LangPairPaths] = field(default_factory=dict)
    human_scores: Path | None = None
    scorer: ScorerSpec | None = None
    w: int | None = None
    s: int | None = None
    w_max: int | None = None
    partial_policy: PartialPolicy = PartialPolicy.DROP
    weighting: Weighting = Weighting.UNIFORM
    tokenizer: str = "whitespace"
    token_limit: int = 512
    output_dir: Path = Path(".")
    seed: int = 0
    workers: int = os.cpu_count() or 1
    synth: dict = field(default_factory=dict)


def _parse_scorer(kind: str, params: Mapping[str, object]) -> ScorerSpec:
    try:
        scorer_kind = ScorerKind(kind)
    except ValueError:
        raise UsageError(f"unknown scorer kind {kind!r}")
    params = dict(params)
    if scorer_kind is ScorerKind.EXTERNAL and "command" not in params:
        params.setdefault("endpoint", os.environ.get(ENDPOINT_ENV, ""))
        if not params["endpoint"]:
            raise UsageError(
                f"external scorer needs a command, an endpoint, or ${ENDPOINT_ENV}"
            )
    try:
        return ScorerSpec(kind=scorer_kind, parameters=params)
    except ScorerError as exc:
        raise UsageError(str(exc))


def load_config(path: Path) -> RunConfig:
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}")
    if not isinstance(raw, dict):
        raise UsageError(f"config {path} must be a mapping")
    cfg = RunConfig()
    base = path.parent

    def _path(p: object) -> Path:
        q = Path(str(p))
        return q if q.is_absolute() else base / q

    for lp, entry in (raw.get("lang_pairs") or {}).items():
        cfg.lang_pairs[lp] = LangPairPaths(
            source=_path(entry["source"]),
            docids=_path(entry["docids"]),
            systems={name: _path(p) for name, p in (entry.get("systems") or {}).items()},
        )
    if "human_scores" in raw:
        cfg.human_scores = _path(raw["human_scores"])
    if "scorer" in raw:
        sc = raw["scorer"] or {}
        cfg.scorer = _parse_scorer(sc.get("kind", ""), sc.get("params") or {})
    for key in ("w", "s", "w_max", "token_limit", "seed", "workers"):
        if key in raw:
            setattr(cfg, key, int(raw[key]))
    if "partial_policy" in raw:
        cfg.partial_policy = _parse_enum(PartialPolicy, raw["partial_policy"])
    if "weighting" in raw:
        cfg.weighting = _parse_enum(Weighting, raw["weighting"])
    if "tokenizer" in raw:
        cfg.tokenizer = str(raw["tokenizer"])
    if "output_dir" in raw:
        cfg.output_dir = _path(raw["output_dir"])
    if "synth" in raw:
        cfg.synth = dict(raw["synth"] or {})
    return cfg


def _parse_enum(enum_cls, value):
    try:
        return enum_cls(str(value).lower())
    except ValueError:
        choices = ", ".join(e.value for e in enum_cls)
        raise UsageError(f"expected one of {choices}, got {value!r}")


def _apply_flags(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    if args.source or args.docids:
        if not (args.source and args.docids and args.lang_pair):
            raise UsageError("--source, --docids, and --lang-pair go together")
        systems = {}
        for item in args.system or []:
            name, _, p = item.partition("=")
            if not p:
                raise UsageError(f"--system expects NAME=PATH, got {item!r}")
            systems[name] = Path(p)
        cfg.lang_pairs = {
            args.lang_pair: LangPairPaths(
                source=Path(args.source), docids=Path(args.docids), systems=systems
            )
        }
    if args.human_scores:
        cfg.human_scores = Path(args.human_scores)
    if args.scorer:
        params = {}
        for item in args.scorer_param or []:
            key, _, value = item.partition("=")
            if not _:
                raise UsageError(f"--scorer-param expects KEY=VALUE, got {item!r}")
            params[key] = yaml.safe_load(value)
        cfg.scorer = _parse_scorer(args.scorer, params)
    for key in ("w", "s", "w_max", "token_limit", "seed", "workers"):
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, value)
    if args.partial_policy:
        cfg.partial_policy = _parse_enum(PartialPolicy, args.partial_policy)
    if args.weighting:
        cfg.weighting = _parse_enum(Weighting, args.weighting)
    if args.tokenizer:
        cfg.tokenizer = args.tokenizer
    if args.output_dir:
        cfg.output_dir = Path(args.output_dir)
    return cfg


def _load_corpora(
    cfg: RunConfig,
) -> tuple[dict[str, TestSet], dict[str, dict[str, SystemOutput]]]:
    if not cfg.lang_pairs:
        raise UsageError("no language pairs configured")
    corpora: dict[str, TestSet] = {}
    outputs: dict[str, dict[str, SystemOutput]] = {}
    for lp, paths in cfg.lang_pairs.items():
        testset = corpus_mod.load_testset(paths.source, paths.docids, lp)
        corpora[lp] = testset
        outputs[lp] = {
            name: corpus_mod.load_system_output(p, testset, name)
            for name, p in paths.systems.items()
        }
    return corpora, outputs


def _require(value, what: str):
    if value is None:
        raise UsageError(f"missing {what}")
    return value


def _window_config(cfg: RunConfig) -> WindowConfig:
    w = _require(cfg.w, "window size (--w)")
    s = cfg.s if cfg.s is not None else w
    try:
        return WindowConfig(w=w, s=s, partial_policy=cfg.partial_policy)
    except WindowingError as exc:
        raise UsageError(str(exc))


def _out(cfg: RunConfig, name: str) -> Path:
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    return cfg.output_dir / name


# -- commands --------------------------------------------------------------


def cmd_score(cfg: RunConfig) -> int:
    scorer = _require(cfg.scorer, "scorer (--scorer)")
    window = _window_config(cfg)
    corpora, outputs = _load_corpora(cfg)
    scores = []
    with open_session(scorer, workers=cfg.workers) as session:
        for lp in sorted(corpora):
            for name in sorted(outputs[lp]):
                scores.append(
                    score_system(
                        corpora[lp], outputs[lp][name], window, session, cfg.weighting
                    )
                )
    sys.stdout.write(system_scores_table(scores))
    path = _out(cfg, "system_scores.tsv")
    path.write_text(system_scores_tsv(scores), encoding="utf-8")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_grid(cfg: RunConfig) -> int:
    scorer = _require(cfg.scorer, "scorer (--scorer)")
    w_max = _require(cfg.w_max, "grid size (--w-max)")
    human_path = _require(cfg.human_scores, "human scores (--human-scores)")
    human = corpus_mod.load_human_scores(human_path)
    for hs in human:
        if len(hs.scores) < 2:
            raise UsageError(
                f"language pair {hs.lang_pair!r} has fewer than 2 human-scored systems"
            )
    corpora, outputs = _load_corpora(cfg)
    with open_session(scorer, workers=cfg.workers) as session:
        grid = run_grid(
            corpora, outputs, human, session, w_max, cfg.partial_policy, cfg.weighting
        )
    tsv_path = _out(cfg, "grid_accuracy.tsv")
    tsv_path.write_text(grid_to_tsv(grid), encoding="utf-8")
    heat_path = _out(cfg, "grid_heatmap.txt")
    heat_path.write_text(render_heatmap(grid), encoding="utf-8")
    svg_path = _out(cfg, "grid_heatmap.svg")
    svg_path.write_text(heatmap_svg(grid), encoding="utf-8")
    best = grid.best_cell()
    worst = grid.worst_cell()
    base = grid.cells[(1, 1)].pooled.accuracy
    print(f"best cell  (w={best[0]}, s={best[1]}): "
          f"{grid.cells[best].pooled.accuracy:.4f}")
    print(f"worst cell (w={worst[0]}, s={worst[1]}): "
          f"{grid.cells[worst].pooled.accuracy:.4f}")
    print(f"cell (1, 1) sentence-level baseline: {base:.4f}")
    print(f"wrote {tsv_path}, {heat_path}, {svg_path}")
    return EXIT_OK


def cmd_stats(cfg: RunConfig) -> int:
    w_max = _require(cfg.w_max, "grid size (--w-max)")
    try:
        tokenizer = get_tokenizer(cfg.tokenizer)
    except TokenizerError as exc:
        raise UsageError(str(exc))
    corpora, outputs = _load_corpora(cfg)
    for lp in sorted(corpora):
        stats = corpus_stats(
            corpora[lp],
            w_max,
            tokenizer,
            cfg.token_limit,
            tokenizer_id=cfg.tokenizer,
            outputs=tuple(outputs[lp].values()),
        )
        dropped_path = _out(cfg, f"dropped_fraction.{lp}.tsv")
        dropped_path.write_text(stats_dropped_tsv(stats), encoding="utf-8")
        over_path = _out(cfg, f"overlength_fraction.{lp}.tsv")
        over_path.write_text(stats_overlength_tsv(stats), encoding="utf-8")
        print(f"wrote {dropped_path}, {over_path}")
    return EXIT_OK


def cmd_synth(cfg: RunConfig) -> int:
    params = cfg.synth
    n_docs = int(params.get("n_docs", 0))
    doc_len = tuple(params.get("doc_len", (2, 6)))
    ambiguity_rate = float(params.get("ambiguity_rate", 0.5))
    error_rates = {
        str(name): float(rate)
        for name, rate in (params.get("error_rates") or {}).items()
    }
    try:
        testset, outputs, human = generate_synthetic_corpus(
            n_docs=n_docs,
            doc_len_range=doc_len,  # type: ignore[arg-type]
            ambiguity_rate=ambiguity_rate,
            error_rates=error_rates or None,
            seed=cfg.seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc))
    src_path = _out(cfg, "source.txt")
    docid_path = _out(cfg, "docids.txt")
    corpus_mod.save_testset(testset, src_path, docid_path)
    for name, sysout in outputs.items():
        corpus_mod.save_system_output(sysout, _out(cfg, f"hyp.{name}.txt"))
    corpus_mod.save_human_scores([human], _out(cfg, "human_scores.tsv"))
    print(
        f"wrote synthetic corpus ({n_docs} docs, {len(outputs)} systems) "
        f"to {cfg.output_dir}"
    )
    return EXIT_OK


def cmd_validate(cfg: RunConfig) -> int:
    problems = []
    for lp, paths in cfg.lang_pairs.items():
        for label, p in [("source", paths.source), ("docids", paths.docids)] + [
            (f"system {name}", p) for name, p in paths.systems.items()
        ]:
            if not Path(p).is_file():
                problems.append(f"{lp}: {label} file missing: {p}")
    if cfg.human_scores and not Path(cfg.human_scores).is_file():
        problems.append(f"human scores file missing: {cfg.human_scores}")
    if cfg.w is not None and cfg.s is not None and not 1 <= cfg.s <= cfg.w:
        problems.append(f"window/stride invalid: w={cfg.w} s={cfg.s}")
    try:
        get_tokenizer(cfg.tokenizer)
    except TokenizerError as exc:
        problems.append(str(exc))
    if problems:
        raise UsageError("; ".join(problems))
    print("config ok")
    return EXIT_OK


# -- entry point -----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="winqe",
        description="Windowed document-level QE scoring and meta-evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, help_text in [
        ("score", cmd_score, "score systems at a single (w, s) setting"),
        ("grid", cmd_grid, "sweep all (w, s) cells and report pairwise accuracy"),
        ("stats", cmd_stats, "dropped-sentence and overlength-chunk statistics"),
        ("synth", cmd_synth, "generate a synthetic context-sensitive corpus"),
        ("validate", cmd_validate, "dry-run check of a run configuration"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(fn=fn)
        p.add_argument("--config", type=Path, help="YAML run configuration")
        p.add_argument("--source", help="source file (one sentence per line)")
        p.add_argument("--docids", help="docid file aligned with the source")
        p.add_argument("--lang-pair", help="language pair, e.g. en-de")
        p.add_argument(
            "--system", action="append", metavar="NAME=PATH",
            help="system output file; repeatable",
        )
        p.add_argument("--human-scores", help="human scores TSV")
        p.add_argument("--scorer", help="scorer kind (constant, length_ratio, ...)")
        p.add_argument(
            "--scorer-param", action="append", metavar="KEY=VALUE",
            help="scorer parameter; repeatable",
        )
        p.add_argument("--w", type=int, help="window size in sentences")
        p.add_argument("--s", type=int, help="stride in sentences")
        p.add_argument("--w-max", dest="w_max", type=int, help="grid upper bound")
        p.add_argument("--partial-policy", choices=["drop", "include"])
        p.add_argument("--weighting", choices=["uniform", "sentence_weighted"])
        p.add_argument("--tokenizer", help="whitespace, chars, or sidecar:PATH")
        p.add_argument("--token-limit", dest="token_limit", type=int)
        p.add_argument("--output-dir", help="directory for result files")
        p.add_argument("--seed", type=int)
        p.add_argument("--workers", type=int, help="worker pool size")
    return parser


_STAGES = [
    (CorpusError, "ingest"),
    (WindowingError, "window"),
    (TokenizerError, "window"),
    (ScorerError, "score"),
    (AggregationError, "aggregate"),
    (MetaEvalError, "metaeval"),
]


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        cfg = _apply_flags(cfg, args)
        return args.fn(cfg)
    except UsageError as exc:
        print(f"error [config]: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except tuple(t for t, _ in _STAGES) as exc:
        stage = next(name for t, name in _STAGES if isinstance(exc, t))
        print(f"error [{stage}]: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"error [io]: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
