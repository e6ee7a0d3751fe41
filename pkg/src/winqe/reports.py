"""Rendering of grid and statistics results: TSV, text heatmaps, SVG."""
from __future__ import annotations

from .metaeval import AccuracyReport, CorpusStats, GridResult

POOLED = "POOLED"
POOLED_MACRO = "POOLED_MACRO"


def grid_to_tsv(grid: GridResult) -> str:
    """One row per (w, s, lang pair), plus micro- and macro-pooled rows."""
    lines = ["w\ts\tlang_pair\tn_pairs\taccuracy"]
    for (w, s), report in sorted(grid.cells.items()):
        for lp, counts in sorted(report.per_lang_pair.items()):
            lines.append(f"{w}\t{s}\t{lp}\t{counts.n_pairs}\t{counts.accuracy!r}")
        pooled = report.pooled
        lines.append(f"{w}\t{s}\t{POOLED}\t{pooled.n_pairs}\t{pooled.accuracy!r}")
        lines.append(
            f"{w}\t{s}\t{POOLED_MACRO}\t{pooled.n_pairs}\t{report.macro_accuracy!r}"
        )
    return "\n".join(lines) + "\n"


def render_heatmap(grid: GridResult) -> str:
    """Lower-triangular text heatmap of pooled accuracy, rows w, columns s."""
    w_max = max(w for w, _ in grid.cells)
    header = "w\\s " + " ".join(f"{s:>6d}" for s in range(1, w_max + 1))
    rows = [header]
    for w in range(1, w_max + 1):
        cells = []
        for s in range(1, w_max + 1):
            if (w, s) in grid.cells:
                cells.append(f"{grid.cells[(w, s)].pooled.accuracy:6.4f}")
            else:
                cells.append(" " * 6)
        rows.append(f"{w:>3d} " + " ".join(cells).rstrip())
    return "\n".join(rows) + "\n"


def heatmap_svg(grid: GridResult, cell_px: int = 48) -> str:
    """Minimal standalone SVG heatmap of pooled accuracy."""
    w_max = max(w for w, _ in grid.cells)
    values = [r.pooled.accuracy for r in grid.cells.values()]
    lo, hi = min(values), max(values)
    span = hi - lo or 1.0
    margin = cell_px
    size = margin + w_max * cell_px + 4
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'font-family="monospace" font-size="{cell_px // 4}">'
    ]
    for (w, s), report in sorted(grid.cells.items()):
        acc = report.pooled.accuracy
        frac = (acc - lo) / span
        shade = int(255 - 155 * frac)
        x = margin + (s - 1) * cell_px
        y = margin + (w - 1) * cell_px
        parts.append(
            f'<rect x="{x}" y="{y}" width="{cell_px}" height="{cell_px}" '
            f'fill="rgb({shade},{shade},255)" stroke="black"/>'
        )
        parts.append(
            f'<text x="{x + 4}" y="{y + cell_px // 2}">{acc:.3f}</text>'
        )
    for i in range(1, w_max + 1):
        parts.append(
            f'<text x="{margin + (i - 1) * cell_px + 4}" y="{margin - 8}">s={i}</text>'
        )
        parts.append(
            f'<text x="2" y="{margin + (i - 1) * cell_px + cell_px // 2}">w={i}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def stats_dropped_tsv(stats: CorpusStats) -> str:
    lines = ["w\ts\tdropped_fraction"]
    for (w, s), frac in sorted(stats.dropped_fraction.items()):
        lines.append(f"{w}\t{s}\t{frac!r}")
    return "\n".join(lines) + "\n"


def stats_overlength_tsv(stats: CorpusStats) -> str:
    lines = [
        f"# lang_pair={stats.lang_pair} tokenizer={stats.tokenizer_id} "
        f"limit={stats.limit}",
        "w\toverlength_fraction",
    ]
    for w, frac in sorted(stats.overlength_fraction.items()):
        lines.append(f"{w}\t{frac!r}")
    return "\n".join(lines) + "\n"


def system_scores_table(scores, precision: int = 4) -> str:
    """Fixed-precision table of SystemScore rows for terminal display."""
    header = f"{'lang_pair':<10} {'system':<24} {'score':>10} {'chunks':>8} {'covered':>8}"
    lines = [header, "-" * len(header)]
    for sc in scores:
        lines.append(
            f"{sc.lang_pair:<10} {sc.system_name:<24} "
            f"{sc.value:>10.{precision}f} {sc.n_chunks:>8d} {sc.n_sentences_covered:>8d}"
        )
    return "\n".join(lines) + "\n"


def system_scores_tsv(scores) -> str:
    lines = ["lang_pair\tsystem\tconfig\tscore\tn_chunks\tn_sentences_covered"]
    for sc in scores:
        lines.append(
            f"{sc.lang_pair}\t{sc.system_name}\t{sc.config_label}\t"
            f"{sc.value!r}\t{sc.n_chunks}\t{sc.n_sentences_covered}"
        )
    return "\n".join(lines) + "\n"
