"""Result bundles rendered as JSON, markdown tables, TSV, and figures.

Rendering is byte-stable: the same bundle always produces identical
bytes, so regenerated reports can be diffed. Percentages print at 2
decimals, graph ratios at 4, defense scores at 2, and corpus modification
ratios as percentages at 3 decimals.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .errors import DataError
from .evaluation import DefenseReport
from .kgraph import GraphDiffMetrics

_FIG_SIZE = (6.4, 4.0)
_PNG_META = {"Software": None}


def format_pct(value: float) -> str:
    return f"{value:.2f}"


def format_ratio(value: float) -> str:
    return f"{value:.4f}"


def format_score(value: float) -> str:
    return f"{value:.2f}"


def format_mod_ratio(fraction: float) -> str:
    """Corpus modification ratio as a percentage at 3 decimals."""
    return f"{100.0 * fraction:.3f}%"


@dataclass(frozen=True)
class AttackStatsRow:
    label: str
    total_words: int
    modified_words: int
    modification_ratio: float


@dataclass(frozen=True)
class DiffRow:
    label: str
    metrics: GraphDiffMetrics


@dataclass(frozen=True)
class EffectRow:
    label: str
    asr_pct: float | None = None
    qasd: float | None = None


@dataclass(frozen=True)
class AccuracyRow:
    label: str
    accuracy_pct: float


@dataclass(frozen=True)
class DefenseRow:
    attack_label: str
    report: DefenseReport


@dataclass(frozen=True)
class ResultsBundle:
    attack_stats: tuple[AttackStatsRow, ...] | None = None
    graph_diff: tuple[DiffRow, ...] | None = None
    attack_effect: tuple[EffectRow, ...] | None = None
    qa_accuracy: tuple[AccuracyRow, ...] | None = None
    defense: tuple[DefenseRow, ...] | None = None

    def sections(self) -> list[str]:
        present = []
        for name in ("attack_stats", "graph_diff", "attack_effect", "qa_accuracy", "defense"):
            if getattr(self, name):
                present.append(name)
        return present


def _markdown_table(headers: list[str], rows: list[list[str]]) -> str:
    lines = ["| " + " | ".join(headers) + " |", "|" + "|".join("---" for _ in headers) + "|"]
    lines.extend("| " + " | ".join(row) + " |" for row in rows)
    return "\n".join(lines)


def _tsv(path: Path, headers: list[str], rows: list[list[str]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(headers) + "\n")
        for row in rows:
            fh.write("\t".join(row) + "\n")


def _save_figure(fig, path: Path) -> None:
    fig.savefig(path, dpi=120, metadata=_PNG_META)
    plt.close(fig)


def _bar_figure(labels, series: dict[str, list[float]], title: str, ylabel: str, path: Path):
    fig, ax = plt.subplots(figsize=_FIG_SIZE)
    positions = range(len(labels))
    width = 0.8 / max(1, len(series))
    for offset, (name, values) in enumerate(series.items()):
        ax.bar(
            [p + offset * width for p in positions],
            values,
            width=width,
            label=name,
        )
    ax.set_xticks([p + 0.4 - width / 2 for p in positions])
    ax.set_xticklabels(labels, rotation=20, ha="right")
    ax.set_title(title)
    ax.set_ylabel(ylabel)
    if len(series) > 1:
        ax.legend()
    fig.tight_layout()
    _save_figure(fig, path)


def write_report(bundle: ResultsBundle, outdir: str | Path) -> dict[str, Path]:
    """Render every present section; empty sections are omitted."""
    if not bundle.sections():
        raise DataError("results bundle has no sections to report")
    outdir = Path(outdir)
    tables_dir = outdir / "tables"
    figures_dir = outdir / "figures"
    tables_dir.mkdir(parents=True, exist_ok=True)
    figures_dir.mkdir(parents=True, exist_ok=True)

    machine: dict = {}
    doc: list[str] = ["# Attack evaluation report", ""]
    written: dict[str, Path] = {}

    if bundle.attack_stats:
        rows = sorted(bundle.attack_stats, key=lambda r: r.label)
        headers = ["Run", "Total Words", "Modified Words", "Modification Ratio"]
        cells = [
            [r.label, str(r.total_words), str(r.modified_words), format_mod_ratio(r.modification_ratio)]
            for r in rows
        ]
        machine["attack_stats"] = [
            {
                "label": r.label,
                "total_words": r.total_words,
                "modified_words": r.modified_words,
                "modification_ratio": r.modification_ratio,
            }
            for r in rows
        ]
        doc += ["## Word-level perturbation statistics", "", _markdown_table(headers, cells), ""]
        _tsv(tables_dir / "attack_stats.tsv", headers, cells)
        _bar_figure(
            [r.label for r in rows],
            {"modified words": [r.modified_words for r in rows]},
            "Words modified per run",
            "words",
            figures_dir / "attack_stats.png",
        )

    if bundle.graph_diff:
        rows = sorted(bundle.graph_diff, key=lambda r: r.label)
        headers = [
            "Run",
            "Nodes (Org/Atk)",
            "Edges (Org/Atk)",
            "Node Ret.",
            "Edge Ret.",
            "Node Jaccard",
            "Edge Jaccard",
        ]
        cells = [
            [
                r.label,
                f"{r.metrics.node_counts[0]}/{r.metrics.node_counts[1]}",
                f"{r.metrics.edge_counts[0]}/{r.metrics.edge_counts[1]}",
                format_ratio(r.metrics.node_retention),
                format_ratio(r.metrics.edge_retention),
                format_ratio(r.metrics.node_jaccard),
                format_ratio(r.metrics.edge_jaccard),
            ]
            for r in rows
        ]
        machine["graph_diff"] = [
            {
                "label": r.label,
                "node_counts": list(r.metrics.node_counts),
                "edge_counts": list(r.metrics.edge_counts),
                "node_retention": r.metrics.node_retention,
                "edge_retention": r.metrics.edge_retention,
                "node_jaccard": r.metrics.node_jaccard,
                "edge_jaccard": r.metrics.edge_jaccard,
            }
            for r in rows
        ]
        doc += ["## Graph structural degradation", "", _markdown_table(headers, cells), ""]
        _tsv(tables_dir / "graph_diff.tsv", headers, cells)
        _bar_figure(
            [r.label for r in rows],
            {
                "node retention": [r.metrics.node_retention for r in rows],
                "edge retention": [r.metrics.edge_retention for r in rows],
                "node jaccard": [r.metrics.node_jaccard for r in rows],
                "edge jaccard": [r.metrics.edge_jaccard for r in rows],
            },
            "Clean vs poisoned graph overlap",
            "ratio",
            figures_dir / "graph_diff.png",
        )

    if bundle.attack_effect:
        rows = sorted(bundle.attack_effect, key=lambda r: r.label)
        headers = ["Run", "ASR (%)", "QASD"]
        cells = [
            [
                r.label,
                format_pct(r.asr_pct) if r.asr_pct is not None else "-",
                format_score(r.qasd) if r.qasd is not None else "-",
            ]
            for r in rows
        ]
        machine["attack_effect"] = [
            {"label": r.label, "asr_pct": r.asr_pct, "qasd": r.qasd} for r in rows
        ]
        doc += ["## Targeted attack effectiveness", "", _markdown_table(headers, cells), ""]
        _tsv(tables_dir / "attack_effect.tsv", headers, cells)
        _bar_figure(
            [r.label for r in rows],
            {"ASR %": [r.asr_pct if r.asr_pct is not None else 0.0 for r in rows]},
            "Attack success rate",
            "percent",
            figures_dir / "attack_effect.png",
        )

    if bundle.qa_accuracy:
        rows = sorted(bundle.qa_accuracy, key=lambda r: r.label)
        headers = ["Run", "Accuracy (%)"]
        cells = [[r.label, format_pct(r.accuracy_pct)] for r in rows]
        machine["qa_accuracy"] = [
            {"label": r.label, "accuracy_pct": r.accuracy_pct} for r in rows
        ]
        doc += ["## Downstream QA accuracy", "", _markdown_table(headers, cells), ""]
        _tsv(tables_dir / "qa_accuracy.tsv", headers, cells)
        _bar_figure(
            [r.label for r in rows],
            {"accuracy %": [r.accuracy_pct for r in rows]},
            "QA accuracy",
            "percent",
            figures_dir / "qa_accuracy.png",
        )

    if bundle.defense:
        rows = sorted(bundle.defense, key=lambda r: (r.attack_label, r.report.method))
        headers = ["Attack", "Defense", "Precision", "Recall", "F1-Score"]
        cells = [
            [
                r.attack_label,
                r.report.method,
                format_score(r.report.precision),
                format_score(r.report.recall),
                format_score(r.report.f1),
            ]
            for r in rows
        ]
        machine["defense"] = [
            {
                "attack": r.attack_label,
                "method": r.report.method,
                "precision": r.report.precision,
                "recall": r.report.recall,
                "f1": r.report.f1,
                "flagged_chunk_ids": sorted(r.report.flagged_chunk_ids),
            }
            for r in rows
        ]
        doc += ["## Defense effectiveness", "", _markdown_table(headers, cells), ""]
        _tsv(tables_dir / "defense.tsv", headers, cells)
        _bar_figure(
            [f"{r.attack_label}/{r.report.method}" for r in rows],
            {
                "precision": [r.report.precision for r in rows],
                "recall": [r.report.recall for r in rows],
                "f1": [r.report.f1 for r in rows],
            },
            "Defense precision / recall / F1",
            "score",
            figures_dir / "defense.png",
        )

    json_path = outdir / "report.json"
    json_path.write_text(
        json.dumps(machine, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )
    md_path = outdir / "report.md"
    md_path.write_text("\n".join(doc).rstrip() + "\n", encoding="utf-8")
    written["json"] = json_path
    written["markdown"] = md_path
    written["tables"] = tables_dir
    written["figures"] = figures_dir
    return written


def write_sweep(
    rows: list[dict],
    axis_name: str,
    metric_columns: list[str],
    outdir: str | Path,
) -> dict[str, Path]:
    """Parameter-sweep table plus a line figure of each metric vs the axis."""
    if not rows:
        raise DataError("sweep produced no rows")
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    headers = [axis_name] + metric_columns
    cells = [
        [str(row[axis_name])] + [_format_cell(row[col]) for col in metric_columns]
        for row in rows
    ]
    tsv_path = outdir / "sweep.tsv"
    _tsv(tsv_path, headers, cells)

    fig, ax = plt.subplots(figsize=_FIG_SIZE)
    xs = [row[axis_name] for row in rows]
    for col in metric_columns:
        values = [row[col] for row in rows]
        if all(isinstance(v, (int, float)) for v in values):
            ax.plot(xs, values, marker="o", label=col)
    ax.set_xlabel(axis_name)
    ax.set_title(f"Sweep over {axis_name}")
    ax.legend()
    fig.tight_layout()
    png_path = outdir / "sweep.png"
    _save_figure(fig, png_path)
    return {"tsv": tsv_path, "figure": png_path}


def _format_cell(value) -> str:
    if isinstance(value, float):
        return format_ratio(value)
    return str(value)
