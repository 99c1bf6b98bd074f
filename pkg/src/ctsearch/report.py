"""Evaluation report rendering: aligned text, JSON, TSV, and a figure."""
from __future__ import annotations

import json
from pathlib import Path

from .termeval import EvalReport

COLUMNS = ("model", "precision", "recall", "f1")


def format_table(rows: list[tuple[str, EvalReport]]) -> str:
    """Aligned-column text, one model per row."""
    width = max([len("model")] + [len(name) for name, _ in rows])
    lines = [f"{'model':<{width}}  precision  recall  f1"]
    for name, report in rows:
        lines.append(
            f"{name:<{width}}  {report.precision:>9.2f}  {report.recall:>6.2f}  {report.f1:>4.2f}"
        )
    return "\n".join(lines)


def report_json(rows: list[tuple[str, EvalReport]]) -> dict:
    return {"models": [{"model": name, **report.to_json()} for name, report in rows]}


def write_delimited(rows: list[tuple[str, EvalReport]], path: Path | str, delimiter: str = "\t") -> None:
    header = delimiter.join(COLUMNS + ("true_positives", "predicted_count", "gold_count"))
    lines = [header]
    for name, r in rows:
        lines.append(
            delimiter.join(
                (
                    name,
                    f"{r.precision:.6f}",
                    f"{r.recall:.6f}",
                    f"{r.f1:.6f}",
                    str(r.true_positives),
                    str(r.predicted_count),
                    str(r.gold_count),
                )
            )
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def render_figure(rows: list[tuple[str, EvalReport]], path: Path | str) -> None:
    """Grouped precision/recall/F1 bars, one group per model."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    names = [name for name, _ in rows]
    metrics = {
        "precision": [r.precision for _, r in rows],
        "recall": [r.recall for _, r in rows],
        "f1": [r.f1 for _, r in rows],
    }
    positions = range(len(names))
    bar_width = 0.26

    fig, ax = plt.subplots(figsize=(max(4.0, 1.8 * len(names) + 2), 3.4))
    for i, (label, values) in enumerate(metrics.items()):
        ax.bar([p + (i - 1) * bar_width for p in positions], values, bar_width, label=label)
    ax.set_xticks(list(positions))
    ax.set_xticklabels(names, rotation=15, ha="right")
    ax.set_ylim(0.0, 1.0)
    ax.set_ylabel("score")
    ax.set_title("Terminology extraction vs silver standard")
    ax.legend(frameon=False, fontsize="small")
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def write_report_files(rows: list[tuple[str, EvalReport]], out_dir: Path | str) -> dict[str, Path]:
    """The full report bundle: JSON + TSV + PNG side by side."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "json": out_dir / "report.json",
        "tsv": out_dir / "report.tsv",
        "png": out_dir / "report.png",
    }
    paths["json"].write_text(
        json.dumps(report_json(rows), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    write_delimited(rows, paths["tsv"])
    render_figure(rows, paths["png"])
    return paths
