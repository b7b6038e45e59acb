"""Figure rendering for the CLI report paths.

Every function takes already-aggregated report data and writes one PNG next
to the delimited output. Uses the Agg backend so rendering works headless.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

GENRE_COLORS = {
    "country": "#c98a3d",
    "pop": "#d45087",
    "rap": "#4a4a4a",
    "rb": "#7a5195",
    "rock": "#2f4b7c",
}

_DPI = 150


def _color(genre: str) -> str:
    return GENRE_COLORS.get(genre, "#666666")


def genre_distribution(genre_counts: dict, out_path: str | Path) -> Path:
    out_path = Path(out_path)
    genres = sorted(genre_counts)
    counts = [genre_counts[g] for g in genres]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(genres, counts, color=[_color(g) for g in genres])
    ax.set_ylabel("songs")
    ax.set_title("Genre distribution")
    fig.tight_layout()
    fig.savefig(out_path, dpi=_DPI)
    plt.close(fig)
    return out_path


def sentiment_by_genre(summaries: dict, out_path: str | Path) -> Path:
    """Box plot from the per-genre sentiment summaries."""
    out_path = Path(out_path)
    genres = sorted(summaries)
    stats = []
    for g in genres:
        s = summaries[g]
        stats.append(
            {
                "label": g,
                "med": s.median,
                "q1": s.q1,
                "q3": s.q3,
                "whislo": s.min,
                "whishi": s.max,
                "mean": s.mean,
                "fliers": [],
            }
        )
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bxp(stats, showmeans=True, meanline=True)
    ax.set_ylabel("sentiment score")
    ax.set_title("Sentiment score distribution by genre")
    ax.axhline(0.0, color="#999999", linewidth=0.8, linestyle=":")
    fig.tight_layout()
    fig.savefig(out_path, dpi=_DPI)
    plt.close(fig)
    return out_path


def sentiment_by_year(by_year: dict, out_path: str | Path) -> Path:
    out_path = Path(out_path)
    years = sorted(by_year)
    values = [by_year[y] for y in years]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(years, values, marker=".", linewidth=1.0, color="#2f4b7c")
    if len(years) >= 3:
        coeffs = np.polyfit(years, values, deg=1)
        ax.plot(years, np.polyval(coeffs, years), linestyle="--", color="#d45087", label="trend")
        ax.legend()
    ax.set_xlabel("year")
    ax.set_ylabel("mean sentiment")
    ax.set_title("Sentiment trend over years")
    fig.tight_layout()
    fig.savefig(out_path, dpi=_DPI)
    plt.close(fig)
    return out_path


def wordcount_by_genre(length_stats: dict, out_path: str | Path) -> Path:
    out_path = Path(out_path)
    genres = sorted(length_stats)
    means = [length_stats[g]["mean_word_count"] for g in genres]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(genres, means, color=[_color(g) for g in genres])
    ax.set_ylabel("mean word count")
    ax.set_title("Lyric length by genre")
    fig.tight_layout()
    fig.savefig(out_path, dpi=_DPI)
    plt.close(fig)
    return out_path


def confusion_heatmap(report_dict: dict, out_path: str | Path) -> Path:
    """Annotated confusion-matrix heatmap from a report's structured form."""
    out_path = Path(out_path)
    classes = report_dict["classes"]
    matrix = np.asarray(report_dict["confusion_matrix"], dtype=np.int64)
    fig, ax = plt.subplots(figsize=(5.5, 5))
    im = ax.imshow(matrix, cmap="Blues")
    ax.set_xticks(range(len(classes)), classes, rotation=45, ha="right")
    ax.set_yticks(range(len(classes)), classes)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    threshold = matrix.max() / 2 if matrix.max() else 0.5
    for i in range(len(classes)):
        for j in range(len(classes)):
            ax.text(
                j,
                i,
                str(matrix[i, j]),
                ha="center",
                va="center",
                color="white" if matrix[i, j] > threshold else "black",
                fontsize=9,
            )
    accuracy = report_dict.get("accuracy")
    title = "Confusion matrix" if accuracy is None else f"Confusion matrix (accuracy {accuracy:.2f})"
    ax.set_title(title)
    fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=_DPI)
    plt.close(fig)
    return out_path


def rmse_comparison(rows, out_path: str | Path) -> Path:
    """Bar chart of the regressor benchmark (rows with a None RMSE are skipped)."""
    out_path = Path(out_path)
    scored = [(r.kind, r.rmse) for r in rows if r.rmse is not None]
    kinds = [k for k, _ in scored]
    values = [v for _, v in scored]
    fig, ax = plt.subplots(figsize=(7, 4))
    bars = ax.bar(kinds, values, color="#2f4b7c")
    if bars:
        best = int(np.argmin(values))
        bars[best].set_color("#d45087")
    ax.set_ylabel("RMSE (years)")
    ax.set_title("Year regression benchmark")
    ax.tick_params(axis="x", rotation=20)
    for bar, value in zip(bars, values):
        ax.text(bar.get_x() + bar.get_width() / 2, value, f"{value:.2f}", ha="center", va="bottom", fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=_DPI)
    plt.close(fig)
    return out_path
