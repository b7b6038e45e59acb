"""Exploratory corpus analysis: genre distribution, frequent words,
lyric-length statistics, and lexicon-based sentiment.

The sentiment scorer averages the polarities of lexicon-matched tokens, so
scores are deterministic, bag-of-words, and bounded to [-1, 1]. Report
tables are emitted as CSV for plotting; figures themselves are rendered by
the CLI report path.
"""

from __future__ import annotations

import csv
import json
import string
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from statistics import median
from typing import Iterable, Sequence

from .corpus import CuratedDataset, SongRecord, word_count

_PUNCT = string.punctuation + "‘’“”"


def tokenize(text: str) -> list[str]:
    """Lowercased whitespace tokens with punctuation stripped at the edges."""
    out = []
    for token in text.lower().split():
        token = token.strip(_PUNCT)
        if token:
            out.append(token)
    return out


def load_lexicon(path: str | Path | None = None) -> dict[str, float]:
    """Load a polarity lexicon ("word<TAB>polarity" per line).

    Defaults to the bundled lexicon. Blank lines and #-comments are
    skipped; polarities outside [-1, 1] are rejected.
    """
    if path is None:
        text = resources.files("lyriclens.resources").joinpath("lexicon.tsv").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    lexicon: dict[str, float] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValueError(f"lexicon line {lineno}: expected 'word<TAB>polarity', got {line!r}")
        word, raw = parts
        polarity = float(raw)
        if not -1.0 <= polarity <= 1.0:
            raise ValueError(f"lexicon line {lineno}: polarity {polarity} outside [-1, 1]")
        lexicon[word.strip().lower()] = polarity
    return lexicon


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    """Load a one-word-per-line stopword list (bundled list by default)."""
    if path is None:
        text = resources.files("lyriclens.resources").joinpath("stopwords.txt").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return frozenset(w.strip().lower() for w in text.splitlines() if w.strip() and not w.startswith("#"))


def sentiment_score(lyrics: str, lexicon: dict[str, float]) -> float:
    """Mean polarity of lexicon-matched tokens, clamped to [-1, 1].

    Tokens absent from the lexicon are ignored; a text with no matches (or
    no tokens at all) scores 0.
    """
    if not lexicon:
        raise ValueError("lexicon is empty")
    matched = [lexicon[t] for t in tokenize(lyrics) if t in lexicon]
    score = sum(matched) / max(1, len(matched))
    return max(-1.0, min(1.0, score))


def top_words(
    dataset: CuratedDataset | Sequence[SongRecord],
    genre: str,
    k: int,
    stopwords: frozenset[str] | set[str],
) -> list[tuple[str, int]]:
    """Top-k non-stopword tokens for one genre, by count then alphabetically."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    records = dataset.records if isinstance(dataset, CuratedDataset) else list(dataset)
    genres_present = {r.genre for r in records}
    if genre not in genres_present:
        raise ValueError(f"genre {genre!r} not present in dataset (has {sorted(genres_present)})")
    counts: Counter = Counter()
    for r in records:
        if r.genre != genre:
            continue
        for token in tokenize(r.lyrics):
            if token not in stopwords:
                counts[token] += 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:k]


@dataclass
class SentimentSummary:
    mean: float
    median: float
    q1: float
    q3: float
    min: float
    max: float
    count: int


@dataclass
class EdaReport:
    genre_counts: dict
    top_words: dict  # genre -> [(word, count), ...]
    length_stats: dict  # genre -> {"mean_word_count", "mean_char_length"}
    sentiment_by_genre: dict  # genre -> SentimentSummary
    sentiment_by_year: dict  # year -> mean sentiment
    n_records: int

    def to_dict(self) -> dict:
        return {
            "n_records": self.n_records,
            "genre_counts": dict(sorted(self.genre_counts.items())),
            "top_words": {g: [[w, c] for w, c in ws] for g, ws in sorted(self.top_words.items())},
            "length_stats": dict(sorted(self.length_stats.items())),
            "sentiment_by_genre": {
                g: {
                    "mean": s.mean,
                    "median": s.median,
                    "q1": s.q1,
                    "q3": s.q3,
                    "min": s.min,
                    "max": s.max,
                    "count": s.count,
                }
                for g, s in sorted(self.sentiment_by_genre.items())
            },
            "sentiment_by_year": {str(y): v for y, v in sorted(self.sentiment_by_year.items())},
        }


def _quartiles(values: list[float]) -> tuple[float, float]:
    """Linear-interpolation quartiles (same convention as numpy's default)."""
    xs = sorted(values)
    n = len(xs)

    def q(p: float) -> float:
        pos = p * (n - 1)
        lo = int(pos)
        hi = min(lo + 1, n - 1)
        frac = pos - lo
        return xs[lo] * (1 - frac) + xs[hi] * frac

    return q(0.25), q(0.75)


def build_eda_report(
    dataset: CuratedDataset | Sequence[SongRecord],
    lexicon: dict[str, float],
    stopwords: frozenset[str] | set[str],
    top_k: int = 20,
) -> EdaReport:
    """Aggregate the EDA statistics over a dataset (must be non-empty)."""
    records = dataset.records if isinstance(dataset, CuratedDataset) else list(dataset)
    if not records:
        raise ValueError("cannot build an EDA report from an empty dataset")

    genre_counts = Counter(r.genre for r in records)

    scores = [sentiment_score(r.lyrics, lexicon) for r in records]

    by_genre_scores: dict[str, list[float]] = {}
    by_genre_words: dict[str, list[int]] = {}
    by_genre_chars: dict[str, list[int]] = {}
    by_year_scores: dict[int, list[float]] = {}
    for r, s in zip(records, scores):
        by_genre_scores.setdefault(r.genre, []).append(s)
        by_genre_words.setdefault(r.genre, []).append(word_count(r.lyrics))
        by_genre_chars.setdefault(r.genre, []).append(len(r.lyrics))
        by_year_scores.setdefault(r.year, []).append(s)

    sentiment_by_genre = {}
    for genre, vals in by_genre_scores.items():
        q1, q3 = _quartiles(vals)
        sentiment_by_genre[genre] = SentimentSummary(
            mean=sum(vals) / len(vals),
            median=median(vals),
            q1=q1,
            q3=q3,
            min=min(vals),
            max=max(vals),
            count=len(vals),
        )

    length_stats = {
        genre: {
            "mean_word_count": sum(by_genre_words[genre]) / len(by_genre_words[genre]),
            "mean_char_length": sum(by_genre_chars[genre]) / len(by_genre_chars[genre]),
        }
        for genre in by_genre_words
    }

    return EdaReport(
        genre_counts=dict(genre_counts),
        top_words={g: top_words(records, g, top_k, stopwords) for g in genre_counts},
        length_stats=length_stats,
        sentiment_by_genre=sentiment_by_genre,
        sentiment_by_year={y: sum(v) / len(v) for y, v in by_year_scores.items()},
        n_records=len(records),
    )


def write_eda_tables(report: EdaReport, outdir: str | Path) -> list[Path]:
    """Emit one CSV per report table plus a combined JSON summary."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    def table(name: str, header: list[str], rows: Iterable[Sequence]) -> None:
        path = outdir / name
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(header)
            writer.writerows(rows)
        written.append(path)

    table(
        "genre_counts.csv",
        ["genre", "count"],
        sorted(report.genre_counts.items()),
    )
    table(
        "top_words.csv",
        ["genre", "rank", "word", "count"],
        (
            (genre, rank, word, count)
            for genre, words in sorted(report.top_words.items())
            for rank, (word, count) in enumerate(words, start=1)
        ),
    )
    table(
        "length_stats.csv",
        ["genre", "mean_word_count", "mean_char_length"],
        (
            (g, f"{s['mean_word_count']:.4f}", f"{s['mean_char_length']:.4f}")
            for g, s in sorted(report.length_stats.items())
        ),
    )
    table(
        "sentiment_by_genre.csv",
        ["genre", "mean", "median", "q1", "q3", "min", "max", "count"],
        (
            (g, f"{s.mean:.6f}", f"{s.median:.6f}", f"{s.q1:.6f}", f"{s.q3:.6f}", f"{s.min:.6f}", f"{s.max:.6f}", s.count)
            for g, s in sorted(report.sentiment_by_genre.items())
        ),
    )
    table(
        "sentiment_by_year.csv",
        ["year", "mean_sentiment"],
        ((y, f"{v:.6f}") for y, v in sorted(report.sentiment_by_year.items())),
    )

    summary = outdir / "eda_summary.json"
    summary.write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
    written.append(summary)
    return written
